"""
Endpoint Execution

Resolves a run request against a manifest entry and executes it on the
entry's backend.
"""

import secrets
import time
from typing import Mapping

from codegen.bundle import ManifestEntry
from quantum.results import ExecutionResult
from runtime.backends import Backend, BackendError, UnknownBackendError
from schemas.api_schemas import RunRequest
from utils.logger import log_execution_event


def fresh_seed() -> int:
    return secrets.randbits(64)


def execute_endpoint(entry: ManifestEntry, request: RunRequest, backends: Mapping[str, Backend]) -> ExecutionResult:
    """Run one request. An absent seed is drawn fresh and reported back."""
    backend = backends.get(entry.backend)
    if backend is None:
        raise UnknownBackendError(entry.backend, backends)

    shots = request.shots if request.shots is not None else entry.default_shots
    seed = request.seed if request.seed is not None else fresh_seed()
    circuit = entry.circuit.with_implicit_measurement()

    start_time = time.time()
    try:
        if circuit.num_qubits > backend.max_qubits:
            raise BackendError(backend.id, f"circuit has {circuit.num_qubits} qubits, backend supports {backend.max_qubits}")
        result = backend.execute(circuit, shots, seed)
    except BackendError:
        log_execution_event(entry.operation_id, backend.id, shots, seed, time.time() - start_time, False)
        raise

    log_execution_event(entry.operation_id, backend.id, shots, seed, time.time() - start_time, True)
    return result
