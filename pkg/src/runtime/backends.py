"""
Execution Backends

The provider seam of the generated services. Every backend turns
(circuit, shots, seed) into an ExecutionResult whose counts sum to shots.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, Mapping, Optional

import numpy as np

from quantum.circuit import CircuitError, CircuitIR
from quantum.prng import Xoshiro256StarStar
from quantum.results import ExecutionResult
from quantum.simulator import MAX_SIMULATED_QUBITS, sample_counts

logger = logging.getLogger(__name__)

LOCAL_SIMULATOR = "local-simulator"
MOCK_REMOTE = "mock-remote"


class BackendError(Exception):
    """Raised when a backend cannot execute a circuit; surfaces as HTTP 502"""

    def __init__(self, backend_id: str, message: str):
        super().__init__(f"{backend_id}: {message}")
        self.code = "E_BACKEND"
        self.backend_id = backend_id
        self.message = message


class UnknownBackendError(Exception):
    def __init__(self, backend_id: str, available=()):
        known = ", ".join(sorted(available)) or "none"
        super().__init__(f"backend '{backend_id}' is not configured (available: {known})")
        self.code = "E_UNKNOWN_BACKEND"
        self.backend_id = backend_id
        self.message = str(self)


class Backend(ABC):
    """Executes circuits for a service endpoint"""

    id: str
    max_qubits: int

    @abstractmethod
    def execute(self, circuit: CircuitIR, shots: int, seed: int) -> ExecutionResult:
        """Run ``circuit`` (with a non-empty measured set) for ``shots`` shots"""


class LocalSimulatorBackend(Backend):
    """Statevector simulation in the serving process"""

    id = LOCAL_SIMULATOR

    def __init__(self, max_qubits: int = MAX_SIMULATED_QUBITS):
        self.max_qubits = max_qubits

    def execute(self, circuit: CircuitIR, shots: int, seed: int) -> ExecutionResult:
        try:
            return sample_counts(circuit, shots, seed, self.max_qubits, backend_id=self.id)
        except CircuitError as e:
            raise BackendError(self.id, e.message)


class MockRemoteBackend(Backend):
    """Stand-in for a cloud provider.

    Optionally requires a credential, optionally fails every call, and
    samples either from canned outcome weights or from the ideal
    distribution of the circuit.
    """

    id = MOCK_REMOTE

    def __init__(self, credential: Optional[str] = None, required_credential: Optional[str] = None,
                 fail_message: Optional[str] = None, canned: Optional[Mapping[str, float]] = None,
                 max_qubits: int = MAX_SIMULATED_QUBITS):
        self.max_qubits = max_qubits
        self.required_credential = required_credential
        self.fail_message = fail_message
        self.canned = dict(sorted(canned.items())) if canned else None
        self._credential = credential

    def __repr__(self) -> str:
        return f"MockRemoteBackend(authenticated={self._credential is not None}, failing={self.fail_message is not None})"

    def execute(self, circuit: CircuitIR, shots: int, seed: int) -> ExecutionResult:
        if self.required_credential and not self._credential:
            raise BackendError(self.id, f"provider rejected the job: credential '{self.required_credential}' was not supplied")
        if self.fail_message:
            raise BackendError(self.id, self.fail_message)
        if self.canned is None:
            try:
                return sample_counts(circuit, shots, seed, self.max_qubits, backend_id=self.id)
            except CircuitError as e:
                raise BackendError(self.id, e.message)
        return self._sample_canned(circuit, shots, seed)

    def _sample_canned(self, circuit: CircuitIR, shots: int, seed: int) -> ExecutionResult:
        width = len(circuit.measured)
        outcomes = list(self.canned)
        if any(len(outcome) != width for outcome in outcomes):
            raise BackendError(self.id, f"canned outcomes do not match the {width} measured qubit(s)")

        cumulative = np.cumsum([self.canned[outcome] for outcome in outcomes])
        rng = Xoshiro256StarStar(seed)
        draws = np.fromiter((rng.next_double() for _ in range(shots)), dtype=float, count=shots)
        picks = np.minimum(np.searchsorted(cumulative, draws * cumulative[-1], side='right'), len(outcomes) - 1)
        tallies = np.bincount(picks, minlength=len(outcomes))
        counts = {outcomes[i]: int(tallies[i]) for i in np.flatnonzero(tallies)}
        return ExecutionResult(counts=counts, shots=shots, seed=seed, backend_id=self.id)


def build_backends(credentials: Optional[Mapping[str, str]] = None, config=None) -> Dict[str, Backend]:
    """Backends for one service instance; credentials are forwarded, never logged"""
    credentials = credentials or {}
    max_qubits = getattr(config, "MAX_QUBITS", MAX_SIMULATED_QUBITS)
    required = getattr(config, "MOCK_REMOTE_CREDENTIAL", None)
    backends: Dict[str, Backend] = {
        LOCAL_SIMULATOR: LocalSimulatorBackend(max_qubits),
        MOCK_REMOTE: MockRemoteBackend(
            credential=credentials.get(required) if required else credentials.get(MOCK_REMOTE),
            required_credential=required,
            fail_message=getattr(config, "MOCK_REMOTE_FAIL", None),
            max_qubits=max_qubits,
        ),
    }
    logger.debug(f"Built backends {sorted(backends)} with {len(credentials)} credential(s)")
    return backends
