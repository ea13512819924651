"""
Statevector simulator.

Dense amplitude vector over ``2**n`` basis states, little-endian qubit order.
Every call allocates its own buffer, so concurrent callers share nothing but
the immutable circuit.
"""

from math import pi, sqrt
from typing import Dict, Optional

import numpy as np

from quantum.circuit import CircuitError, CircuitIR, GateKind, GateOp
from quantum.prng import Xoshiro256StarStar
from quantum.results import ExecutionResult

MAX_SIMULATED_QUBITS = 24

_SQRT2_INV = 1 / sqrt(2)
GATE_MATRICES: Dict[GateKind, np.ndarray] = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * pi / 4)]], dtype=complex),
}


def _check_size(circuit: CircuitIR, max_qubits: Optional[int]) -> None:
    limit = MAX_SIMULATED_QUBITS if max_qubits is None else max_qubits
    if circuit.num_qubits > limit:
        raise CircuitError("E_TOO_LARGE", f"circuit has {circuit.num_qubits} qubits, simulator ceiling is {limit}")


def _axis(qubit: int, num_qubits: int) -> int:
    # C-order reshape puts the most significant bit on axis 0
    return num_qubits - 1 - qubit


def apply_gate(state: np.ndarray, op: GateOp, num_qubits: int) -> np.ndarray:
    """Apply one op in place on basis components whose controls are satisfied"""
    tensor = state.reshape((2,) * num_qubits)
    index = [slice(None)] * num_qubits
    for qubit in op.pos_controls:
        index[_axis(qubit, num_qubits)] = 1
    for qubit in op.neg_controls:
        index[_axis(qubit, num_qubits)] = 0

    if op.kind is GateKind.SWAP:
        a, b = (_axis(t, num_qubits) for t in op.targets)
        i01, i10 = list(index), list(index)
        i01[a], i01[b] = 0, 1
        i10[a], i10[b] = 1, 0
        upper = tensor[tuple(i01)].copy()
        tensor[tuple(i01)] = tensor[tuple(i10)]
        tensor[tuple(i10)] = upper
    else:
        matrix = GATE_MATRICES[op.kind]
        target = _axis(op.targets[0], num_qubits)
        i0, i1 = list(index), list(index)
        i0[target], i1[target] = 0, 1
        a0 = tensor[tuple(i0)].copy()
        a1 = tensor[tuple(i1)].copy()
        tensor[tuple(i0)] = matrix[0, 0] * a0 + matrix[0, 1] * a1
        tensor[tuple(i1)] = matrix[1, 0] * a0 + matrix[1, 1] * a1

    return tensor.reshape(-1)


def run_statevector(circuit: CircuitIR, max_qubits: Optional[int] = None) -> np.ndarray:
    """Final amplitudes of ``circuit`` applied to |0...0>"""
    _check_size(circuit, max_qubits)
    state = np.zeros(2 ** circuit.num_qubits, dtype=complex)
    state[0] = 1.0
    for op in circuit.ops:
        state = apply_gate(state, op, circuit.num_qubits)
    return state


def probabilities(circuit: CircuitIR, max_qubits: Optional[int] = None) -> np.ndarray:
    """Outcome distribution over the measured qubits.

    Entry ``k`` is the probability of the outcome whose j-th bit is the value
    of the j-th smallest measured qubit; unmeasured qubits are summed out.
    """
    measured = sorted(circuit.measured)
    if not measured:
        raise CircuitError("E_INVALID_CIRCUIT", "circuit measures no qubits")
    n = circuit.num_qubits
    state = run_statevector(circuit, max_qubits)
    probs = (np.abs(state) ** 2).reshape((2,) * n)
    summed_axes = tuple(_axis(q, n) for q in range(n) if q not in circuit.measured)
    if summed_axes:
        probs = probs.sum(axis=summed_axes)
    # Remaining axes run from the highest measured qubit down to the lowest
    return probs.reshape(-1)


def format_outcome(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def sample_counts(circuit: CircuitIR, shots: int, seed: int, max_qubits: Optional[int] = None,
                  backend_id: str = "local-simulator") -> ExecutionResult:
    """Draw ``shots`` outcomes with xoshiro256** seeded by ``seed``.

    One double per shot, mapped through the cumulative distribution in
    outcome-index order. Keys are returned in lexicographic order.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = probabilities(circuit, max_qubits)
    cumulative = np.cumsum(probs)
    total = cumulative[-1]

    rng = Xoshiro256StarStar(seed)
    draws = np.fromiter((rng.next_double() for _ in range(shots)), dtype=float, count=shots)
    outcomes = np.searchsorted(cumulative, draws * total, side='right')
    last_possible = int(np.flatnonzero(probs > 0)[-1])
    outcomes = np.minimum(outcomes, last_possible)

    width = len(circuit.measured)
    tallies = np.bincount(outcomes, minlength=len(probs))
    counts = {
        format_outcome(index, width): int(tallies[index])
        for index in np.flatnonzero(tallies)
    }
    return ExecutionResult(counts=counts, shots=shots, seed=seed, backend_id=backend_id)
