"""
Source Emitters

Turn CircuitIR into source text: an OpenQASM 2.0 program and a Qiskit-style
service function. Both outputs are deterministic.

Only controls that OpenQASM's qelib1 names directly can be written out:
one positive control on X (``cx``) and two (``ccx``). Anything else is still
executable on the simulator but raises E_UNREPRESENTABLE here.
"""

from pathlib import Path
from typing import List, Tuple

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from quantum.circuit import CircuitIR, GateKind, GateOp

GENERATOR_VERSION = "1.0.0"

CONTROLLED_X_NAMES = {0: "x", 1: "cx", 2: "ccx"}

_TEMPLATES = Environment(
    loader=FileSystemLoader(str(Path(__file__).parent / "templates")),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)


class EmitError(Exception):
    """Raised when a circuit has no textual form in the emitted subset"""

    def __init__(self, message: str, op_index: int):
        super().__init__(message)
        self.code = "E_UNREPRESENTABLE"
        self.message = message
        self.op_index = op_index

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _gate_call(op: GateOp, position: int) -> Tuple[str, List[int]]:
    """(gate name, operand qubits) for one op, controls first"""
    if op.neg_controls:
        raise EmitError(f"op {position} ({op.kind.value}) has negative controls", position)

    if op.kind is GateKind.SWAP:
        if op.pos_controls:
            raise EmitError(f"op {position} is a controlled swap", position)
        return "swap", list(op.targets)

    controls = sorted(op.pos_controls)
    if not controls:
        return op.kind.value.lower(), list(op.targets)
    if op.kind is GateKind.X and len(controls) in CONTROLLED_X_NAMES:
        return CONTROLLED_X_NAMES[len(controls)], controls + list(op.targets)
    raise EmitError(f"op {position} is a {op.kind.value} gate with {len(controls)} control(s)", position)


def _gate_calls(circuit: CircuitIR) -> List[Tuple[str, List[int]]]:
    return [_gate_call(op, position) for position, op in enumerate(circuit.ops)]


def _classical_layout(circuit: CircuitIR) -> Tuple[int, List[Tuple[int, int]]]:
    """Classical register size and (qubit, bit) pairs, ascending by qubit"""
    measured = sorted(circuit.measured)
    size = len(measured) or circuit.num_qubits
    return size, [(qubit, bit) for bit, qubit in enumerate(measured)]


def emit_qasm(circuit: CircuitIR) -> str:
    calls = _gate_calls(circuit)
    creg_size, measures = _classical_layout(circuit)

    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{circuit.num_qubits}];",
        f"creg c[{creg_size}];",
    ]
    for name, qubits in calls:
        lines.append(f"{name} {','.join(f'q[{q}]' for q in qubits)};")
    for qubit, bit in measures:
        lines.append(f"measure q[{qubit}] -> c[{bit}];")
    return "\n".join(lines) + "\n"


def emit_qiskit(circuit: CircuitIR, operation_id: str, fingerprint: str = "", default_shots: int = 1024) -> str:
    """Qiskit source defining ``<operation_id>(shots)``; an artifact, never executed here"""
    calls = [f"{name}({', '.join(str(q) for q in qubits)})" for name, qubits in _gate_calls(circuit)]
    # Qiskit returns no counts for an unmeasured circuit
    measured = circuit.with_implicit_measurement()
    num_clbits, measures = _classical_layout(measured)

    template = _TEMPLATES.get_template("qiskit_service.py.j2")
    return template.render(
        generator_version=GENERATOR_VERSION,
        fingerprint=fingerprint,
        operation_id=operation_id,
        default_shots=default_shots,
        num_qubits=circuit.num_qubits,
        num_clbits=num_clbits,
        calls=calls,
        measures=measures,
    )
