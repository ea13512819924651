"""
Circuit IR

Provider-neutral circuit representation shared by ingestion, code generation
and the execution backends. Instances are immutable and safe to share between
request handlers.

Qubit ``q`` is bit ``q`` of a basis-state index (little-endian): in count
bitstrings qubit 0 is the rightmost character.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Tuple


class CircuitError(Exception):
    """Raised for invalid circuits or circuits the simulator refuses"""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class GateKind(str, Enum):
    """Supported gate kinds"""
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    T = "T"
    SWAP = "SWAP"

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.SWAP else 1


@dataclass(frozen=True)
class GateOp:
    """One (optionally controlled) gate application"""
    kind: GateKind
    targets: Tuple[int, ...]
    pos_controls: FrozenSet[int] = frozenset()
    neg_controls: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'kind', GateKind(self.kind))
        object.__setattr__(self, 'targets', tuple(self.targets))
        object.__setattr__(self, 'pos_controls', frozenset(self.pos_controls))
        object.__setattr__(self, 'neg_controls', frozenset(self.neg_controls))

        if len(self.targets) != self.kind.arity:
            raise CircuitError("E_INVALID_CIRCUIT", f"{self.kind.value} takes {self.kind.arity} target(s), got {len(self.targets)}")
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError("E_INVALID_CIRCUIT", f"{self.kind.value} targets must be distinct")
        if self.pos_controls & self.neg_controls:
            raise CircuitError("E_INVALID_CIRCUIT", "a qubit cannot be both a positive and a negative control")
        if set(self.targets) & self.controls:
            raise CircuitError("E_INVALID_CIRCUIT", "targets and controls must be disjoint")

    @property
    def controls(self) -> FrozenSet[int]:
        return self.pos_controls | self.neg_controls

    @property
    def qubits(self) -> FrozenSet[int]:
        return frozenset(self.targets) | self.controls

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "targets": list(self.targets),
            "pos_controls": sorted(self.pos_controls),
            "neg_controls": sorted(self.neg_controls),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GateOp":
        return cls(
            kind=GateKind(data["kind"]),
            targets=tuple(data["targets"]),
            pos_controls=frozenset(data.get("pos_controls", ())),
            neg_controls=frozenset(data.get("neg_controls", ())),
        )


@dataclass(frozen=True)
class CircuitIR:
    """Qubit count, ordered gate operations and the measured-qubit set"""
    num_qubits: int
    ops: Tuple[GateOp, ...] = ()
    measured: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, 'ops', tuple(self.ops))
        object.__setattr__(self, 'measured', frozenset(self.measured))

        if not isinstance(self.num_qubits, int) or self.num_qubits < 1:
            raise CircuitError("E_INVALID_CIRCUIT", f"num_qubits must be a positive integer, got {self.num_qubits!r}")
        for position, op in enumerate(self.ops):
            out_of_range = [q for q in op.qubits if not 0 <= q < self.num_qubits]
            if out_of_range:
                raise CircuitError("E_INVALID_CIRCUIT", f"op {position} ({op.kind.value}) uses qubit(s) {sorted(out_of_range)} outside 0..{self.num_qubits - 1}")
        out_of_range = [q for q in self.measured if not 0 <= q < self.num_qubits]
        if out_of_range:
            raise CircuitError("E_INVALID_CIRCUIT", f"measured qubit(s) {sorted(out_of_range)} outside 0..{self.num_qubits - 1}")

    def with_implicit_measurement(self) -> "CircuitIR":
        """Measure every qubit when the circuit measures none"""
        if self.measured:
            return self
        return CircuitIR(self.num_qubits, self.ops, frozenset(range(self.num_qubits)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_qubits": self.num_qubits,
            "ops": [op.to_dict() for op in self.ops],
            "measured": sorted(self.measured),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CircuitIR":
        return cls(
            num_qubits=data["num_qubits"],
            ops=tuple(GateOp.from_dict(op) for op in data.get("ops", ())),
            measured=frozenset(data.get("measured", ())),
        )


# Expected-IR text form used by the fixture corpus:
#   qubits 2
#   measured 0,1
#   H 0 [] []
#   X 1 [0] []

def _join(indices: Iterable[int]) -> str:
    return ",".join(str(i) for i in sorted(indices))


def _split(text: str) -> List[int]:
    text = text.strip()
    return [int(part) for part in text.split(",")] if text else []


def circuit_to_text(circuit: CircuitIR) -> str:
    lines = [f"qubits {circuit.num_qubits}", f"measured {_join(circuit.measured)}".rstrip()]
    for op in circuit.ops:
        targets = ",".join(str(t) for t in op.targets)
        lines.append(f"{op.kind.value} {targets} [{_join(op.pos_controls)}] [{_join(op.neg_controls)}]")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> CircuitIR:
    num_qubits = None
    measured: List[int] = []
    ops: List[GateOp] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "qubits":
            num_qubits = int(rest)
        elif head == "measured":
            measured = _split(rest)
        else:
            target_text, _, control_text = rest.partition(" ")
            pos_text, _, neg_text = control_text.strip().partition(" ")
            ops.append(GateOp(
                kind=GateKind(head),
                targets=tuple(_split(target_text)),
                pos_controls=frozenset(_split(pos_text.strip("[]"))),
                neg_controls=frozenset(_split(neg_text.strip("[]"))),
            ))
    if num_qubits is None:
        raise CircuitError("E_INVALID_CIRCUIT", "IR text is missing the 'qubits' header")
    return CircuitIR(num_qubits, tuple(ops), frozenset(measured))
