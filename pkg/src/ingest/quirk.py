"""
Quirk Ingestion

Decodes Quirk share URLs (``...#circuit=<json>``) into a column grid and
lowers the grid into CircuitIR. Rows are wires: row ``r`` of every column is
qubit ``r``.
"""

import json
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple
from urllib.parse import quote, unquote

from quantum.circuit import CircuitIR, GateKind, GateOp

FRAGMENT_MARKER = "#circuit="

IDENTITY = "1"
POSITIVE_CONTROL = "•"
NEGATIVE_CONTROL = "◦"
SWAP = "Swap"
MEASURE = "Measure"

SINGLE_QUBIT_TOKENS = {
    "H": GateKind.H,
    "X": GateKind.X,
    "Y": GateKind.Y,
    "Z": GateKind.Z,
    "S": GateKind.S,
    "T": GateKind.T,
}
SUPPORTED_TOKENS = set(SINGLE_QUBIT_TOKENS) | {IDENTITY, POSITIVE_CONTROL, NEGATIVE_CONTROL, SWAP, MEASURE}


class QuirkError(Exception):
    """Raised when a Quirk URL or grid cannot be decoded or lowered"""

    def __init__(self, code: str, message: str, column: Optional[int] = None, row: Optional[int] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.column = column
        self.row = row

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class QuirkDocument:
    """Quirk column grid; each cell token is text"""
    cols: Tuple[Tuple[str, ...], ...]

    @property
    def num_rows(self) -> int:
        return max((len(col) for col in self.cols), default=0)


def _cell_token(cell: Any) -> str:
    # Quirk writes the identity as the integer 1
    if isinstance(cell, str):
        return cell
    if isinstance(cell, bool):
        return json.dumps(cell)
    if isinstance(cell, int):
        return str(cell)
    return json.dumps(cell, sort_keys=True, ensure_ascii=False)


def parse_quirk_json(text: str) -> QuirkDocument:
    """Decode raw Quirk JSON (``{"cols": [...]}``)"""
    try:
        data = json.loads(text)
    except (ValueError, TypeError, RecursionError) as e:
        raise QuirkError("E_BAD_JSON", f"circuit JSON is not parseable: {e}")

    if not isinstance(data, dict) or "cols" not in data:
        raise QuirkError("E_BAD_SHAPE", "circuit JSON must be an object with a 'cols' member")
    cols = data["cols"]
    if not isinstance(cols, list) or not all(isinstance(col, list) for col in cols):
        raise QuirkError("E_BAD_SHAPE", "'cols' must be a list of lists")

    try:
        return QuirkDocument(tuple(tuple(_cell_token(cell) for cell in col) for col in cols))
    except RecursionError:
        raise QuirkError("E_BAD_SHAPE", "circuit cells are nested too deeply")


def has_fragment(url: str) -> bool:
    return FRAGMENT_MARKER in url


def parse_quirk_url(url: str) -> QuirkDocument:
    """Decode the ``#circuit=`` fragment of a Quirk share URL"""
    _, marker, fragment = url.partition(FRAGMENT_MARKER)
    if not marker:
        raise QuirkError("E_NO_FRAGMENT", "URL has no '#circuit=' fragment")
    return parse_quirk_json(unquote(fragment.strip()))


def render_quirk_url(doc: QuirkDocument, base: str = "https://algassert.com/quirk") -> str:
    """Serialize a grid back into a share URL"""
    cols = [[1 if token == IDENTITY else token for token in col] for col in doc.cols]
    payload = json.dumps({"cols": cols}, separators=(",", ":"), ensure_ascii=False)
    return f"{base}{FRAGMENT_MARKER}{quote(payload, safe='')}"


def lower_quirk(doc: QuirkDocument) -> CircuitIR:
    """Lower a validated grid into CircuitIR"""
    num_qubits = max(doc.num_rows, 1)
    ops: List[GateOp] = []
    measured = set()

    for column_index, col in enumerate(doc.cols):
        pos_controls = {row for row, token in enumerate(col) if token == POSITIVE_CONTROL}
        neg_controls = {row for row, token in enumerate(col) if token == NEGATIVE_CONTROL}
        controls = pos_controls | neg_controls
        swaps = [row for row, token in enumerate(col) if token == SWAP]
        measures = [row for row, token in enumerate(col) if token == MEASURE]
        gates = [(row, SINGLE_QUBIT_TOKENS[token]) for row, token in enumerate(col) if token in SINGLE_QUBIT_TOKENS]

        for row, token in enumerate(col):
            if token not in SUPPORTED_TOKENS:
                raise QuirkError("E_UNSUPPORTED_GATE", f"unsupported gate '{token}' at column {column_index}, row {row}", column_index, row)

        if swaps and len(swaps) != 2:
            raise QuirkError("E_LONELY_SWAP", f"column {column_index} has {len(swaps)} 'Swap' cell(s), expected exactly 2", column_index, swaps[0])
        if controls and measures:
            raise QuirkError("E_UNSUPPORTED_GATE", f"controlled 'Measure' at column {column_index}, row {measures[0]}", column_index, measures[0])
        if controls and not gates and not swaps:
            raise QuirkError("E_CONTROL_ONLY_COLUMN", f"column {column_index} has controls but no target gate", column_index, min(controls))

        touched = controls | set(swaps) | {row for row, _ in gates}
        already_measured = sorted(touched & measured)
        if already_measured:
            row = already_measured[0]
            raise QuirkError("E_OP_AFTER_MEASURE", f"column {column_index} acts on qubit {row} after it was measured", column_index, row)

        for row, kind in gates:
            ops.append(GateOp(kind, (row,), frozenset(pos_controls), frozenset(neg_controls)))
        if swaps:
            ops.append(GateOp(GateKind.SWAP, tuple(swaps), frozenset(pos_controls), frozenset(neg_controls)))
        measured.update(measures)

    return CircuitIR(num_qubits, tuple(ops), frozenset(measured))
