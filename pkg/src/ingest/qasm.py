"""
OpenQASM 2.0 Ingestion

Parses the supported OpenQASM 2.0 subset into CircuitIR: the header,
``include "qelib1.inc"``, one quantum register, at most one classical
register, the gates h x y z s t cx ccx swap and ``measure``.

The program is split into ``;``-terminated statements and each statement is
matched against a pyparsing grammar, so errors carry the line where the
statement starts.
"""

import re
from typing import Dict, List, Optional, Set, Tuple

import pyparsing as pp

from quantum.circuit import CircuitError, CircuitIR, GateKind, GateOp

SINGLE_QUBIT_GATES = {
    "h": GateKind.H,
    "x": GateKind.X,
    "y": GateKind.Y,
    "z": GateKind.Z,
    "s": GateKind.S,
    "t": GateKind.T,
}
MULTI_QUBIT_GATES = {"cx": 2, "ccx": 3, "swap": 2}
UNSUPPORTED_STATEMENTS = {"gate", "opaque", "if", "reset", "barrier"}


class QasmError(Exception):
    """Raised for programs outside the supported subset"""

    def __init__(self, code: str, message: str, line: Optional[int] = None, construct: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.line = line
        self.construct = construct

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.code}: {self.message}{where}"


# Grammar
_IDENT = pp.Word(pp.alphas, pp.alphanums + "_")
_INT = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))
_ARG = pp.Group(_IDENT("reg") + pp.Optional(pp.Suppress("[") + _INT("index") + pp.Suppress("]")))

_HEADER = pp.Keyword("OPENQASM")("stmt") + pp.Regex(r"\d+(\.\d+)?")("version")
_INCLUDE = pp.Keyword("include")("stmt") + pp.QuotedString('"')("path")
_QREG = pp.Keyword("qreg")("stmt") + _IDENT("reg") + pp.Suppress("[") + _INT("size") + pp.Suppress("]")
_CREG = pp.Keyword("creg")("stmt") + _IDENT("reg") + pp.Suppress("[") + _INT("size") + pp.Suppress("]")
_MEASURE = pp.Keyword("measure")("stmt") + _ARG("src") + pp.Suppress("->") + _ARG("dst")
_GATE = (
    _IDENT("name")
    + pp.Optional(pp.Regex(r"\([^)]*\)"))("params")
    + pp.Group(_ARG + pp.ZeroOrMore(pp.Suppress(",") + _ARG))("args")
)
_STATEMENT = _HEADER | _INCLUDE | _QREG | _CREG | _MEASURE | _GATE


def _statements(text: str) -> List[Tuple[int, str]]:
    """Split into (line, statement) pairs, comments removed"""
    without_comments = "\n".join(line.split("//", 1)[0] for line in text.splitlines())
    statements = []
    line = 1
    for chunk in without_comments.split(";")[:-1]:
        leading = len(chunk) - len(chunk.lstrip())
        start_line = line + chunk[:leading].count("\n")
        line += chunk.count("\n")
        if chunk.strip():
            statements.append((start_line, " ".join(chunk.split())))

    trailing = without_comments.split(";")[-1]
    if trailing.strip():
        leading = len(trailing) - len(trailing.lstrip())
        raise QasmError("E_QASM_SYNTAX", f"statement '{trailing.strip()}' is missing ';'", line + trailing[:leading].count("\n"))
    return statements


class _Program:
    """Accumulates registers and ops while statements are read"""

    def __init__(self):
        self.qreg: Optional[Tuple[str, int]] = None
        self.creg: Optional[Tuple[str, int]] = None
        self.ops: List[GateOp] = []
        self.measured: Set[int] = set()
        self.seen_header = False

    def qubit_indices(self, arg: pp.ParseResults, line: int) -> List[int]:
        if self.qreg is None:
            raise QasmError("E_QASM_SYNTAX", "gate used before 'qreg' declaration", line)
        name, size = self.qreg
        if arg["reg"] != name:
            raise QasmError("E_QASM_SYNTAX", f"unknown quantum register '{arg['reg']}'", line)
        if "index" not in arg:
            return list(range(size))
        index = arg["index"]
        if index >= size:
            raise QasmError("E_QASM_INDEX", f"index {index} out of range for {name}[{size}]", line)
        return [index]

    def clbit_indices(self, arg: pp.ParseResults, line: int) -> List[int]:
        if self.creg is None:
            raise QasmError("E_QASM_SYNTAX", "measure used before 'creg' declaration", line)
        name, size = self.creg
        if arg["reg"] != name:
            raise QasmError("E_QASM_SYNTAX", f"unknown classical register '{arg['reg']}'", line)
        if "index" not in arg:
            return list(range(size))
        index = arg["index"]
        if index >= size:
            raise QasmError("E_QASM_INDEX", f"index {index} out of range for {name}[{size}]", line)
        return [index]

    def add_op(self, op: GateOp, line: int) -> None:
        after_measure = sorted(op.qubits & self.measured)
        if after_measure:
            raise QasmError("E_QASM_UNSUPPORTED", f"gate on qubit {after_measure[0]} after it was measured (mid-circuit measurement)", line, "mid-circuit measurement")
        self.ops.append(op)


def _read_statement(program: _Program, line: int, statement: str) -> None:
    keyword = re.split(r"[\s(]", statement, 1)[0]
    if not program.seen_header and keyword != "OPENQASM":
        raise QasmError("E_QASM_SYNTAX", "program must start with 'OPENQASM 2.0;'", line)
    if keyword in UNSUPPORTED_STATEMENTS:
        raise QasmError("E_QASM_UNSUPPORTED", f"'{keyword}' statements are not supported", line, keyword)

    try:
        parsed = _STATEMENT.parse_string(statement, parse_all=True)
    except pp.ParseException as e:
        raise QasmError("E_QASM_SYNTAX", f"cannot parse '{statement}': {e.msg}", line)

    stmt = parsed.get("stmt")
    if stmt == "OPENQASM":
        if program.seen_header:
            raise QasmError("E_QASM_SYNTAX", "duplicate OPENQASM header", line)
        if parsed["version"] not in ("2", "2.0"):
            raise QasmError("E_QASM_UNSUPPORTED", f"OPENQASM {parsed['version']} is not supported, only 2.0", line, f"OPENQASM {parsed['version']}")
        program.seen_header = True
    elif stmt == "include":
        if parsed["path"] != "qelib1.inc":
            raise QasmError("E_QASM_UNSUPPORTED", f"include \"{parsed['path']}\" is not supported", line, "include")
    elif stmt == "qreg":
        if program.qreg is not None:
            raise QasmError("E_QASM_UNSUPPORTED", "multiple quantum registers are not supported", line, "qreg")
        if parsed["size"] < 1:
            raise QasmError("E_QASM_SYNTAX", "quantum register must have at least one qubit", line)
        program.qreg = (parsed["reg"], parsed["size"])
    elif stmt == "creg":
        if program.creg is not None:
            raise QasmError("E_QASM_UNSUPPORTED", "multiple classical registers are not supported", line, "creg")
        program.creg = (parsed["reg"], parsed["size"])
    elif stmt == "measure":
        qubits = program.qubit_indices(parsed["src"], line)
        clbits = program.clbit_indices(parsed["dst"], line)
        if len(qubits) != len(clbits):
            raise QasmError("E_QASM_INDEX", f"measure maps {len(qubits)} qubit(s) onto {len(clbits)} bit(s)", line)
        program.measured.update(qubits)
    else:
        _read_gate(program, line, parsed)


def _read_gate(program: _Program, line: int, parsed: pp.ParseResults) -> None:
    name = parsed["name"]
    if parsed.get("params"):
        raise QasmError("E_QASM_UNSUPPORTED", f"parametric gate '{name}{parsed['params']}' is not supported", line, name)
    args = list(parsed["args"])

    if name in SINGLE_QUBIT_GATES:
        if len(args) != 1:
            raise QasmError("E_QASM_SYNTAX", f"'{name}' takes 1 operand, got {len(args)}", line)
        for qubit in program.qubit_indices(args[0], line):
            program.add_op(GateOp(SINGLE_QUBIT_GATES[name], (qubit,)), line)
        return

    if name not in MULTI_QUBIT_GATES:
        raise QasmError("E_QASM_UNSUPPORTED", f"gate '{name}' is not supported", line, name)

    arity = MULTI_QUBIT_GATES[name]
    if len(args) != arity:
        raise QasmError("E_QASM_SYNTAX", f"'{name}' takes {arity} operands, got {len(args)}", line)
    if any("index" not in arg for arg in args):
        raise QasmError("E_QASM_UNSUPPORTED", f"register broadcast on '{name}' is not supported", line, f"{name} broadcast")
    qubits = [program.qubit_indices(arg, line)[0] for arg in args]
    if len(set(qubits)) != len(qubits):
        raise QasmError("E_QASM_SYNTAX", f"'{name}' has repeated qubit operands", line)

    if name == "swap":
        op = GateOp(GateKind.SWAP, tuple(qubits))
    else:
        op = GateOp(GateKind.X, (qubits[-1],), frozenset(qubits[:-1]))
    program.add_op(op, line)


def parse_qasm(text: str) -> CircuitIR:
    """Parse an OpenQASM 2.0 program of the supported subset"""
    program = _Program()
    for line, statement in _statements(text):
        _read_statement(program, line, statement)

    if not program.seen_header:
        raise QasmError("E_QASM_SYNTAX", "program must start with 'OPENQASM 2.0;'", 1)
    if program.qreg is None:
        raise QasmError("E_QASM_SYNTAX", "program declares no quantum register", None)
    try:
        return CircuitIR(program.qreg[1], tuple(program.ops), frozenset(program.measured))
    except CircuitError as e:
        raise QasmError("E_QASM_SYNTAX", e.message)
