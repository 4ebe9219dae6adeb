"""wQasm: an OpenQASM 3 subset whose statements carry FPQA annotations.

Each annotation sits on its own line, starting with ``@``, and belongs to the
next statement. Canonical text uses one statement per line and renders
every float with six decimals, so ``emit(parse(text)) == text`` for emitted
files.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Union

from .circuit import ARITY, NUM_PARAMS, LogicalCircuit, LogicalGate
from .device import (
    AodInit,
    AodTrap,
    Bind,
    FpqaInstruction,
    RamanGlobal,
    RamanLocal,
    Rydberg,
    Shuttle,
    SlmInit,
    SlmTrap,
    Transfer,
)
from .program import PulseProgram

VERSION = "3.0"
FLOAT_TOL = 1e-6


class WqasmSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class OpaqueAnnotation:
    """An annotation keyword this toolkit does not interpret, kept verbatim."""

    keyword: str
    text: str = ""


Annotation = Union[FpqaInstruction, OpaqueAnnotation]


@dataclass(frozen=True)
class Statement:
    kind: str  # "gate" | "measure" | "barrier"
    gate: LogicalGate | None = None
    qubits: tuple[int, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    line: int = field(default=0, compare=False)
    """Source line of the first annotation (or the statement itself); 0 if not parsed."""


@dataclass(frozen=True)
class WqasmProgram:
    num_qubits: int
    statements: tuple[Statement, ...] = ()
    version: str = VERSION
    register: str = "q"

    def annotations(self) -> list[Annotation]:
        return [a for s in self.statements for a in s.annotations]

    def instructions(self) -> list[FpqaInstruction]:
        return [a for a in self.annotations() if not isinstance(a, OpaqueAnnotation)]


# --- building from compiler output -------------------------------------------


def from_pulse_program(program: PulseProgram, measure: bool = True) -> WqasmProgram:
    """Attach each instruction to the first gate it realizes, or to the next statement."""
    statements: list[Statement] = []
    pending: list[Annotation] = []
    for step in program.steps:
        pending.append(step.instruction)
        for i, gate in enumerate(step.gates):
            statements.append(Statement("gate", gate, gate.qubits, tuple(pending) if i == 0 else ()))
            if i == 0:
                pending = []
    if measure:
        for q in range(program.num_qubits):
            statements.append(Statement("measure", None, (q,), tuple(pending)))
            pending = []
    if pending:
        statements.append(Statement("barrier", None, (), tuple(pending)))
    return WqasmProgram(program.num_qubits, tuple(statements))


def strip_annotations(prog: WqasmProgram) -> LogicalCircuit:
    """The logical gate sequence, ignoring annotations, measures and barriers."""
    return LogicalCircuit(prog.num_qubits, tuple(s.gate for s in prog.statements if s.kind == "gate"))


def without_annotations(prog: WqasmProgram) -> WqasmProgram:
    return WqasmProgram(
        prog.num_qubits,
        tuple(Statement(s.kind, s.gate, s.qubits) for s in prog.statements),
        prog.version,
        prog.register,
    )


# --- emit -----------------------------------------------------------------------


def _f(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


def emit_annotation(a: Annotation) -> str:
    if isinstance(a, SlmInit):
        return "@slm [" + ", ".join(f"({_f(x)}, {_f(y)})" for x, y in a.positions) + "]"
    if isinstance(a, AodInit):
        return "@aod [" + ", ".join(map(_f, a.xs)) + "] [" + ", ".join(map(_f, a.ys)) + "]"
    if isinstance(a, Bind):
        if isinstance(a.trap, SlmTrap):
            return f"@bind q{a.qubit} slm {a.trap.index}"
        return f"@bind q{a.qubit} aod {a.trap.col} {a.trap.row}"
    if isinstance(a, Transfer):
        return f"@transfer {a.slm_index} ({a.col}, {a.row})"
    if isinstance(a, Shuttle):
        return f"@shuttle {a.axis} {a.index} {_f(a.offset)}"
    if isinstance(a, RamanLocal):
        return f"@raman local q{a.qubit} {_f(a.tx)} {_f(a.ty)} {_f(a.tz)}"
    if isinstance(a, RamanGlobal):
        return f"@raman global {_f(a.tx)} {_f(a.ty)} {_f(a.tz)}"
    if isinstance(a, Rydberg):
        return "@rydberg"
    if isinstance(a, OpaqueAnnotation):
        return f"@{a.keyword} {a.text}".rstrip()
    raise TypeError(f"not an annotation: {a!r}")


def emit_statement(s: Statement, reg: str = "q") -> str:
    refs = ", ".join(f"{reg}[{q}]" for q in s.qubits)
    if s.kind == "measure":
        return f"measure {refs};"
    if s.kind == "barrier":
        return f"barrier {refs};" if refs else "barrier;"
    g = s.gate
    params = "(" + ", ".join(_f(p) for p in g.params) + ")" if g.params else ""
    return f"{g.kind}{params} {refs};"


def emit(prog: WqasmProgram, annotations: bool = True) -> str:
    lines = [f"OPENQASM {prog.version};"]
    if prog.num_qubits or prog.statements:
        lines.append(f"qubit[{prog.num_qubits}] {prog.register};")
    for s in prog.statements:
        if annotations:
            lines.extend(emit_annotation(a) for a in s.annotations)
        lines.append(emit_statement(s, prog.register))
    return "\n".join(lines) + "\n"


# --- parse ----------------------------------------------------------------------

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_ANNOT_KW = re.compile(r"@(" + _IDENT + r")(.*)$")
_VERSION = re.compile(r"OPENQASM\s+(\d+(?:\.\d+)?)\s*;$")
_QUBIT = re.compile(r"qubit\s*\[\s*(\d+)\s*\]\s*(" + _IDENT + r")\s*;$")
_GATE = re.compile(r"(" + _IDENT + r")\s*(?:\((.*?)\))?\s*(.*?)\s*;$")

_ANNOTATIONS = {
    "slm": re.compile(r"\[(.*)\]$"),
    "aod": re.compile(r"\[([^\]]*)\]\s*\[([^\]]*)\]$"),
    "bind": re.compile(r"q(\d+)\s+(?:slm\s+(\d+)|aod\s+(\d+)\s+(\d+))$"),
    "transfer": re.compile(r"(\d+)\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)$"),
    "shuttle": re.compile(r"(row|column)\s+(\d+)\s+(" + _NUM + r")$"),
    "raman": re.compile(
        r"(?:local\s+q(\d+)|global)\s+(" + _NUM + r")\s+(" + _NUM + r")\s+(" + _NUM + r")$"
    ),
    "rydberg": re.compile(r"$"),
}


def _floats(text: str, line: int, col: int) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        part = part.strip()
        if not re.fullmatch(_NUM, part):
            raise WqasmSyntaxError(f"expected a number, got {part!r}", line, col)
        out.append(float(part))
    return tuple(out)


def parse_annotation(body: str, line: int = 1, col: int = 1) -> Annotation:
    """Parse one annotation line (starting with ``@``)."""
    m = _ANNOT_KW.match(body)
    if not m:
        raise WqasmSyntaxError("malformed annotation", line, col)
    kw, rest = m.group(1), m.group(2).strip()
    arg_col = col + body.index(m.group(2)) + (len(m.group(2)) - len(m.group(2).lstrip()))
    if kw not in _ANNOTATIONS:
        return OpaqueAnnotation(kw, rest)
    am = _ANNOTATIONS[kw].match(rest)
    if not am:
        raise WqasmSyntaxError(f"bad arguments for @{kw}: {rest!r}", line, arg_col)
    if kw == "slm":
        inner = am.group(1).strip()
        if not inner:
            return SlmInit(())
        pts = re.fullmatch(
            r"\(\s*(" + _NUM + r")\s*,\s*(" + _NUM + r")\s*\)(?:\s*,\s*\(\s*" + _NUM + r"\s*,\s*" + _NUM + r"\s*\))*",
            inner,
        )
        if not pts:
            raise WqasmSyntaxError("@slm expects a list of (x, y) pairs", line, arg_col)
        pairs = re.findall(r"\(\s*(" + _NUM + r")\s*,\s*(" + _NUM + r")\s*\)", inner)
        return SlmInit(tuple((float(x), float(y)) for x, y in pairs))
    if kw == "aod":
        return AodInit(_floats(am.group(1), line, arg_col), _floats(am.group(2), line, arg_col))
    if kw == "bind":
        q = int(am.group(1))
        if am.group(2) is not None:
            return Bind(q, SlmTrap(int(am.group(2))))
        return Bind(q, AodTrap(row=int(am.group(4)), col=int(am.group(3))))
    if kw == "transfer":
        return Transfer(int(am.group(1)), row=int(am.group(3)), col=int(am.group(2)))
    if kw == "shuttle":
        return Shuttle(am.group(1), int(am.group(2)), float(am.group(3)))
    if kw == "raman":
        angles = (float(am.group(2)), float(am.group(3)), float(am.group(4)))
        if am.group(1) is not None:
            return RamanLocal(int(am.group(1)), *angles)
        return RamanGlobal(*angles)
    return Rydberg()


def _qubit_refs(text: str, reg: str, n: int, line: int, col: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(","):
        m = re.fullmatch(r"\s*(" + _IDENT + r")\s*\[\s*(\d+)\s*\]\s*", part)
        if not m:
            raise WqasmSyntaxError(f"expected a qubit reference, got {part.strip()!r}", line, col)
        if m.group(1) != reg:
            raise WqasmSyntaxError(f"unknown register {m.group(1)!r}", line, col)
        q = int(m.group(2))
        if q >= n:
            raise WqasmSyntaxError(f"qubit index {q} out of range for {reg}[{n}]", line, col)
        out.append(q)
    return tuple(out)


def parse(text: str) -> WqasmProgram:
    version = None
    num_qubits = None
    reg = "q"
    statements: list[Statement] = []
    pending: list[Annotation] = []
    pending_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        code = raw.split("//", 1)[0]
        stripped = code.strip()
        if not stripped:
            continue
        col = len(code) - len(code.lstrip()) + 1
        if version is None:
            m = _VERSION.match(stripped)
            if not m:
                raise WqasmSyntaxError("expected 'OPENQASM <version>;' header", lineno, col)
            version = m.group(1)
            continue
        if stripped.startswith("@"):
            if num_qubits is None:
                raise WqasmSyntaxError("annotation before qubit declaration", lineno, col)
            pending.append(parse_annotation(stripped, lineno, col))
            pending_line = pending_line or lineno
            continue
        if stripped.startswith("qubit"):
            m = _QUBIT.match(stripped)
            if not m:
                raise WqasmSyntaxError("malformed qubit declaration", lineno, col)
            if num_qubits is not None:
                raise WqasmSyntaxError("only one qubit register is supported", lineno, col)
            num_qubits, reg = int(m.group(1)), m.group(2)
            continue
        if num_qubits is None:
            raise WqasmSyntaxError("statement before qubit declaration", lineno, col)
        st = _parse_statement(stripped, reg, num_qubits, lineno, col, tuple(pending))
        statements.append(replace(st, line=pending_line or lineno))
        pending, pending_line = [], 0
    if version is None:
        raise WqasmSyntaxError("missing 'OPENQASM' header", 1)
    if pending:
        raise WqasmSyntaxError("annotations not followed by a statement", pending_line)
    return WqasmProgram(num_qubits or 0, tuple(statements), version, reg)


def _parse_statement(
    text: str, reg: str, n: int, line: int, col: int, annotations: tuple[Annotation, ...]
) -> Statement:
    if text == "barrier;":
        return Statement("barrier", None, (), annotations)
    m = _GATE.match(text)
    if not m:
        raise WqasmSyntaxError(f"cannot parse statement {text!r}", line, col)
    name, params, args = m.group(1), m.group(2), m.group(3)
    arg_col = col + text.index(args) if args else col
    if name in ("measure", "barrier"):
        if params is not None:
            raise WqasmSyntaxError(f"{name} takes no parameters", line, col)
        qubits = _qubit_refs(args, reg, n, line, arg_col)
        if name == "measure" and len(qubits) != 1:
            raise WqasmSyntaxError("measure takes exactly one qubit", line, arg_col)
        return Statement(name, None, qubits, annotations)
    if name not in ARITY:
        raise WqasmSyntaxError(f"unknown gate {name!r}", line, col)
    values = _floats(params, line, col + len(name)) if params is not None else ()
    if len(values) != NUM_PARAMS.get(name, 0):
        raise WqasmSyntaxError(
            f"{name} takes {NUM_PARAMS.get(name, 0)} parameters, got {len(values)}", line, col + len(name)
        )
    qubits = _qubit_refs(args, reg, n, line, arg_col)
    if len(qubits) != ARITY[name]:
        raise WqasmSyntaxError(f"{name} acts on {ARITY[name]} qubits, got {len(qubits)}", line, arg_col)
    if len(set(qubits)) != len(qubits):
        raise WqasmSyntaxError(f"{name} qubits must be distinct", line, arg_col)
    return Statement("gate", LogicalGate(name, qubits, values), qubits, annotations)


# --- structural comparison ---------------------------------------------------------


def _close(a: float, b: float, tol: float) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def _values(obj) -> list:
    if isinstance(obj, (SlmInit,)):
        return [v for p in obj.positions for v in p]
    if isinstance(obj, AodInit):
        return list(obj.xs) + [None] + list(obj.ys)
    if isinstance(obj, Shuttle):
        return [obj.axis, obj.index, obj.offset]
    if isinstance(obj, (RamanLocal, RamanGlobal)):
        return [getattr(obj, "qubit", None), obj.tx, obj.ty, obj.tz]
    return [obj]


def annotations_equal(a: Annotation, b: Annotation, tol: float = FLOAT_TOL) -> bool:
    if type(a) is not type(b):
        return False
    va, vb = _values(a), _values(b)
    if len(va) != len(vb):
        return False
    for x, y in zip(va, vb):
        if isinstance(x, float) and isinstance(y, float):
            if not _close(x, y, tol):
                return False
        elif x != y:
            return False
    return True


def statements_equal(a: Statement, b: Statement, tol: float = FLOAT_TOL) -> bool:
    if a.kind != b.kind or a.qubits != b.qubits or len(a.annotations) != len(b.annotations):
        return False
    if (a.gate is None) != (b.gate is None):
        return False
    if a.gate is not None:
        ga, gb = a.gate, b.gate
        if ga.kind != gb.kind or ga.qubits != gb.qubits or len(ga.params) != len(gb.params):
            return False
        if not all(_close(x, y, tol) for x, y in zip(ga.params, gb.params)):
            return False
    return all(annotations_equal(x, y, tol) for x, y in zip(a.annotations, b.annotations))


def structurally_equal(a: WqasmProgram, b: WqasmProgram, tol: float = FLOAT_TOL) -> bool:
    """Equal up to float rounding of ``tol`` (the text format keeps six decimals)."""
    return (
        a.version == b.version
        and a.num_qubits == b.num_qubits
        and len(a.statements) == len(b.statements)
        and all(statements_equal(x, y, tol) for x, y in zip(a.statements, b.statements))
    )


def read(path) -> WqasmProgram:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write(prog: WqasmProgram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit(prog))


__all__ = [
    "Annotation",
    "OpaqueAnnotation",
    "Statement",
    "WqasmProgram",
    "WqasmSyntaxError",
    "emit",
    "emit_annotation",
    "from_pulse_program",
    "parse",
    "parse_annotation",
    "read",
    "strip_annotations",
    "structurally_equal",
    "without_annotations",
    "write",
]
