"""Pulse-level verification of wQasm programs.

:func:`translate` replays the annotations on the device model and turns every
pulse into the gates it physically applies. :func:`check_program` compares
that circuit against the program's own logical statements.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .circuit import SYMMETRIC_KINDS, U3, LogicalCircuit, LogicalGate, ccz, circuit_unitary, cz, u3
from .device import (
    Bind,
    DeviceError,
    DeviceSpec,
    FpqaState,
    RamanGlobal,
    RamanLocal,
    Rydberg,
    apply,
    rydberg_components,
)
from .wqasm import OpaqueAnnotation, WqasmProgram, strip_annotations

EQUIVALENT = "equivalent"
MISMATCH = "mismatch"
STRUCTURAL = "structurally-equivalent-only"
DEFAULT_MAX_UNITARY_QUBITS = 10
UNITARY_TOL = 1e-9


class TranslationError(ValueError):
    """A pulse that cannot be turned into intended gates, with its location."""

    def __init__(self, constraint: str, detail: str, statement: int, annotation: int, line: int = 0):
        self.constraint = constraint
        self.detail = detail
        self.statement = statement
        self.annotation = annotation
        self.line = line
        where = f"line {line}" if line else f"statement {statement}"
        super().__init__(f"{where}, annotation {annotation}: {constraint}: {detail}")

    def report(self) -> dict[str, Any]:
        return {
            "constraint": self.constraint,
            "detail": self.detail,
            "statement": self.statement,
            "annotation": self.annotation,
            "line": self.line,
        }


@dataclass(frozen=True)
class Verdict:
    status: str
    report: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != MISMATCH

    def to_json(self) -> str:
        return json.dumps({"status": self.status, **self.report}, indent=2, sort_keys=True)


# --- translation -------------------------------------------------------------------


def _rydberg_gates(state: FpqaState, spec: DeviceSpec) -> list[LogicalGate]:
    gates = []
    positions = state.atom_positions()
    for comp in rydberg_components(state, spec):
        qs = sorted(comp)
        if len(qs) > 3:
            raise ValueError(f"too many atoms in range: {len(qs)} atoms {qs} form one Rydberg group")
        if len(qs) == 2:
            gates.append(cz(*qs))
            continue
        d = [math.dist(positions[a], positions[b]) for a, b in combinations(qs, 2)]
        if max(d) > spec.rydberg_distance + 1e-9:
            raise ValueError(
                f"unintended interaction: atoms {qs} are chained but not all within {spec.rydberg_distance} "
                f"(pairwise distances {[round(v, 6) for v in d]})"
            )
        if (max(d) - min(d)) / max(d) > spec.equidistance_tolerance:
            raise ValueError(
                f"not equidistant: atoms {qs} have pairwise distances {[round(v, 6) for v in d]}"
            )
        gates.append(ccz(*qs))
    return gates


def translate(prog: WqasmProgram, spec: DeviceSpec) -> LogicalCircuit:
    """Gates the annotations physically apply, in pulse order.

    Movement contributes nothing; a Rydberg pulse gives a CZ per interacting
    pair and a CCZ per equidistant triple; Raman pulses give U3 gates.
    """
    state = FpqaState()
    gates: list[LogicalGate] = []
    for si, stmt in enumerate(prog.statements):
        for ai, instr in enumerate(stmt.annotations):
            line = stmt.line + ai if stmt.line else 0
            if isinstance(instr, OpaqueAnnotation):
                continue
            try:
                state = apply(state, instr, spec)
                if isinstance(instr, Rydberg):
                    gates.extend(_rydberg_gates(state, spec))
                elif isinstance(instr, RamanLocal):
                    gates.append(u3(instr.qubit, *instr.angles))
                elif isinstance(instr, RamanGlobal):
                    gates.extend(u3(q, *instr.angles) for q in sorted(state.bindings))
            except DeviceError as exc:
                raise TranslationError(exc.constraint, exc.detail, si, ai, line) from exc
            except ValueError as exc:
                constraint = str(exc).split(":", 1)[0]
                raise TranslationError(constraint, str(exc), si, ai, line) from exc
    for g in gates:
        if max(g.qubits) >= prog.num_qubits:
            raise TranslationError("unknown qubit", f"q{max(g.qubits)} is not declared", -1, -1)
    return LogicalCircuit(prog.num_qubits, tuple(gates))


# --- equivalence --------------------------------------------------------------------


def _canonical(g: LogicalGate) -> LogicalGate:
    return LogicalGate(g.kind, tuple(sorted(g.qubits)), g.params) if g.kind in SYMMETRIC_KINDS else g


def _per_qubit(circuit: LogicalCircuit) -> dict[int, list[LogicalGate]]:
    seqs: dict[int, list[LogicalGate]] = defaultdict(list)
    for g in circuit.gates:
        c = _canonical(g)
        for q in c.qubits:
            seqs[q].append(c)
    return seqs


def _gates_match(a: LogicalGate, b: LogicalGate, tol: float) -> bool:
    return (
        a.kind == b.kind
        and a.qubits == b.qubits
        and len(a.params) == len(b.params)
        and all(abs(x - y) <= tol for x, y in zip(a.params, b.params))
    )


def structural_diff(a: LogicalCircuit, b: LogicalCircuit, tol: float = UNITARY_TOL) -> dict[str, Any] | None:
    """First per-qubit difference between two gate sequences, or ``None``.

    Gates on disjoint qubits commute, so comparing the sequence each qubit
    sees is insensitive to their interleaving.
    """
    sa, sb = _per_qubit(a), _per_qubit(b)
    for q in sorted(set(sa) | set(sb)):
        xa, xb = sa.get(q, []), sb.get(q, [])
        for i, (ga, gb) in enumerate(zip(xa, xb)):
            if not _gates_match(ga, gb, tol):
                return {"qubit": q, "position": i, "expected": _describe(ga), "actual": _describe(gb)}
        if len(xa) != len(xb):
            return {"qubit": q, "position": min(len(xa), len(xb)), "expected_gates": len(xa), "actual_gates": len(xb)}
    return None


def _describe(g: LogicalGate) -> str:
    params = "(" + ", ".join(f"{p:.9g}" for p in g.params) + ")" if g.params else ""
    return f"{g.kind}{params} " + ", ".join(f"q{q}" for q in g.qubits)


def unitary_diff(a: np.ndarray, b: np.ndarray) -> dict[str, Any]:
    """Largest entry difference after removing the global phase, located."""
    flat = np.flatnonzero(np.abs(a) > 1e-12)
    if flat.size:
        k = flat[0]
        ref_a, ref_b = a.flat[k], b.flat[k]
        phase = (ref_b / abs(ref_b)) / (ref_a / abs(ref_a)) if abs(ref_b) > 1e-12 else 1.0
    else:
        phase = 1.0
    diff = np.abs(a * phase - b)
    row, col = np.unravel_index(np.argmax(diff), diff.shape)
    ea, eb = a[row, col] * phase, b[row, col]
    phase_gap = float(np.angle(eb / ea)) if abs(ea) > 1e-12 and abs(eb) > 1e-12 else None
    return {
        "max_abs_difference": float(diff.max()),
        "worst_entry": [int(row), int(col)],
        "phase_difference": phase_gap,
    }


def check_equivalence(
    logical: LogicalCircuit,
    translated: LogicalCircuit,
    max_unitary_qubits: int = DEFAULT_MAX_UNITARY_QUBITS,
) -> Verdict:
    if logical.num_qubits != translated.num_qubits:
        raise ValueError(f"qubit counts differ: {logical.num_qubits} vs {translated.num_qubits}")
    n = logical.num_qubits
    if n <= max_unitary_qubits:
        d = unitary_diff(circuit_unitary(logical), circuit_unitary(translated))
        if d["max_abs_difference"] <= UNITARY_TOL:
            return Verdict(EQUIVALENT, {"method": "unitary", "num_qubits": n, **d})
        return Verdict(MISMATCH, {"method": "unitary", "num_qubits": n, **d})
    diff = structural_diff(logical, translated)
    if diff is None:
        return Verdict(
            STRUCTURAL,
            {
                "method": "structural",
                "num_qubits": n,
                "notice": f"{n} qubits exceed the dense-unitary cap of {max_unitary_qubits}; "
                "only per-qubit gate sequences were compared",
            },
        )
    return Verdict(MISMATCH, {"method": "structural", "num_qubits": n, "difference": diff})


def _raman_errors(prog: WqasmProgram) -> list[dict[str, Any]]:
    """Raman pulses whose angles or address disagree with the gates they annotate."""
    errors = []
    stmts = prog.statements
    bound: set[int] = set()
    for si, stmt in enumerate(stmts):
        for a in stmt.annotations:
            if isinstance(a, Bind):
                bound.add(a.qubit)
            if isinstance(a, RamanLocal):
                g = stmt.gate
                if g is None or g.kind != U3 or g.qubits != (a.qubit,) or g.params != a.angles:
                    errors.append({"statement": si, "line": stmt.line, "pulse": "local", "qubit": a.qubit})
            elif isinstance(a, RamanGlobal):
                targets = sorted(bound)
                window = stmts[si : si + len(targets)]
                got = [(s.gate.qubits[0] if s.gate is not None and s.gate.kind == U3 else None,
                        s.gate.params if s.gate is not None else None) for s in window]
                want = [(q, a.angles) for q in targets]
                if got != want:
                    errors.append({"statement": si, "line": stmt.line, "pulse": "global"})
    return errors


def check_program(
    prog: WqasmProgram, spec: DeviceSpec, max_unitary_qubits: int = DEFAULT_MAX_UNITARY_QUBITS
) -> Verdict:
    """Translate the pulses and compare them with the annotated logical circuit.

    Pulses that violate a device or interaction constraint make the program a
    mismatch; the report names the constraint and the location.
    """
    try:
        translated = translate(prog, spec)
    except TranslationError as exc:
        return Verdict(MISMATCH, {"method": "translation", "error": exc.report()})
    raman = _raman_errors(prog)
    if raman:
        return Verdict(MISMATCH, {"method": "raman", "errors": raman[:20], "count": len(raman)})
    return check_equivalence(strip_annotations(prog), translated, max_unitary_qubits)


__all__ = [
    "EQUIVALENT",
    "MISMATCH",
    "STRUCTURAL",
    "TranslationError",
    "Verdict",
    "check_equivalence",
    "check_program",
    "structural_diff",
    "translate",
    "unitary_diff",
]
