"""Per-clause cost fragments: the 8-CNOT ladder and the compressed CCNOT form.

A fragment is a list whose items are either single-qubit gates or
:class:`Stage` entries. A stage is one Rydberg pulse slot: the multi-qubit
gate (CNOT/CCNOT, realized as H-conjugated CZ/CCZ) plus the atom
configuration the slot's controls must take for it. Every clause of one mode
has the same number of stages so clauses of a color can run in lockstep.

Configurations (controls sit in the AOD row, the target in its SLM trap):

``TRI``  triangle, all three atoms interact
``A``    control row lowered, only the control pair interacts
``B``    first control slid left, second control and target interact
``C``    second control slid right, first control and target interact
``SEP``  row lowered and second control slid right, nothing interacts
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from ..circuit import CCNOT, CNOT, CZ, CCZ, LogicalGate, ccnot, cnot, rz, x
from ..device import Fidelities
from ..formula import Clause, clause_objective
from ..synth import COST_SCALE, nativize_gate, rz_angle, spin_terms
from .layout import clause_roles

TRI, A, B, C, SEP = "TRI", "A", "B", "C", "SEP"
COMPRESSED_STAGES = 4
LADDER_STAGES = 8


@dataclass(frozen=True)
class Stage:
    config: str
    gate: LogicalGate | None = None


FragmentItem = LogicalGate | Stage


@dataclass(frozen=True)
class ClauseTerms:
    """Spin-term coefficients of one clause keyed by role: 0/1 controls, 2 target."""

    roles: tuple[int, int, int]
    coeffs: dict[frozenset[int], Fraction]

    def coeff(self, *roles: int) -> Fraction:
        return self.coeffs.get(frozenset(roles), Fraction(0))


def clause_terms(clause: Clause) -> ClauseTerms:
    roles = clause_roles(clause)
    index = {q: r for r, q in enumerate(roles)}
    terms = spin_terms(clause_objective(clause))
    return ClauseTerms(roles, {frozenset(index[q] for q in mono): c for mono, c in terms.items()})


def pair_coefficient(clause: Clause) -> Fraction:
    return clause_terms(clause).coeff(0, 1)


def ladder_fragment(clause: Clause, gamma: float) -> list[FragmentItem]:
    """All seven terms of one clause with 8 CNOTs.

    The cubic term reuses the control-pair parity left on the second control
    by the quadratic ladder, which saves two CNOTs over separate ladders.
    """
    t = clause_terms(clause)
    c0, c1, tg = t.roles
    ang = lambda *r: rz_angle(t.coeff(*r), gamma)  # noqa: E731
    return [
        rz(c0, ang(0)),
        rz(c1, ang(1)),
        rz(tg, ang(2)),
        Stage(B, cnot(c1, tg)),
        rz(tg, ang(1, 2)),
        Stage(B, cnot(c1, tg)),
        Stage(A, cnot(c0, c1)),
        rz(c1, ang(0, 1)),
        Stage(B, cnot(c1, tg)),
        rz(tg, ang(0, 1, 2)),
        Stage(B, cnot(c1, tg)),
        Stage(A, cnot(c0, c1)),
        Stage(C, cnot(c0, tg)),
        rz(tg, ang(0, 2)),
        Stage(C, cnot(c0, tg)),
    ]


def compressed_fragment(clause: Clause, gamma: float, pair_angle: float | None) -> list[FragmentItem]:
    """CCNOT form of one clause.

    Controls whose literal is positive are flipped so the CCNOTs fire exactly
    when both control literals are false. ``pair_angle`` is the rotation for
    the control-pair term; ``None`` skips it (already applied, or zero) and
    keeps the controls apart instead.
    """
    t = clause_terms(clause)
    c0, c1, tg = t.roles
    flips = [x(q) for q, lit in zip((c0, c1), _literals_by_role(clause)) if lit.positive]
    # exp(i*phi*P*Z_t) with P the both-controls-false projector carries the four target terms
    phi = -4 * COST_SCALE * float(t.coeff(2)) * gamma
    items: list[FragmentItem] = [
        *flips,
        Stage(TRI, ccnot(c0, c1, tg)),
        rz(tg, phi),
        Stage(TRI, ccnot(c0, c1, tg)),
        rz(tg, -phi),
        *flips,
    ]
    if pair_angle is None:
        items += [Stage(SEP), Stage(SEP)]
    else:
        items += [Stage(A, cnot(c0, c1)), rz(c1, pair_angle), Stage(A, cnot(c0, c1))]
    items += [rz(c0, rz_angle(t.coeff(0), gamma)), rz(c1, rz_angle(t.coeff(1), gamma))]
    return items


def _literals_by_role(clause: Clause):
    by_var = {lit.index: lit for lit in clause}
    return [by_var[q] for q in clause_roles(clause)]


def fragment_gates(items: Iterable[FragmentItem]) -> list[LogicalGate]:
    out = []
    for item in items:
        if isinstance(item, Stage):
            if item.gate is not None:
                out.append(item.gate)
        else:
            out.append(item)
    return out


def stage_count(items: Sequence[FragmentItem]) -> int:
    return sum(isinstance(i, Stage) for i in items)


@dataclass(frozen=True)
class Inventory:
    """Native pulse-bearing gate counts."""

    u3: int = 0
    cz: int = 0
    ccz: int = 0

    def __add__(self, other: Inventory) -> Inventory:
        return Inventory(self.u3 + other.u3, self.cz + other.cz, self.ccz + other.ccz)

    def eps(self, fid: Fidelities, f_ccz: float | None = None) -> float:
        f_ccz = fid.f_ccz if f_ccz is None else f_ccz
        return fid.f_1q**self.u3 * fid.f_cz**self.cz * f_ccz**self.ccz


def inventory(gates: Iterable[LogicalGate]) -> Inventory:
    u3 = cz = ccz = 0
    for g in gates:
        for n in nativize_gate(g):
            if n.kind == CZ:
                cz += 1
            elif n.kind == CCZ:
                ccz += 1
            else:
                u3 += 1
    return Inventory(u3, cz, ccz)


@dataclass(frozen=True)
class CompressionDecision:
    compress: bool
    eps_compressed: float
    eps_ladder: float
    ccz_threshold: float | None
    compressed: Inventory
    ladder: Inventory


def ccz_break_even(compressed: Inventory, ladder: Inventory, fid: Fidelities) -> float | None:
    """CCZ fidelity at which both inventories have equal success probability."""
    if compressed.ccz == 0:
        return None
    rest = fid.f_1q**compressed.u3 * fid.f_cz**compressed.cz
    return (ladder.eps(fid) / rest) ** (1.0 / compressed.ccz)


def decide(compressed: Inventory, ladder: Inventory, fid: Fidelities) -> CompressionDecision:
    """Compress iff the compressed inventory has strictly higher success probability."""
    e_c, e_l = compressed.eps(fid), ladder.eps(fid)
    return CompressionDecision(e_c > e_l, e_c, e_l, ccz_break_even(compressed, ladder, fid), compressed, ladder)


def is_multiqubit(gate: LogicalGate) -> bool:
    return gate.kind in (CNOT, CCNOT)
