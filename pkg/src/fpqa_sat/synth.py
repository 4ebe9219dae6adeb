"""QAOA circuit synthesis for MAX-3SAT objectives.

Angle convention: the cost layer realizes ``exp(-1j * COST_SCALE * gamma * F)``
with ``COST_SCALE = -8``. A spin term ``a * Z_S`` of the expanded objective
becomes a ladder around ``RZ(ANGLE_SCALE * a * gamma)`` with
``ANGLE_SCALE = 2 * COST_SCALE``. For the clause ``(~x0 | ~x1 | ~x2)`` this
puts ``2*gamma`` on every ladder rotation and ``4*gamma`` on the target of the
compressed CCNOT form.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .circuit import (
    CCNOT,
    CCZ,
    CNOT,
    CZ,
    H,
    H_ANGLES,
    NATIVE_KINDS,
    RX,
    RZ,
    U3,
    X,
    X_ANGLES,
    LogicalCircuit,
    LogicalGate,
    ccz,
    cnot,
    cz,
    h,
    rx,
    rz,
    u3,
)
from .formula import Monomial, ObjectivePolynomial

COST_SCALE = -8
ANGLE_SCALE = 2 * COST_SCALE


@dataclass(frozen=True)
class QaoaParams:
    gamma: float = 0.5
    beta: float = 0.5
    layers: int = 1

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")


def spin_terms(poly: ObjectivePolynomial) -> dict[Monomial, Fraction]:
    """Expand ``poly`` under ``x_i = (1 - z_i) / 2``; the constant is dropped."""
    out: dict[Monomial, Fraction] = {}
    for mono, coeff in poly.terms.items():
        scale = coeff / (1 << len(mono))
        for size in range(1, len(mono) + 1):
            for sub in combinations(mono, size):
                out[sub] = out.get(sub, Fraction(0)) + (scale if size % 2 == 0 else -scale)
    return {k: v for k, v in sorted(out.items(), key=lambda kv: (len(kv[0]), kv[0])) if v}


def rz_angle(coeff: Fraction | float, gamma: float) -> float:
    return float(ANGLE_SCALE * coeff) * gamma


def term_fragment(variables: Iterable[int], coeff: Fraction | float, gamma: float) -> list[LogicalGate]:
    """CNOT-ladder fragment for the spin term ``coeff * Z_vars``."""
    qs = sorted(variables)
    if not 1 <= len(qs) <= 3:
        raise ValueError(f"term must have 1 to 3 variables, got {len(qs)}")
    theta = rz_angle(coeff, gamma)
    if len(qs) == 1:
        return [rz(qs[0], theta)]
    if len(qs) == 2:
        a, b = qs
        return [cnot(a, b), rz(b, theta), cnot(a, b)]
    a, b, c = qs
    return [cnot(a, b), cnot(b, c), rz(c, theta), cnot(b, c), cnot(a, b)]


def cost_layer(poly: ObjectivePolynomial, gamma: float) -> list[LogicalGate]:
    gates: list[LogicalGate] = []
    for mono, coeff in spin_terms(poly).items():
        gates.extend(term_fragment(mono, coeff, gamma))
    return gates


def init_layer(num_qubits: int) -> list[LogicalGate]:
    return [h(q) for q in range(num_qubits)]


def mixer_layer(num_qubits: int, beta: float) -> list[LogicalGate]:
    return [rx(q, 2 * beta) for q in range(num_qubits)]


def synthesize(poly: ObjectivePolynomial, params: QaoaParams, num_qubits: int) -> LogicalCircuit:
    """Un-optimized QAOA circuit: Hadamards, then per layer the cost ladders and the RX mixer."""
    if poly.variables() and max(poly.variables()) >= num_qubits:
        raise ValueError(f"variable x{max(poly.variables())} out of range for {num_qubits} qubits")
    gates = init_layer(num_qubits)
    cost = cost_layer(poly, params.gamma)
    for _ in range(params.layers):
        gates.extend(cost)
        gates.extend(mixer_layer(num_qubits, params.beta))
    return LogicalCircuit(num_qubits, tuple(gates))


def to_u3(gate: LogicalGate) -> LogicalGate:
    """Single-qubit gate as a U3 (equal up to global phase)."""
    q = gate.qubits[0]
    if gate.kind == U3:
        return gate
    if gate.kind == RZ:
        return u3(q, 0.0, 0.0, gate.params[0])
    if gate.kind == RX:
        return u3(q, gate.params[0], 0.0, 0.0)
    if gate.kind == H:
        return u3(q, *H_ANGLES)
    if gate.kind == X:
        return u3(q, *X_ANGLES)
    raise ValueError(f"{gate.kind} is not a single-qubit gate")


def nativize_gate(gate: LogicalGate) -> list[LogicalGate]:
    if gate.kind in NATIVE_KINDS:
        return [gate]
    if gate.kind == CNOT:
        c, t = gate.qubits
        return [u3(t, *H_ANGLES), cz(c, t), u3(t, *H_ANGLES)]
    if gate.kind == CCNOT:
        a, b, t = gate.qubits
        return [u3(t, *H_ANGLES), ccz(a, b, t), u3(t, *H_ANGLES)]
    return [to_u3(gate)]


def nativize(circuit: LogicalCircuit) -> LogicalCircuit:
    """Rewrite into the {U3, CZ, CCZ} basis."""
    if all(g.kind in NATIVE_KINDS for g in circuit.gates):
        return circuit
    out: list[LogicalGate] = []
    for g in circuit.gates:
        out.extend(nativize_gate(g))
    return LogicalCircuit(circuit.num_qubits, tuple(out))


def multiqubit_counts(gates: Iterable[LogicalGate]) -> Mapping[str, int]:
    """CZ/CCZ counts after nativization (CNOT counts as CZ, CCNOT as CCZ)."""
    counts = {CZ: 0, CCZ: 0}
    for g in gates:
        if g.kind in (CZ, CNOT):
            counts[CZ] += 1
        elif g.kind in (CCZ, CCNOT):
            counts[CCZ] += 1
    return counts

