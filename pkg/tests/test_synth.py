import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from fpqa_sat.circuit import (
    LogicalCircuit,
    LogicalGate,
    ccnot,
    circuit_unitary,
    cnot,
    equal_up_to_phase,
    h,
    rx,
    rz,
    u3,
    x,
)
from fpqa_sat.formula import SatFormula, clause_objective, formula_objective, make_clause
from fpqa_sat.synth import (
    COST_SCALE,
    QaoaParams,
    cost_layer,
    multiqubit_counts,
    nativize,
    spin_terms,
    synthesize,
    term_fragment,
)
from oracles import gate_tuples, naive_unitary, same_up_to_phase


def objective_diag(poly, n):
    return np.array([float(poly.evaluate([(b >> q) & 1 for q in range(n)])) for b in range(1 << n)])


def test_spin_terms_of_negative_clause():
    # -x0x1x2 with x=(1-z)/2 gives -(1/8)(1 - z0 - z1 - z2 + z0z1 + z0z2 + z1z2 - z0z1z2)
    terms = spin_terms(clause_objective(make_clause([-1, -2, -3])))
    assert terms[(0,)] == terms[(1,)] == terms[(2,)] == pytest.approx(1 / 8)
    assert terms[(0, 1)] == terms[(0, 2)] == terms[(1, 2)] == pytest.approx(-1 / 8)
    assert terms[(0, 1, 2)] == pytest.approx(1 / 8)


@pytest.mark.parametrize("signs", list(itertools.product([1, -1], repeat=3)))
def test_cost_layer_matches_matrix_exponential(signs):
    gamma = 0.37
    poly = clause_objective(make_clause([s * v for s, v in zip(signs, (1, 2, 3))]))
    u = circuit_unitary(LogicalCircuit(3, tuple(cost_layer(poly, gamma))))
    ref = expm(-1j * COST_SCALE * gamma * np.diag(objective_diag(poly, 3)))
    assert equal_up_to_phase(u, ref, 1e-9)


def test_cost_layer_formula(example_formula):
    gamma = 0.21
    poly = formula_objective(example_formula)
    u = circuit_unitary(LogicalCircuit(6, tuple(cost_layer(poly, gamma))))
    ref = np.diag(np.exp(-1j * COST_SCALE * gamma * objective_diag(poly, 6)))
    assert equal_up_to_phase(u, ref, 1e-9)


def test_term_fragment_shapes():
    assert [g.kind for g in term_fragment([2, 0, 1], 0.5, 1.0)] == ["cx", "cx", "rz", "cx", "cx"]
    with pytest.raises(ValueError):
        term_fragment([], 1, 1.0)


def test_synthesize_layers():
    f = SatFormula.from_lists(3, [[1, 2, 3]])
    c = synthesize(formula_objective(f), QaoaParams(0.3, 0.2, layers=2), 3)
    kinds = [g.kind for g in c.gates]
    assert kinds[:3] == ["h"] * 3
    assert kinds.count("rx") == 6
    with pytest.raises(ValueError):
        QaoaParams(layers=0)


def test_simulator_agrees_with_naive_oracle():
    rng = np.random.default_rng(7)
    gates = []
    for _ in range(40):
        k = rng.integers(5)
        q = [int(v) for v in rng.permutation(4)[:3]]
        if k == 0:
            gates.append(u3(q[0], *rng.uniform(-3, 3, 3)))
        elif k == 1:
            gates.append(cnot(q[0], q[1]))
        elif k == 2:
            gates.append(ccnot(*q))
        elif k == 3:
            gates.append(rz(q[0], float(rng.uniform(-3, 3))))
        else:
            gates.append(h(q[0]))
    gates.append(x(0))
    gates.append(rx(1, 0.4))
    c = LogicalCircuit(4, tuple(gates))
    assert np.allclose(circuit_unitary(c), naive_unitary(gate_tuples(c), 4), atol=1e-10)


_single = st.builds(
    lambda kind, q, a: LogicalGate(kind, (q,), (a,) if kind in ("rz", "rx") else ()),
    st.sampled_from(["rz", "rx", "h", "x"]),
    st.integers(0, 3),
    st.floats(-math.pi, math.pi),
)
_multi = st.builds(
    lambda kind, qs: LogicalGate(kind, tuple(qs[: 2 if kind in ("cx", "cz") else 3]), ()),
    st.sampled_from(["cx", "ccx", "cz", "ccz"]),
    st.permutations([0, 1, 2, 3]),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(_single, _multi), max_size=12))
def test_nativize_preserves_unitary(gates):
    c = LogicalCircuit(4, tuple(gates))
    n = nativize(c)
    assert all(g.kind in ("u3", "cz", "ccz") for g in n.gates)
    assert same_up_to_phase(naive_unitary(gate_tuples(c), 4), naive_unitary(gate_tuples(n), 4))
    counts = multiqubit_counts(c.gates)
    assert counts["cz"] == sum(g.kind == "cz" for g in n.gates)
    assert counts["ccz"] == sum(g.kind == "ccz" for g in n.gates)
