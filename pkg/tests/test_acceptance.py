"""The ten acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

import itertools
import math
import random
import statistics
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import EXAMPLE_CLAUSES, LARGE_SIZES  # noqa: E402
from fpqa_sat.benchmarks import random_3sat  # noqa: E402
from fpqa_sat.checker import EQUIVALENT, STRUCTURAL, check_program  # noqa: E402
from fpqa_sat.circuit import LogicalCircuit, circuit_unitary, equal_up_to_phase  # noqa: E402
from fpqa_sat.device import DeviceSpec  # noqa: E402
from fpqa_sat.formula import SatFormula, make_clause  # noqa: E402
from fpqa_sat.metrics import fragment_ccz_threshold  # noqa: E402
from fpqa_sat.optimizer import color_clauses, compile, compress_clause, shuttle_batches  # noqa: E402
from fpqa_sat.optimizer.compression import (  # noqa: E402
    ccz_break_even,
    compressed_fragment,
    fragment_gates,
    inventory,
    ladder_fragment,
    pair_coefficient,
)
from fpqa_sat.synth import nativize, rz_angle  # noqa: E402
from fpqa_sat.wqasm import emit, from_pulse_program, parse, structurally_equal, without_annotations  # noqa: E402
from mutations import KINDS, mutation_stats  # noqa: E402
from oracles import batches_valid, minimal_batches_bruteforce  # noqa: E402

RESULTS: list[str] = []
SPEC = DeviceSpec()


def check(number: int, name: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {name}: {detail}")
    print(RESULTS[-1])
    assert ok, RESULTS[-1]


def _fit_exponent(xs, ys) -> float:
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


# 1 ---------------------------------------------------------------------------------------


def test_criterion_01_coloring():
    colors = list(color_clauses(SatFormula.from_lists(6, EXAMPLE_CLAUSES)).colors)
    conflicts, slowest = 0, 0.0
    for n in LARGE_SIZES:
        for k in range(5):
            f = random_3sat(n, seed=7000 + 10 * n + k)
            t0 = time.perf_counter()
            c = color_clauses(f)
            slowest = max(slowest, time.perf_counter() - t0) if n == 250 else slowest
            conflicts += c.conflicts()
    ok = colors == [0, 0, 1] and conflicts == 0 and slowest < 1.0
    check(1, "coloring", ok, f"example colors {colors}, conflicts {conflicts}, N=250 max {slowest * 1e3:.1f} ms")


# 2 ---------------------------------------------------------------------------------------


def test_criterion_02_compression_oracle():
    gamma = 0.61
    t0 = time.perf_counter()
    worst = 0.0
    all_ok = True
    for signs in itertools.product([1, -1], repeat=3):
        clause = make_clause([s * v for s, v in zip(signs, (1, 2, 3))])
        pair = rz_angle(pair_coefficient(clause), gamma)
        comp = circuit_unitary(LogicalCircuit(3, tuple(fragment_gates(compressed_fragment(clause, gamma, pair)))))
        lad = circuit_unitary(LogicalCircuit(3, tuple(fragment_gates(ladder_fragment(clause, gamma)))))
        k = int(np.argmax(np.abs(lad)))
        worst = max(worst, float(np.abs(comp * (lad.flat[k] / comp.flat[k]) - lad).max()))
        all_ok &= equal_up_to_phase(comp, lad, 1e-9)
    elapsed = time.perf_counter() - t0
    check(2, "compression oracle", all_ok and elapsed < 1.0,
          f"8/8 polarities, max deviation {worst:.1e}, {elapsed * 1e3:.1f} ms")


# 3 ---------------------------------------------------------------------------------------


def test_criterion_03_angle_ratios():
    gamma = 1.0
    clause = make_clause([-1, -2, -3])
    gates = fragment_gates(compressed_fragment(clause, gamma, rz_angle(pair_coefficient(clause), gamma)))
    target = sorted(round(g.params[0], 9) for g in gates if g.kind == "rz" and g.qubits == (2,))
    controls = sorted(round(g.params[0], 9) for g in gates if g.kind == "rz" and g.qubits != (2,))
    ok = target == [-4.0, 4.0] and {abs(a) for a in controls} == {2.0} and len(controls) == 3
    check(3, "compressed angle ratios", ok, f"target {target} gamma, controls {controls} gamma")


# 4 ---------------------------------------------------------------------------------------


def test_criterion_04_inventory():
    per_clause = []
    for signs in itertools.product([1, -1], repeat=3):
        clause = make_clause([s * v for s, v in zip(signs, (1, 2, 3))])
        comp = inventory(fragment_gates(compressed_fragment(clause, 0.5, rz_angle(pair_coefficient(clause), 0.5))))
        lad = inventory(fragment_gates(ladder_fragment(clause, 0.5)))
        per_clause.append((comp.ccz, comp.cz, lad.ccz, lad.cz))
    done: set = set()
    first, _ = compress_clause(make_clause([-1, -2, -3]), done, SPEC, 0.5)
    second, _ = compress_clause(make_clause([1, -2, 4]), done, SPEC, 0.5)
    cz = lambda gs: sum(g.kind == "cz" for g in nativize(LogicalCircuit(4, tuple(gs))).gates)  # noqa: E731
    shared = SatFormula.from_lists(5, [[-1, -2, -3], [1, 2, -4], [-1, 2, 5]])
    prog_cz = sum(g.kind == "cz" for g in compile(shared, compress=True).circuit.gates)
    ok = set(per_clause) == {(2, 2, 0, 8)} and cz(first) == 2 and cz(second) == 0 and prog_cz < 2 * 3
    check(4, "gate inventory", ok,
          f"fresh clause 2 CCZ + 2 CZ vs 8 CZ; reused pair {cz(second)} CZ; 3 shared-pair clauses {prog_cz} CZ")


# 5 ---------------------------------------------------------------------------------------


def test_criterion_05_checker(corpus):
    statuses = []
    for name, f, prog in corpus:
        v = check_program(prog, SPEC)
        expected = EQUIVALENT if f.num_variables <= 10 else STRUCTURAL
        statuses.append(v.status == expected)
    rejected = changed = 0
    for i, kind in enumerate(KINDS):
        s = mutation_stats(kind, 1000, seed=100 + i)
        rejected += s["rejected"]
        changed += s["rejected"] + s["accepted"]
    rate = rejected / changed
    ok = all(statuses) and len(corpus) == 60 and rate >= 0.99
    check(5, "end-to-end checker", ok,
          f"{sum(statuses)}/{len(corpus)} compiler outputs pass; {rejected}/{changed} = {rate:.2%} mutations rejected")


# 6 ---------------------------------------------------------------------------------------


def test_criterion_06_shuttle():
    example = shuttle_batches(["x2", "x4", "x5"], ["x4", "x2", "x5"])
    rng = random.Random(6)
    cases = mismatches = 0
    for n in range(1, 9):
        for _ in range(40):
            target = rng.sample(range(n), n)
            batches = shuttle_batches(list(range(n)), target)
            cases += 1
            if not batches_valid(list(range(n)), target, batches) or len(batches) != minimal_batches_bruteforce(range(n), target):
                mismatches += 1
    ok = example == [["x4", "x5"], ["x2"]] and mismatches == 0
    check(6, "shuttle batching", ok, f"example {example}; {cases - mismatches}/{cases} random cases minimal")


# 7 ---------------------------------------------------------------------------------------


def test_criterion_07_complexity(corpus):
    t_start = time.perf_counter()
    by_size = {n: [] for n in LARGE_SIZES}
    for _, f, _ in corpus:
        if f.num_variables in by_size:
            by_size[f.num_variables].append(f)
    sizes, compile_t, check_t, n2m = [], [], [], []
    for n, fs in by_size.items():
        ct, kt = [], []
        for f in fs:
            t0 = time.perf_counter()
            res = compile(f, spec=SPEC)
            ct.append(time.perf_counter() - t0)
            prog = from_pulse_program(res.program)
            t0 = time.perf_counter()
            check_program(prog, SPEC)
            kt.append(time.perf_counter() - t0)
        sizes.append(n)
        compile_t.append(statistics.median(ct))
        check_t.append(statistics.median(kt))
        n2m.append(n * n * len(fs[0].clauses))
    b = _fit_exponent(sizes, compile_t)
    c = _fit_exponent(n2m, check_t)
    total = time.perf_counter() - t_start
    ok = b <= 2.3 and c <= 1.15 and total < 600
    check(7, "complexity trend", ok,
          f"compile ~ N^{b:.2f} (<= 2.3), checker ~ (N^2 M)^{c:.2f} (<= 1.15), sweep {total:.1f} s")


# 8 ---------------------------------------------------------------------------------------


def test_criterion_08_zero_swap(corpus):
    bad = 0
    for _, f, prog in corpus:
        text = emit(prog)
        clause_sets = [frozenset(lit.index for lit in c) for c in f.clauses]
        for s in prog.statements:
            if s.gate is None:
                continue
            if s.gate.kind not in ("u3", "cz", "ccz"):
                bad += 1
            elif len(s.qubits) > 1 and not any(set(s.qubits) <= c for c in clause_sets):
                bad += 1  # an entangling gate outside every clause could only come from routing
        bad += "swap" in text
    check(8, "zero SWAP", bad == 0, f"{len(corpus)} programs, {bad} non-clause entangling or SWAP gates")


# 9 ---------------------------------------------------------------------------------------


def test_criterion_09_threshold():
    clause = make_clause([-1, -2, -3])
    comp = inventory(fragment_gates(compressed_fragment(clause, 0.5, rz_angle(pair_coefficient(clause), 0.5))))
    lad = inventory(fragment_gates(ladder_fragment(clause, 0.5)))
    consistent = math.isclose(fragment_ccz_threshold(SPEC), ccz_break_even(comp, lad, SPEC.fidelities))
    sweep = [fragment_ccz_threshold(SPEC.with_overrides(**{"fidelities.f_cz": v})) for v in np.linspace(0.97, 0.999, 12)]
    monotone = all(a < b for a, b in zip(sweep, sweep[1:]))
    rejected_ok = True
    rejected_cases = 0
    for f_ccz in (0.9, 0.95, 0.97, 0.975):
        spec = SPEC.with_overrides(**{"fidelities.f_ccz": f_ccz})
        for seed in range(3):
            res = compile(random_3sat(20, seed=seed), spec=spec)
            if not res.compressed:
                rejected_cases += 1
                rejected_ok &= res.decision.ccz_threshold > f_ccz
    default = fragment_ccz_threshold(SPEC)
    ok = consistent and monotone and rejected_ok and rejected_cases > 0
    check(9, "EPS threshold", ok,
          f"default break-even {default:.4f}; monotone over f_cz {sweep[0]:.4f}..{sweep[-1]:.4f}; "
          f"{rejected_cases} rejected compiles all below threshold")


# 10 --------------------------------------------------------------------------------------


def test_criterion_10_round_trip(corpus):
    from test_wqasm import GENERATED

    programs = list(GENERATED) + [p for _, _, p in corpus]
    failures = 0
    for prog in programs:
        text = emit(prog)
        if not structurally_equal(parse(text), prog):
            failures += 1
            continue
        plain = emit(prog, annotations=False)
        if "@" in plain or not structurally_equal(parse(plain), without_annotations(prog)):
            failures += 1
    check(10, "wQasm round trip", failures == 0, f"{len(programs) - failures}/{len(programs)} programs")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
