import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fpqa_sat.benchmarks import random_3sat  # noqa: E402
from fpqa_sat.device import DeviceSpec  # noqa: E402
from fpqa_sat.formula import SatFormula  # noqa: E402

EXAMPLE_CLAUSES = [[-1, -2, -3], [4, -5, 6], [3, 5, -6]]

# 60 instances: six small sizes checked with dense unitaries, six SATLIB-style sizes above the cap
SMALL_SIZES = (4, 5, 6, 7, 8, 10)
LARGE_SIZES = (20, 50, 75, 100, 150, 250)
PER_SIZE = 5


@pytest.fixture
def example_formula() -> SatFormula:
    return SatFormula.from_lists(6, EXAMPLE_CLAUSES)


@pytest.fixture(scope="session")
def spec() -> DeviceSpec:
    return DeviceSpec()


def corpus_formulas() -> list[tuple[str, SatFormula]]:
    out = []
    for n in SMALL_SIZES + LARGE_SIZES:
        for k in range(PER_SIZE):
            out.append((f"n{n}-{k}", random_3sat(n, seed=1000 * n + k)))
    return out


@pytest.fixture(scope="session")
def corpus():
    from fpqa_sat.optimizer import compile
    from fpqa_sat.wqasm import from_pulse_program

    spec = DeviceSpec()
    return [(name, f, from_pulse_program(compile(f, spec=spec).program)) for name, f in corpus_formulas()]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
