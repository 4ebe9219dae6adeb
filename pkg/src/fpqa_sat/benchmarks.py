"""Seeded uniform random 3-SAT instances in the style of the SATLIB ``uf`` families."""

from __future__ import annotations

import random
from pathlib import Path

from .formula import SatFormula, to_dimacs

# SATLIB uniform random 3-SAT families: variables -> clauses (ratio near 4.26)
UF_FAMILIES = {20: 91, 50: 218, 75: 325, 100: 430, 150: 645, 250: 1065}


def clauses_for(num_variables: int) -> int:
    return UF_FAMILIES.get(num_variables, max(1, round(4.26 * num_variables)))


def random_3sat(num_variables: int, num_clauses: int | None = None, seed: int = 0) -> SatFormula:
    """Each clause picks three distinct variables and independent random signs."""
    if num_variables < 3:
        raise ValueError("need at least 3 variables for a 3-SAT clause")
    m = clauses_for(num_variables) if num_clauses is None else num_clauses
    rng = random.Random(seed)
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, num_variables + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return SatFormula.from_lists(num_variables, clauses)


def write_family(directory: str | Path, num_variables: int, count: int = 10, seed: int = 0,
                 num_clauses: int | None = None) -> list[Path]:
    """Write ``count`` instances named ``uf<N>-<M>-<k>.cnf``; returns their paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(count):
        f = random_3sat(num_variables, num_clauses, seed=seed * 1_000_003 + num_variables * 1009 + k)
        m = len(f.clauses)
        path = out / f"uf{num_variables}-{m}-{k + 1:02d}.cnf"
        path.write_text(to_dimacs(f, [f"uniform random 3-SAT, seed {seed}, instance {k + 1}"]))
        paths.append(path)
    return paths
