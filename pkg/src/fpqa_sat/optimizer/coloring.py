"""Clause coloring: group variable-disjoint clauses so they run under one global pulse."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from ..formula import SatFormula


@dataclass(frozen=True)
class ClauseColoring:
    colors: tuple[int, ...]
    num_colors: int
    conflict_edges: tuple[frozenset[int], ...]

    def groups(self) -> list[list[int]]:
        """Clause indices per color, each in ascending clause order."""
        out: list[list[int]] = [[] for _ in range(self.num_colors)]
        for clause, color in enumerate(self.colors):
            out[color].append(clause)
        return out

    def conflicts(self) -> int:
        """Number of edges whose endpoints share a color (0 for a proper coloring)."""
        return sum(
            1
            for i, nbrs in enumerate(self.conflict_edges)
            for j in nbrs
            if i < j and self.colors[i] == self.colors[j]
        )


def conflict_graph(formula: SatFormula) -> tuple[frozenset[int], ...]:
    """Adjacency sets over clause indices; clauses are adjacent when they share a variable."""
    by_var: dict[int, list[int]] = {}
    for idx, clause in enumerate(formula.clauses):
        for lit in clause:
            by_var.setdefault(lit.variable, []).append(idx)
    adj: list[set[int]] = [set() for _ in formula.clauses]
    for clauses in by_var.values():
        for i in clauses:
            adj[i].update(clauses)
    for i, nbrs in enumerate(adj):
        nbrs.discard(i)
    return tuple(frozenset(a) for a in adj)


def dsatur(adjacency: tuple[frozenset[int], ...]) -> list[int]:
    """DSatur coloring. Picks max saturation, then max degree, then lowest index."""
    n = len(adjacency)
    colors = [-1] * n
    seen: list[set[int]] = [set() for _ in range(n)]
    degree = [len(a) for a in adjacency]
    heap = [(0, -degree[v], v) for v in range(n)]
    heapq.heapify(heap)
    while heap:
        neg_sat, _, v = heapq.heappop(heap)
        if colors[v] >= 0 or -neg_sat != len(seen[v]):
            continue  # stale entry
        used = seen[v]
        c = 0
        while c in used:
            c += 1
        colors[v] = c
        for u in adjacency[v]:
            if colors[u] < 0 and c not in seen[u]:
                seen[u].add(c)
                heapq.heappush(heap, (-len(seen[u]), -degree[u], u))
    return colors


def _relabel_by_first_use(colors: list[int]) -> list[int]:
    mapping: dict[int, int] = {}
    for c in colors:
        mapping.setdefault(c, len(mapping))
    return [mapping[c] for c in colors]


def color_clauses(formula: SatFormula) -> ClauseColoring:
    """Proper coloring of the clause-conflict graph.

    Colors are renumbered in order of first appearance along the clause list,
    so clause 0 always gets color 0.
    """
    adjacency = conflict_graph(formula)
    colors = _relabel_by_first_use(dsatur(adjacency))
    return ClauseColoring(tuple(colors), max(colors, default=-1) + 1, adjacency)
