"""Clause coloring, color shuttling and 3-qubit gate compression."""

from .coloring import ClauseColoring, color_clauses, conflict_graph, dsatur
from .compression import CompressionDecision, Inventory, ccz_break_even, decide
from .layout import CapacityError, ColorZoneLayout, build_layout
from .pipeline import CompileResult, compile, compress_clause
from .shuttling import plan_shuttles, shuttle_batches

__all__ = [
    "CapacityError",
    "ClauseColoring",
    "ColorZoneLayout",
    "CompileResult",
    "CompressionDecision",
    "Inventory",
    "build_layout",
    "ccz_break_even",
    "color_clauses",
    "compile",
    "compress_clause",
    "conflict_graph",
    "decide",
    "dsatur",
    "plan_shuttles",
    "shuttle_batches",
]
