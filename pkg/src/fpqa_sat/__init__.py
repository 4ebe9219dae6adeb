"""Compile MAX-3SAT QAOA circuits into annotated FPQA pulse programs."""

__version__ = "0.1.0"
