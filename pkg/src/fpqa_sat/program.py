"""Scheduled FPQA programs: instructions paired with the logical gates they realize."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

from .circuit import LogicalCircuit, LogicalGate
from .device import FpqaInstruction


@dataclass(frozen=True)
class PulseStep:
    """One instruction. Consecutive steps sharing ``group`` execute in parallel."""

    instruction: FpqaInstruction
    gates: tuple[LogicalGate, ...] = ()
    group: int = 0


@dataclass(frozen=True)
class PulseProgram:
    num_qubits: int
    steps: tuple[PulseStep, ...] = ()

    def __iter__(self) -> Iterator[PulseStep]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def instructions(self) -> list[FpqaInstruction]:
        return [s.instruction for s in self.steps]

    def gates(self) -> list[LogicalGate]:
        return [g for s in self.steps for g in s.gates]

    def logical_circuit(self) -> LogicalCircuit:
        return LogicalCircuit(self.num_qubits, tuple(self.gates()))

    def groups(self) -> list[list[PulseStep]]:
        """Steps split into parallel groups (runs of equal ``group`` ids)."""
        out: list[list[PulseStep]] = []
        for step in self.steps:
            if out and out[-1][0].group == step.group:
                out[-1].append(step)
            else:
                out.append([step])
        return out

    def concat(self, other: PulseProgram) -> PulseProgram:
        """Append ``other``; group ids are shifted so no group spans the seam."""
        if not self.steps:
            return PulseProgram(max(self.num_qubits, other.num_qubits), other.steps)
        base = max(s.group for s in self.steps) + 1
        shifted = tuple(PulseStep(s.instruction, s.gates, s.group + base) for s in other.steps)
        return PulseProgram(max(self.num_qubits, other.num_qubits), self.steps + shifted)


class StepRecorder:
    """Append-only step buffer handing out fresh group ids."""

    def __init__(self) -> None:
        self.steps: list[PulseStep] = []
        self._next_group = 0

    def group(self, items: Iterable[tuple[FpqaInstruction, tuple[LogicalGate, ...]]]) -> None:
        items = list(items)
        if not items:
            return
        gid = self._next_group
        self._next_group += 1
        for instr, gates in items:
            self.steps.append(PulseStep(instr, tuple(gates), gid))

    def single(self, instr: FpqaInstruction, gates: tuple[LogicalGate, ...] = ()) -> None:
        self.group([(instr, gates)])

    def program(self, num_qubits: int) -> PulseProgram:
        return PulseProgram(num_qubits, tuple(self.steps))
