"""Color shuttling: move atoms between zones without SWAP gates.

Atoms travel in batches on the single AOD row. AOD columns cannot cross, so
one batch may only contain atoms whose left-to-right order is the same at
the source and at the destination.
"""

from __future__ import annotations

import bisect
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass

from ..device import AodTrap, Bind, SlmTrap, Shuttle, Transfer
from ..program import StepRecorder
from .layout import ColorZoneLayout


def shuttle_batches(current: Sequence[Hashable], target: Sequence[Hashable]) -> list[list[Hashable]]:
    """Split the atoms of ``target`` into the fewest order-preserving batches.

    ``current`` and ``target`` list atoms left to right before and after the
    move. Atoms are scanned in ``target`` order and each joins the first batch
    it stays order-consistent with, otherwise it opens a new batch. Batches
    come back in creation order, atoms in ``target`` order. The batch count
    equals the longest run of atoms whose order is fully reversed.
    """
    rank = {a: i for i, a in enumerate(current)}
    missing = [a for a in target if a not in rank]
    if missing:
        raise ValueError(f"atoms {missing} are not in the current order")
    batches: list[list[Hashable]] = []
    neg_lasts: list[int] = []  # -rank of each batch's last atom, ascending
    for atom in target:
        r = rank[atom]
        # first batch (lowest index) whose last rank < r; lasts decrease with batch index
        i = bisect.bisect_left(neg_lasts, -r)
        if i == len(batches):
            batches.append([atom])
            neg_lasts.append(-r)
        else:
            batches[i].append(atom)
            neg_lasts[i] = -r
    return batches


@dataclass(frozen=True)
class Move:
    qubit: int
    src: int  # SLM trap index
    dst: int


def transition_moves(layout: ColorZoneLayout, from_step: int | None, to_step: int | None) -> list[Move]:
    """Atoms that change SLM trap between two execution steps (``None`` = storage)."""
    before = layout.home(from_step)
    after = layout.home(to_step)
    return [Move(q, before[q], after[q]) for q in range(layout.num_qubits) if before[q] != after[q]]


def grouped_batches(layout: ColorZoneLayout, moves: Iterable[Move]) -> list[list[Move]]:
    """Batches per (source line, destination line); parking moves come first."""
    pos = layout.slm_positions_cached()
    groups: dict[tuple[float, float], list[Move]] = {}
    for m in moves:
        groups.setdefault((pos[m.src][1], pos[m.dst][1]), []).append(m)
    storage_y = 0.0
    order = sorted(groups, key=lambda k: (k[1] != storage_y, k))
    out: list[list[Move]] = []
    for key in order:
        ms = groups[key]
        by_q = {m.qubit: m for m in ms}
        current = [m.qubit for m in sorted(ms, key=lambda m: pos[m.src][0])]
        target = [m.qubit for m in sorted(ms, key=lambda m: pos[m.dst][0])]
        for batch in shuttle_batches(current, target):
            out.append(sorted((by_q[q] for q in batch), key=lambda m: pos[m.src][0]))
    return out


class AodDriver:
    """Tracks the single-row AOD and emits instructions that respect its constraints.

    Columns not in use sit parked to the right of every trap. All offsets are
    rounded to 6 decimals and applied to the tracked coordinates the same way
    a replay of the emitted text would apply them.
    """

    def __init__(self, layout: ColorZoneLayout, recorder: StepRecorder):
        self.layout = layout
        self.rec = recorder
        self.cols = [layout.park_position(c) for c in range(layout.num_columns)]
        self.row_y = layout.lane_y

    def move_row(self, y: float) -> None:
        offset = round(y - self.row_y, 6)
        if offset:
            self.rec.single(Shuttle("row", 0, offset))
            self.row_y += offset

    def move_columns(self, targets: dict[int, float]) -> None:
        """Move columns to absolute x; rightward movers go right-to-left first, then leftward left-to-right."""
        offsets = {c: round(x - self.cols[c], 6) for c, x in targets.items()}
        right = [c for c in sorted(offsets, reverse=True) if offsets[c] > 0]
        left = [c for c in sorted(offsets) if offsets[c] < 0]
        for batch in (right, left):
            items = []
            for c in batch:
                items.append((Shuttle("column", c, offsets[c]), ()))
                self.cols[c] += offsets[c]
            self.rec.group(items)

    def place_columns(self, xs: Sequence[float]) -> None:
        """Columns 0..len(xs)-1 to ``xs``; every other column back to its park slot."""
        targets = {c: x for c, x in enumerate(xs)}
        for c in range(len(xs), len(self.cols)):
            targets[c] = self.layout.park_position(c)
        self.move_columns(targets)

    def park(self) -> None:
        self.place_columns([])
        self.move_row(self.layout.lane_y)

    def transfers(self, pairs: Iterable[tuple[int, int]]) -> None:
        """Parallel transfers between SLM trap and AOD column (row 0)."""
        self.rec.group((Transfer(slm, 0, col), ()) for slm, col in pairs)


def carry(driver: AodDriver, batch: Sequence[Move]) -> None:
    """Pick a batch up from SLM traps and drop it at its destinations."""
    pos = driver.layout.slm_positions_cached()
    src_y = pos[batch[0].src][1]
    dst_y = pos[batch[0].dst][1]
    driver.place_columns([pos[m.src][0] for m in batch])
    driver.move_row(src_y)
    driver.transfers((m.src, c) for c, m in enumerate(batch))
    driver.move_row(driver.layout.lane_y)
    driver.place_columns([pos[m.dst][0] for m in batch])
    driver.move_row(dst_y)
    driver.transfers((m.dst, c) for c, m in enumerate(batch))


def plan_shuttles(layout: ColorZoneLayout, from_step: int | None, to_step: int | None) -> list:
    """Instructions taking atoms from their places after ``from_step`` to those of ``to_step``.

    ``None`` stands for the initial storage arrangement. The AOD starts and
    ends empty with all columns parked and the row on the transit lane.
    """
    rec = StepRecorder()
    run_transition(layout, from_step, to_step, AodDriver(layout, rec))
    return [s.instruction for s in rec.steps]


def run_transition(layout: ColorZoneLayout, from_step: int | None, to_step: int | None, driver: AodDriver) -> int:
    """Emit a transition through ``driver``; returns the number of shuttle batches."""
    batches = grouped_batches(layout, transition_moves(layout, from_step, to_step))
    for batch in batches:
        carry(driver, batch)
    if batches:
        driver.park()
    return len(batches)


def initial_bindings(layout: ColorZoneLayout) -> list[Bind]:
    return [Bind(q, SlmTrap(layout.storage_trap(q))) for q in range(layout.num_qubits)]


__all__ = [
    "AodDriver",
    "AodTrap",
    "Move",
    "carry",
    "grouped_batches",
    "initial_bindings",
    "plan_shuttles",
    "run_transition",
    "shuttle_batches",
    "transition_moves",
]
