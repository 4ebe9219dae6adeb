"""Trap geometry for colored clause execution.

Idle atoms wait on a storage line of SLM traps (``y = 0``, one trap per
qubit). Two execution zones sit on a diagonal above it and alternate between
consecutive execution steps, so atoms move from one zone straight into the
next. A zone is a row of clause slots; each slot is an equilateral triangle
of SLM traps: both controls on the zone's control line and the target on the
target line above. One AOD row carries atoms between lines through a transit
lane between the storage line and the zones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..device import DeviceSpec
from ..formula import Clause, SatFormula
from .coloring import ClauseColoring

# Non-interacting pairs are kept at least this factor beyond the Rydberg radius.
CLEARANCE = 1.2
CONTROL0, TARGET, CONTROL1 = 0, 1, 2


class CapacityError(ValueError):
    """The formula needs more traps or AOD lines than the device provides."""

    def __init__(self, resource: str, required: int, available: int):
        self.resource = resource
        self.required = required
        self.available = available
        super().__init__(f"device capacity: {resource} requires {required}, available {available}")


@dataclass(frozen=True)
class Slot:
    clause: int
    control0: int
    control1: int
    target: int

    @property
    def qubits(self) -> tuple[int, int, int]:
        return (self.control0, self.control1, self.target)


@dataclass(frozen=True)
class ExecStep:
    layer: int
    color: int
    zone: int
    slots: tuple[Slot, ...]

    def atom_order(self) -> list[int]:
        """Left-to-right order of control atoms in the AOD row while executing."""
        return [q for s in self.slots for q in (s.control0, s.control1)]

    def qubits(self) -> set[int]:
        return {q for s in self.slots for q in s.qubits}


def clause_roles(clause: Clause) -> tuple[int, int, int]:
    """(control0, control1, target) qubits: the two smallest variables control."""
    a, b, c = sorted(lit.index for lit in clause)
    return a, b, c


@dataclass(frozen=True)
class ColorZoneLayout:
    num_qubits: int
    steps: tuple[ExecStep, ...]
    slots_per_zone: int
    zone_origins: tuple[tuple[float, float], ...]
    rydberg_distance: float
    triangle_side: float
    triangle_height: float
    slot_pitch: float
    storage_pitch: float
    lane_y: float
    pair_drop: float
    separation: float
    park_x: float
    column_pitch: float
    num_columns: int

    # --- trap bookkeeping --------------------------------------------------

    def storage_trap(self, qubit: int) -> int:
        return qubit

    def zone_trap(self, zone: int, slot: int, role: int) -> int:
        return self.num_qubits + zone * 3 * self.slots_per_zone + 3 * slot + role

    def slot_position(self, zone: int, slot: int, role: int) -> tuple[float, float]:
        ox, oy = self.zone_origins[zone]
        x = ox + slot * self.slot_pitch
        if role == CONTROL0:
            return (round(x, 6), round(oy, 6))
        if role == CONTROL1:
            return (round(x + self.triangle_side, 6), round(oy, 6))
        return (round(x + self.triangle_side / 2, 6), round(oy + self.triangle_height, 6))

    def slm_positions(self) -> list[tuple[float, float]]:
        out = [(round(q * self.storage_pitch, 6), 0.0) for q in range(self.num_qubits)]
        for zone in range(len(self.zone_origins)):
            for slot in range(self.slots_per_zone):
                for role in (CONTROL0, TARGET, CONTROL1):
                    out.append(self.slot_position(zone, slot, role))
        return out

    def park_position(self, col: int) -> float:
        return round(self.park_x + col * self.column_pitch, 6)

    def control_line(self, zone: int) -> float:
        return round(self.zone_origins[zone][1], 6)

    def home(self, step: int | None) -> dict[int, int]:
        """SLM trap of every qubit between execution steps (after ``step`` ran; ``None`` = start)."""
        traps = {q: self.storage_trap(q) for q in range(self.num_qubits)}
        if step is None:
            return traps
        exec_step = self.steps[step]
        for j, slot in enumerate(exec_step.slots):
            traps[slot.control0] = self.zone_trap(exec_step.zone, j, CONTROL0)
            traps[slot.control1] = self.zone_trap(exec_step.zone, j, CONTROL1)
            traps[slot.target] = self.zone_trap(exec_step.zone, j, TARGET)
        return traps

    def trap_y(self, trap: int) -> float:
        return self.slm_positions_cached()[trap][1]

    def slm_positions_cached(self) -> list[tuple[float, float]]:
        cache = self.__dict__.get("_slm_cache")
        if cache is None:
            cache = self.slm_positions()
            object.__setattr__(self, "_slm_cache", cache)
        return cache

    def color_order(self, step: int) -> list[int]:
        return self.steps[step].atom_order()


def geometry(spec: DeviceSpec) -> dict[str, float]:
    """Derived distances; raises ValueError if the isolation factor leaves no clearance."""
    r = spec.rydberg_distance
    side = spec.triangle_side
    height = side * math.sqrt(3) / 2
    iso = spec.isolation_factor * r
    clear = CLEARANCE * r
    # Lowering the control row by pair_drop takes both controls out of the target's range.
    pair_drop = max(math.sqrt(clear**2 - (side / 2) ** 2) - height, spec.min_trap_distance / 2)
    # Sliding one control column by `separation` takes it out of range of both partners.
    separation = max(clear - side, math.sqrt(max(clear**2 - height**2, 0.0)) - side / 2)
    # neighbouring slots may shift toward each other in the same stage
    gap = iso - 2 * separation
    if gap < clear or gap < spec.min_trap_distance:
        raise ValueError(
            f"isolation_factor {spec.isolation_factor} too small: separated controls come within "
            f"{gap:.3f} um of neighbouring slots"
        )
    if iso - height < clear:
        raise ValueError("isolation_factor too small for zone spacing")
    return {
        "side": side,
        "height": height,
        "iso": iso,
        "pair_drop": pair_drop,
        "separation": separation,
        "slot_pitch": side + iso,
    }


def build_steps(formula: SatFormula, coloring: ClauseColoring, layers: int) -> list[ExecStep]:
    groups = coloring.groups()
    steps: list[ExecStep] = []
    for layer in range(layers):
        for color, clauses in enumerate(groups):
            slots = tuple(Slot(ci, *clause_roles(formula.clauses[ci])) for ci in clauses)
            steps.append(ExecStep(layer, color, len(steps) % 2, slots))
    return steps


def build_layout(
    formula: SatFormula,
    coloring: ClauseColoring,
    spec: DeviceSpec,
    layers: int = 1,
    num_columns: int | None = None,
) -> ColorZoneLayout:
    g = geometry(spec)
    steps = build_steps(formula, coloring, layers)
    n = formula.num_variables
    k = max((len(s.slots) for s in steps), default=0)
    iso = g["iso"]
    slot_pitch = g["slot_pitch"]
    origins = ((0.0, 2 * iso), (iso, 3 * iso))
    max_x = max((n - 1) * iso, iso + (k - 1) * slot_pitch + g["side"], 0.0)
    traps = n + 2 * 3 * k
    if traps > spec.max_slm_traps:
        raise CapacityError("SLM traps", traps, spec.max_slm_traps)
    columns = num_columns if num_columns is not None else max(2 * k, 1)
    if columns > spec.max_aod_columns:
        raise CapacityError("AOD columns", columns, spec.max_aod_columns)
    return ColorZoneLayout(
        num_qubits=n,
        steps=tuple(steps),
        slots_per_zone=k,
        zone_origins=origins,
        rydberg_distance=spec.rydberg_distance,
        triangle_side=g["side"],
        triangle_height=g["height"],
        slot_pitch=slot_pitch,
        storage_pitch=iso,
        lane_y=round(iso, 6),
        pair_drop=round(g["pair_drop"], 6),
        separation=round(g["separation"], 6),
        park_x=round(max_x + iso, 6),
        column_pitch=round(2 * spec.min_trap_distance, 6),
        num_columns=columns,
    )
