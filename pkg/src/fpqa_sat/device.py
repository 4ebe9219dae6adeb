"""FPQA device model: SLM traps, a movable AOD grid and the eight annotation semantics.

Distances are micrometers, times seconds. :func:`apply` is a pure transition
``(state, instruction) -> state`` that raises :class:`DeviceError` when an
instruction's pre-condition does not hold.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Union

import numpy as np
from scipy.spatial import cKDTree

DEVICE_ENV_VAR = "FPQA_SAT_DEVICE"
_EPS = 1e-9


# --- device configuration -----------------------------------------------


@dataclass(frozen=True)
class Durations:
    raman_local: float = 1.0e-6
    raman_global: float = 1.0e-6
    rydberg: float = 3.6e-7
    transfer: float = 1.5e-5


@dataclass(frozen=True)
class Fidelities:
    f_1q: float = 0.9997
    f_cz: float = 0.993
    f_ccz: float = 0.98
    f_transfer: float = 0.999
    f_move: float = 1.0
    f_move_per_um: float | None = None


@dataclass(frozen=True)
class DeviceSpec:
    min_trap_distance: float = 5.0
    max_transfer_distance: float = 2.0
    rydberg_distance: float = 10.0
    move_speed: float = 5.5e5
    durations: Durations = field(default_factory=Durations)
    fidelities: Fidelities = field(default_factory=Fidelities)
    equidistance_tolerance: float = 0.01
    isolation_factor: float = 2.5
    triangle_factor: float = 0.9
    max_slm_traps: int = 20000
    max_aod_rows: int = 64
    max_aod_columns: int = 2048
    coherence_time: float = 1.5
    use_decoherence: bool = False

    def __post_init__(self):
        for name in ("min_trap_distance", "max_transfer_distance", "rydberg_distance", "move_speed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name, value in asdict(self.fidelities).items():
            if value is not None and not 0 < value <= 1:
                raise ValueError(f"fidelities.{name} must be in (0, 1], got {value}")
        for name, value in asdict(self.durations).items():
            if value < 0:
                raise ValueError(f"durations.{name} must be >= 0")
        if self.triangle_factor * self.rydberg_distance < self.min_trap_distance:
            raise ValueError("clause triangle side (triangle_factor * rydberg_distance) is below min_trap_distance")
        if not 0 < self.triangle_factor < 1:
            raise ValueError("triangle_factor must be in (0, 1)")
        if self.isolation_factor <= 1:
            raise ValueError("isolation_factor must exceed 1")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DeviceSpec:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown device config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "durations" in kwargs:
            kwargs["durations"] = Durations(**kwargs["durations"])
        if "fidelities" in kwargs:
            kwargs["fidelities"] = Fidelities(**kwargs["fidelities"])
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **overrides: Any) -> DeviceSpec:
        """Copy with top-level or dotted (``fidelities.f_cz``) fields replaced."""
        data = self.to_dict()
        for key, value in overrides.items():
            if "." in key:
                group, name = key.split(".", 1)
                if group not in ("durations", "fidelities") or name not in data[group]:
                    raise ValueError(f"unknown device field {key!r}")
                data[group][name] = value
            else:
                if key not in data:
                    raise ValueError(f"unknown device field {key!r}")
                data[key] = value
        return DeviceSpec.from_dict(data)

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def triangle_side(self) -> float:
        return self.triangle_factor * self.rydberg_distance


def default_config_text() -> str:
    return resources.files("fpqa_sat").joinpath("data/default_device.json").read_text()


def load_device(path: str | os.PathLike | None = None) -> DeviceSpec:
    """Load a JSON device config; ``None`` falls back to the shipped defaults."""
    if path is None:
        data = json.loads(default_config_text())
    else:
        data = json.loads(Path(path).read_text())
    data.pop("_comment", None)
    return DeviceSpec.from_dict(data)


# --- instructions ---------------------------------------------------------


@dataclass(frozen=True)
class SlmTrap:
    index: int


@dataclass(frozen=True)
class AodTrap:
    row: int
    col: int


TrapRef = Union[SlmTrap, AodTrap]


@dataclass(frozen=True)
class SlmInit:
    positions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple((float(x), float(y)) for x, y in self.positions))


@dataclass(frozen=True)
class AodInit:
    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "ys", tuple(float(v) for v in self.ys))


@dataclass(frozen=True)
class Bind:
    qubit: int
    trap: TrapRef


@dataclass(frozen=True)
class Transfer:
    slm_index: int
    row: int
    col: int


@dataclass(frozen=True)
class Shuttle:
    axis: str
    index: int
    offset: float

    def __post_init__(self):
        if self.axis not in ("row", "column"):
            raise ValueError(f"shuttle axis must be 'row' or 'column', got {self.axis!r}")
        object.__setattr__(self, "offset", float(self.offset))


@dataclass(frozen=True)
class RamanLocal:
    qubit: int
    tx: float
    ty: float
    tz: float

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.tx, self.ty, self.tz)


@dataclass(frozen=True)
class RamanGlobal:
    tx: float
    ty: float
    tz: float

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.tx, self.ty, self.tz)


@dataclass(frozen=True)
class Rydberg:
    pass


FpqaInstruction = Union[SlmInit, AodInit, Bind, Transfer, Shuttle, RamanLocal, RamanGlobal, Rydberg]
MOVEMENT_TYPES = (Transfer, Shuttle)
PULSE_TYPES = (RamanLocal, RamanGlobal, Rydberg)


class DeviceError(ValueError):
    """A violated instruction pre-condition."""

    def __init__(self, instruction: object, constraint: str, detail: str):
        self.instruction = instruction
        self.constraint = constraint
        self.detail = detail
        super().__init__(f"{type(instruction).__name__}: {constraint}: {detail}")


# --- state ----------------------------------------------------------------


@dataclass(frozen=True)
class FpqaState:
    """Immutable device snapshot. ``aod_occupancy`` and ``bindings`` are never mutated in place."""

    slm_positions: tuple[tuple[float, float], ...] = ()
    slm_occupants: tuple[int | None, ...] = ()
    aod_rows: tuple[float, ...] = ()
    aod_cols: tuple[float, ...] = ()
    aod_occupancy: Mapping[tuple[int, int], int] = field(default_factory=dict)
    bindings: Mapping[int, TrapRef] = field(default_factory=dict)
    slm_ready: bool = False
    aod_ready: bool = False

    def trap_position(self, trap: TrapRef) -> tuple[float, float]:
        if isinstance(trap, SlmTrap):
            return self.slm_positions[trap.index]
        return (self.aod_cols[trap.col], self.aod_rows[trap.row])

    def qubit_position(self, qubit: int) -> tuple[float, float]:
        return self.trap_position(self.bindings[qubit])

    def atom_positions(self) -> dict[int, tuple[float, float]]:
        return {q: self.trap_position(t) for q, t in sorted(self.bindings.items())}

    @property
    def qubits(self) -> list[int]:
        return sorted(self.bindings)


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _check_spacing(instr, positions: Sequence[tuple[float, float]], dmin: float, what: str) -> None:
    if len(positions) < 2:
        return
    pts = np.asarray(positions, dtype=float)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(dmin - _EPS, output_type="ndarray")
    if len(pairs):
        i, j = pairs[0]
        raise DeviceError(
            instr,
            "min distance",
            f"{what} {tuple(pts[i])} and {tuple(pts[j])} closer than {dmin}",
        )


def _check_axis(instr, coords: Sequence[float], dmin: float, axis: str) -> None:
    for a, b in zip(coords, coords[1:]):
        if b <= a:
            raise DeviceError(instr, f"{axis} crossover", f"coordinates not strictly increasing: {a} then {b}")
        if b - a < dmin - _EPS:
            raise DeviceError(instr, "min distance", f"adjacent {axis}s {a} and {b} closer than {dmin}")


def _check_moved_atoms(
    instr, state: FpqaState, moved: Iterable[int], dmin: float
) -> None:
    moved = set(moved)
    if not moved:
        return
    positions = state.atom_positions()
    mine = np.array([positions[q] for q in sorted(moved)], dtype=float)
    others = [(q, p) for q, p in positions.items() if q not in moved]
    if not others:
        return
    other_pts = np.array([p for _, p in others], dtype=float)
    d = np.sqrt(((mine[:, None, :] - other_pts[None, :, :]) ** 2).sum(axis=-1))
    i, j = np.unravel_index(np.argmin(d), d.shape)
    if d[i, j] < dmin - _EPS:
        q = sorted(moved)[i]
        raise DeviceError(
            instr,
            "min distance",
            f"atom q{q} at {tuple(mine[i])} within {d[i, j]:.6f} of atom q{others[j][0]} (min {dmin})",
        )


def apply(state: FpqaState, instr: FpqaInstruction, spec: DeviceSpec) -> FpqaState:
    """Return the state after ``instr``; raise :class:`DeviceError` on a violated pre-condition."""
    dmin = spec.min_trap_distance
    if isinstance(instr, SlmInit):
        if state.slm_ready:
            raise DeviceError(instr, "already initialized", "SLM layer was already configured")
        if len(instr.positions) > spec.max_slm_traps:
            raise DeviceError(instr, "device capacity", f"{len(instr.positions)} SLM traps > {spec.max_slm_traps}")
        _check_spacing(instr, instr.positions, dmin, "SLM traps")
        return replace(
            state,
            slm_positions=instr.positions,
            slm_occupants=(None,) * len(instr.positions),
            slm_ready=True,
        )
    if isinstance(instr, AodInit):
        if state.aod_ready:
            raise DeviceError(instr, "already initialized", "AOD grid was already configured")
        if len(instr.xs) > spec.max_aod_columns or len(instr.ys) > spec.max_aod_rows:
            raise DeviceError(
                instr,
                "device capacity",
                f"{len(instr.ys)}x{len(instr.xs)} AOD grid exceeds {spec.max_aod_rows}x{spec.max_aod_columns}",
            )
        _check_axis(instr, instr.xs, dmin, "column")
        _check_axis(instr, instr.ys, dmin, "row")
        return replace(state, aod_cols=instr.xs, aod_rows=instr.ys, aod_ready=True)
    if isinstance(instr, Bind):
        return _apply_bind(state, instr, dmin)
    if isinstance(instr, Transfer):
        return _apply_transfer(state, instr, spec)
    if isinstance(instr, Shuttle):
        return _apply_shuttle(state, instr, dmin)
    if isinstance(instr, RamanLocal):
        if instr.qubit not in state.bindings:
            raise DeviceError(instr, "unknown qubit", f"q{instr.qubit} is not bound to any trap")
        return state
    if isinstance(instr, (RamanGlobal, Rydberg)):
        return state
    raise TypeError(f"not an FPQA instruction: {instr!r}")


def _trap_exists(state: FpqaState, trap: TrapRef) -> bool:
    if isinstance(trap, SlmTrap):
        return 0 <= trap.index < len(state.slm_positions)
    return 0 <= trap.row < len(state.aod_rows) and 0 <= trap.col < len(state.aod_cols)


def _occupant(state: FpqaState, trap: TrapRef) -> int | None:
    if isinstance(trap, SlmTrap):
        return state.slm_occupants[trap.index]
    return state.aod_occupancy.get((trap.row, trap.col))


def _apply_bind(state: FpqaState, instr: Bind, dmin: float) -> FpqaState:
    if not _trap_exists(state, instr.trap):
        raise DeviceError(instr, "unknown trap", f"{instr.trap} does not exist")
    if instr.qubit in state.bindings:
        raise DeviceError(instr, "qubit already bound", f"q{instr.qubit} is bound to {state.bindings[instr.qubit]}")
    if instr.qubit < 0:
        raise DeviceError(instr, "unknown qubit", f"negative qubit id {instr.qubit}")
    current = _occupant(state, instr.trap)
    if current is not None:
        raise DeviceError(instr, "destination occupied", f"{instr.trap} already holds q{current}")
    new = _place(state, instr.qubit, instr.trap)
    _check_moved_atoms(instr, new, [instr.qubit], dmin)
    return new


def _place(state: FpqaState, qubit: int, trap: TrapRef) -> FpqaState:
    bindings = dict(state.bindings)
    bindings[qubit] = trap
    if isinstance(trap, SlmTrap):
        occ = list(state.slm_occupants)
        occ[trap.index] = qubit
        return replace(state, slm_occupants=tuple(occ), bindings=bindings)
    aod = dict(state.aod_occupancy)
    aod[(trap.row, trap.col)] = qubit
    return replace(state, aod_occupancy=aod, bindings=bindings)


def _apply_transfer(state: FpqaState, instr: Transfer, spec: DeviceSpec) -> FpqaState:
    slm, aod = SlmTrap(instr.slm_index), AodTrap(instr.row, instr.col)
    for trap in (slm, aod):
        if not _trap_exists(state, trap):
            raise DeviceError(instr, "unknown trap", f"{trap} does not exist")
    gap = _dist(state.trap_position(slm), state.trap_position(aod))
    if gap > spec.max_transfer_distance + _EPS:
        raise DeviceError(
            instr,
            "transfer distance",
            f"SLM {instr.slm_index} at {state.trap_position(slm)} and AOD ({instr.row}, {instr.col}) "
            f"at {state.trap_position(aod)} are {gap:.6f} apart (max {spec.max_transfer_distance})",
        )
    a, b = _occupant(state, slm), _occupant(state, aod)
    if a is not None and b is not None:
        raise DeviceError(instr, "destination occupied", f"both traps hold atoms (q{a}, q{b})")
    if a is None and b is None:
        raise DeviceError(instr, "source empty", f"no atom at SLM {instr.slm_index} or AOD ({instr.row}, {instr.col})")
    bindings = dict(state.bindings)
    occ = list(state.slm_occupants)
    aod_occ = dict(state.aod_occupancy)
    if a is not None:
        occ[instr.slm_index] = None
        aod_occ[(instr.row, instr.col)] = a
        bindings[a] = aod
        moved = a
    else:
        del aod_occ[(instr.row, instr.col)]
        occ[instr.slm_index] = b
        bindings[b] = slm
        moved = b
    new = replace(state, slm_occupants=tuple(occ), aod_occupancy=aod_occ, bindings=bindings)
    if gap > _EPS:
        _check_moved_atoms(instr, new, [moved], spec.min_trap_distance)
    return new


def _apply_shuttle(state: FpqaState, instr: Shuttle, dmin: float) -> FpqaState:
    coords = state.aod_rows if instr.axis == "row" else state.aod_cols
    if not 0 <= instr.index < len(coords):
        raise DeviceError(instr, f"unknown {instr.axis}", f"{instr.axis} {instr.index} does not exist")
    if instr.offset == 0:
        return state
    new_coord = coords[instr.index] + instr.offset
    if instr.index > 0:
        left = coords[instr.index - 1]
        if new_coord <= left:
            raise DeviceError(instr, f"{instr.axis} crossover", f"{instr.axis} {instr.index} would move to {new_coord} past neighbor at {left}")
        if new_coord - left < dmin - _EPS:
            raise DeviceError(instr, "min distance", f"{instr.axis} {instr.index} at {new_coord} within {dmin} of neighbor at {left}")
    if instr.index + 1 < len(coords):
        right = coords[instr.index + 1]
        if new_coord >= right:
            raise DeviceError(instr, f"{instr.axis} crossover", f"{instr.axis} {instr.index} would move to {new_coord} past neighbor at {right}")
        if right - new_coord < dmin - _EPS:
            raise DeviceError(instr, "min distance", f"{instr.axis} {instr.index} at {new_coord} within {dmin} of neighbor at {right}")
    updated = list(coords)
    updated[instr.index] = new_coord
    if instr.axis == "row":
        new = replace(state, aod_rows=tuple(updated))
        moved = [q for (r, _), q in state.aod_occupancy.items() if r == instr.index]
    else:
        new = replace(state, aod_cols=tuple(updated))
        moved = [q for (_, c), q in state.aod_occupancy.items() if c == instr.index]
    _check_moved_atoms(instr, new, moved, dmin)
    return new


def replay(instructions: Iterable[FpqaInstruction], spec: DeviceSpec, state: FpqaState | None = None) -> FpqaState:
    state = state if state is not None else FpqaState()
    for instr in instructions:
        state = apply(state, instr, spec)
    return state


def check_invariants(state: FpqaState, spec: DeviceSpec) -> None:
    """Raise AssertionError if any state invariant fails (used by fuzz tests)."""
    dmin = spec.min_trap_distance
    for coords in (state.aod_rows, state.aod_cols):
        for a, b in zip(coords, coords[1:]):
            assert b > a and b - a >= dmin - _EPS, f"AOD spacing {a} -> {b}"
    seen: dict[int, TrapRef] = {}
    for i, q in enumerate(state.slm_occupants):
        if q is not None:
            assert q not in seen, f"q{q} bound twice"
            seen[q] = SlmTrap(i)
    for (r, c), q in state.aod_occupancy.items():
        assert q not in seen, f"q{q} bound twice"
        seen[q] = AodTrap(r, c)
    assert seen == dict(state.bindings), "bindings disagree with occupancy"
    pts = list(state.atom_positions().values())
    if len(pts) > 1:
        assert not cKDTree(np.asarray(pts)).query_pairs(dmin - _EPS), "atoms closer than min_trap_distance"


def rydberg_components(state: FpqaState, spec: DeviceSpec) -> list[frozenset[int]]:
    """Connected groups of atoms within ``rydberg_distance`` of each other (singletons omitted)."""
    positions = state.atom_positions()
    if len(positions) < 2:
        return []
    ids = list(positions)
    pts = np.array([positions[q] for q in ids], dtype=float)
    pairs = cKDTree(pts).query_pairs(spec.rydberg_distance + _EPS, output_type="ndarray")
    parent = list(range(len(ids)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, set[int]] = {}
    for i, q in enumerate(ids):
        groups.setdefault(find(i), set()).add(q)
    comps = [frozenset(g) for g in groups.values() if len(g) > 1]
    return sorted(comps, key=min)


def instruction_time(instr: FpqaInstruction, spec: DeviceSpec) -> float:
    d = spec.durations
    if isinstance(instr, Shuttle):
        return abs(instr.offset) / spec.move_speed
    if isinstance(instr, Transfer):
        return d.transfer
    if isinstance(instr, RamanLocal):
        return d.raman_local
    if isinstance(instr, RamanGlobal):
        return d.raman_global
    if isinstance(instr, Rydberg):
        return d.rydberg
    return 0.0
