"""The compile pipeline: coloring, zone layout, shuttling and lockstep clause execution."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, replace
from fractions import Fraction

from ..circuit import CCNOT, H_ANGLES, LogicalCircuit, LogicalGate, ccz, cz, u3
from ..device import AodInit, Bind, DeviceSpec, RamanGlobal, RamanLocal, Rydberg, SlmInit, SlmTrap
from ..formula import Clause, SatFormula
from ..program import PulseProgram, StepRecorder
from ..synth import QaoaParams, rz_angle, to_u3
from .coloring import ClauseColoring, color_clauses
from .compression import (
    A,
    B,
    C,
    SEP,
    CompressionDecision,
    FragmentItem,
    Inventory,
    Stage,
    compressed_fragment,
    decide,
    fragment_gates,
    inventory,
    ladder_fragment,
    pair_coefficient,
)
from .layout import CONTROL0, CONTROL1, CapacityError, ColorZoneLayout, build_layout, clause_roles
from .shuttling import AodDriver, Move, carry, grouped_batches, transition_moves

_LOWERED = (A, SEP)


@dataclass(frozen=True)
class CompileResult:
    circuit: LogicalCircuit
    program: PulseProgram
    layout: ColorZoneLayout
    coloring: ClauseColoring
    decision: CompressionDecision
    compressed: bool
    shuttle_batches: int
    """Batches moved between execution steps (initial loading excluded)."""

    def __iter__(self) -> Iterator:
        return iter((self.circuit, self.program, self.layout))


# --- per-step execution ---------------------------------------------------


def _column_xs(layout: ColorZoneLayout, zone: int, slot: int, config: str) -> tuple[float, float]:
    x0 = layout.slot_position(zone, slot, CONTROL0)[0]
    x1 = layout.slot_position(zone, slot, CONTROL1)[0]
    if config == B:
        x0 -= layout.separation
    elif config in (C, SEP):
        x1 += layout.separation
    return x0, x1


def _emit_singles(rec: StepRecorder, queues: dict[int, list[LogicalGate]]) -> None:
    """Local Raman pulses, packed so each layer addresses every qubit at most once."""
    depth = max((len(q) for q in queues.values()), default=0)
    for layer in range(depth):
        items = []
        for q in sorted(queues):
            if layer < len(queues[q]):
                g = to_u3(queues[q][layer])
                items.append((RamanLocal(q, *g.params), (g,)))
        rec.group(items)
    queues.clear()


def _split(items: Sequence[FragmentItem]) -> tuple[list[list[LogicalGate]], list[Stage]]:
    segments: list[list[LogicalGate]] = [[]]
    stages: list[Stage] = []
    for item in items:
        if isinstance(item, Stage):
            stages.append(item)
            segments.append([])
        else:
            segments[-1].append(item)
    return segments, stages


def execute_step(layout: ColorZoneLayout, index: int, fragments: Sequence[Sequence[FragmentItem]], driver: AodDriver) -> None:
    """Run one color's clause fragments in lockstep (one fragment per slot)."""
    step = layout.steps[index]
    zone, rec = step.zone, driver.rec
    line = layout.control_line(zone)
    split = [_split(f) for f in fragments]
    n_stages = {len(stages) for _, stages in split}
    if len(n_stages) > 1:
        raise ValueError("fragments of one step must have equal stage counts")
    n_stages = n_stages.pop() if n_stages else 0

    tri = [x for j in range(len(step.slots)) for x in _column_xs(layout, zone, j, "TRI")]
    driver.place_columns(tri)
    driver.move_row(line)
    driver.transfers(
        (layout.zone_trap(zone, j, role), 2 * j + k)
        for j in range(len(step.slots))
        for k, role in enumerate((CONTROL0, CONTROL1))
    )

    queues: dict[int, list[LogicalGate]] = {}
    for k in range(n_stages + 1):
        for segments, _ in split:
            for g in segments[k]:
                queues.setdefault(g.qubits[0], []).append(g)
        if k == n_stages:
            break
        stages = [stages[k] for _, stages in split]
        active = [s for s in stages if s.gate is not None]
        if not active:
            continue
        for s in active:
            queues.setdefault(s.gate.qubits[-1], []).append(u3(s.gate.qubits[-1], *H_ANGLES))
        _emit_singles(rec, queues)
        lowered = {s.config in _LOWERED for s in stages}
        if len(lowered) > 1:
            raise ValueError(f"stage {k} mixes row heights")
        driver.move_columns(
            {2 * j + c: x for j, s in enumerate(stages) for c, x in enumerate(_column_xs(layout, zone, j, s.config))}
        )
        driver.move_row(line - layout.pair_drop if lowered.pop() else line)
        natives = tuple(ccz(*s.gate.qubits) if s.gate.kind == CCNOT else cz(*s.gate.qubits) for s in active)
        rec.single(Rydberg(), natives)
        for s in active:
            queues.setdefault(s.gate.qubits[-1], []).append(u3(s.gate.qubits[-1], *H_ANGLES))
    _emit_singles(rec, queues)

    driver.move_columns({c: x for c, x in enumerate(tri)})
    driver.move_row(line)
    driver.transfers(
        (layout.zone_trap(zone, j, role), 2 * j + k)
        for j in range(len(step.slots))
        for k, role in enumerate((CONTROL0, CONTROL1))
    )
    driver.park()


# --- fragments for a whole formula ------------------------------------------


def plan_fragments(
    formula: SatFormula, layout: ColorZoneLayout, gamma: float, compress: bool
) -> list[list[list[FragmentItem]]]:
    """Fragments per execution step and slot.

    In compressed mode the control-pair term of all clauses sharing a control
    pair is summed and applied once, by the first of them to run in each layer.
    """
    pair_total: dict[tuple[int, int], Fraction] = {}
    if compress:
        for clause in formula.clauses:
            key = clause_roles(clause)[:2]
            pair_total[key] = pair_total.get(key, Fraction(0)) + pair_coefficient(clause)
    out = []
    done: set[tuple[int, int]] = set()
    layer = -1
    for step in layout.steps:
        if step.layer != layer:
            layer, done = step.layer, set()
        frags = []
        for slot in step.slots:
            clause = formula.clauses[slot.clause]
            if compress:
                frags.append(compress_fragment_with_pairs(clause, done, gamma, pair_total))
            else:
                frags.append(ladder_fragment(clause, gamma))
        out.append(frags)
    return out


def compress_fragment_with_pairs(
    clause: Clause, done: set[tuple[int, int]], gamma: float, pair_total: dict[tuple[int, int], Fraction]
) -> list[FragmentItem]:
    key = clause_roles(clause)[:2]
    angle = None
    if key not in done:
        done.add(key)
        total = pair_total.get(key, pair_coefficient(clause))
        if total != 0:
            angle = rz_angle(total, gamma)
    return compressed_fragment(clause, gamma, angle)


def compress_clause(
    clause: Clause,
    control_pairs_done: set[tuple[int, int]],
    spec: DeviceSpec,
    gamma: float,
    pair_angle: float | None = None,
) -> tuple[list[LogicalGate], list]:
    """Compressed fragment of one clause plus a standalone instruction stream realizing it.

    ``control_pairs_done`` is updated in place. ``pair_angle`` overrides the
    clause's own control-pair rotation (used when several clauses share it).
    """
    key = clause_roles(clause)[:2]
    if key in control_pairs_done:
        angle = None
    else:
        control_pairs_done.add(key)
        angle = pair_angle if pair_angle is not None else rz_angle(pair_coefficient(clause), gamma)
        if angle == 0:
            angle = None
    items = compressed_fragment(clause, gamma, angle)
    n = max(lit.index for lit in clause) + 1
    formula = SatFormula(n, (clause,))
    layout = build_layout(formula, color_clauses(formula), spec)
    rec = StepRecorder()
    driver = _initialize(layout, rec)
    for batch in grouped_batches(layout, transition_moves(layout, None, 0)):
        carry(driver, batch)
    driver.park()
    execute_step(layout, 0, [items], driver)
    return fragment_gates(items), [s.instruction for s in rec.steps]


# --- whole-program assembly -------------------------------------------------


def _initialize(layout: ColorZoneLayout, rec: StepRecorder) -> AodDriver:
    rec.single(SlmInit(layout.slm_positions_cached()))
    rec.single(AodInit([layout.park_position(c) for c in range(layout.num_columns)], [layout.lane_y]))
    for q in range(layout.num_qubits):
        rec.single(Bind(q, SlmTrap(layout.storage_trap(q))))
    return AodDriver(layout, rec)


def _global(rec: StepRecorder, n: int, angles: tuple[float, float, float]) -> None:
    if n:
        rec.single(RamanGlobal(*angles), tuple(u3(q, *angles) for q in range(n)))


def fragments_inventory(fragments: Sequence[Sequence[Sequence[FragmentItem]]]) -> Inventory:
    total = Inventory()
    for step in fragments:
        for frag in step:
            total = total + inventory(fragment_gates(frag))
    return total


def compile(
    formula: SatFormula,
    params: QaoaParams | None = None,
    spec: DeviceSpec | None = None,
    compress: bool | None = None,
) -> CompileResult:
    """Compile a MAX-3SAT formula to a validated-by-construction FPQA pulse program.

    ``compress=None`` decides by comparing the success probability of the
    compressed and ladder inventories; ``True``/``False`` force a mode.
    """
    params = params or QaoaParams()
    spec = spec or DeviceSpec()
    coloring = color_clauses(formula)
    layout = build_layout(formula, coloring, spec, params.layers)
    n = formula.num_variables

    comp = plan_fragments(formula, layout, params.gamma, True)
    ladder = plan_fragments(formula, layout, params.gamma, False)
    decision = decide(fragments_inventory(comp), fragments_inventory(ladder), spec.fidelities)
    use_compression = decision.compress if compress is None else compress
    fragments = comp if use_compression else ladder

    plans: list[list[list[Move]]] = []
    prev = None
    for i in range(len(layout.steps)):
        plans.append(grouped_batches(layout, transition_moves(layout, prev, i)))
        prev = i
    widest = max((len(b) for plan in plans for b in plan), default=0)
    columns = max(layout.num_columns, widest)
    if columns > spec.max_aod_columns:
        raise CapacityError("AOD columns", columns, spec.max_aod_columns)
    layout = replace(layout, num_columns=columns)

    rec = StepRecorder()
    driver = _initialize(layout, rec)
    _global(rec, n, H_ANGLES)
    inter_color = 0
    for i, step in enumerate(layout.steps):
        if i and layout.steps[i - 1].layer != step.layer:
            _global(rec, n, (2 * params.beta, 0.0, 0.0))
        for batch in plans[i]:
            carry(driver, batch)
        if plans[i]:
            driver.park()
        if i:
            inter_color += len(plans[i])
        execute_step(layout, i, fragments[i], driver)
    for _ in range(params.layers if not layout.steps else 1):
        _global(rec, n, (2 * params.beta, 0.0, 0.0))
    program = rec.program(n)
    return CompileResult(
        circuit=program.logical_circuit(),
        program=program,
        layout=layout,
        coloring=coloring,
        decision=decision,
        compressed=use_compression,
        shuttle_batches=inter_color,
    )
