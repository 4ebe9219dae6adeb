"""Execution time, estimated probability of success (EPS) and compilation reports."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

from .circuit import CCZ, CZ
from .device import (
    AodInit,
    Bind,
    DeviceSpec,
    RamanGlobal,
    RamanLocal,
    Rydberg,
    Shuttle,
    SlmInit,
    Transfer,
    instruction_time,
)
from .formula import SatFormula, make_clause
from .optimizer.compression import (
    compressed_fragment,
    ccz_break_even,
    fragment_gates,
    inventory,
    ladder_fragment,
)
from .program import PulseProgram

SCHEMA_VERSION = 1
CSV_COLUMNS = ("size", "variant", "compile_s", "exec_s", "eps", "pulses", "cz", "ccz", "colors")

_KIND_NAMES = {
    SlmInit: "slm",
    AodInit: "aod",
    Bind: "bind",
    Transfer: "transfer",
    Shuttle: "shuttle",
    RamanLocal: "raman_local",
    RamanGlobal: "raman_global",
    Rydberg: "rydberg",
}
PULSE_KINDS = ("raman_local", "raman_global", "rydberg")


def execution_time(prog: PulseProgram, spec: DeviceSpec) -> float:
    """Sum over parallel groups of the slowest instruction in each group."""
    return sum(max(instruction_time(s.instruction, spec) for s in group) for group in prog.groups())


def log_eps(prog: PulseProgram, spec: DeviceSpec) -> float:
    fid = spec.fidelities
    total = 0.0
    for step in prog.steps:
        instr = step.instruction
        if isinstance(instr, RamanLocal):
            total += math.log(fid.f_1q)
        elif isinstance(instr, RamanGlobal):
            total += len(step.gates) * math.log(fid.f_1q)
        elif isinstance(instr, Rydberg):
            for g in step.gates:
                total += math.log(fid.f_ccz if g.kind == CCZ else fid.f_cz)
        elif isinstance(instr, Transfer):
            total += math.log(fid.f_transfer)
        elif isinstance(instr, Shuttle):
            if fid.f_move_per_um is not None:
                total += abs(instr.offset) * math.log(fid.f_move_per_um)
            else:
                total += math.log(fid.f_move)
    if spec.use_decoherence:
        total -= execution_time(prog, spec) / spec.coherence_time
    return total


def eps(prog: PulseProgram, spec: DeviceSpec) -> float:
    """Product of per-operation success probabilities (optionally times idle decoherence)."""
    return math.exp(log_eps(prog, spec))


def pulse_counts(prog: PulseProgram) -> dict[str, int]:
    counts = Counter(_KIND_NAMES[type(s.instruction)] for s in prog.steps)
    return {name: counts.get(name, 0) for name in _KIND_NAMES.values()}


def multiqubit_gate_counts(prog: PulseProgram) -> dict[str, int]:
    counts = Counter(g.kind for g in prog.gates())
    return {"cz": counts.get(CZ, 0), "ccz": counts.get(CCZ, 0)}


def fragment_ccz_threshold(spec: DeviceSpec, gamma: float = 0.5) -> float | None:
    """Break-even CCZ fidelity for one fresh all-negative clause."""
    clause = make_clause([-1, -2, -3])
    comp = inventory(fragment_gates(compressed_fragment(clause, gamma, 1.0)))
    lad = inventory(fragment_gates(ladder_fragment(clause, gamma)))
    return ccz_break_even(comp, lad, spec.fidelities)


@dataclass(frozen=True)
class CompilationReport:
    num_variables: int
    num_clauses: int
    num_colors: int
    compressed: bool
    pulse_counts: dict[str, int]
    multiqubit_gate_counts: dict[str, int]
    timeline_duration: float
    eps: float
    compile_wall_time: float
    shuttle_batches: int
    ccz_threshold: float | None
    ccz_threshold_fragment: float | None
    eps_compressed_estimate: float
    eps_ladder_estimate: float
    qaoa: dict[str, float] = field(default_factory=dict)
    device_fingerprint: str = ""
    device: dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def total_pulses(self) -> int:
        return sum(self.pulse_counts.get(k, 0) for k in PULSE_KINDS)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CompilationReport:
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {data.get('schema_version')!r}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> CompilationReport:
        return cls.from_dict(json.loads(text))


def report(formula: SatFormula, result, spec: DeviceSpec, compile_wall_time: float, params=None) -> CompilationReport:
    """Assemble a report from one :func:`~fpqa_sat.optimizer.compile` result."""
    prog = result.program
    d = result.decision
    qaoa = {"gamma": params.gamma, "beta": params.beta, "layers": params.layers} if params else {}
    return CompilationReport(
        num_variables=formula.num_variables,
        num_clauses=len(formula.clauses),
        num_colors=result.coloring.num_colors,
        compressed=result.compressed,
        pulse_counts=pulse_counts(prog),
        multiqubit_gate_counts=multiqubit_gate_counts(prog),
        timeline_duration=execution_time(prog, spec),
        eps=eps(prog, spec),
        compile_wall_time=compile_wall_time,
        shuttle_batches=result.shuttle_batches,
        ccz_threshold=d.ccz_threshold,
        ccz_threshold_fragment=fragment_ccz_threshold(spec, params.gamma if params else 0.5),
        eps_compressed_estimate=d.eps_compressed,
        eps_ladder_estimate=d.eps_ladder,
        qaoa=qaoa,
        device_fingerprint=spec.fingerprint(),
        device=spec.to_dict(),
    )


# --- batch CSV ----------------------------------------------------------------------


def csv_row(size: int, variant: str, rep: CompilationReport) -> dict[str, Any]:
    return {
        "size": size,
        "variant": variant,
        "compile_s": rep.compile_wall_time,
        "exec_s": rep.timeline_duration,
        "eps": rep.eps,
        "pulses": rep.total_pulses,
        "cz": rep.multiqubit_gate_counts["cz"],
        "ccz": rep.multiqubit_gate_counts["ccz"],
        "colors": rep.num_colors,
    }


def aggregate(rows: Iterable[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Mean of every numeric column per (size, variant), sorted by size then variant."""
    groups: dict[tuple[int, str], list[Mapping[str, Any]]] = defaultdict(list)
    for r in rows:
        groups[(int(r["size"]), str(r["variant"]))].append(r)
    out = []
    for (size, variant), rs in sorted(groups.items()):
        row: dict[str, Any] = {"size": size, "variant": variant}
        for col in CSV_COLUMNS[2:]:
            vals = [float(r[col]) for r in rs if r.get(col) not in (None, "")]
            row[col] = sum(vals) / len(vals) if vals else ""
        row["instances"] = len(rs)
        out.append(row)
    return out


def write_csv(rows: Sequence[Mapping[str, Any]], path, columns: Sequence[str] = CSV_COLUMNS) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)
