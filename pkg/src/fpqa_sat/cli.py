"""Command-line driver: ``fpqa-sat compile | check | bench | config | generate``.

Exit codes
    0  success / programs equivalent
    1  input parse or validation error
    2  device capacity exceeded
    3  internal invariant violation
    4  check: only structural equivalence could be established
    5  check: mismatch
"""

from __future__ import annotations

import argparse
import json
import logging
import multiprocessing as mp
import os
import sys
import time
import traceback
from pathlib import Path
from typing import Any

from . import metrics
from .benchmarks import write_family
from .checker import EQUIVALENT, MISMATCH, check_program
from .device import DEVICE_ENV_VAR, DeviceError, DeviceSpec, default_config_text, load_device, replay
from .formula import DimacsError, SatFormula, parse_dimacs
from .optimizer import CapacityError, compile
from .synth import QaoaParams
from .wqasm import WqasmSyntaxError, emit, from_pulse_program, parse

log = logging.getLogger("fpqa_sat")

EXIT_OK, EXIT_PARSE, EXIT_CAPACITY, EXIT_INTERNAL, EXIT_STRUCTURAL, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5
DEFAULT_TIMEOUT = 20 * 3600.0


class InvariantError(RuntimeError):
    pass


# --- configuration ----------------------------------------------------------------


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_device(path: str | None, overrides: list[str] | None = None) -> DeviceSpec:
    """``--set`` flags override the config file (``--device`` or the env var), which overrides defaults."""
    path = path or os.environ.get(DEVICE_ENV_VAR)
    if path is None:
        log.warning("no device config given (--device or $%s); using built-in placeholder defaults", DEVICE_ENV_VAR)
    spec = load_device(path)
    if overrides:
        pairs = {}
        for item in overrides:
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"--set expects key=value, got {item!r}")
            pairs[key.strip()] = _parse_value(value.strip())
        spec = spec.with_overrides(**pairs)
    return spec


# --- compile ----------------------------------------------------------------------------


def compile_instance(formula: SatFormula, params: QaoaParams, spec: DeviceSpec, compress: bool | None):
    """Compile, time the compile call alone, and re-validate the program on the device model."""
    t0 = time.perf_counter()
    result = compile(formula, params, spec, compress=compress)
    wall = time.perf_counter() - t0
    try:
        replay(result.program.instructions(), spec)
    except DeviceError as exc:
        raise InvariantError(f"compiled program violates a device constraint: {exc}") from exc
    if result.coloring.conflicts():
        raise InvariantError("clause coloring is not proper")
    return result, metrics.report(formula, result, spec, wall, params)


def _compress_flag(args) -> bool | None:
    if args.no_compress:
        return False
    if args.compress:
        return True
    return None


def cmd_compile(args) -> int:
    try:
        formula = parse_dimacs(Path(args.input).read_text())
        spec = resolve_device(args.device, args.set)
        params = QaoaParams(args.gamma, args.beta, args.layers)
    except (DimacsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        result, rep = compile_instance(formula, params, spec, _compress_flag(args))
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except Exception as exc:  # noqa: BLE001 - any other failure is an internal error
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL
    text = emit(from_pulse_program(result.program))
    out = Path(args.out) if args.out else Path(args.input).with_suffix(".wqasm")
    out.write_text(text)
    if args.report:
        Path(args.report).write_text(rep.to_json() + "\n")
    mq = rep.multiqubit_gate_counts
    print(
        f"{args.input}: N={rep.num_variables} M={rep.num_clauses} colors={rep.num_colors} "
        f"mode={'compressed' if rep.compressed else 'ladder'} cz={mq['cz']} ccz={mq['ccz']} "
        f"pulses={rep.total_pulses} exec={rep.timeline_duration:.6g}s eps={rep.eps:.6g} "
        f"compile={rep.compile_wall_time:.3f}s -> {out}"
    )
    return EXIT_OK


# --- check ------------------------------------------------------------------------------


def cmd_check(args) -> int:
    try:
        prog = parse(Path(args.program).read_text())
        spec = resolve_device(args.device, args.set)
    except (WqasmSyntaxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    verdict = check_program(prog, spec, args.max_unitary_qubits)
    body = verdict.to_json()
    if args.report:
        Path(args.report).write_text(body + "\n")
    if verdict.status == EQUIVALENT:
        print(f"{args.program}: equivalent")
        return EXIT_OK
    if verdict.status == MISMATCH:
        print(f"{args.program}: MISMATCH", file=sys.stderr)
        print(body)
        return EXIT_MISMATCH
    print(f"{args.program}: structurally equivalent only ({verdict.report.get('notice')})")
    return EXIT_STRUCTURAL


# --- bench ------------------------------------------------------------------------------


def _bench_worker(conn, path: str, variant: str, params: QaoaParams, spec: DeviceSpec, report_dir: str | None):
    try:
        formula = parse_dimacs(Path(path).read_text())
        compress = {"auto": None, "compressed": True, "ladder": False}[variant]
        _, rep = compile_instance(formula, params, spec, compress)
        if report_dir:
            name = f"{Path(path).stem}.{variant}.json"
            (Path(report_dir) / name).write_text(rep.to_json() + "\n")
        row = metrics.csv_row(formula.num_variables, variant, rep)
        conn.send({**row, "instance": Path(path).name, "status": "ok"})
    except BaseException as exc:  # noqa: BLE001 - reported per instance
        conn.send({"instance": Path(path).name, "variant": variant, "status": f"error: {exc}"})
    finally:
        conn.close()


def run_isolated(tasks: list[tuple], jobs: int, timeout: float) -> list[dict[str, Any]]:
    """Run ``_bench_worker`` per task in its own process; results keep task order."""
    ctx = mp.get_context("fork") if hasattr(os, "fork") else mp.get_context()
    results: dict[int, dict[str, Any]] = {}
    queue = list(enumerate(tasks))
    running: dict[int, tuple[Any, Any, float, tuple]] = {}
    while queue or running:
        while queue and len(running) < jobs:
            i, task = queue.pop(0)
            recv, send = ctx.Pipe(duplex=False)
            proc = ctx.Process(target=_bench_worker, args=(send, *task))
            proc.start()
            send.close()
            running[i] = (proc, recv, time.monotonic(), task)
        for i, (proc, recv, start, task) in list(running.items()):
            if recv.poll(0.02) or (not proc.is_alive() and recv.poll()):
                try:
                    results[i] = recv.recv()
                except EOFError:
                    results[i] = {"instance": Path(task[0]).name, "variant": task[1], "status": "error: worker died"}
                proc.join()
                del running[i]
            elif not proc.is_alive():
                results[i] = {"instance": Path(task[0]).name, "variant": task[1], "status": "error: worker died"}
                del running[i]
            elif time.monotonic() - start > timeout:
                proc.kill()
                proc.join()
                results[i] = {"instance": Path(task[0]).name, "variant": task[1], "status": f"timeout after {timeout:g}s"}
                del running[i]
    return [results[i] for i in range(len(tasks))]


def cmd_bench(args) -> int:
    try:
        spec = resolve_device(args.device, args.set)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    directory = Path(args.directory)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_PARSE
    files = sorted(str(p) for p in directory.glob("*.cnf"))
    params = QaoaParams(args.gamma, args.beta, args.layers)
    if args.reports:
        Path(args.reports).mkdir(parents=True, exist_ok=True)
    tasks = [(f, v, params, spec, args.reports) for f in files for v in args.variants]
    rows = run_isolated(tasks, max(1, args.jobs), args.timeout) if tasks else []
    columns = list(metrics.CSV_COLUMNS) + ["instance", "status"]
    metrics.write_csv(rows, args.out, columns)
    if args.aggregate:
        ok = [r for r in rows if r.get("status") == "ok"]
        metrics.write_csv(metrics.aggregate(ok), args.aggregate, list(metrics.CSV_COLUMNS) + ["instances"])
    failed = sum(r.get("status") != "ok" for r in rows)
    print(f"{len(rows)} runs over {len(files)} instances, {failed} failed -> {args.out}")
    return EXIT_OK


# --- config / generate --------------------------------------------------------------------


def cmd_config(args) -> int:
    if args.default:
        sys.stdout.write(default_config_text())
        return EXIT_OK
    try:
        spec = resolve_device(args.device, args.set)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    print(json.dumps({"fingerprint": spec.fingerprint(), "device": spec.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_generate(args) -> int:
    for n in args.sizes:
        paths = write_family(args.out, n, args.count, args.seed, args.clauses)
        print(f"wrote {len(paths)} instances with {n} variables to {args.out}")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------------------------


def _device_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--device", help=f"device config JSON (default: ${DEVICE_ENV_VAR} or built-in)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one device field, e.g. fidelities.f_ccz=0.995 (repeatable)")


def _qaoa_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gamma", type=float, default=0.5, help="cost angle (radians)")
    p.add_argument("--beta", type=float, default=0.5, help="mixer angle (radians)")
    p.add_argument("--layers", type=int, default=1, help="QAOA depth p")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpqa-sat", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a DIMACS 3-CNF file to wQasm")
    p.add_argument("input")
    _device_args(p)
    _qaoa_args(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--no-compress", action="store_true", help="force the 8-CNOT ladder per clause")
    mode.add_argument("--compress", action="store_true", help="force CCNOT compression")
    p.add_argument("--out", help="output .wqasm path (default: input with .wqasm suffix)")
    p.add_argument("--report", help="write the JSON compilation report here")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="verify a wQasm program's annotations against its gates")
    p.add_argument("program")
    _device_args(p)
    p.add_argument("--max-unitary-qubits", type=int, default=10)
    p.add_argument("--report", help="write the JSON verdict here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="compile every .cnf in a directory and write a CSV")
    p.add_argument("directory")
    _device_args(p)
    _qaoa_args(p)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--aggregate", help="also write per-size means to this CSV")
    p.add_argument("--reports", help="directory for per-instance JSON reports")
    p.add_argument("--variants", nargs="+", default=["auto"], choices=["auto", "compressed", "ladder"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="per-instance seconds (default 20 h)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("config", help="print the effective device config")
    _device_args(p)
    p.add_argument("--default", action="store_true", help="print the shipped default file verbatim")
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("generate", help="write seeded uniform random 3-SAT instances")
    p.add_argument("--sizes", type=int, nargs="+", default=[20])
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--clauses", type=int, help="clauses per instance (default: SATLIB ratio)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="instances")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
