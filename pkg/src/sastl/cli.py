"""Command-line front end.

Exit status: 0 when every requirement holds at every evaluated point, 1 when
any is violated, 2 on input or evaluation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import formula as F
from .errors import SaSTLError
from .monitor import EngineConfig, EvalStats, Monitor
from .parser import Requirement, load_requirements
from .report import BenchmarkRow, MonitorReport, RequirementResult, benchmark_json, benchmark_text
from .signals import SpatioTemporalSignal, ingest_many
from .spatial import PoIGraph, load_graph
from .synthetic import parse_params, write_synthetic

log = logging.getLogger("sastl")

MAX_VIOLATIONS = 10


class UsageError(SaSTLError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sastl", description="Monitor SaSTL requirements over city sensor data.")
    p.add_argument("--graph", help="location graph JSON (output path with --gen-synthetic)")
    p.add_argument("--data", nargs="+", help="signal CSV file(s) (output path with --gen-synthetic)")
    p.add_argument("--requirements", help="requirement file, one 'name: formula' per line")
    when = p.add_mutually_exclusive_group()
    when.add_argument("--time", type=float, help="evaluation time (default: first sample time)")
    when.add_argument("--time-sweep", metavar="START:STEP:END", help="evaluate at START, START+STEP, ... <= END")
    where = p.add_mutually_exclusive_group()
    where.add_argument("--location", help="evaluation location id")
    where.add_argument("--at-all-labeled", metavar="LABEL", help="evaluate at every location carrying LABEL")
    p.add_argument("--threads", type=int, default=1, help="workers for spatial operators (default 1)")
    p.add_argument("--backend", choices=("process", "thread"), default="process",
                   help="worker kind used when --threads > 1")
    p.add_argument("--no-cost-ordering", action="store_true", help="evaluate conjuncts in written order")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a text table")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--benchmark", action="store_true",
                   help="time every requirement under standard and cost-ordered evaluation")
    p.add_argument("--bench-threads", default="1,4,8", help="thread counts for --benchmark (default 1,4,8)")
    p.add_argument("--gen-synthetic", metavar="PARAMS",
                   help="write a synthetic graph/data pair, e.g. nodes=100,labels=School:0.05,vars=Noise,samples=10")
    p.add_argument("--seed", type=int, help="random seed for --gen-synthetic")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_sweep(text: str) -> list[float]:
    try:
        start, step, end = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--time-sweep expects START:STEP:END, got {text!r}") from None
    if step <= 0:
        raise UsageError("--time-sweep step must be > 0")
    if end < start:
        raise UsageError("--time-sweep end precedes start")
    times = []
    k = 0
    while start + k * step <= end + 1e-9 * max(1.0, abs(end)):
        times.append(start + k * step)
        k += 1
    return times


def anchor_locations(req: Requirement, graph: PoIGraph, location, label) -> list[str]:
    if location is not None:
        graph.require(location)
        return [location]
    if label is not None:
        return graph.labeled(label)
    if F.whole_domain_anchor(req.formula):
        if len(graph) == 0:
            raise UsageError("graph has no nodes")
        return [graph.nodes[0]]
    raise UsageError(f"requirement {req.name!r} (line {req.line}) is not anchored on the whole domain; "
                     "pass --location or --at-all-labeled")


def evaluate_requirement(engine: Monitor, req: Requirement, times, locations) -> RequirementResult:
    total = EvalStats()
    violations = []
    verdict = True
    start = time.perf_counter()
    for t in times:
        for loc in locations:
            ok, stats = engine.evaluate(req.formula, t, loc)
            total.absorb(stats)
            if not ok:
                verdict = False
                if len(violations) < MAX_VIOLATIONS:
                    violations.append({"t": t, "location": loc})
    return RequirementResult(
        name=req.name,
        formula=req.text,
        verdict=verdict,
        wall_time=time.perf_counter() - start,
        atomic_evaluations=total.atomic_evaluations,
        locations_visited=total.locations_visited,
        vacuity_count=total.vacuity_count,
        points_checked=len(times) * len(locations),
        violations=violations,
    )


def _load(args):
    if not (args.graph and args.data and args.requirements):
        raise UsageError("--graph, --data and --requirements are required")
    graph = load_graph(args.graph)
    signal = ingest_many(args.data)
    reqs = load_requirements(args.requirements)
    needed = set()
    for req in reqs:
        needed |= F.free_variables(req.formula)
    missing = sorted(needed - signal.variables)
    if missing:
        log.warning("variables %s have no data; their atoms are vacuously satisfied", ", ".join(missing))
        signal = signal.with_variables(missing)
    stray = sorted(set(signal.locations()) - set(graph.labels))
    if stray:
        log.warning("%d data location(s) are not graph nodes and will be ignored (e.g. %s)", len(stray), stray[0])
    return graph, signal, reqs


def _times(args, signal: SpatioTemporalSignal) -> list[float]:
    if args.time is not None:
        return [args.time]
    if args.time_sweep:
        return parse_sweep(args.time_sweep)
    rng = signal.time_range()
    return [rng[0] if rng else 0.0]


def run(args) -> tuple[MonitorReport, str]:
    graph, signal, reqs = _load(args)
    config = EngineConfig(cost_ordering=not args.no_cost_ordering, thread_count=args.threads,
                          backend=args.backend)
    engine = Monitor(graph, signal, config)
    times = _times(args, signal)
    plans = [(req, anchor_locations(req, graph, args.location, args.at_all_labeled)) for req in reqs]
    report = MonitorReport(metadata={
        "thread_count": config.thread_count,
        "cost_ordering": config.cost_ordering,
        "times": times,
        "graph_nodes": len(graph),
        "data_time_range": list(signal.time_range()) if signal.time_range() else None,
        "variables": sorted(signal.variables),
    })
    for req, locs in plans:
        report.requirements.append(evaluate_requirement(engine, req, times, locs))
    return report, report.to_json() if args.json else report.to_text()


def benchmark(args) -> tuple[list[BenchmarkRow], str]:
    graph, signal, reqs = _load(args)
    times = _times(args, signal)
    try:
        thread_counts = [int(x) for x in args.bench_threads.split(",") if x]
    except ValueError:
        raise UsageError(f"bad --bench-threads {args.bench_threads!r}") from None
    plans = [(req, anchor_locations(req, graph, args.location, args.at_all_labeled)) for req in reqs]
    modes = [("standard", False, 1)] + [("cost-ordered", True, n) for n in thread_counts]
    rows: list[BenchmarkRow] = []
    for req, locs in plans:
        verdicts = set()
        for mode, ordered, threads in modes:
            engine = Monitor(graph, signal, EngineConfig(cost_ordering=ordered, thread_count=threads,
                                                         backend=args.backend))
            res = evaluate_requirement(engine, req, times, locs)
            verdicts.add(res.verdict)
            rows.append(BenchmarkRow(req.name, mode, threads, res.verdict, res.wall_time,
                                     res.atomic_evaluations, res.locations_visited))
        if len(verdicts) != 1:
            raise SaSTLError(f"requirement {req.name!r}: verdict differs between evaluation modes")
    return rows, benchmark_json(rows) if args.json else benchmark_text(rows)


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.gen_synthetic is not None:
            if not (args.graph and args.data and len(args.data) == 1):
                raise UsageError("--gen-synthetic needs --graph PATH and a single --data PATH to write")
            try:
                params = parse_params(args.gen_synthetic, args.seed)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            graph, signal = write_synthetic(params, args.graph, args.data[0])
            log.info("wrote %d nodes to %s and %d samples to %s", len(graph), args.graph, len(signal),
                     args.data[0])
            return 0
        if args.benchmark:
            rows, text = benchmark(args)
            _emit(text, args.output)
            return 0 if all(r.verdict for r in rows) else 1
        report, text = run(args)
        _emit(text, args.output)
        return 0 if report.all_satisfied else 1
    except (SaSTLError, OSError, json.JSONDecodeError) as exc:
        print(f"sastl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
