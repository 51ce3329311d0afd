"""``streamsched`` command line: compose the library steps and emit JSON or CSV."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import graph as G
from .analysis import analyze, streaming_depth
from .buffers import buffer_plan
from .generators import GenConfig, GeneratorError, generate
from .metrics import compute_metrics
from .partition import PartitionError, Variant, partition
from .scheduler import ScheduleError, schedule_nonstreaming, schedule_streaming
from .simulator import SimulationError, box_stats, simulate, uniform_plan

NONSTREAMING = "nonstreaming"
VARIANTS = [v.value for v in Variant] + [NONSTREAMING]
CSV_HEADER = ["topology", "seed", "p", "variant", "t1", "makespan", "speedup", "sslr",
              "utilization", "sim_makespan", "rel_error", "deadlock"]


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _p_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("PE counts must be positive")
    return vals


def _read_graph(path, validated=True):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError("io", str(exc)) from None
    return G.load(text, validated=validated)


def _write(text, path=None):
    if path:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _frac(x):
    return str(x) if isinstance(x, Fraction) and x.denominator != 1 else str(int(x))


def _config(args) -> GenConfig:
    topo = args.topology
    if topo == "pattern":
        if not args.pattern:
            raise CliError("usage", "--pattern is required for topology 'pattern'")
        return GenConfig("pattern", pattern=args.pattern, dims=tuple(args.dims or ()), seed=args.seed)
    size = {"chain": args.n, "fft": args.points, "gaussian": args.m, "cholesky": args.t}[topo]
    if size is None:
        flag = {"chain": "--n", "fft": "--points", "gaussian": "--m", "cholesky": "--t"}[topo]
        raise CliError("usage", f"{flag} is required for topology {topo!r}")
    return GenConfig(topo, size=size, volume_range=(args.vmin, args.vmax), seed=args.seed)


def _plan(graph, p, variant):
    if variant == NONSTREAMING:
        raise CliError("usage", "this command needs a streaming variant")
    part = partition(graph, p, variant)
    sched = schedule_streaming(graph, part)
    return part, sched


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args):
    _write(G.save(generate(_config(args))), args.output)


def cmd_validate(args):
    g = _read_graph(args.graph, validated=False)
    report = G.validate(g)
    out = {"ok": report.ok, "violations": [
        {"code": v.code, "message": v.message, "elements": list(v.elements)} for v in report.violations]}
    _write(json.dumps(out, indent=1))
    return 0 if report.ok else 1


def cmd_analyze(args):
    g = _read_graph(args.graph)
    a = analyze(g)
    ids = [n.id for n in g.nodes]
    out = {
        "t1": a.t1,
        "streaming_depth": a.streaming_depth,
        "supernodes": len(a.supernodes.supernodes),
        "tasks": [{"task": ids[v], "kind": g.nodes[v].kind.value, "work": a.work[v],
                   "level": _frac(a.level[v]), "wcc": a.wcc_id[v],
                   "si_in": _frac(a.si_in[v]) if v in a.si_in else None,
                   "si_out": _frac(a.si_out[v]) if v in a.si_out else None}
                  for v in range(len(g))],
    }
    _write(json.dumps(out, indent=1), args.output)


def cmd_partition(args):
    g = _read_graph(args.graph)
    if args.variant == NONSTREAMING:
        raise CliError("usage", "nonstreaming schedules have no spatial partition")
    _write(json.dumps(partition(g, args.p[0], args.variant).to_dict(g), indent=1), args.output)


def cmd_schedule(args):
    g = _read_graph(args.graph)
    if args.variant == NONSTREAMING:
        sched = schedule_nonstreaming(g, args.p[0])
    else:
        _, sched = _plan(g, args.p[0], args.variant)
    _write(sched.to_json(g), args.output)


def cmd_buffers(args):
    g = _read_graph(args.graph)
    part, sched = _plan(g, args.p[0], args.variant)
    _write(buffer_plan(g, part, sched).to_json(g), args.output)


def cmd_simulate(args):
    g = _read_graph(args.graph)
    part, sched = _plan(g, args.p[0], args.variant)
    plan = uniform_plan(g, part, args.capacity) if args.capacity else buffer_plan(g, part, sched)
    rep = simulate(g, part, sched, plan)
    _write(json.dumps(rep.to_dict(g), indent=1), args.output)
    return 1 if rep.deadlocked else 0


def _fmt(x):
    return f"{float(x):.6f}"


def bench_cell(config: GenConfig, p_list, variants, simulate_runs=True) -> list:
    """All CSV rows for one generated graph."""
    g = generate(config)
    depth = streaming_depth(g)
    rows = []
    for p in p_list:
        for var in variants:
            if var == NONSTREAMING:
                sched = schedule_nonstreaming(g, p)
                sim = None
            else:
                part = partition(g, p, var)
                sched = schedule_streaming(g, part)
                sim = simulate(g, part, sched, buffer_plan(g, part, sched)) if simulate_runs else None
            m = compute_metrics(g, sched, config.name, config.seed, var, depth)
            rows.append([config.name, config.seed, p, var, m.t1, m.makespan, _fmt(m.speedup), _fmt(m.sslr),
                         _fmt(m.pe_utilization),
                         "" if sim is None else sim.simulated_makespan,
                         "" if sim is None else _fmt(sim.relative_error),
                         "" if sim is None else int(sim.deadlocked)])
    return rows


def _bench_job(job):
    return bench_cell(*job)


def cmd_bench(args):
    base = _config(args)
    variants = args.variant_list or [Variant.SB_LTS.value, Variant.SB_RLX.value]
    for v in variants:
        if v not in VARIANTS:
            raise CliError("usage", f"unknown variant {v!r}")
    jobs = [(base.with_seed(args.seed + i), args.p, variants, not args.no_sim) for i in range(args.graphs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            chunks = list(pool.map(_bench_job, jobs))
    else:
        chunks = [_bench_job(j) for j in jobs]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r[0], VARIANTS.index(r[3]), r[2], r[1]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.summary:
        w.writerow(["topology", "p", "variant", "metric", "median", "q1", "q3", "whisker_low", "whisker_high", "n"])
        cols = {"speedup": 6, "sslr": 7, "utilization": 8, "rel_error": 10}
        for key in sorted({(r[0], r[3], r[2]) for r in rows}, key=lambda k: (k[0], VARIANTS.index(k[1]), k[2])):
            sel = [r for r in rows if (r[0], r[3], r[2]) == key]
            for name, c in cols.items():
                vals = [float(r[c]) for r in sel if r[c] != ""]
                if not vals:
                    continue
                s = box_stats(vals)
                w.writerow([key[0], key[2], key[1], name] + [_fmt(s[k]) for k in
                           ("median", "q1", "q3", "whisker_low", "whisker_high")] + [s["n"]])
    else:
        w.writerow(CSV_HEADER)
        w.writerows(rows)
    _write(buf.getvalue(), args.output)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="streamsched", description="Streaming task-graph scheduling toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def topo_flags(sp):
        sp.add_argument("--topology", required=True, choices=["chain", "fft", "gaussian", "cholesky", "pattern"])
        sp.add_argument("--n", type=int, help="chain length")
        sp.add_argument("--points", type=int, help="FFT points (power of two)")
        sp.add_argument("--m", type=int, help="Gaussian elimination matrix size")
        sp.add_argument("--t", type=int, help="Cholesky tiles per side")
        sp.add_argument("--pattern", help="pattern name for --topology pattern")
        sp.add_argument("--dims", type=int, nargs="*", help="pattern variant and dimensions")
        sp.add_argument("--vmin", type=int, default=16, help="smallest edge volume (power of two)")
        sp.add_argument("--vmax", type=int, default=1024, help="largest edge volume (power of two)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-o", "--output")

    def graph_flags(sp, p=True, variant=True):
        sp.add_argument("--graph", required=True)
        if p:
            sp.add_argument("--p", type=_p_list, required=True, help="number of PEs")
        if variant:
            sp.add_argument("--variant", choices=VARIANTS, default=Variant.SB_RLX.value)
        sp.add_argument("-o", "--output")

    sp = sub.add_parser("generate", help="write a synthetic or pattern graph")
    topo_flags(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("validate", help="check canonical well-formedness")
    sp.add_argument("--graph", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("analyze", help="streaming intervals, levels, work and depth")
    graph_flags(sp, p=False, variant=False)
    sp.set_defaults(func=cmd_analyze)

    for name, func, text in (("partition", cmd_partition, "spatial blocks"),
                             ("schedule", cmd_schedule, "ST/FO/LO per task"),
                             ("buffers", cmd_buffers, "FIFO capacities")):
        sp = sub.add_parser(name, help=text)
        graph_flags(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("simulate", help="run the element-level simulation")
    graph_flags(sp)
    sp.add_argument("--capacity", type=int, help="use this capacity on every FIFO instead of the plan")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bench", help="CSV sweep over generated graphs")
    topo_flags(sp)
    sp.add_argument("--graphs", type=int, default=10)
    sp.add_argument("--p", type=_p_list, required=True)
    sp.add_argument("--variant", dest="variant_list", type=lambda s: s.split(","),
                    help="comma list; default sb-lts,sb-rlx")
    sp.add_argument("--no-sim", action="store_true", help="skip the simulation columns")
    sp.add_argument("--summary", action="store_true", help="emit distribution statistics instead of rows")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return ap


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args) or 0
    except CliError as exc:
        code, msg = exc.code, str(exc)
    except G.GraphError as exc:
        code, msg = exc.code, str(exc)
    except (GeneratorError, PartitionError, ScheduleError, SimulationError) as exc:
        code, msg = type(exc).__name__, str(exc)
    except OSError as exc:
        code, msg = "io", str(exc)
    sys.stderr.write(json.dumps({"error": code, "message": msg}) + "\n")
    return 2 if code == "usage" else 1


def main():
    sys.exit(cli_main())
