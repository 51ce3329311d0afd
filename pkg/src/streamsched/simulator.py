"""Element-granularity discrete-event simulation of a scheduled, buffered graph.

The clock is a global integer step.  In every step each active task first
emits (if its consumed input covers another output element and every output
FIFO can take it), then reads one element from every input (if all streaming
inputs are non-empty and its pending outputs are flushed).  An element emitted
in step ``t`` can be read in step ``t``, which gives element-wise tasks one
step of latency at unit throughput.

FIFOs use blocking-after-service: a producer may complete one element while
the FIFO already holds ``capacity`` elements and then stalls until space frees.

Edges between blocks are read from memory.  Block ``i`` becomes active in the
step in which the last task of block ``i - 1`` emits its last element.
Buffer nodes absorb everything they receive and, once full, emit at most one
element per step.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .buffers import BufferPlan, buffer_plan, streaming_edges
from .graph import NodeKind, TaskGraph
from .partition import SpatialPartition, Variant, check_partition, partition
from .scheduler import Schedule, schedule_streaming

log = logging.getLogger(__name__)

STREAM, MEMORY, INTO_BUFFER = 0, 1, 2

from . import _simkernel_py

if os.environ.get("STREAMSCHED_PURE_PYTHON"):
    _kernel = _simkernel_py
else:
    try:
        from . import _simkernel as _kernel
    except ImportError:  # extension not built
        _kernel = _simkernel_py

KERNEL = "compiled" if _kernel is not _simkernel_py else "python"


class SimulationError(ValueError):
    pass


@dataclass
class SimReport:
    simulated_makespan: int
    schedule_makespan: int
    deadlocked: bool
    first_emit: dict = field(default_factory=dict)
    last_emit: dict = field(default_factory=dict)
    consumed: dict = field(default_factory=dict)
    produced: dict = field(default_factory=dict)
    blocked: list = field(default_factory=list)  # wait-for cycle (node indices) on deadlock

    @property
    def relative_error(self) -> Fraction:
        if self.schedule_makespan == 0:
            return Fraction(0)
        return Fraction(self.simulated_makespan - self.schedule_makespan, self.schedule_makespan)

    def to_dict(self, graph: TaskGraph) -> dict:
        ids = [n.id for n in graph.nodes]
        return {
            "simulated_makespan": self.simulated_makespan,
            "schedule_makespan": self.schedule_makespan,
            "deadlocked": self.deadlocked,
            "relative_error": float(self.relative_error),
            "blocked_cycle": [ids[v] for v in self.blocked],
            "tasks": [{"task": ids[v], "first_emit": self.first_emit.get(v), "last_emit": self.last_emit.get(v)}
                      for v in sorted(self.first_emit)],
        }


def _arrays(graph: TaskGraph, part: SpatialPartition, plan: BufferPlan):
    n, m = len(graph), len(graph.edges)
    block_of = part.block_of
    kind = np.zeros(n, np.int64)
    p = np.ones(n, np.int64)
    q = np.ones(n, np.int64)
    tin = np.zeros(n, np.int64)
    tout = np.zeros(n, np.int64)
    block = np.zeros(n, np.int64)
    for v, node in enumerate(graph.nodes):
        block[v] = block_of[v]
        if node.kind is NodeKind.SOURCE:
            tin[v] = tout[v] = graph.k_out(v)
        elif node.kind is NodeKind.SINK:
            tin[v] = tout[v] = graph.k_in(v)
        else:
            tout[v] = graph.k_out(v)
            if node.is_buffer:
                kind[v] = 1
                tin[v] = graph.k_in(v) * len(graph.in_edges[v])
            else:
                tin[v] = graph.k_in(v)
                p[v], q[v] = node.rate.numerator, node.rate.denominator
    etype = np.full(m, MEMORY, np.int64)
    cap = np.zeros(m, np.int64)
    for i, e in enumerate(graph.edges):
        if block_of[e.src] == block_of[e.dst]:
            if graph.nodes[e.dst].is_buffer:
                etype[i] = INTO_BUFFER
            else:
                etype[i] = STREAM
                try:
                    cap[i] = plan.capacity[i]
                except KeyError:
                    raise SimulationError(f"buffer plan lacks capacity for streaming edge {i}") from None
    in_ptr = np.zeros(n + 1, np.int64)
    out_ptr = np.zeros(n + 1, np.int64)
    for v in range(n):
        in_ptr[v + 1] = in_ptr[v] + len(graph.in_edges[v])
        out_ptr[v + 1] = out_ptr[v] + len(graph.out_edges[v])
    in_idx = np.array([e for v in range(n) for e in graph.in_edges[v]], np.int64)
    out_idx = np.array([e for v in range(n) for e in graph.out_edges[v]], np.int64)
    return kind, p, q, tin, tout, block, in_ptr, in_idx, out_ptr, out_idx, etype, cap


def simulate(graph: TaskGraph, part: SpatialPartition, schedule: Optional[Schedule],
             plan: BufferPlan, kernel=None) -> SimReport:
    problems = check_partition(graph, part)
    if problems:
        raise SimulationError("; ".join(problems))
    arrays = _arrays(graph, part, plan)
    n, m = len(graph), len(graph.edges)
    n_c = np.zeros(n, np.int64)
    n_p = np.zeros(n, np.int64)
    cnt = np.zeros(m, np.int64)
    first = np.full(n, -1, np.int64)
    last = np.full(n, -1, np.int64)
    kern = kernel or _kernel
    status, steps = kern.run(*arrays, len(part.blocks), n_c, n_p, cnt, first, last)
    deadlocked = status == 1
    report = SimReport(
        simulated_makespan=int(last.max()) if n else 0,
        schedule_makespan=schedule.makespan if schedule is not None else 0,
        deadlocked=deadlocked,
        first_emit={v: int(first[v]) for v in range(n) if first[v] >= 0},
        last_emit={v: int(last[v]) for v in range(n) if last[v] >= 0},
        consumed={v: int(n_c[v]) for v in range(n)},
        produced={v: int(n_p[v]) for v in range(n)},
    )
    if deadlocked:
        report.blocked = _wait_cycle(graph, arrays, n_c, n_p, cnt)
        log.debug("deadlock at step %d, cycle %s", steps, report.blocked)
    return report


def _wait_cycle(graph, arrays, n_c, n_p, cnt) -> list:
    """Follow wait-for edges (full output -> consumer, empty input -> producer) to a cycle."""
    kind, p, q, tin, tout, block, *_, etype, cap = arrays
    waits = {}
    for v in range(len(graph)):
        if n_p[v] >= tout[v] or kind[v] == 1:
            continue
        targets = []
        can_emit = (n_c[v] * p[v]) // q[v] >= n_p[v] + 1
        if can_emit:
            targets += [graph.edges[e].dst for e in graph.out_edges[v]
                        if etype[e] == STREAM and cnt[e] > cap[e]]
        else:
            targets += [graph.edges[e].src for e in graph.in_edges[v] if etype[e] == STREAM and cnt[e] == 0]
        if targets:
            waits[v] = targets
    for start in sorted(waits):
        path, pos, v = [], {}, start
        while v in waits and v not in pos:
            pos[v] = len(path)
            path.append(v)
            v = waits[v][0]
        if v in pos:
            return path[pos[v]:]
    return sorted(waits)


def uniform_plan(graph: TaskGraph, part: SpatialPartition, capacity: int) -> BufferPlan:
    return BufferPlan({e: capacity for e in streaming_edges(graph, part)})


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRecord:
    topology: str
    seed: int
    p: int
    variant: str
    sched_makespan: int
    sim_makespan: int
    deadlocked: bool

    @property
    def error(self) -> float:
        return (self.sim_makespan - self.sched_makespan) / self.sched_makespan


def box_stats(values) -> dict:
    """Median, quartiles, whiskers (furthest samples inside 1.5 IQR) and outliers."""
    a = np.sort(np.asarray(values, dtype=float))
    if a.size == 0:
        raise ValueError("no samples")
    q1, med, q3 = np.percentile(a, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = a[(a >= lo_fence) & (a <= hi_fence)]
    return {
        "median": float(med), "q1": float(q1), "q3": float(q3),
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in a[(a < lo_fence) | (a > hi_fence)]],
        "n": int(a.size),
    }


def run_cell(graph: TaskGraph, p: int, variant, topology: str = "", seed: int = 0) -> SweepRecord:
    part = partition(graph, p, variant)
    sched = schedule_streaming(graph, part)
    plan = buffer_plan(graph, part, sched)
    rep = simulate(graph, part, sched, plan)
    return SweepRecord(topology, seed, p, Variant(variant).value, sched.makespan,
                       rep.simulated_makespan, rep.deadlocked)


def error_sweep(config, p_list, n_graphs: int, seed: int = 0,
                variants=(Variant.SB_LTS, Variant.SB_RLX)) -> dict:
    """Generate ``n_graphs`` graphs, run every (p, variant) cell, summarize errors.

    Returns ``{"records": [...], "summary": {(p, variant): box_stats}}``.
    """
    from .generators import generate

    records = []
    for i in range(n_graphs):
        g = generate(config.with_seed(seed + i))
        for p in p_list:
            for var in variants:
                records.append(run_cell(g, p, var, config.name, seed + i))
    summary = {}
    for p in p_list:
        for var in variants:
            errs = [r.error for r in records if r.p == p and r.variant == Variant(var).value]
            summary[(p, Variant(var).value)] = box_stats(errs)
    return {"records": records, "summary": summary}


def report_json(graph: TaskGraph, report: SimReport) -> str:
    return json.dumps(report.to_dict(graph), indent=1)
