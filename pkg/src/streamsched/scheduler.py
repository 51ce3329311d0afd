"""Streaming and non-streaming schedules.

Times are integers.  A task's first element leaves at ``fo`` and its last at
``lo``; an element emitted at step ``t`` can be consumed by a streaming
successor in the same step, so each element-wise hop adds one time unit.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .analysis import streaming_intervals, work
from .graph import NodeKind, TaskGraph, topological_order
from .partition import SpatialPartition, check_partition


class ScheduleError(ValueError):
    pass


@dataclass
class TaskTimes:
    st: int
    fo: int
    lo: int
    pe: Optional[int]
    block: int


@dataclass
class Schedule:
    times: dict = field(default_factory=dict)  # node index -> TaskTimes
    p: int = 0
    streaming: bool = True
    intervals: dict = field(default_factory=dict)  # block -> analysis.Intervals

    @property
    def makespan(self) -> int:
        return max((t.lo for t in self.times.values()), default=0)

    def __getitem__(self, v) -> TaskTimes:
        return self.times[v]

    def to_dict(self, graph: TaskGraph) -> dict:
        tasks = []
        for v in sorted(self.times):
            t = self.times[v]
            tasks.append({"task": graph.nodes[v].id, "pe": t.pe, "block": t.block,
                          "st": t.st, "fo": t.fo, "lo": t.lo})
        return {"makespan": self.makespan, "tasks": tasks}

    def to_json(self, graph: TaskGraph) -> str:
        return json.dumps(self.to_dict(graph), indent=1)


def makespan(schedule: Schedule) -> int:
    return schedule.makespan


def sequential_time(graph: TaskGraph) -> int:
    return work(graph)[1]


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


def schedule_streaming(graph: TaskGraph, part: SpatialPartition) -> Schedule:
    """Schedule the blocks back to back, pipelining every edge inside a block.

    Block ``b`` starts at ``start`` = the latest last-out time of all earlier
    blocks.  Tasks without an in-block predecessor (block sources) start there;
    the others start at the latest first-out of their in-block predecessors.
    Inputs coming from earlier blocks are read from memory and never delay a
    task beyond the block start; a block-source downsampler reads them at one
    element per step, so its first output leaves ``ceil(1/R)`` after it starts.
    An upsampler's last ``R`` outputs follow its last input at the pace its
    in-block descendants allow, which can be faster than the steady state.
    """
    problems = check_partition(graph, part)
    if problems:
        raise ScheduleError("partition does not match graph: " + "; ".join(problems))
    block_of = part.block_of
    order = topological_order(graph)
    position = {v: i for i, v in enumerate(order)}
    sched = Schedule(p=part.p, streaming=True)
    start = 0
    for b, members in enumerate(part.blocks):
        iv = streaming_intervals(graph, members)
        sched.intervals[b] = iv
        si_in, si_out = iv.si_in, iv.si_out
        pe = 0
        for v in sorted(members, key=position.__getitem__):
            node = graph.nodes[v]
            inner = [u for u in graph.preds(v) if block_of[u] == b]
            if node.is_buffer:
                ready = max([sched.times[u].lo for u in inner] + [start])
                fo = ready + 1
                lo = fo + _ceil((graph.k_out(v) - 1) * si_out[v])
                sched.times[v] = TaskTimes(ready, fo, lo, None, b)
                continue
            rate = node.effective_rate()
            if node.kind is NodeKind.SINK:
                count, interval = graph.k_in(v), si_in[v]
            else:
                count, interval = graph.k_out(v), si_out[v]
            if not inner:
                st = start
                fo = st + (_ceil(1 / rate) if rate < 1 else 1)
                lo = fo + _ceil((count - 1) * interval)
            else:
                st = max(sched.times[u].fo for u in inner)
                fo = st + (_ceil((1 / rate - 1) * si_in[v]) + 1 if rate < 1 else 1)
                last = max(sched.times[u].lo for u in inner)
                lo = last + (_ceil((rate - 1) * _drain_interval(graph, v, block_of, b)) + 1 if rate > 1 else 1)
            sched.times[v] = TaskTimes(st, fo, lo, pe, b)
            pe += 1
        start = max([start] + [sched.times[v].lo for v in members if graph.nodes[v].occupies_pe])
    return sched


def _drain_interval(graph: TaskGraph, v: int, block_of: dict, b: int) -> Fraction:
    """Output interval of ``v`` once its inputs are exhausted.

    Only the in-block streaming descendants of ``v`` can still throttle it, so
    the interval is taken over the subgraph they induce together with ``v``.
    """
    seen, todo = {v}, [v]
    while todo:
        x = todo.pop()
        for w in graph.succs(x):
            if w not in seen and block_of[w] == b and not graph.nodes[w].is_buffer:
                seen.add(w)
                todo.append(w)
    return streaming_intervals(graph, seen).si_out[v]


def bottom_levels(graph: TaskGraph) -> dict:
    """b(v) = W(v) + max successor b; buffers have zero duration."""
    b = {}
    for v in reversed(topological_order(graph)):
        b[v] = graph.work(v) + max((b[w] for w in graph.succs(v)), default=0)
    return b


def schedule_nonstreaming(graph: TaskGraph, p: int) -> Schedule:
    """List scheduling with bottom-level priorities and insertion into idle gaps.

    Every edge is buffered: a task may start only once all its predecessors
    have finished.  Each task goes to the PE slot giving the earliest finish
    (lowest PE index on ties).
    """
    if not isinstance(p, int) or isinstance(p, bool) or p <= 0:
        raise ScheduleError(f"number of PEs must be a positive integer, got {p!r}")
    blev = bottom_levels(graph)
    topo = topological_order(graph)
    position = {v: i for i, v in enumerate(topo)}
    # sorting by b-level is topological when every task has positive work;
    # the position tie-break keeps zero-work buffers behind their inputs
    order = sorted(range(len(graph)), key=lambda v: (-blev[v], position[v]))
    finish = {}
    busy = [[] for _ in range(p)]  # sorted (start, end) per PE
    sched = Schedule(p=p, streaming=False)
    done = set()
    pending = list(order)
    while pending:
        # pick the highest-priority task whose predecessors are all placed
        for i, v in enumerate(pending):
            if all(u in done for u in graph.preds(v)):
                break
        v = pending.pop(i)
        ready = max((finish[u] for u in graph.preds(v)), default=0)
        dur = graph.work(v)
        if graph.nodes[v].is_buffer:
            finish[v] = ready
            sched.times[v] = TaskTimes(ready, ready, ready, None, 0)
            done.add(v)
            continue
        best = None
        for q in range(p):
            s = _earliest_gap(busy[q], ready, dur)
            if best is None or s + dur < best[0] + dur:
                best = (s, q)
        s, q = best
        bisect.insort(busy[q], (s, s + dur))
        finish[v] = s + dur
        sched.times[v] = TaskTimes(s, s + 1 if dur else s, s + dur, q, 0)
        done.add(v)
    return sched


def _earliest_gap(slots: list, ready: int, dur: int) -> int:
    t = ready
    for s, e in slots:
        if e <= t:
            continue
        if s - t >= dur:
            return t
        t = max(t, e)
    return t
