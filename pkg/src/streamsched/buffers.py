"""FIFO sizing for deadlock-free streaming inside spatial blocks."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .graph import TaskGraph
from .partition import SpatialPartition
from .scheduler import Schedule, ScheduleError

DEFAULT_CAPACITY = 1


def streaming_edges(graph: TaskGraph, part: SpatialPartition) -> list:
    """Indices of edges that are FIFOs: both ends in one block, consumer not a buffer."""
    block_of = part.block_of
    return [i for i, e in enumerate(graph.edges)
            if block_of[e.src] == block_of[e.dst] and not graph.nodes[e.dst].is_buffer]


@dataclass(frozen=True)
class BufferPlan:
    capacity: dict  # edge index -> element count

    def to_list(self, graph: TaskGraph) -> list:
        return [{"src": graph.nodes[graph.edges[i].src].id, "dst": graph.nodes[graph.edges[i].dst].id,
                 "capacity": c} for i, c in sorted(self.capacity.items())]

    def to_json(self, graph: TaskGraph) -> str:
        return json.dumps(self.to_list(graph), indent=1)

    def with_capacity(self, value: int) -> "BufferPlan":
        return BufferPlan({e: value for e in self.capacity})


def cycle_nodes(nodes: Iterable[int], edges: Iterable[tuple]) -> list:
    """Groups of nodes lying on undirected cycles.

    Undirected DFS; every non-tree edge closes a cycle made of itself and the
    tree path between its endpoints.  Those cycle edges are then grouped into
    connected pieces, so cycles joined only by a bridge stay separate.
    Parallel edges count as a cycle of length two.
    """
    nodes = sorted(set(nodes))
    adj = {v: [] for v in nodes}
    elist = list(edges)
    for k, (a, b) in enumerate(elist):
        adj[a].append((b, k))
        adj[b].append((a, k))
    parent, depth = {}, {}
    on_cycle = set()  # edge indices
    for root in nodes:
        if root in depth:
            continue
        depth[root] = 0
        parent[root] = (None, None)
        stack = [(root, iter(adj[root]))]
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                continue
            w, k = nxt
            if k == parent[v][1]:
                continue
            if w not in depth:
                depth[w] = depth[v] + 1
                parent[w] = (v, k)
                stack.append((w, iter(adj[w])))
            elif depth[w] < depth[v]:
                on_cycle.add(k)
                x = v
                while x != w:
                    on_cycle.add(parent[x][1])
                    x = parent[x][0]
    cyc_adj = {}
    for k in on_cycle:
        a, b = elist[k]
        cyc_adj.setdefault(a, []).append(b)
        cyc_adj.setdefault(b, []).append(a)
    seen, groups = set(), []
    for v in nodes:
        if v not in cyc_adj or v in seen:
            continue
        comp, todo = [], [v]
        seen.add(v)
        while todo:
            x = todo.pop()
            comp.append(x)
            for y in cyc_adj[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        groups.append(frozenset(comp))
    return groups


def buffer_plan(graph: TaskGraph, part: SpatialPartition, schedule: Schedule) -> BufferPlan:
    """Size every FIFO of every block.

    A node on an undirected cycle with several in-block producers must absorb
    the lag between its slowest and fastest input: capacity on edge ``(u, v)``
    is ``ceil((max_t FO(t) - FO(u)) / si_out(u))`` clamped to ``[1, volume]``.
    All other FIFOs hold one element.
    """
    if not schedule.streaming:
        raise ScheduleError("buffer sizing needs a streaming schedule")
    block_of = part.block_of
    if set(schedule.times) != set(block_of) or any(schedule.times[v].block != b for v, b in block_of.items()):
        raise ScheduleError("schedule does not belong to this partition")
    fifo = streaming_edges(graph, part)
    cap = {e: DEFAULT_CAPACITY for e in fifo}
    per_block = {}
    for e in fifo:
        per_block.setdefault(block_of[graph.edges[e].src], []).append(e)
    fo = {v: t.fo for v, t in schedule.times.items()}
    for b, elist in per_block.items():
        si_out = schedule.intervals[b].si_out
        pairs = [(graph.edges[e].src, graph.edges[e].dst) for e in elist]
        members = {x for pr in pairs for x in pr}
        for region in cycle_nodes(members, pairs):
            for v in region:
                incoming = [e for e in elist if graph.edges[e].dst == v]
                if len({graph.edges[e].src for e in incoming}) < 2:
                    continue
                latest = max(fo[graph.edges[e].src] for e in incoming)
                for e in incoming:
                    u = graph.edges[e].src
                    need = math.ceil(Fraction(latest - fo[u]) / si_out[u])
                    cap[e] = max(1, min(need, graph.edges[e].volume))
    return BufferPlan(cap)


def join_capacity(fo_values: dict, fo_u: int, si_out_u) -> int:
    """Capacity for one input edge of a join, before clamping to the edge volume."""
    return max(1, math.ceil(Fraction(max(fo_values.values()) - fo_u) / Fraction(si_out_u)))
