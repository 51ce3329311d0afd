"""Spatial block partitioning.

A partition is an ordered list of blocks, each holding at most ``p`` PE-occupying
tasks.  Buffer nodes ride along in the block of their earliest successor and
never count against ``p``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analysis import node_levels, streaming_intervals
from .graph import NodeKind, TaskGraph, topological_order


class Variant(enum.Enum):
    SB_LTS = "sb-lts"
    SB_RLX = "sb-rlx"
    ELEMWISE_LEVEL = "elemwise"
    DOWNSAMPLER_WORK = "downsampler"


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class SpatialPartition:
    blocks: tuple  # tuple of tuples of node indices (tasks and attached buffers)
    variant: Variant
    p: int

    @property
    def block_of(self) -> dict:
        out = {}
        for i, b in enumerate(self.blocks):
            for v in b:
                out[v] = i
        return out

    def tasks(self, graph: TaskGraph, i: int) -> list:
        return [v for v in self.blocks[i] if graph.nodes[v].occupies_pe]

    def to_dict(self, graph: TaskGraph) -> dict:
        return {"variant": self.variant.value, "p": self.p,
                "blocks": [[graph.nodes[v].id for v in b] for b in self.blocks]}


def check_partition(graph: TaskGraph, part: SpatialPartition) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    seen = {}
    for i, b in enumerate(part.blocks):
        ntasks = 0
        for v in b:
            if v in seen:
                problems.append(f"node {graph.nodes[v].id!r} appears in blocks {seen[v]} and {i}")
            seen[v] = i
            ntasks += graph.nodes[v].occupies_pe
        if ntasks > part.p:
            problems.append(f"block {i} holds {ntasks} tasks > p={part.p}")
        if ntasks == 0:
            problems.append(f"block {i} holds no tasks")
    missing = [graph.nodes[v].id for v in range(len(graph)) if v not in seen]
    if missing:
        problems.append(f"nodes not assigned: {missing}")
        return problems
    for e in graph.edges:
        if seen[e.src] > seen[e.dst]:
            problems.append(f"edge {graph.nodes[e.src].id}->{graph.nodes[e.dst].id} goes backwards "
                            f"(block {seen[e.src]} -> {seen[e.dst]})")
    return problems


def _attach_buffers(graph: TaskGraph, task_blocks: list) -> tuple:
    """Place each buffer in the block of its earliest successor."""
    where = {}
    for i, b in enumerate(task_blocks):
        for v in b:
            where[v] = i
    blocks = [list(b) for b in task_blocks]
    # reverse topological order so chained buffers resolve through each other
    for v in reversed(topological_order(graph)):
        if not graph.nodes[v].is_buffer:
            continue
        succ_blocks = [where[w] for w in graph.succs(v)]
        if succ_blocks:
            i = min(succ_blocks)
        else:
            pred_blocks = [where[u] for u in graph.preds(v) if u in where]
            i = max(pred_blocks, default=0)
        where[v] = i
        blocks[i].append(v)
    return tuple(tuple(sorted(b)) for b in blocks)


class _Residual:
    """Residual graph over tasks; buffers disappear once all their inputs are taken."""

    def __init__(self, graph: TaskGraph):
        self.graph = graph
        self.remaining = [len(graph.in_edges[v]) for v in range(len(graph))]
        self.sources = set()
        self.left = 0
        for v in range(len(graph)):
            if graph.nodes[v].occupies_pe:
                self.left += 1
        for v in range(len(graph)):
            if self.remaining[v] == 0:
                self._release(v)

    def _release(self, v):
        if self.graph.nodes[v].is_buffer:
            self.take(v)
        else:
            self.sources.add(v)

    def take(self, v):
        self.sources.discard(v)
        if self.graph.nodes[v].occupies_pe:
            self.left -= 1
        for w in self.graph.succs(v):
            self.remaining[w] -= 1
            if self.remaining[w] == 0:
                self._release(w)


def _check_p(p):
    if not isinstance(p, int) or isinstance(p, bool) or p <= 0:
        raise PartitionError(f"number of PEs must be a positive integer, got {p!r}")


def partition_greedy(graph: TaskGraph, p: int, variant: Variant = Variant.SB_RLX,
                     trace: Optional[list] = None) -> SpatialPartition:
    """Greedy spatial-block construction over the residual graph.

    A candidate (a current source of the residual graph) is admissible when it
    has no predecessor in the open block, or when it produces no more data than
    every block source it reaches through the block and admitting it leaves
    the streaming interval of every block source unchanged.  SB-RLX falls back
    to the least-producing candidate when nothing is admissible, so its blocks
    are always full except the last.  Ties go to the lower level, then index.

    ``trace`` (if given) receives one ``(block, node, admissible)`` tuple per step.
    """
    _check_p(p)
    variant = Variant(variant)
    if variant not in (Variant.SB_LTS, Variant.SB_RLX):
        raise PartitionError(f"greedy partitioning supports sb-lts and sb-rlx, not {variant.value}")
    level = node_levels(graph)
    res = _Residual(graph)
    blocks = [[]]
    cur = set()
    cur_sources = {}   # block source -> its output size
    reach = {}         # node in block -> block sources it depends on (within block)
    base_si = {}

    def key(v):
        return (level[v], v)

    while res.left > 0:
        cands = sorted(res.sources, key=key)
        chosen, admissible = None, False
        for c in cands:
            in_block = [u for u in graph.preds(c) if u in cur]
            if not in_block:
                chosen, admissible = c, True
                break
            srcs = set().union(*(reach[u] for u in in_block))
            if any(graph.k_out(c) > cur_sources[s] for s in srcs):
                continue
            si = streaming_intervals(graph, cur | {c}).si_out
            if all(si[s] <= base_si[s] for s in cur_sources):
                chosen, admissible = c, True
                break
        if chosen is None and variant is Variant.SB_RLX and cands:
            chosen = min(cands, key=lambda v: (graph.k_out(v), level[v], v))
        if trace is not None:
            trace.append((len(blocks) - 1, chosen, admissible))
        if chosen is not None:
            in_block = [u for u in graph.preds(chosen) if u in cur]
            cur.add(chosen)
            blocks[-1].append(chosen)
            if in_block:
                reach[chosen] = set().union(*(reach[u] for u in in_block))
            else:
                reach[chosen] = {chosen}
                cur_sources[chosen] = graph.k_out(chosen)
            base_si = {s: x for s, x in streaming_intervals(graph, cur).si_out.items() if s in cur_sources}
            res.take(chosen)
        if (len(blocks[-1]) >= p or chosen is None) and res.left > 0:
            blocks.append([])
            cur, cur_sources, reach, base_si = set(), {}, {}, {}
    blocks = [b for b in blocks if b]
    return SpatialPartition(_attach_buffers(graph, blocks), variant, p)


def partition_elementwise(graph: TaskGraph, p: int) -> SpatialPartition:
    """Sort tasks by level (ties by index) and cut consecutive chunks of ``p``."""
    _check_p(p)
    for n in graph.nodes:
        if n.is_buffer:
            raise PartitionError("level partitioning requires a buffer-free graph")
        if n.kind is NodeKind.COMPUTE and n.rate != 1:
            raise PartitionError(f"node {n.id!r} is not element-wise (rate {n.rate})")
    level = node_levels(graph)
    order = sorted(graph.pe_nodes(), key=lambda v: (level[v], v))
    blocks = [tuple(order[i:i + p]) for i in range(0, len(order), p)]
    return SpatialPartition(tuple(blocks), Variant.ELEMWISE_LEVEL, p)


def partition_downsampler(graph: TaskGraph, p: int) -> SpatialPartition:
    """Pick the available task of highest work (ties: lower level, index); fill blocks of ``p``."""
    _check_p(p)
    for n in graph.nodes:
        if n.is_buffer:
            raise PartitionError("work partitioning requires a buffer-free graph")
        if n.kind is NodeKind.COMPUTE and n.rate > 1:
            raise PartitionError(f"node {n.id!r} is an upsampler (rate {n.rate})")
    level = node_levels(graph)
    res = _Residual(graph)
    blocks = [[]]
    while res.left > 0:
        cand = min(res.sources, key=lambda v: (-graph.work(v), level[v], v))
        if len(blocks[-1]) >= p:
            blocks.append([])
        blocks[-1].append(cand)
        res.take(cand)
    return SpatialPartition(tuple(tuple(b) for b in blocks if b), Variant.DOWNSAMPLER_WORK, p)


def partition(graph: TaskGraph, p: int, variant) -> SpatialPartition:
    variant = Variant(variant)
    if variant is Variant.ELEMWISE_LEVEL:
        return partition_elementwise(graph, p)
    if variant is Variant.DOWNSAMPLER_WORK:
        return partition_downsampler(graph, p)
    return partition_greedy(graph, p, variant)


def distinct_work_per_level(graph: TaskGraph) -> int:
    """Largest number of distinct work values found on a single level."""
    level = node_levels(graph)
    by_level = {}
    for v in graph.pe_nodes():
        by_level.setdefault(level[v], set()).add(graph.work(v))
    return max((len(s) for s in by_level.values()), default=0)


def downsampler_bound(graph: TaskGraph, p: int, t1: int, depth: int) -> Fraction:
    n = len(graph.pe_nodes())
    x = distinct_work_per_level(graph)
    lv = max(node_levels(graph).values())
    return Fraction(t1, p) + depth + min(n - 1, (x - 1) * (lv - 1))
