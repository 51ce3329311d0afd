"""Steady-state streaming analysis: intervals, levels, work and streaming depth.

Streaming intervals are exact ``Fraction``s measured in time units per element.
Within a weakly connected component of the buffer-split graph every node's
``si_out * k_out`` equals the largest ``k_out`` in the component, so the whole
analysis reduces to one union-find pass plus a max per component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .graph import NodeKind, Role, TaskGraph, GraphError, split_buffers, supernode_edges, topological_order


class AnalysisError(RuntimeError):
    pass


@dataclass(frozen=True)
class Intervals:
    si_in: dict   # node index -> Fraction
    si_out: dict  # node index -> Fraction
    wcc_in: dict  # node index -> component label of the item receiving inputs
    wcc_out: dict  # node index -> component label of the item producing outputs
    wcc_max: tuple  # component label -> largest element count streamed in it


class _UF:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def streaming_intervals(graph: TaskGraph, restrict_to: Optional[Iterable[int]] = None) -> Intervals:
    """Per-node input/output streaming intervals.

    With ``restrict_to`` the analysis covers the induced subgraph only.  Edges
    entering the subset from outside are buffered: each becomes a virtual
    buffer head whose volume joins the consumer's component, because the
    consumer still has to ingest that data from memory at one element per step.
    """
    members = list(range(len(graph))) if restrict_to is None else sorted(set(restrict_to))
    inside = set(members)
    in_item, out_item, weight = {}, {}, []

    def new(w):
        weight.append(w)
        return len(weight) - 1

    for v in members:
        node = graph.nodes[v]
        if node.is_buffer:
            in_item[v] = new(0)
            out_item[v] = new(graph.k_out(v))
        else:
            w = graph.k_in(v) if node.kind is NodeKind.SINK else graph.k_out(v)
            in_item[v] = out_item[v] = new(w)
    pairs = []
    for e in graph.edges:
        if e.dst not in inside:
            continue
        if e.src in inside:
            pairs.append((out_item[e.src], in_item[e.dst]))
        else:
            pairs.append((new(e.volume), in_item[e.dst]))
    uf = _UF(len(weight))
    for a, b in pairs:
        uf.union(a, b)

    labels = {}
    comp = []
    for i in range(len(weight)):
        comp.append(labels.setdefault(uf.find(i), len(labels)))
    cmax = [0] * len(labels)
    for i, w in enumerate(weight):
        if w > cmax[comp[i]]:
            cmax[comp[i]] = w

    si_in, si_out, wi, wo = {}, {}, {}, {}
    for v in members:
        node = graph.nodes[v]
        ci, co = comp[in_item[v]], comp[out_item[v]]
        wi[v], wo[v] = ci, co
        if node.kind is NodeKind.SINK:
            if graph.k_in(v) <= 0:
                raise AnalysisError(f"sink {node.id!r} consumes no elements")
            si_in[v] = si_out[v] = Fraction(cmax[ci], graph.k_in(v))
            continue
        kout = graph.k_out(v)
        if kout <= 0:
            raise AnalysisError(f"node {node.id!r} produces no elements but is not a sink")
        si_out[v] = Fraction(cmax[co], kout)
        if node.kind is NodeKind.SOURCE:
            si_in[v] = si_out[v]
        elif node.is_buffer:
            si_in[v] = Fraction(cmax[ci], graph.k_in(v)) if graph.k_in(v) else si_out[v]
        else:
            si_in[v] = si_out[v] * node.rate
    return Intervals(si_in, si_out, wi, wo, tuple(cmax))


def fixed_point_intervals(graph: TaskGraph) -> dict:
    """Reference solver for buffer-free graphs: relax edge balance until stable.

    Starts every output interval at 1 and repeatedly raises the faster side of
    each edge to match the slower one (edge interval = producer's output =
    consumer's input = consumer output * rate).  Independent of the component
    argument used by :func:`streaming_intervals`.
    """
    if graph.buffer_nodes():
        raise ValueError("fixed-point reference only handles buffer-free graphs")
    rate = [n.effective_rate() for n in graph.nodes]
    out = [Fraction(1)] * len(graph)
    changed = True
    while changed:
        changed = False
        for e in graph.edges:
            u, v = e.src, e.dst
            need_in = out[v] * rate[v]
            if out[u] < need_in:
                out[u] = need_in
                changed = True
            elif need_in < out[u]:
                out[v] = out[u] / rate[v]
                changed = True
    return {v: (out[v] * rate[v], out[v]) for v in range(len(graph))}


def node_levels(graph: TaskGraph) -> dict:
    """level(v) = 1 without parents, else max(R(v), 1) + max parent level."""
    lvl = {}
    for v in topological_order(graph):
        ps = graph.preds(v)
        if not ps:
            lvl[v] = Fraction(1)
        else:
            lvl[v] = max(graph.nodes[v].effective_rate(), 1) + max(lvl[u] for u in ps)
    return lvl


def graph_level(graph: TaskGraph, restrict_to: Optional[Iterable[int]] = None) -> Fraction:
    """Number of levels of the (induced) graph."""
    if restrict_to is None:
        lv = node_levels(graph)
        return max(lv.values(), default=Fraction(0))
    sub = set(restrict_to)
    lvl = {}
    for v in topological_order(graph):
        if v not in sub:
            continue
        ps = [u for u in graph.preds(v) if u in sub]
        lvl[v] = Fraction(1) if not ps else max(graph.nodes[v].effective_rate(), 1) + max(lvl[u] for u in ps)
    return max(lvl.values(), default=Fraction(0))


def work(graph: TaskGraph) -> tuple:
    """(per-node work, T1).  Buffers are passive and contribute nothing."""
    w = {v: graph.work(v) for v in range(len(graph))}
    return w, sum(w.values())


def sequential_time(graph: TaskGraph) -> int:
    return work(graph)[1]


@dataclass(frozen=True)
class Supernode:
    members: tuple  # (node index, role) items
    level: Fraction
    max_volume: int
    depth: int


@dataclass(frozen=True)
class SupernodeDAG:
    supernodes: tuple
    edges: tuple  # (from supernode, to supernode, buffer node index)

    def deepest_path(self) -> int:
        n = len(self.supernodes)
        succ = [[] for _ in range(n)]
        indeg = [0] * n
        for a, b, _ in self.edges:
            succ[a].append(b)
            indeg[b] += 1
        best = [s.depth for s in self.supernodes]
        ready = [i for i in range(n) if indeg[i] == 0]
        seen = 0
        while ready:
            a = ready.pop()
            seen += 1
            for b in succ[a]:
                best[b] = max(best[b], best[a] + self.supernodes[b].depth)
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        if seen != n:
            raise GraphError("buffer-placement", "supernode DAG contains a cycle")
        return max(best, default=0)


def supernode_dag(graph: TaskGraph) -> SupernodeDAG:
    """Merge each component of the buffer-split graph into a weighted supernode.

    Component depth is ``max k_out + level - 1`` (rounded up), levels being
    measured inside the split graph where buffer heads restart at level 1.
    """
    split = split_buffers(graph)
    comp = split.weak_components()
    preds = [[] for _ in split.items]
    for a, b in split.edges:
        preds[b].append(a)
    item_level = [None] * len(split.items)
    for v in topological_order(graph):
        node = graph.nodes[v]
        if node.is_buffer:
            t = split.item_of[(v, Role.TAIL)]
            ps = preds[t]
            item_level[t] = Fraction(1) if not ps else 1 + max(item_level[p] for p in ps)
            item_level[split.item_of[(v, Role.HEAD)]] = Fraction(1)
        else:
            i = split.item_of[(v, Role.NODE)]
            ps = preds[i]
            item_level[i] = Fraction(1) if not ps else \
                max(node.effective_rate(), 1) + max(item_level[p] for p in ps)
    ncomp = max(comp, default=-1) + 1
    members = [[] for _ in range(ncomp)]
    for i, c in enumerate(comp):
        members[c].append(i)
    supers = []
    for c in range(ncomp):
        lvl = max(item_level[i] for i in members[c])
        vol = 0
        for i in members[c]:
            v, role = split.items[i]
            if role is Role.TAIL:
                continue
            k = graph.k_in(v) if graph.nodes[v].kind is NodeKind.SINK else graph.k_out(v)
            vol = max(vol, k)
        supers.append(Supernode(tuple(split.items[i] for i in members[c]), lvl, vol,
                                math.ceil(vol + lvl - 1)))
    return SupernodeDAG(tuple(supers), tuple(supernode_edges(split, comp)))


def streaming_depth(graph: TaskGraph) -> int:
    """Deepest supernode path, each supernode weighted by its component depth."""
    return supernode_dag(graph).deepest_path()


@dataclass(frozen=True)
class StreamAnalysis:
    si_in: dict
    si_out: dict
    wcc_id: dict
    level: dict
    work: dict
    t1: int
    streaming_depth: int
    supernodes: SupernodeDAG

    @property
    def graph_level(self) -> Fraction:
        return max(self.level.values(), default=Fraction(0))

    @property
    def max_levels_on_path(self) -> Fraction:
        """Largest sum of component levels along any supernode path."""
        dag = self.supernodes
        n = len(dag.supernodes)
        best = [s.level for s in dag.supernodes]
        succ = [[] for _ in range(n)]
        indeg = [0] * n
        for a, b, _ in dag.edges:
            succ[a].append(b)
            indeg[b] += 1
        ready = [i for i in range(n) if indeg[i] == 0]
        while ready:
            a = ready.pop()
            for b in succ[a]:
                best[b] = max(best[b], best[a] + dag.supernodes[b].level)
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        return max(best, default=Fraction(0))


def analyze(graph: TaskGraph) -> StreamAnalysis:
    iv = streaming_intervals(graph)
    w, t1 = work(graph)
    dag = supernode_dag(graph)
    return StreamAnalysis(iv.si_in, iv.si_out, iv.wcc_out, node_levels(graph), w, t1,
                          dag.deepest_path(), dag)
