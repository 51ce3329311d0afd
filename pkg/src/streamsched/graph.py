"""Canonical task graphs: node kinds, validation, buffer splitting and JSON I/O.

Nodes are addressed internally by their integer position in ``TaskGraph.nodes``;
that position is also the tie-break order used by every deterministic routine
in the package.  Element counts ``k_in``/``k_out`` are derived from edge volumes
and node rates, never stored.
"""
from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional

INT64_MAX = 2**63 - 1


class NodeKind(enum.Enum):
    SOURCE = "source"
    SINK = "sink"
    COMPUTE = "compute"
    BUFFER = "buffer"


class GraphError(ValueError):
    """Structural error raised while building, loading or ordering a graph.

    ``code`` is a stable machine-readable identifier (``dangling-edge``,
    ``schema``, ``unknown-kind``, ``duplicate-node``, ``cycle``, ``invalid``).
    """

    def __init__(self, code: str, message: str, elements: tuple = ()):
        super().__init__(message)
        self.code = code
        self.elements = tuple(elements)


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    rate: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind in (NodeKind.COMPUTE, NodeKind.BUFFER):
            if self.rate is None:
                raise GraphError("schema", f"node {self.id!r}: rate required for {self.kind.value}")
            object.__setattr__(self, "rate", Fraction(self.rate))
        elif self.rate is not None:
            raise GraphError("schema", f"node {self.id!r}: rate forbidden for {self.kind.value}")

    @property
    def occupies_pe(self) -> bool:
        return self.kind is not NodeKind.BUFFER

    @property
    def is_buffer(self) -> bool:
        return self.kind is NodeKind.BUFFER

    def effective_rate(self) -> Fraction:
        """Production rate used by timing formulas; sources and sinks pass data at rate 1."""
        return self.rate if self.rate is not None else Fraction(1)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    volume: int


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    elements: tuple = ()


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def codes(self) -> set:
        return {v.code for v in self.violations}


class TaskGraph:
    """Immutable DAG of canonical nodes with per-edge element volumes."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[tuple]):
        self.nodes: tuple = tuple(nodes)
        self.index: dict = {}
        for i, n in enumerate(self.nodes):
            if n.id in self.index:
                raise GraphError("duplicate-node", f"duplicate node id {n.id!r}", (n.id,))
            self.index[n.id] = i
        built = []
        for e in edges:
            if isinstance(e, Edge):
                src, dst, vol = e.src, e.dst, e.volume
            else:
                src, dst, vol = e
            src = self._resolve(src)
            dst = self._resolve(dst)
            if isinstance(vol, bool) or not isinstance(vol, int):
                raise GraphError("schema", f"edge volume must be an integer, got {vol!r}")
            built.append(Edge(src, dst, vol))
        self.edges: tuple = tuple(built)
        n = len(self.nodes)
        self.in_edges: tuple = tuple([] for _ in range(n))
        self.out_edges: tuple = tuple([] for _ in range(n))
        for ei, e in enumerate(self.edges):
            self.out_edges[e.src].append(ei)
            self.in_edges[e.dst].append(ei)
        self.in_edges = tuple(tuple(x) for x in self.in_edges)
        self.out_edges = tuple(tuple(x) for x in self.out_edges)

    def _resolve(self, ref):
        if isinstance(ref, int) and not isinstance(ref, bool):
            if 0 <= ref < len(self.nodes):
                return ref
            raise GraphError("dangling-edge", f"edge endpoint index {ref} out of range", (ref,))
        try:
            return self.index[ref]
        except KeyError:
            raise GraphError("dangling-edge", f"edge references missing node {ref!r}", (ref,)) from None

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, TaskGraph):
            return NotImplemented
        return self.nodes == other.nodes and sorted(self._edge_keys()) == sorted(other._edge_keys())

    def __hash__(self):
        return hash((self.nodes, tuple(sorted(self._edge_keys()))))

    def _edge_keys(self):
        return [(self.nodes[e.src].id, self.nodes[e.dst].id, e.volume) for e in self.edges]

    def __repr__(self):
        return f"TaskGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    # adjacency -------------------------------------------------------------

    def preds(self, v: int) -> list:
        return [self.edges[e].src for e in self.in_edges[v]]

    def succs(self, v: int) -> list:
        return [self.edges[e].dst for e in self.out_edges[v]]

    def kind(self, v: int) -> NodeKind:
        return self.nodes[v].kind

    def pe_nodes(self) -> list:
        return [i for i, n in enumerate(self.nodes) if n.occupies_pe]

    def buffer_nodes(self) -> list:
        return [i for i, n in enumerate(self.nodes) if n.is_buffer]

    # derived element counts ------------------------------------------------

    @cached_property
    def _counts(self):
        k_in, k_out = [], []
        for v, node in enumerate(self.nodes):
            ins = self.in_edges[v]
            outs = self.out_edges[v]
            kin = self.edges[ins[0]].volume if ins else 0
            if node.kind is NodeKind.SOURCE:
                kout = self.edges[outs[0]].volume if outs else 0
            elif node.kind is NodeKind.SINK:
                kout = 0
            else:
                kout = self.edges[outs[0]].volume if outs else node.rate * kin
                if isinstance(kout, Fraction):
                    kout = int(kout) if kout.denominator == 1 else kout
            k_in.append(kin)
            k_out.append(kout)
        return tuple(k_in), tuple(k_out)

    def k_in(self, v: int) -> int:
        return self._counts[0][v]

    def k_out(self, v: int) -> int:
        return self._counts[1][v]

    def work(self, v: int) -> int:
        """Max of consumed and produced elements; zero for passive buffers."""
        if self.nodes[v].is_buffer:
            return 0
        return max(self.k_in(v), self.k_out(v))

    def is_graph_source(self, v: int) -> bool:
        return not self.in_edges[v]


# ---------------------------------------------------------------------------
# ordering


def topological_order(graph: TaskGraph) -> list:
    """Kahn's algorithm with a min-heap on node index, so ties resolve by index."""
    indeg = [len(graph.in_edges[v]) for v in range(len(graph))]
    heap = [v for v, d in enumerate(indeg) if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in graph.succs(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != len(graph):
        cyc = find_cycle(graph, {v for v, d in enumerate(indeg) if d > 0})
        ids = tuple(graph.nodes[v].id for v in cyc)
        raise GraphError("cycle", "graph contains a cycle: " + " -> ".join(ids), ids)
    return order


def find_cycle(graph: TaskGraph, candidates: set) -> list:
    """Return one directed cycle among ``candidates`` (nodes left over by Kahn)."""
    # every leftover node has a leftover predecessor; walk backwards until repeat
    v = min(candidates)
    seen = {}
    path = []
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = next(u for u in graph.preds(v) if u in candidates)
    cyc = path[seen[v]:]
    cyc.reverse()
    return cyc


# ---------------------------------------------------------------------------
# buffer splitting


class Role(enum.Enum):
    NODE = "node"
    TAIL = "tail"
    HEAD = "head"


@dataclass(frozen=True)
class SplitGraph:
    """Graph with every buffer replaced by a tail (inputs) and a head (outputs).

    ``items[i] = (original_index, role)``; ``edges`` are pairs of item indices in
    the same order as the original edges.
    """

    graph: TaskGraph
    items: tuple
    edges: tuple
    item_of: dict  # (original_index, role) -> item index

    def out_item(self, v: int) -> int:
        role = Role.HEAD if self.graph.nodes[v].is_buffer else Role.NODE
        return self.item_of[(v, role)]

    def in_item(self, v: int) -> int:
        role = Role.TAIL if self.graph.nodes[v].is_buffer else Role.NODE
        return self.item_of[(v, role)]

    def weak_components(self) -> list:
        """Component label per item, labels numbered by first item of each component."""
        parent = list(range(len(self.items)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        labels, out = {}, []
        for i in range(len(self.items)):
            r = find(i)
            out.append(labels.setdefault(r, len(labels)))
        return out


def split_buffers(graph: TaskGraph) -> SplitGraph:
    items, item_of = [], {}
    for v, node in enumerate(graph.nodes):
        roles = (Role.TAIL, Role.HEAD) if node.is_buffer else (Role.NODE,)
        for role in roles:
            item_of[(v, role)] = len(items)
            items.append((v, role))
    split = SplitGraph(graph, tuple(items), (), item_of)
    edges = tuple((split.out_item(e.src), split.in_item(e.dst)) for e in graph.edges)
    return SplitGraph(graph, tuple(items), edges, item_of)


def supernode_edges(split: SplitGraph, comp: list) -> list:
    """(tail component, head component, buffer index) for every buffer."""
    out = []
    for v in split.graph.buffer_nodes():
        out.append((comp[split.item_of[(v, Role.TAIL)]], comp[split.item_of[(v, Role.HEAD)]], v))
    return out


# ---------------------------------------------------------------------------
# validation


def validate(graph: TaskGraph) -> ValidationReport:
    report = ValidationReport()
    add = report.violations.append
    nodes, edges = graph.nodes, graph.edges

    for ei, e in enumerate(edges):
        if e.volume <= 0:
            add(Violation("nonpositive-volume", f"edge {ei} has volume {e.volume}", (ei,)))
        elif e.volume > INT64_MAX:
            add(Violation("overflow", f"edge {ei} volume exceeds 64-bit range", (ei,)))

    for v, node in enumerate(nodes):
        ins, outs = graph.in_edges[v], graph.out_edges[v]
        in_vols = {edges[e].volume for e in ins}
        out_vols = {edges[e].volume for e in outs}
        if len(in_vols) > 1:
            add(Violation("unequal-input-volumes",
                          f"node {node.id!r} has unequal input volumes {sorted(in_vols)}", (node.id,)))
        if len(out_vols) > 1:
            add(Violation("unequal-output-volumes",
                          f"node {node.id!r} has unequal output volumes {sorted(out_vols)}", (node.id,)))
        if node.kind is NodeKind.SOURCE:
            if ins:
                add(Violation("source-has-input", f"source {node.id!r} has input edges", (node.id,)))
            if not outs:
                add(Violation("missing-output", f"source {node.id!r} has no output edges", (node.id,)))
            continue
        if node.kind is NodeKind.SINK:
            if outs:
                add(Violation("sink-has-output", f"sink {node.id!r} has output edges", (node.id,)))
            if not ins:
                add(Violation("missing-input", f"sink {node.id!r} has no input edges", (node.id,)))
            continue
        if node.rate <= 0:
            add(Violation("bad-rate", f"node {node.id!r} has non-positive rate {node.rate}", (node.id,)))
            continue
        if not ins:
            add(Violation("missing-input", f"{node.kind.value} node {node.id!r} has no input edges", (node.id,)))
            continue
        kin = min(in_vols)
        kout = node.rate * kin
        if kout.denominator != 1:
            add(Violation("non-integer-k-out",
                          f"node {node.id!r}: k_out = {node.rate} * {kin} is not an integer", (node.id,)))
        elif kout > INT64_MAX:
            add(Violation("overflow", f"node {node.id!r}: k_out exceeds 64-bit range", (node.id,)))
        elif out_vols and len(out_vols) == 1 and kout != next(iter(out_vols)):
            add(Violation("rate-mismatch",
                          f"node {node.id!r}: output volume {next(iter(out_vols))} != rate * k_in = {kout}",
                          (node.id,)))

    try:
        topological_order(graph)
    except GraphError as exc:
        add(Violation("cycle", str(exc), exc.elements))
        return report

    split = split_buffers(graph)
    comp = split.weak_components()
    bad = _supernode_cycle(supernode_edges(split, comp), max(comp, default=-1) + 1)
    if bad:
        ids = tuple(nodes[b].id for b in bad)
        add(Violation("buffer-placement",
                      "buffers on a cycle of the supernode DAG: " + ", ".join(ids), ids))
    return report


def _supernode_cycle(sedges: list, n: int) -> list:
    """Buffers taking part in a cycle of the supernode graph (empty if acyclic)."""
    succ = [[] for _ in range(n)]
    for a, b, buf in sedges:
        if a == b:
            return [buf]
        succ[a].append((b, buf))
    state = [0] * n
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(succ[root]))]
        via = []
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                if via:
                    via.pop()
                continue
            w, buf = nxt
            if state[w] == 1:
                # cycle: buffers on the stack from w onward plus this one
                on_stack = [s for s, _ in stack]
                start = on_stack.index(w)
                return via[start:] + [buf]
            if state[w] == 0:
                state[w] = 1
                via.append(buf)
                stack.append((w, iter(succ[w])))
    return []


def check(graph: TaskGraph) -> TaskGraph:
    """Raise ``GraphError('invalid')`` listing every violation, else return the graph."""
    report = validate(graph)
    if not report.ok:
        msg = "; ".join(v.message for v in report.violations)
        raise GraphError("invalid", msg, tuple(v.code for v in report.violations))
    return graph


# ---------------------------------------------------------------------------
# JSON


def to_dict(graph: TaskGraph) -> dict:
    nodes = []
    for n in graph.nodes:
        d = {"id": n.id, "kind": n.kind.value}
        if n.rate is not None:
            d["rate"] = [n.rate.numerator, n.rate.denominator]
        nodes.append(d)
    edges = [{"src": graph.nodes[e.src].id, "dst": graph.nodes[e.dst].id, "volume": e.volume}
             for e in graph.edges]
    return {"nodes": nodes, "edges": edges}


def save(graph: TaskGraph) -> str:
    return json.dumps(to_dict(graph), indent=1)


def from_dict(data, validated: bool = True) -> TaskGraph:
    if not isinstance(data, dict) or not isinstance(data.get("nodes"), list) \
            or not isinstance(data.get("edges"), list):
        raise GraphError("schema", "graph must be an object with 'nodes' and 'edges' lists")
    nodes = []
    for nd in data["nodes"]:
        if not isinstance(nd, dict) or not isinstance(nd.get("id"), str) or "kind" not in nd:
            raise GraphError("schema", f"malformed node entry {nd!r}")
        extra = set(nd) - {"id", "kind", "rate"}
        if extra:
            raise GraphError("schema", f"node {nd['id']!r}: unknown fields {sorted(extra)}")
        try:
            kind = NodeKind(nd["kind"])
        except ValueError:
            raise GraphError("unknown-kind", f"node {nd['id']!r}: unknown kind {nd['kind']!r}") from None
        rate = nd.get("rate")
        if rate is not None:
            if (not isinstance(rate, list) or len(rate) != 2
                    or not all(isinstance(x, int) and not isinstance(x, bool) for x in rate) or rate[1] == 0):
                raise GraphError("schema", f"node {nd['id']!r}: rate must be [p, q] integers")
            rate = Fraction(rate[0], rate[1])
        nodes.append(Node(nd["id"], kind, rate))
    edges = []
    for ed in data["edges"]:
        if not isinstance(ed, dict) or set(ed) != {"src", "dst", "volume"}:
            raise GraphError("schema", f"malformed edge entry {ed!r}")
        if not isinstance(ed["src"], str) or not isinstance(ed["dst"], str):
            raise GraphError("schema", f"edge endpoints must be node id strings: {ed!r}")
        edges.append((ed["src"], ed["dst"], ed["volume"]))
    graph = TaskGraph(nodes, edges)
    return check(graph) if validated else graph


def load(text: str, validated: bool = True) -> TaskGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError("schema", f"invalid JSON: {exc}") from None
    return from_dict(data, validated=validated)
