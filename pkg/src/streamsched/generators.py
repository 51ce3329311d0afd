"""Synthetic canonical task graphs and a small library of operator patterns."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .graph import Node, NodeKind, TaskGraph, check


class GeneratorError(ValueError):
    pass


TOPOLOGIES = ("chain", "fft", "gaussian", "cholesky", "pattern")


@dataclass(frozen=True)
class GenConfig:
    topology: str
    size: int = 8                     # chain N, FFT points, Gaussian M, Cholesky T
    volume_range: tuple = (16, 1024)  # powers of two, inclusive
    seed: int = 0
    pattern: Optional[str] = None
    dims: tuple = ()

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise GeneratorError(f"unknown topology {self.topology!r}")
        lo, hi = self.volume_range
        for x in (lo, hi):
            if x <= 0 or x & (x - 1):
                raise GeneratorError(f"volume bound {x} is not a positive power of two")
        if lo > hi:
            raise GeneratorError("volume_range lower bound above upper bound")
        if self.topology != "pattern" and self.size < 2:
            raise GeneratorError(f"{self.topology} size must be >= 2")
        if self.topology == "fft" and self.size & (self.size - 1):
            raise GeneratorError("FFT points must be a power of two")

    @property
    def name(self) -> str:
        return self.topology if self.topology != "pattern" else f"pattern-{self.pattern}"

    def with_seed(self, seed: int) -> "GenConfig":
        return replace(self, seed=seed)


# ---------------------------------------------------------------------------
# topologies: each returns (ids, edges) of a plain DAG


def chain_dag(n: int):
    ids = [f"t{i}" for i in range(n)]
    return ids, [(i, i + 1) for i in range(n - 1)]


def fft_dag(points: int):
    """Recursion tree (2N-1 calls) feeding log2(N) radix-2 butterfly stages of N tasks."""
    ids, edges = [], []
    # breadth-first binary tree, node i has children 2i+1 and 2i+2
    for i in range(2 * points - 1):
        ids.append(f"call{i}")
    for i in range(points - 1):
        edges.append((i, 2 * i + 1))
        edges.append((i, 2 * i + 2))
    leaves = list(range(points - 1, 2 * points - 1))
    prev = leaves
    stages = int(math.log2(points))
    for s in range(stages):
        cur = []
        for j in range(points):
            cur.append(len(ids))
            ids.append(f"bfly{s}_{j}")
        for j in range(points):
            partner = j ^ (1 << s)
            edges.append((prev[j], cur[j]))
            edges.append((prev[partner], cur[j]))
        prev = cur
    return ids, edges


def gaussian_dag(m: int):
    """Pivot task per step k feeding the column updates of that step."""
    ids, edges, index = [], [], {}

    def add(name):
        index[name] = len(ids)
        ids.append(name)
        return index[name]

    for k in range(1, m):
        add(("piv", k))
        for j in range(k + 1, m + 1):
            add(("upd", k, j))
    for k in range(1, m):
        piv = index[("piv", k)]
        for j in range(k + 1, m + 1):
            edges.append((piv, index[("upd", k, j)]))
            if k + 1 < m:
                if j == k + 1:
                    edges.append((index[("upd", k, j)], index[("piv", k + 1)]))
                else:
                    edges.append((index[("upd", k, j)], index[("upd", k + 1, j)]))
    names = []
    for key in ids:
        names.append(f"piv{key[1]}" if key[0] == "piv" else f"upd{key[1]}_{key[2]}")
    return names, edges


def cholesky_dag(t: int):
    """Tiled Cholesky: POTRF, TRSM, SYRK and GEMM tasks over a T x T tile grid."""
    ids, edges, index = [], [], {}

    def add(name):
        index[name] = len(ids)
        ids.append(name)

    last = {}  # tile -> task that last wrote it
    for k in range(t):
        add(f"potrf{k}")
        if (k, k) in last:
            edges.append((last[(k, k)], index[f"potrf{k}"]))
        last[(k, k)] = index[f"potrf{k}"]
        for i in range(k + 1, t):
            name = f"trsm{k}_{i}"
            add(name)
            edges.append((index[f"potrf{k}"], index[name]))
            if (i, k) in last:
                edges.append((last[(i, k)], index[name]))
            last[(i, k)] = index[name]
        for i in range(k + 1, t):
            name = f"syrk{k}_{i}"
            add(name)
            edges.append((index[f"trsm{k}_{i}"], index[name]))
            if (i, i) in last:
                edges.append((last[(i, i)], index[name]))
            last[(i, i)] = index[name]
            for j in range(k + 1, i):
                name = f"gemm{k}_{i}_{j}"
                add(name)
                edges.append((index[f"trsm{k}_{i}"], index[name]))
                edges.append((index[f"trsm{k}_{j}"], index[name]))
                if (i, j) in last:
                    edges.append((last[(i, j)], index[name]))
                last[(i, j)] = index[name]
    return ids, edges


def task_count(topology: str, size: int) -> int:
    """Closed-form number of tasks for a synthetic topology."""
    if topology == "chain":
        return size
    if topology == "fft":
        return 2 * size - 1 + size * int(math.log2(size))
    if topology == "gaussian":
        return (size * size + size - 2) // 2
    if topology == "cholesky":
        return (size ** 3 + 3 * size ** 2 + 2 * size) // 6
    raise GeneratorError(f"no closed form for {topology!r}")


# ---------------------------------------------------------------------------
# canonical volumes


def volume_classes(n: int, edges) -> list:
    """Class label per node: producers sharing a consumer must emit equal volumes."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    preds = [[] for _ in range(n)]
    for a, b in edges:
        preds[b].append(a)
    for ps in preds:
        for a in ps[1:]:
            ra, rb = find(ps[0]), find(a)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(v) for v in range(n)]


def canonicalize(ids, edges, rng: random.Random, volume_range=(16, 1024)) -> TaskGraph:
    """Turn a plain DAG into a canonical task graph with random power-of-two volumes.

    Entry nodes become sources, exit nodes sinks, everything else compute
    nodes whose rate is the ratio of their output to their input volume.
    """
    lo, hi = (int(math.log2(x)) for x in volume_range)
    cls = volume_classes(len(ids), edges)
    vol = {}
    for c in cls:
        if c not in vol:
            vol[c] = 2 ** rng.randint(lo, hi)
    return _with_volumes(ids, edges, cls, vol)


def generate(config: GenConfig) -> TaskGraph:
    if config.topology == "pattern":
        return check(pattern(config.pattern, *config.dims))
    builders = {"chain": chain_dag, "fft": fft_dag, "gaussian": gaussian_dag, "cholesky": cholesky_dag}
    ids, edges = builders[config.topology](config.size)
    rng = random.Random(config.seed)
    return check(canonicalize(ids, edges, rng, config.volume_range))


def random_dag(rng: random.Random, n: int, edge_prob: float = 0.3, connected: bool = True):
    """Random DAG on ``n`` nodes in index order; optionally weakly connected."""
    edges = {(a, b) for b in range(1, n) for a in range(b) if rng.random() < edge_prob}
    if connected:
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for a, b in edges:
            parent[find(b)] = find(a)
        for b in range(1, n):
            rb, r0 = find(b), find(0)
            if rb != r0:
                # link an earlier node of the other component into b
                choices = [a for a in range(b) if find(a) != rb]
                edges.add((rng.choice(choices), b))
                parent[rb] = r0
    return [f"v{i}" for i in range(n)], sorted(edges)


def random_canonical(rng: random.Random, n: int, kinds: str = "any", edge_prob: float = 0.3,
                     volume_range=(4, 256)) -> TaskGraph:
    """Random buffer-free canonical graph.

    ``kinds``: ``"elementwise"`` (one volume everywhere), ``"downsampler"``
    (volumes never grow along a path) or ``"any"``.
    """
    ids, edges = random_dag(rng, n, edge_prob)
    lo, hi = (int(math.log2(x)) for x in volume_range)
    if kinds == "elementwise":
        v = 2 ** rng.randint(lo, hi)
        return canonicalize(ids, edges, rng, (v, v))
    if kinds == "any":
        return canonicalize(ids, edges, rng, volume_range)
    if kinds != "downsampler":
        raise GeneratorError(f"unknown kinds {kinds!r}")
    cls = volume_classes(n, edges)
    preds = [[] for _ in range(n)]
    for a, b in edges:
        preds[b].append(a)
    exp = {}
    for v in range(n):
        if cls[v] not in exp:
            exp[cls[v]] = rng.randint(lo, min((exp[cls[u]] for u in preds[v]), default=hi))
    # a class fixed by an earlier member may exceed a later member's input
    changed = True
    while changed:
        changed = False
        for v in range(n):
            for u in preds[v]:
                if exp[cls[v]] > exp[cls[u]]:
                    exp[cls[v]] = exp[cls[u]]
                    changed = True
    return _with_volumes(ids, edges, cls, {c: 2 ** e for c, e in exp.items()})


def _with_volumes(ids, edges, cls, vol) -> TaskGraph:
    n = len(ids)
    has_in, has_out, first_pred = [False] * n, [False] * n, [None] * n
    for a, b in edges:
        has_out[a] = has_in[b] = True
        if first_pred[b] is None:
            first_pred[b] = a
    nodes = []
    for v in range(n):
        if not has_in[v]:
            nodes.append(Node(ids[v], NodeKind.SOURCE))
        elif not has_out[v]:
            nodes.append(Node(ids[v], NodeKind.SINK))
        else:
            nodes.append(Node(ids[v], NodeKind.COMPUTE, Fraction(vol[cls[v]], vol[cls[first_pred[v]]])))
    return TaskGraph(nodes, [(ids[a], ids[b], vol[cls[a]]) for a, b in edges])


# ---------------------------------------------------------------------------
# patterns


class _Builder:
    def __init__(self):
        self.nodes, self.edges = [], []

    def source(self, name):
        self.nodes.append(Node(name, NodeKind.SOURCE))
        return name

    def sink(self, name):
        self.nodes.append(Node(name, NodeKind.SINK))
        return name

    def compute(self, name, rate):
        self.nodes.append(Node(name, NodeKind.COMPUTE, Fraction(rate)))
        return name

    def buffer(self, name, rate):
        self.nodes.append(Node(name, NodeKind.BUFFER, Fraction(rate)))
        return name

    def edge(self, a, b, volume):
        self.edges.append((a, b, volume))

    def build(self) -> TaskGraph:
        return TaskGraph(self.nodes, self.edges)


def outer_product(variant: int, n: int, m: int) -> TaskGraph:
    """A = u v^T with u of length n, v of length m."""
    g = _Builder()
    g.source("u")
    g.source("v")
    g.compute("mul", 1)
    g.sink("A")
    if variant == 1:    # rows: replicate u, re-read v
        g.compute("rep_u", m)
        g.buffer("buf_v", n)
        g.edge("u", "rep_u", n)
        g.edge("rep_u", "mul", n * m)
        g.edge("v", "buf_v", m)
        g.edge("buf_v", "mul", n * m)
    elif variant == 2:  # columns: replicate v, re-read u
        g.compute("rep_v", n)
        g.buffer("buf_u", m)
        g.edge("v", "rep_v", m)
        g.edge("rep_v", "mul", n * m)
        g.edge("u", "buf_u", n)
        g.edge("buf_u", "mul", n * m)
    elif variant == 3:  # both inputs buffered
        g.buffer("buf_u", m)
        g.buffer("buf_v", n)
        g.edge("u", "buf_u", n)
        g.edge("v", "buf_v", m)
        g.edge("buf_u", "mul", n * m)
        g.edge("buf_v", "mul", n * m)
    else:
        raise GeneratorError(f"outer product has variants 1-3, not {variant}")
    g.edge("mul", "A", n * m)
    return g.build()


def matmul(variant: int, n: int, k: int, m: int) -> TaskGraph:
    """C = A B with A n x k and B k x m."""
    g = _Builder()
    if variant == 1:    # inner products
        g.source("A")
        g.source("B")
        g.buffer("buf_A", m)
        g.buffer("buf_B", n)
        g.compute("dot", Fraction(1, k))
        g.sink("C")
        g.edge("A", "buf_A", n * k)
        g.edge("B", "buf_B", k * m)
        g.edge("buf_A", "dot", n * k * m)
        g.edge("buf_B", "dot", n * k * m)
        g.edge("dot", "C", n * m)
    elif variant == 2:  # one matrix-vector task per column of C
        g.source("A")
        g.compute("fan_A", 1)
        g.sink("C")
        g.edge("A", "fan_A", n * k)
        for i in range(m):
            g.source(f"B{i}")
            g.buffer(f"buf_B{i}", n)
            g.compute(f"D{i}", Fraction(1, k))
            g.edge(f"B{i}", f"buf_B{i}", k)
            g.edge("fan_A", f"D{i}", n * k)
            g.edge(f"buf_B{i}", f"D{i}", n * k)
            g.edge(f"D{i}", "C", n)
    elif variant == 3:  # outer products along k, reduced by an adder tree
        level = []
        for i in range(k):
            g.source(f"a{i}")
            g.source(f"b{i}")
            g.compute(f"rep_a{i}", m)
            g.buffer(f"buf_b{i}", n)
            g.compute(f"E{i}", 1)
            g.edge(f"a{i}", f"rep_a{i}", n)
            g.edge(f"rep_a{i}", f"E{i}", n * m)
            g.edge(f"b{i}", f"buf_b{i}", m)
            g.edge(f"buf_b{i}", f"E{i}", n * m)
            level.append(f"E{i}")
        r = 0
        while len(level) > 1:
            nxt = []
            for j in range(0, len(level) - 1, 2):
                name = f"add{r}_{j // 2}"
                g.compute(name, 1)
                g.edge(level[j], name, n * m)
                g.edge(level[j + 1], name, n * m)
                nxt.append(name)
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
            r += 1
        g.sink("C")
        g.edge(level[0], "C", n * m)
    else:
        raise GeneratorError(f"matmul has variants 1-3, not {variant}")
    return g.build()


def vector_norm(variant: int, n: int) -> TaskGraph:
    """y = x / ||x||."""
    g = _Builder()
    g.source("x")
    g.compute("norm", Fraction(1, n))
    g.compute("div", 1)
    g.sink("y")
    if variant == 1:
        # x is stored for the norm pass and re-read from memory for the division;
        # the norm itself is buffered and read n times
        g.buffer("buf_x", 1)
        g.buffer("buf_norm", n)
        g.source("x_reload")
        g.edge("x", "buf_x", n)
        g.edge("buf_x", "norm", n)
        g.edge("x_reload", "div", n)
        g.edge("norm", "buf_norm", 1)
        g.edge("buf_norm", "div", n)
    elif variant == 2:
        # x streamed to both consumers; an upsampler repeats the norm, so the
        # join at div needs FIFO space to absorb the norm's latency
        g.compute("rep_norm", n)
        g.edge("x", "norm", n)
        g.edge("x", "div", n)
        g.edge("norm", "rep_norm", 1)
        g.edge("rep_norm", "div", n)
    else:
        raise GeneratorError(f"vector normalization has variants 1-2, not {variant}")
    g.edge("div", "y", n)
    return g.build()


def softmax(n: int) -> TaskGraph:
    """Numerically stable softmax in three pipelined stages separated by two buffers."""
    g = _Builder()
    g.source("x")
    g.compute("max", Fraction(1, n))
    g.buffer("buf_max", n)
    g.edge("x", "max", n)
    g.edge("max", "buf_max", 1)
    g.source("x_sub")
    g.compute("sub", 1)
    g.compute("exp", 1)
    g.compute("sum", Fraction(1, n))
    g.buffer("buf_sum", n)
    g.edge("x_sub", "sub", n)
    g.edge("buf_max", "sub", n)
    g.edge("sub", "exp", n)
    g.edge("exp", "sum", n)
    g.edge("sum", "buf_sum", 1)
    # the normalization stage reads x again and fuses the shifted exponential into div
    g.source("x_div")
    g.compute("div", 1)
    g.sink("y")
    g.edge("x_div", "div", n)
    g.edge("buf_sum", "div", n)
    g.edge("div", "y", n)
    return g.build()


PATTERNS = {
    "outer_product": outer_product,
    "matmul": matmul,
    "vector_norm": vector_norm,
    "softmax": softmax,
}


def pattern(name: str, *dims) -> TaskGraph:
    try:
        fn = PATTERNS[name]
    except KeyError:
        raise GeneratorError(f"unknown pattern {name!r}; known: {sorted(PATTERNS)}") from None
    if any(d <= 0 for d in dims):
        raise GeneratorError("pattern dimensions must be positive")
    return fn(*dims)
