"""Independent reference implementations used only by the tests.

They trade speed for obviousness and share no code with the package beyond
the graph container.
"""
import itertools
from fractions import Fraction


def balance_intervals(graph):
    """Streaming intervals by repeated edge balancing (buffer-free graphs).

    Start every node at one element per step and, while some edge has a
    producer emitting faster than its consumer accepts, slow the faster side
    down. Sources and sinks behave as rate-1 nodes. Returns
    ``(si_in, si_out)`` dicts over all nodes.
    """
    rate = [n.rate if n.kind.value == "compute" else Fraction(1) for n in graph.nodes]
    si = [Fraction(1)] * len(graph)  # output interval
    changed = True
    while changed:
        changed = False
        for e in graph.edges:
            u, v = e.src, e.dst
            prod, cons = si[u], si[v] * rate[v]
            if prod < cons:
                si[u] = cons
                changed = True
            elif cons < prod:
                si[v] = prod / rate[v]
                changed = True
    return ({v: si[v] * rate[v] for v in range(len(graph))},
            {v: si[v] for v in range(len(graph))})


def undirected_cycle_groups(nodes, edges):
    """Edges on a cycle are those whose removal keeps their endpoints connected."""
    nodes = set(nodes)
    edges = list(edges)

    def connected(a, b, skip):
        seen, todo = {a}, [a]
        while todo:
            x = todo.pop()
            if x == b:
                return True
            for k, (p, q) in enumerate(edges):
                if k == skip:
                    continue
                for s, t in ((p, q), (q, p)):
                    if s == x and t not in seen:
                        seen.add(t)
                        todo.append(t)
        return False

    cyc = [edges[k] for k in range(len(edges)) if connected(edges[k][0], edges[k][1], k)]
    groups = []
    for a, b in cyc:
        hit = [g for g in groups if a in g or b in g]
        merged = {a, b}.union(*hit) if hit else {a, b}
        groups = [g for g in groups if g not in hit] + [merged]
    return sorted(frozenset(g) for g in groups if g <= nodes) if groups else []


def best_nonstreaming_makespan(graph, p):
    """Exhaustive search over task orders and PE choices without preemption."""
    tasks = [v for v in range(len(graph)) if graph.nodes[v].occupies_pe]
    best = None
    for order in itertools.permutations(tasks):
        pos = {v: i for i, v in enumerate(order)}
        if any(pos[u] > pos[v] for v in tasks for u in graph.preds(v) if u in pos):
            continue
        for pes in itertools.product(range(p), repeat=len(order)):
            free = [0] * p
            finish = {}
            for v, q in zip(order, pes):
                ready = max((finish[u] for u in graph.preds(v)), default=0)
                s = max(ready, free[q])
                finish[v] = s + graph.work(v)
                free[q] = finish[v]
            ms = max(finish.values())
            best = ms if best is None else min(best, ms)
    return best
