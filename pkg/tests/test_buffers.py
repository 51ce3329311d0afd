import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from streamsched.buffers import buffer_plan, cycle_nodes, join_capacity, streaming_edges
from streamsched.generators import GenConfig, generate, random_canonical
from streamsched.graph import Node, NodeKind, TaskGraph
from streamsched.partition import partition
from streamsched.scheduler import schedule_streaming
from streamsched.simulator import simulate, uniform_plan

from conftest import reconvergent_graph, two_path_join
from oracles import undirected_cycle_groups

DIAMOND = [(0, 1), (0, 2), (1, 3), (2, 3)]


def plan_of(g, p=None):
    part = partition(g, p or len(g.pe_nodes()), "sb-rlx")
    sched = schedule_streaming(g, part)
    return part, sched, buffer_plan(g, part, sched)


def cap(g, plan, src, dst):
    for i, e in enumerate(g.edges):
        if g.nodes[e.src].id == src and g.nodes[e.dst].id == dst:
            return plan.capacity[i]
    raise KeyError((src, dst))


def test_cycle_examples():
    assert cycle_nodes(range(4), [(0, 1), (0, 2), (2, 3)]) == []
    assert cycle_nodes(range(4), DIAMOND) == [frozenset(range(4))]
    two = DIAMOND + [(a + 4, b + 4) for a, b in DIAMOND]
    assert sorted(cycle_nodes(range(8), two), key=min) == [frozenset(range(4)), frozenset(range(4, 8))]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.randoms(use_true_random=False))
def test_cycles_match_brute_force(n, rnd):
    edges = [(a, b) for b in range(n) for a in range(b) if rnd.random() < 0.35]
    assert sorted(cycle_nodes(range(n), edges), key=sorted) == \
        sorted(undirected_cycle_groups(range(n), edges), key=sorted)


def test_join_capacity_rule():
    assert join_capacity({"slow": 19, "fast": 1}, 1, 1) == 18
    assert join_capacity({"a": 5, "b": 5}, 5, 1) == 1
    assert join_capacity({"a": 9, "b": 1}, 1, Fraction(3)) == 3


def test_two_path_join_plan(join_graph):
    _, _, plan = plan_of(join_graph)
    assert cap(join_graph, plan, "0", "4") == 18
    assert cap(join_graph, plan, "3", "4") == 1


def test_reconvergent_plan():
    g = reconvergent_graph()
    _, _, plan = plan_of(g)
    assert cap(g, plan, "4", "5") == 32


def test_symmetric_diamond_stays_minimal():
    g = TaskGraph([Node("a", NodeKind.SOURCE), Node("b", NodeKind.COMPUTE, Fraction(1)),
                   Node("c", NodeKind.COMPUTE, Fraction(1)), Node("d", NodeKind.SINK)],
                  [("a", "b", 8), ("a", "c", 8), ("b", "d", 8), ("c", "d", 8)])
    _, _, plan = plan_of(g)
    assert set(plan.capacity.values()) == {1}


def test_capacity_clamped_to_volume():
    g = TaskGraph([Node("s", NodeKind.SOURCE), Node("d", NodeKind.COMPUTE, Fraction(1, 4)),
                   Node("u", NodeKind.COMPUTE, Fraction(4)), Node("t", NodeKind.SINK)],
                  [("s", "d", 4), ("d", "u", 1), ("u", "t", 4), ("s", "t", 4)])
    _, sched, plan = plan_of(g)
    assert sched[2].fo - sched[0].fo == 5
    assert cap(g, plan, "s", "t") == 4


def test_plan_covers_exactly_the_fifos():
    g = generate(GenConfig("cholesky", size=4, seed=2))
    part, _, plan = plan_of(g, 6)
    assert sorted(plan.capacity) == streaming_edges(g, part)
    assert all(c >= 1 for c in plan.capacity.values())


def test_plan_prevents_deadlock_on_random_blocks():
    rng = random.Random(9)
    for _ in range(60):
        g = random_canonical(rng, rng.randint(3, 12))
        part, sched, plan = plan_of(g)
        assert not simulate(g, part, sched, plan).deadlocked


def test_unit_capacities_deadlock_the_join():
    g = two_path_join()
    part, sched, plan = plan_of(g)
    assert simulate(g, part, sched, uniform_plan(g, part, 1)).deadlocked
    assert not simulate(g, part, sched, plan).deadlocked


def test_plan_json(join_graph):
    _, _, plan = plan_of(join_graph)
    rows = plan.to_list(join_graph)
    assert {"src": "0", "dst": "4", "capacity": 18} in rows
