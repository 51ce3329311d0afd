import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from streamsched.analysis import (analyze, fixed_point_intervals, node_levels, streaming_depth,
                                  streaming_intervals, supernode_dag, work)
from streamsched.generators import GenConfig, generate, pattern, random_canonical
from streamsched.graph import Node, NodeKind, TaskGraph

from conftest import chain
from oracles import balance_intervals


def test_upsampler_slows_its_producer():
    g = chain(8, [4])
    iv = streaming_intervals(g)
    assert iv.si_out[0] == 4   # source emits every four steps
    assert iv.si_out[1] == 1


def test_elementwise_chain_all_unit():
    iv = streaming_intervals(chain(16, [1, 1, 1]))
    assert set(iv.si_in.values()) == {1} and set(iv.si_out.values()) == {1}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_intervals_match_balancing_oracle(seed):
    rng = random.Random(seed)
    g = random_canonical(rng, rng.randint(2, 12))
    iv = streaming_intervals(g)
    o_in, o_out = balance_intervals(g)
    for v in range(len(g)):
        assert iv.si_out[v] == o_out[v]
        if g.in_edges[v]:
            assert iv.si_in[v] == o_in[v]


def test_package_fixed_point_agrees_on_join(join_graph):
    iv = streaming_intervals(join_graph)
    fp = fixed_point_intervals(join_graph)
    assert all(fp[v][1] == iv.si_out[v] for v in range(len(join_graph)))
    with pytest.raises(ValueError):
        fixed_point_intervals(pattern("softmax", 4))


def test_restricted_block_sees_memory_input():
    # block {c1, c2, t}: c1 ingests 64 elements from memory while c2 emits 8
    g = chain(64, [1, Fraction(1, 8), 1])
    iv = streaming_intervals(g, restrict_to=[2, 3, 4])
    assert iv.si_in[2] == 1 and iv.si_out[2] == 8 and iv.si_out[3] == 8


def test_levels():
    g = chain(4, [1, 1, 1])
    assert [node_levels(g)[v] for v in range(5)] == [1, 2, 3, 4, 5]
    up = chain(4, [4])
    assert node_levels(up)[1] == 5
    diamond = TaskGraph([Node("s", NodeKind.SOURCE), Node("d", NodeKind.COMPUTE, Fraction(1, 2)),
                         Node("r", NodeKind.COMPUTE, Fraction(1, 2)), Node("j", NodeKind.COMPUTE, Fraction(1)),
                         Node("t", NodeKind.SINK)],
                        [("s", "d", 8), ("s", "r", 8), ("d", "j", 4), ("r", "j", 4), ("j", "t", 4)])
    lv = node_levels(diamond)
    assert lv[3] == 1 + max(lv[1], lv[2]) == 3


def test_work():
    g = chain(32, [Fraction(1, 8)])
    w, t1 = work(g)
    assert w[1] == 32 and t1 == 32 + 32 + 4
    _, t1 = work(chain(16, [1] * 6))
    assert t1 == 128
    _, t1 = work(pattern("vector_norm", 1, 8))  # buffers add nothing
    assert t1 == 8 + 8 + 8 + 8 + 8


def test_supernodes():
    assert len(supernode_dag(chain(8, [2])).supernodes) == 1
    for g in (pattern("vector_norm", 1, 8), pattern("softmax", 16)):
        dag = supernode_dag(g)
        assert len(dag.supernodes) == 3
        pairs = sorted((a, b) for a, b, _ in dag.edges)
        assert pairs == [(0, 1), (1, 2)]   # a path


def test_streaming_depth():
    assert streaming_depth(chain(100, [1])) == 102
    # hand-evaluated per component: n+2, n+4, n+2
    assert streaming_depth(pattern("softmax", 64)) == 3 * 64 + 8
    assert streaming_depth(pattern("vector_norm", 1, 8)) == 9 + 10 + 10


@pytest.mark.parametrize("topo,size", [("fft", 8), ("gaussian", 6), ("cholesky", 5)])
def test_edges_inside_component_balance(topo, size):
    g = generate(GenConfig(topo, size=size, seed=11))
    iv = streaming_intervals(g)
    for e in g.edges:
        assert iv.si_out[e.src] == iv.si_in[e.dst]


def test_analyze_bundle():
    a = analyze(pattern("softmax", 16))
    assert a.streaming_depth == 56 and a.t1 == sum(a.work.values())
    assert a.max_levels_on_path == 3 + 5 + 3
