import random
from fractions import Fraction

import pytest

from streamsched.buffers import buffer_plan
from streamsched.generators import GenConfig, generate, random_canonical
from streamsched.graph import Node, NodeKind, TaskGraph
from streamsched.partition import SpatialPartition, Variant, partition
from streamsched.scheduler import (Schedule, ScheduleError, makespan, schedule_nonstreaming,
                                   schedule_streaming, sequential_time)
from streamsched.simulator import simulate

from conftest import chain, reconvergent_graph
from oracles import best_nonstreaming_makespan


def table(sched):
    return {v: (t.st, t.fo, t.lo) for v, t in sched.times.items()}


def single_block(g):
    return partition(g, len(g.pe_nodes()), "sb-rlx")


def test_three_task_chain():
    g = chain(100, [1])
    s = schedule_streaming(g, single_block(g))
    assert table(s) == {0: (0, 1, 100), 1: (1, 2, 101), 2: (2, 3, 102)}
    assert makespan(s) == 102


def test_lone_source_block():
    g = chain(32, [])
    s = schedule_streaming(g, partition(g, 1, "sb-rlx"))
    assert table(s)[0] == (0, 1, 32)


def test_two_path_join_table(join_graph):
    s = schedule_streaming(join_graph, single_block(join_graph))
    assert table(s) == {0: (0, 1, 32), 1: (1, 9, 33), 2: (9, 18, 34), 3: (18, 19, 50), 4: (19, 20, 51)}


def test_reconvergent_table():
    g = reconvergent_graph()
    s = schedule_streaming(g, single_block(g))
    assert table(s) == {0: (0, 1, 32), 1: (1, 33, 33), 2: (33, 34, 65),
                        3: (0, 1, 32), 4: (1, 2, 33), 5: (34, 35, 66)}


def test_blocks_back_to_back():
    g = chain(16, [1] * 6)
    s = schedule_streaming(g, partition(g, 4, "sb-rlx"))
    first = [s[v] for v in range(4)]
    second = [s[v] for v in range(4, 8)]
    assert min(t.st for t in second) == max(t.lo for t in first)
    assert [t.pe for t in second] == [0, 1, 2, 3]


def test_block_source_downsampler_reads_memory_at_unit_rate():
    g = chain(64, [1, Fraction(1, 8), 1])
    part = SpatialPartition(((0, 1), (2, 3, 4)), Variant.SB_RLX, 3)
    s = schedule_streaming(g, part)
    start = s[1].lo
    assert s[2].st == start and s[2].fo == start + 8
    assert s[2].lo == s[2].fo + 7 * 8


def test_nonstreaming_chain_and_p1():
    for seed in range(10):
        g = generate(GenConfig("chain", size=8, seed=seed))
        for p in (1, 2, 8):
            assert schedule_nonstreaming(g, p).makespan == sequential_time(g)
    g = generate(GenConfig("fft", size=4, seed=1))
    assert schedule_nonstreaming(g, 1).makespan == sequential_time(g)


def test_nonstreaming_diamond_matches_exhaustive():
    k = 16
    g = TaskGraph([Node("a", NodeKind.SOURCE), Node("b", NodeKind.COMPUTE, Fraction(1)),
                   Node("c", NodeKind.COMPUTE, Fraction(1)), Node("d", NodeKind.SINK)],
                  [("a", "b", k), ("a", "c", k), ("b", "d", k), ("c", "d", k)])
    assert best_nonstreaming_makespan(g, 2) == 3 * k
    assert schedule_nonstreaming(g, 2).makespan == 3 * k


def test_nonstreaming_near_exhaustive_on_small_graphs():
    rng = random.Random(2)
    for _ in range(15):
        g = random_canonical(rng, 5)
        got = schedule_nonstreaming(g, 2).makespan
        best = best_nonstreaming_makespan(g, 2)
        assert best <= got <= 2 * best


def test_makespan_helpers():
    assert makespan(Schedule()) == 0
    assert sequential_time(chain(16, [1] * 6)) == 128
    with pytest.raises(ScheduleError):
        schedule_nonstreaming(chain(4, [1]), 0)


@pytest.mark.parametrize("topo,size", [("fft", 8), ("gaussian", 6), ("cholesky", 5)])
def test_forward_in_time(topo, size):
    for seed in range(5):
        g = generate(GenConfig(topo, size=size, seed=seed))
        for p in (4, 32):
            part = partition(g, p, "sb-lts")
            s = schedule_streaming(g, part)
            b = part.block_of
            for e in g.edges:
                if b[e.src] == b[e.dst]:
                    assert s[e.dst].fo > s[e.src].fo and s[e.dst].lo > s[e.src].lo


def test_single_block_elementwise_matches_simulation():
    rng = random.Random(5)
    for _ in range(100):
        g = random_canonical(rng, 10, "elementwise")
        part = single_block(g)
        s = schedule_streaming(g, part)
        assert simulate(g, part, s, buffer_plan(g, part, s)).simulated_makespan == s.makespan


def test_single_block_schedule_tracks_simulation():
    rng = random.Random(5)
    for _ in range(100):
        g = random_canonical(rng, 10, "any")
        part = single_block(g)
        s = schedule_streaming(g, part)
        assert abs(simulate(g, part, s, buffer_plan(g, part, s)).relative_error) <= Fraction(1, 10)


def test_upsampler_drains_at_descendant_pace():
    # the source paces c1 at one element every two steps, but once its input
    # is exhausted only the sink can hold c1 back
    g = chain(64, [Fraction(1, 8), 4])
    s = schedule_streaming(g, single_block(g))
    assert s.intervals[0].si_out[2] == 2
    assert s[2].lo == s[1].lo + 3 * 1 + 1
    part = single_block(g)
    assert simulate(g, part, s, buffer_plan(g, part, s)).simulated_makespan == s.makespan


def test_schedule_json():
    g = chain(4, [1])
    d = schedule_streaming(g, single_block(g)).to_dict(g)
    assert d["makespan"] == 6
    assert d["tasks"][1] == {"task": "c0", "pe": 1, "block": 0, "st": 1, "fo": 2, "lo": 5}


def test_foreign_partition_rejected():
    with pytest.raises(ScheduleError):
        schedule_streaming(chain(4, [1]), SpatialPartition(((0, 1),), Variant.SB_RLX, 4))
