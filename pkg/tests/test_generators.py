import random
from fractions import Fraction

import pytest

from streamsched.generators import (GenConfig, GeneratorError, fft_dag, generate, pattern, random_canonical,
                                    task_count, volume_classes)
from streamsched.graph import NodeKind, split_buffers, validate


@pytest.mark.parametrize("topo,size,count", [("fft", 8, 39), ("gaussian", 5, 14), ("cholesky", 4, 20),
                                             ("chain", 8, 8)])
def test_paper_counts(topo, size, count):
    assert len(generate(GenConfig(topo, size=size, seed=0))) == count


@pytest.mark.parametrize("topo,sizes", [("fft", [2, 4, 16, 32]), ("gaussian", [2, 3, 7, 10]),
                                        ("cholesky", [2, 3, 5, 7]), ("chain", [2, 3, 20])])
def test_counts_match_closed_forms(topo, sizes):
    for s in sizes:
        g = generate(GenConfig(topo, size=s, seed=s))
        assert len(g) == task_count(topo, s)
        assert validate(g).ok
        assert not g.buffer_nodes()


def test_seed_determinism_and_variation():
    a = generate(GenConfig("cholesky", size=5, seed=4))
    assert a == generate(GenConfig("cholesky", size=5, seed=4))
    assert any(a != generate(GenConfig("cholesky", size=5, seed=s)) for s in range(5, 10))


def test_volumes_in_range_and_powers_of_two():
    g = generate(GenConfig("fft", size=8, volume_range=(4, 64), seed=1))
    vols = {e.volume for e in g.edges}
    assert vols <= {4, 8, 16, 32, 64}


def test_producers_sharing_a_consumer_share_a_class():
    edges = [(0, 2), (1, 2), (1, 3), (4, 3), (5, 6)]
    cls = volume_classes(7, edges)
    assert cls[0] == cls[1] == cls[4]
    assert cls[5] != cls[0]


def test_fft_butterfly_wiring():
    ids, edges = fft_dag(4)
    index = {n: i for i, n in enumerate(ids)}
    preds = {ids[b]: sorted(ids[a] for a, bb in edges if bb == b) for b in range(len(ids))}
    assert preds["bfly1_0"] == ["bfly0_0", "bfly0_2"]
    assert preds["bfly0_1"] == ["call3", "call4"]
    assert index["call0"] == 0


def test_invalid_configs():
    with pytest.raises(GeneratorError):
        GenConfig("fft", size=6)
    with pytest.raises(GeneratorError):
        GenConfig("chain", size=1)
    with pytest.raises(GeneratorError):
        GenConfig("chain", size=4, volume_range=(3, 8))
    with pytest.raises(GeneratorError):
        GenConfig("torus", size=4)
    with pytest.raises(GeneratorError):
        pattern("nope", 3)
    with pytest.raises(GeneratorError):
        pattern("softmax", 0)


def test_outer_product_multiplier():
    g = pattern("outer_product", 1, 4, 8)
    mul = g.index["mul"]
    assert g.k_in(mul) == g.k_out(mul) == 32
    assert g.nodes[g.index["rep_u"]].rate == 8


def test_matmul_dot_rate():
    g = pattern("matmul", 1, 4, 4, 4)
    assert g.nodes[g.index["dot"]].rate == Fraction(1, 4)


def test_softmax_structure():
    g = pattern("softmax", 16)
    assert len(g.buffer_nodes()) == 2
    assert max(split_buffers(g).weak_components()) + 1 == 3


@pytest.mark.parametrize("name,dims", [("outer_product", (v, 4, 8)) for v in (1, 2, 3)]
                         + [("matmul", (v, 4, 2, 3)) for v in (1, 2, 3)]
                         + [("vector_norm", (v, 8)) for v in (1, 2)] + [("softmax", (8,))])
def test_patterns_validate(name, dims):
    assert validate(pattern(name, *dims)).ok


@pytest.mark.parametrize("kinds", ["elementwise", "downsampler", "any"])
def test_random_canonical(kinds):
    rng = random.Random(0)
    for _ in range(30):
        g = random_canonical(rng, rng.randint(2, 20), kinds)
        assert validate(g).ok
        rates = {n.rate for n in g.nodes if n.kind is NodeKind.COMPUTE}
        if kinds == "elementwise":
            assert rates <= {1}
        if kinds == "downsampler":
            assert all(r <= 1 for r in rates)
