from fractions import Fraction

import pytest

from streamsched.generators import GenConfig, generate
from streamsched.metrics import MetricsError, compute_metrics
from streamsched.partition import partition
from streamsched.scheduler import Schedule, schedule_nonstreaming, schedule_streaming

from conftest import chain


def test_nonstreaming_chain_speedup_one():
    g = generate(GenConfig("chain", size=8, seed=2))
    for p in (1, 4, 16):
        assert compute_metrics(g, schedule_nonstreaming(g, p)).speedup == 1


def test_three_task_chain_streaming():
    g = chain(100, [1])
    m = compute_metrics(g, schedule_streaming(g, partition(g, 3, "sb-rlx")))
    assert m.t1 == 300 and m.makespan == 102
    assert m.speedup == Fraction(300, 102)
    assert m.sslr == 1
    assert m.pe_utilization == Fraction(300, 3 * 102)


def test_single_pe_utilization():
    g = generate(GenConfig("gaussian", size=4, seed=1))
    assert compute_metrics(g, schedule_nonstreaming(g, 1)).pe_utilization == 1


def test_zero_makespan_rejected():
    with pytest.raises(MetricsError):
        compute_metrics(chain(4, [1]), Schedule(p=1))
