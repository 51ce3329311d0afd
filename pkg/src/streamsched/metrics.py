"""Speedup, streaming schedule length ratio and PE utilization."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

from .analysis import streaming_depth, work
from .graph import TaskGraph
from .scheduler import Schedule


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsRow:
    topology: str
    seed: int
    p: int
    variant: str
    t1: int
    makespan: int
    speedup: Fraction
    sslr: Fraction
    pe_utilization: Fraction

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("speedup", "sslr", "pe_utilization"):
            d[k] = float(d[k])
        return d


def compute_metrics(graph: TaskGraph, schedule: Schedule, topology: str = "", seed: int = 0,
                    variant: str = "", depth: Optional[int] = None) -> MetricsRow:
    """Metrics of one schedule; ``depth`` may be passed to skip recomputing the streaming depth."""
    ms = schedule.makespan
    if ms <= 0:
        raise MetricsError("makespan must be positive")
    _, t1 = work(graph)
    if depth is None:
        depth = streaming_depth(graph)
    return MetricsRow(
        topology=topology, seed=seed, p=schedule.p, variant=variant, t1=t1, makespan=ms,
        speedup=Fraction(t1, ms),
        sslr=Fraction(ms, depth),
        pe_utilization=Fraction(t1, schedule.p * ms),
    )
