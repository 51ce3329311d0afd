"""Time the compiled simulation kernel against the pure-Python fallback.

    python benchmarks/bench_kernel.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from streamsched import _simkernel_py
from streamsched.buffers import buffer_plan
from streamsched.generators import GenConfig, generate
from streamsched.partition import partition
from streamsched.scheduler import schedule_streaming
from streamsched.simulator import _arrays

try:
    from streamsched import _simkernel
except ImportError:
    _simkernel = None

CASES = [("chain", 8, 8), ("fft", 8, 32), ("gaussian", 6, 8), ("cholesky", 5, 32)]


def prepare(topo, size, p, seed=0):
    g = generate(GenConfig(topo, size=size, seed=seed))
    part = partition(g, p, "sb-rlx")
    sched = schedule_streaming(g, part)
    return g, part, _arrays(g, part, buffer_plan(g, part, sched))


def time_kernel(kernel, g, part, arrays, repeat):
    best = float("inf")
    for _ in range(repeat):
        n, m = len(g), len(g.edges)
        state = [np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(m, np.int64),
                 np.full(n, -1, np.int64), np.full(n, -1, np.int64)]
        t = time.perf_counter()
        status, steps = kernel.run(*arrays, len(part.blocks), *state)
        best = min(best, time.perf_counter() - t)
    return best, steps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':<16}{'steps':>8}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for topo, size, p in CASES:
        g, part, arrays = prepare(topo, size, p)
        tp, steps = time_kernel(_simkernel_py, g, part, arrays, args.repeat)
        if _simkernel is None:
            print(f"{topo + str(size):<16}{steps:>8}{tp:>12.4f}{'n/a':>12}{'n/a':>10}")
            continue
        tc, _ = time_kernel(_simkernel, g, part, arrays, args.repeat)
        print(f"{topo + str(size):<16}{steps:>8}{tp:>12.4f}{tc:>12.5f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
