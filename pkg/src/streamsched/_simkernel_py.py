"""Pure-Python stepping loop; same contract as the compiled ``_simkernel``.

Array layout (all sequences of ints):
  node arrays   kind (0 task, 1 buffer), p, q (rate p/q), tin (reads needed),
                tout (emits needed), block, ptr/idx CSR over in- and out-edges
  edge arrays   etype (0 stream fifo, 1 memory, 2 unbounded into buffer), cap
  state arrays  n_c, n_p, cnt, first, last  (updated in place)

Returns ``(status, steps)`` where status 0 = finished, 1 = deadlock.
"""

STREAM, MEMORY, INTO_BUFFER = 0, 1, 2


def run(kind, p, q, tin, tout, block, in_ptr, in_idx, out_ptr, out_idx,
        etype, cap, nblocks, n_c, n_p, cnt, first, last):
    n = len(kind)
    remaining = [0] * nblocks
    unfinished = 0
    for v in range(n):
        if kind[v] == 0:
            remaining[block[v]] += 1
            unfinished += 1
    done = [False] * n
    absorbed_mem = [False] * n
    cur = 0
    t = 0
    while unfinished:
        progress = False
        # emit phase
        for v in range(n):
            if done[v] or block[v] > cur:
                continue
            if n_p[v] >= tout[v]:
                continue
            if kind[v] == 0:
                if (n_c[v] * p[v]) // q[v] < n_p[v] + 1:
                    continue
            elif n_c[v] < tin[v]:
                continue
            ok = True
            for j in range(out_ptr[v], out_ptr[v + 1]):
                e = out_idx[j]
                if etype[e] == STREAM and cnt[e] > cap[e]:
                    ok = False
                    break
            if not ok:
                continue
            for j in range(out_ptr[v], out_ptr[v + 1]):
                e = out_idx[j]
                if etype[e] != MEMORY:
                    cnt[e] += 1
            if n_p[v] == 0:
                first[v] = t
            n_p[v] += 1
            last[v] = t
            progress = True
            if n_p[v] == tout[v]:
                done[v] = True
                if kind[v] == 0:
                    unfinished -= 1
                    remaining[block[v]] -= 1
        while cur < nblocks - 1 and remaining[cur] == 0:
            cur += 1
            progress = True
        # read phase
        for v in range(n):
            if done[v] or block[v] > cur:
                continue
            if kind[v] == 1:
                if n_c[v] >= tin[v]:
                    continue
                for j in range(in_ptr[v], in_ptr[v + 1]):
                    e = in_idx[j]
                    if etype[e] == MEMORY:
                        if not absorbed_mem[v]:
                            n_c[v] += tin[v] // (in_ptr[v + 1] - in_ptr[v])
                            progress = True
                    elif cnt[e]:
                        n_c[v] += cnt[e]
                        cnt[e] = 0
                        progress = True
                absorbed_mem[v] = True
                continue
            if n_c[v] >= tin[v] or n_p[v] < (n_c[v] * p[v]) // q[v]:
                continue
            ok = True
            for j in range(in_ptr[v], in_ptr[v + 1]):
                e = in_idx[j]
                if etype[e] == STREAM and cnt[e] == 0:
                    ok = False
                    break
            if not ok:
                continue
            for j in range(in_ptr[v], in_ptr[v + 1]):
                e = in_idx[j]
                if etype[e] == STREAM:
                    cnt[e] -= 1
            n_c[v] += 1
            progress = True
        if not progress:
            return 1, t
        t += 1
    return 0, t
