# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping loop; see ``_simkernel_py`` for the array contract."""

import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t i64

cdef enum:
    STREAM = 0
    MEMORY = 1
    INTO_BUFFER = 2


def run(kind_, p_, q_, tin_, tout_, block_, in_ptr_, in_idx_, out_ptr_, out_idx_,
        etype_, cap_, i64 nblocks, i64[::1] n_c, i64[::1] n_p, i64[::1] cnt,
        i64[::1] first, i64[::1] last):
    cdef i64[::1] kind = np.ascontiguousarray(kind_, dtype=np.int64)
    cdef i64[::1] p = np.ascontiguousarray(p_, dtype=np.int64)
    cdef i64[::1] q = np.ascontiguousarray(q_, dtype=np.int64)
    cdef i64[::1] tin = np.ascontiguousarray(tin_, dtype=np.int64)
    cdef i64[::1] tout = np.ascontiguousarray(tout_, dtype=np.int64)
    cdef i64[::1] block = np.ascontiguousarray(block_, dtype=np.int64)
    cdef i64[::1] in_ptr = np.ascontiguousarray(in_ptr_, dtype=np.int64)
    cdef i64[::1] in_idx = np.ascontiguousarray(in_idx_, dtype=np.int64)
    cdef i64[::1] out_ptr = np.ascontiguousarray(out_ptr_, dtype=np.int64)
    cdef i64[::1] out_idx = np.ascontiguousarray(out_idx_, dtype=np.int64)
    cdef i64[::1] etype = np.ascontiguousarray(etype_, dtype=np.int64)
    cdef i64[::1] cap = np.ascontiguousarray(cap_, dtype=np.int64)

    cdef Py_ssize_t n = kind.shape[0]
    cdef i64[::1] remaining = np.zeros(max(nblocks, 1), dtype=np.int64)
    cdef i64[::1] done = np.zeros(n, dtype=np.int64)
    cdef i64[::1] absorbed_mem = np.zeros(n, dtype=np.int64)
    cdef i64 unfinished = 0, cur = 0, t = 0
    cdef Py_ssize_t v, j, e
    cdef bint progress, ok

    for v in range(n):
        if kind[v] == 0:
            remaining[block[v]] += 1
            unfinished += 1

    while unfinished:
        progress = False
        for v in range(n):
            if done[v] or block[v] > cur or n_p[v] >= tout[v]:
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
                done[v] = 1
                if kind[v] == 0:
                    unfinished -= 1
                    remaining[block[v]] -= 1
        while cur < nblocks - 1 and remaining[cur] == 0:
            cur += 1
            progress = True
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
                absorbed_mem[v] = 1
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
