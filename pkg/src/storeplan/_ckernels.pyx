# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels.py``; results must match exactly."""
import numpy as np
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t

BACKEND = "cython"

cdef int NO_CONSTRAINT = -1
cdef int STORAGE = 0
cdef int SUM_REC = 1
cdef int MAX_REC = 2


cdef int _bisect(const int64_t[:] a, Py_ssize_t alo, Py_ssize_t ahi,
                 const int64_t[:] b, Py_ssize_t blo, Py_ssize_t bhi,
                 Py_ssize_t* out_x, Py_ssize_t* out_y) except -1:
    cdef Py_ssize_t n1 = ahi - alo, n2 = bhi - blo
    cdef Py_ssize_t max_d = (n1 + n2 + 1) // 2
    cdef Py_ssize_t v_offset = max_d, v_length = 2 * max_d
    cdef Py_ssize_t* v1 = <Py_ssize_t*> malloc(v_length * sizeof(Py_ssize_t))
    cdef Py_ssize_t* v2 = <Py_ssize_t*> malloc(v_length * sizeof(Py_ssize_t))
    cdef Py_ssize_t i, d, k1, k2, k1_offset, k2_offset, x1, y1, x2, y2
    cdef Py_ssize_t delta = n1 - n2
    cdef bint front = (delta % 2 != 0)
    cdef Py_ssize_t k1start = 0, k1end = 0, k2start = 0, k2end = 0
    if v1 == NULL or v2 == NULL:
        free(v1)
        free(v2)
        raise MemoryError()
    for i in range(v_length):
        v1[i] = -1
        v2[i] = -1
    v1[v_offset + 1] = 0
    v2[v_offset + 1] = 0
    try:
        for d in range(max_d):
            k1 = -d + k1start
            while k1 < d + 1 - k1end:
                k1_offset = v_offset + k1
                if k1 == -d or (k1 != d and v1[k1_offset - 1] < v1[k1_offset + 1]):
                    x1 = v1[k1_offset + 1]
                else:
                    x1 = v1[k1_offset - 1] + 1
                y1 = x1 - k1
                while x1 < n1 and y1 < n2 and a[alo + x1] == b[blo + y1]:
                    x1 += 1
                    y1 += 1
                v1[k1_offset] = x1
                if x1 > n1:
                    k1end += 2
                elif y1 > n2:
                    k1start += 2
                elif front:
                    k2_offset = v_offset + delta - k1
                    if 0 <= k2_offset < v_length and v2[k2_offset] != -1:
                        if x1 >= n1 - v2[k2_offset]:
                            out_x[0] = alo + x1
                            out_y[0] = blo + y1
                            return 1
                k1 += 2
            k2 = -d + k2start
            while k2 < d + 1 - k2end:
                k2_offset = v_offset + k2
                if k2 == -d or (k2 != d and v2[k2_offset - 1] < v2[k2_offset + 1]):
                    x2 = v2[k2_offset + 1]
                else:
                    x2 = v2[k2_offset - 1] + 1
                y2 = x2 - k2
                while x2 < n1 and y2 < n2 and a[ahi - x2 - 1] == b[bhi - y2 - 1]:
                    x2 += 1
                    y2 += 1
                v2[k2_offset] = x2
                if x2 > n1:
                    k2end += 2
                elif y2 > n2:
                    k2start += 2
                elif not front:
                    k1_offset = v_offset + delta - k2
                    if 0 <= k1_offset < v_length and v1[k1_offset] != -1:
                        x1 = v1[k1_offset]
                        y1 = v_offset + x1 - k1_offset
                        if x1 >= n1 - x2:
                            out_x[0] = alo + x1
                            out_y[0] = blo + y1
                            return 1
                k2 += 2
        return 0
    finally:
        free(v1)
        free(v2)


def match_blocks(a, b):
    """Longest-common-subsequence alignment; see ``_pykernels.match_blocks``."""
    cdef const int64_t[:] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef const int64_t[:] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t alo, ahi, blo, bhi, k, s, x = 0, y = 0
    raw = []
    stack = [(0, 0, av.shape[0], 0, bv.shape[0])]
    while stack:
        item = stack.pop()
        if item[0] == 1:
            raw.append(item[1:])
            continue
        alo = item[1]
        ahi = item[2]
        blo = item[3]
        bhi = item[4]
        k = 0
        while alo + k < ahi and blo + k < bhi and av[alo + k] == bv[blo + k]:
            k += 1
        if k:
            raw.append((alo, blo, k))
            alo += k
            blo += k
        s = 0
        while alo < ahi - s and blo < bhi - s and av[ahi - 1 - s] == bv[bhi - 1 - s]:
            s += 1
        ahi -= s
        bhi -= s
        if s:
            stack.append((1, ahi, bhi, s))
        if alo < ahi and blo < bhi:
            if set(np.asarray(av[alo:ahi]).tolist()).isdisjoint(np.asarray(bv[blo:bhi]).tolist()):
                continue
            if _bisect(av, alo, ahi, bv, blo, bhi, &x, &y):
                stack.append((0, x, ahi, y, bhi))
                stack.append((0, alo, x, blo, y))
    merged = []
    cdef Py_ssize_t last = -1
    for i, j, k in raw:
        if last >= 0 and merged[last][0] + merged[last][2] == i and merged[last][1] + merged[last][2] == j:
            pi, pj, pk = merged[last]
            merged[last] = (pi, pj, pk + k)
        else:
            merged.append((i, j, k))
            last += 1
    return merged


cdef struct Search:
    int n
    int objective
    int constraint
    int64_t bound
    const int64_t* offsets
    const int64_t* cpar
    const int64_t* cdel
    const int64_t* cphi
    int64_t* parent
    int64_t* pdelta
    int64_t* pphi
    int64_t* min_rest
    int64_t* rec
    unsigned char* done
    int64_t* best_parents
    int64_t best_value
    bint found


cdef void _leaf(Search* S) noexcept nogil:
    cdef int n = S.n, i, x, top
    cdef int64_t base, storage = 0, total = 0, worst = 0, value
    cdef int64_t values[3]
    cdef int path[64]
    for i in range(1, n + 1):
        S.done[i] = 0
    for i in range(1, n + 1):
        top = 0
        x = i
        while x != 0 and not S.done[x]:
            path[top] = x
            top += 1
            x = <int> S.parent[x]
        base = S.rec[x] if x != 0 else 0
        while top > 0:
            top -= 1
            base += S.pphi[path[top]]
            S.rec[path[top]] = base
            S.done[path[top]] = 1
    for i in range(1, n + 1):
        storage += S.pdelta[i]
        total += S.rec[i]
        if S.rec[i] > worst:
            worst = S.rec[i]
    values[0] = storage
    values[1] = total
    values[2] = worst
    if S.constraint != NO_CONSTRAINT and values[S.constraint] > S.bound:
        return
    value = values[S.objective]
    if not S.found or value < S.best_value:
        S.found = 1
        S.best_value = value
        for i in range(1, n + 1):
            S.best_parents[i] = S.parent[i]


cdef void _assign(Search* S, int v, int64_t storage) noexcept nogil:
    cdef int64_t c, s, floor, r
    cdef int p, x
    cdef bint complete, cyclic
    if v > S.n:
        _leaf(S)
        return
    for c in range(S.offsets[v - 1], S.offsets[v]):
        p = <int> S.cpar[c]
        s = storage + S.cdel[c]
        floor = s + S.min_rest[v + 1]
        if S.constraint == STORAGE and floor > S.bound:
            continue
        if S.objective == STORAGE and S.found and floor >= S.best_value:
            continue
        x = p
        r = S.cphi[c]
        complete = 1
        cyclic = 0
        while x != 0:
            if x == v:
                cyclic = 1
                break
            if x > v:
                complete = 0
                break
            r += S.pphi[x]
            x = <int> S.parent[x]
        if cyclic:
            continue
        if complete and S.constraint == MAX_REC and r > S.bound:
            continue
        S.parent[v] = p
        S.pdelta[v] = S.cdel[c]
        S.pphi[v] = S.cphi[c]
        _assign(S, v + 1, s)
        S.parent[v] = -1


def search_optimal(int n, offsets, cand_parent, cand_delta, cand_phi,
                   int objective, int constraint, bound):
    """Exhaustive branch-and-bound; see ``_pykernels.search_optimal``."""
    if n > 60:
        raise ValueError("exhaustive search is limited to tiny instances")
    cdef int64_t[::1] off = np.array(offsets, dtype=np.int64)
    cdef int64_t[::1] par = np.array(list(cand_parent) + [0], dtype=np.int64)
    cdef int64_t[::1] dl = np.array(list(cand_delta) + [0], dtype=np.int64)
    cdef int64_t[::1] ph = np.array(list(cand_phi) + [0], dtype=np.int64)
    cdef int64_t[::1] parent = np.full(n + 1, -1, dtype=np.int64)
    cdef int64_t[::1] pdelta = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] pphi = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] min_rest = np.zeros(n + 2, dtype=np.int64)
    cdef int64_t[::1] rec = np.zeros(n + 1, dtype=np.int64)
    cdef unsigned char[::1] done = bytearray(n + 1)
    cdef int64_t[::1] best = np.full(n + 1, -1, dtype=np.int64)
    cdef int64_t lo_min
    cdef Py_ssize_t c
    cdef int v
    for v in range(n, 0, -1):
        if off[v - 1] == off[v]:
            return None
        lo_min = dl[off[v - 1]]
        for c in range(off[v - 1], off[v]):
            if dl[c] < lo_min:
                lo_min = dl[c]
        min_rest[v] = min_rest[v + 1] + lo_min
    cdef Search S
    S.n = n
    S.objective = objective
    S.constraint = constraint
    S.bound = bound if constraint != NO_CONSTRAINT else 0
    S.offsets = &off[0]
    S.cpar = &par[0]
    S.cdel = &dl[0]
    S.cphi = &ph[0]
    S.parent = &parent[0]
    S.pdelta = &pdelta[0]
    S.pphi = &pphi[0]
    S.min_rest = &min_rest[0]
    S.rec = &rec[0]
    S.done = &done[0]
    S.best_parents = &best[0]
    S.best_value = 0
    S.found = 0
    with nogil:
        _assign(&S, 1, 0)
    if not S.found:
        return None
    return int(S.best_value), [int(best[v]) for v in range(1, n + 1)]
