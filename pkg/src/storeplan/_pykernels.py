"""Pure-Python hot kernels. ``_ckernels.pyx`` mirrors these line for line.

Both backends must return identical results: delta payloads and oracle
answers are part of reproducible outputs.
"""
from __future__ import annotations

BACKEND = "python"

NO_CONSTRAINT, STORAGE, SUM_REC, MAX_REC = -1, 0, 1, 2


def _bisect(a, alo, ahi, b, blo, bhi):
    """Myers middle snake on a[alo:ahi] vs b[blo:bhi]; returns the split point or None."""
    n1 = ahi - alo
    n2 = bhi - blo
    max_d = (n1 + n2 + 1) // 2
    v_offset = max_d
    v_length = 2 * max_d
    v1 = [-1] * v_length
    v2 = [-1] * v_length
    v1[v_offset + 1] = 0
    v2[v_offset + 1] = 0
    delta = n1 - n2
    front = delta % 2 != 0
    k1start = k1end = k2start = k2end = 0
    for d in range(max_d):
        for k1 in range(-d + k1start, d + 1 - k1end, 2):
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
                        return alo + x1, blo + y1
        for k2 in range(-d + k2start, d + 1 - k2end, 2):
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
                        return alo + x1, blo + y1
    return None


def match_blocks(a, b):
    """Longest-common-subsequence alignment of two integer sequences.

    Returns maximal matching runs ``(i, j, length)`` in increasing order.
    """
    a = [int(x) for x in a]
    b = [int(x) for x in b]
    raw = []
    # explicit stack keeps output order without deep recursion
    stack = [(0, 0, len(a), 0, len(b))]
    while stack:
        item = stack.pop()
        if item[0] == 1:
            raw.append(item[1:])
            continue
        _, alo, ahi, blo, bhi = item
        k = 0
        while alo + k < ahi and blo + k < bhi and a[alo + k] == b[blo + k]:
            k += 1
        if k:
            raw.append((alo, blo, k))
            alo += k
            blo += k
        s = 0
        while alo < ahi - s and blo < bhi - s and a[ahi - 1 - s] == b[bhi - 1 - s]:
            s += 1
        ahi -= s
        bhi -= s
        if s:
            stack.append((1, ahi, bhi, s))
        if alo < ahi and blo < bhi:
            if set(a[alo:ahi]).isdisjoint(b[blo:bhi]):
                continue
            split = _bisect(a, alo, ahi, b, blo, bhi)
            if split is not None:
                x, y = split
                stack.append((0, x, ahi, y, bhi))
                stack.append((0, alo, x, blo, y))
    merged = []
    for i, j, k in raw:
        if merged and merged[-1][0] + merged[-1][2] == i and merged[-1][1] + merged[-1][2] == j:
            pi, pj, pk = merged[-1]
            merged[-1] = (pi, pj, pk + k)
        else:
            merged.append((i, j, k))
    return merged


def search_optimal(n, offsets, cand_parent, cand_delta, cand_phi,
                   objective, constraint, bound):
    """Exhaustive branch-and-bound over parent vectors of versions 1..n.

    ``offsets`` is CSR-style: candidates of version v are the slice
    ``offsets[v-1]:offsets[v]``, sorted by parent.  Returns ``(value, parents)``
    for the lexicographically least optimal vector, or ``None`` if nothing
    satisfies the constraint.
    """
    offsets = [int(x) for x in offsets]
    cpar = [int(x) for x in cand_parent]
    cdel = [int(x) for x in cand_delta]
    cphi = [int(x) for x in cand_phi]
    parent = [-1] * (n + 1)
    pdelta = [0] * (n + 1)
    pphi = [0] * (n + 1)
    min_rest = [0] * (n + 2)
    for v in range(n, 0, -1):
        lo, hi = offsets[v - 1], offsets[v]
        if lo == hi:
            return None
        min_rest[v] = min_rest[v + 1] + min(cdel[lo:hi])
    best_value = [None]
    best_parents = [None]
    rec = [0] * (n + 1)
    done = [False] * (n + 1)

    def leaf():
        for i in range(1, n + 1):
            done[i] = False
        for i in range(1, n + 1):
            path = []
            x = i
            while x != 0 and not done[x]:
                path.append(x)
                x = parent[x]
            base = rec[x] if x != 0 else 0
            for y in reversed(path):
                base += pphi[y]
                rec[y] = base
                done[y] = True
        storage = sum(pdelta[1:])
        total = sum(rec[1:])
        worst = max(rec[1:])
        values = (storage, total, worst)
        if constraint != NO_CONSTRAINT and values[constraint] > bound:
            return
        value = values[objective]
        if best_value[0] is None or value < best_value[0]:
            best_value[0] = value
            best_parents[0] = parent[1:]

    def assign(v, storage):
        if v > n:
            leaf()
            return
        for c in range(offsets[v - 1], offsets[v]):
            p = cpar[c]
            s = storage + cdel[c]
            floor = s + min_rest[v + 1]
            if constraint == STORAGE and floor > bound:
                continue
            if objective == STORAGE and best_value[0] is not None and floor >= best_value[0]:
                continue
            # cycle check through already-assigned ancestors
            x = p
            r = cphi[c]
            complete = True
            cyclic = False
            while x != 0:
                if x == v:
                    cyclic = True
                    break
                if x > v:
                    complete = False
                    break
                r += pphi[x]
                x = parent[x]
            if cyclic:
                continue
            if complete and constraint == MAX_REC and r > bound:
                continue
            parent[v] = p
            pdelta[v] = cdel[c]
            pphi[v] = cphi[c]
            assign(v + 1, s)
            parent[v] = -1

    assign(1, 0)
    if best_value[0] is None:
        return None
    return best_value[0], list(best_parents[0])
