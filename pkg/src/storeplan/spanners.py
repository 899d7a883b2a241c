"""Optimal plans for the two extremes: least storage and least recreation.

Ties are broken towards the lexicographically smaller ``(u, v)`` edge so every
solver is deterministic.
"""
from __future__ import annotations

import heapq

from .core import ROOT, SolverGraph, StoragePlan
from .errors import InfeasibleError, InvalidInputError


def mst_undirected(sg: SolverGraph) -> StoragePlan:
    """Prim's algorithm from the root over storage weights."""
    if sg.directed:
        raise InvalidInputError("mst_undirected needs an undirected solver graph; use mca_directed")
    n = sg.n
    parent = [-1] * (n + 1)
    in_tree = [False] * (n + 1)
    in_tree[ROOT] = True
    heap = [(d, ROOT, v) for v, d, _ in sg.out_adj[ROOT]]
    heapq.heapify(heap)
    added = 0
    while heap and added < n:
        _, u, v = heapq.heappop(heap)
        if in_tree[v]:
            continue
        in_tree[v] = True
        parent[v] = u
        added += 1
        for w, d, _ in sg.out_adj[v]:
            if not in_tree[w]:
                heapq.heappush(heap, (d, v, w))
    if added < n:
        missing = next(i for i in range(1, n + 1) if not in_tree[i])
        raise InfeasibleError(f"version {missing} is unreachable from the root")
    return StoragePlan(tuple(parent))


def mca_directed(sg: SolverGraph) -> StoragePlan:
    """Minimum-cost arborescence rooted at V0 (Chu-Liu/Edmonds).

    Contraction levels are kept on an explicit stack rather than recursion so
    long delta chains cannot exhaust the interpreter stack.
    """
    n = sg.n
    # level-0 edges: (u, v, key) with key = (weight, u, v) giving the tie order
    edges = [(u, v, (c.delta, u, v)) for (u, v), c in sg.edges.items() if u != v]
    num_nodes = n + 1
    root = ROOT
    levels = []
    while True:
        best_in: list = [None] * num_nodes
        for idx, (u, v, key) in enumerate(edges):
            if u == v or v == root:
                continue
            cur = best_in[v]
            if cur is None or key < edges[cur][2]:
                best_in[v] = idx
        for v in range(num_nodes):
            if v != root and best_in[v] is None:
                raise InfeasibleError("some version is unreachable from the root")

        # find cycles among chosen in-edges
        comp = [-1] * num_nodes
        color = [0] * num_nodes  # 0 new, 1 on walk, 2 done
        color[root] = 2
        cycles = []
        for s in range(num_nodes):
            walk = []
            v = s
            while color[v] == 0:
                color[v] = 1
                walk.append(v)
                v = edges[best_in[v]][0]
            if color[v] == 1:
                cyc = walk[walk.index(v):]
                cycles.append(cyc)
            for w in walk:
                color[w] = 2
        if not cycles:
            chosen = [best_in[v] for v in range(num_nodes) if v != root]
            break

        next_id = 0
        for cyc in cycles:
            for v in cyc:
                comp[v] = next_id
            next_id += 1
        for v in range(num_nodes):
            if comp[v] < 0:
                comp[v] = next_id
                next_id += 1
        new_edges = []
        origin = []
        for idx, (u, v, key) in enumerate(edges):
            cu, cv = comp[u], comp[v]
            if cu == cv:
                continue
            w = key[0]
            if cv < len(cycles):
                w -= edges[best_in[v]][2][0]
            new_edges.append((cu, cv, (w, key[1], key[2])))
            origin.append(idx)
        levels.append((edges, best_in, cycles, comp, origin))
        edges = new_edges
        root = comp[root]
        num_nodes = next_id

    # expand contractions from the innermost level outwards
    while levels:
        prev_edges, best_in, cycles, comp, origin = levels.pop()
        lifted = [origin[idx] for idx in chosen]
        entered = set()
        for idx in lifted:
            v = prev_edges[idx][1]
            if comp[v] < len(cycles):
                entered.add(v)
        for cyc in cycles:
            for v in cyc:
                if v not in entered:
                    lifted.append(best_in[v])
        chosen = lifted
        edges = prev_edges

    parent = [-1] * (n + 1)
    for idx in chosen:
        u, v, _ = edges[idx]
        parent[v] = u
    return StoragePlan(tuple(parent))


def min_storage_plan(sg: SolverGraph) -> StoragePlan:
    """MCA for directed graphs, MST otherwise."""
    return mca_directed(sg) if sg.directed else mst_undirected(sg)


def _dijkstra(sg: SolverGraph):
    n = sg.n
    inf = float("inf")
    dist = [inf] * (n + 1)
    parent = [-1] * (n + 1)
    done = [False] * (n + 1)
    dist[ROOT] = 0
    heap = [(0, ROOT)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, _, phi in sg.out_adj[u]:
            if done[v]:
                continue
            nd = d + phi
            if nd < dist[v] or (nd == dist[v] and u < parent[v]):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def shortest_distances(sg: SolverGraph) -> list:
    """Least recreation cost from the root to every version (index 0 is 0)."""
    return _dijkstra(sg)[0]


def spt(sg: SolverGraph) -> StoragePlan:
    """Shortest-path tree over recreation weights; equal distances prefer the lower parent."""
    dist, parent = _dijkstra(sg)
    for i in range(1, sg.n + 1):
        if parent[i] < 0:
            raise InfeasibleError(f"version {i} is unreachable from the root")
    return StoragePlan(tuple(parent))
