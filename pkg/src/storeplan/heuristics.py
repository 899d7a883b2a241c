"""Heuristics for the budgeted formulations: LMG, MP, LAST and GitH.

All of them return a ``StoragePlan`` that passes ``validate_plan`` and are
deterministic: every tie goes to the smaller index.
"""
from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .core import (ROOT, SolverGraph, StoragePlan, WorkloadProfile, evaluate,
                   recreation_costs)
from .errors import InfeasibleError, InvalidInputError
from .spanners import min_storage_plan, shortest_distances, spt as spt_plan

log = logging.getLogger(__name__)


def _storage(plan: StoragePlan, sg: SolverGraph) -> int:
    return sum(sg.edges[(p, i)].delta for i, p in plan.items())


# --- LMG ---------------------------------------------------------------------

def _better_ratio(num_a, den_a, num_b, den_b) -> bool:
    """True when move a has a strictly higher benefit per byte than move b.

    A non-positive storage increase counts as an infinite ratio; among those
    the larger benefit wins.
    """
    inf_a, inf_b = den_a <= 0, den_b <= 0
    if inf_a != inf_b:
        return inf_a
    if inf_a:
        return num_a > num_b
    return num_a * den_b > num_b * den_a


def lmg(sg: SolverGraph, base: StoragePlan, spt: StoragePlan, budget: int,
        workload: WorkloadProfile | None = None, moves: list | None = None) -> StoragePlan:
    """Local-move greedy: swap shortest-path edges into ``base`` while storage stays within ``budget``.

    Each round takes the affordable SPT edge with the best recreation gain per
    extra byte; an unaffordable best move is skipped, not fatal.  ``moves``,
    if given, receives the accepted ``(u, v)`` edges in order.
    """
    n = sg.n
    parent = list(base.parents)
    storage = _storage(base, sg)
    if storage > budget:
        raise InfeasibleError(f"budget {budget} is below the minimum storage {storage}")
    rec = recreation_costs(base, sg)
    weight = [0] * (n + 1)
    for i in range(1, n + 1):
        weight[i] = workload.weight(i) if workload is not None else 1
    kids: list[set] = [set() for _ in range(n + 1)]
    for i in range(1, n + 1):
        kids[parent[i]].add(i)
    # subtree weight, accumulated bottom-up in reverse depth order
    sub = weight[:]
    order = []
    stack = [ROOT]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(kids[v])
    for v in reversed(order):
        if v != ROOT:
            sub[parent[v]] += sub[v]

    pending = sorted((spt[v], v) for v in range(1, n + 1) if spt[v] != parent[v])
    while pending:
        best = None
        for idx, (u, v) in enumerate(pending):
            c = sg.edges[(u, v)]
            gain = rec[v] - rec[u] - c.phi
            if gain <= 0:
                continue
            num = gain * sub[v]
            if num <= 0:
                continue
            den = c.delta - sg.edges[(parent[v], v)].delta
            if storage + den > budget:
                continue
            if best is None or _better_ratio(num, den, best[1], best[2]):
                best = (idx, num, den)
        if best is None:
            break
        idx, _, den = best
        u, v = pending.pop(idx)
        old = parent[v]
        x = old
        while x != ROOT:
            sub[x] -= sub[v]
            x = parent[x]
        kids[old].discard(v)
        parent[v] = u
        kids[u].add(v)
        x = u
        while x != ROOT:
            sub[x] += sub[v]
            x = parent[x]
        shift = rec[u] + sg.edges[(u, v)].phi - rec[v]
        stack = [v]
        while stack:
            w = stack.pop()
            rec[w] += shift
            stack.extend(kids[w])
        storage += den
        if moves is not None:
            moves.append((u, v))
    return StoragePlan(tuple(parent))


def lmg_min_storage(sg: SolverGraph, base: StoragePlan, spt: StoragePlan, theta_sum,
                    workload: WorkloadProfile | None = None) -> StoragePlan:
    """Least storage with (weighted) sum of recreation at most ``theta_sum``.

    Binary-searches the LMG budget between the two extremes.
    """
    def score(plan):
        rep = evaluate(plan, sg, workload)
        return rep.weighted_sum if workload is not None else rep.sum_recreation

    spt_score = score(spt)
    if theta_sum < spt_score:
        raise InfeasibleError(f"sum recreation bound {theta_sum} is below the shortest-path optimum {spt_score}")
    lo, hi = _storage(base, sg), _storage(spt, sg)
    candidates = []
    first = lmg(sg, base, spt, lo, workload)
    if score(first) <= theta_sum:
        return first
    top = lmg(sg, base, spt, max(lo, hi), workload)
    if score(top) <= theta_sum:
        candidates.append((_storage(top, sg), top.parents, top))
        while lo < hi:
            mid = (lo + hi) // 2
            plan = lmg(sg, base, spt, mid, workload)
            if score(plan) <= theta_sum:
                candidates.append((_storage(plan, sg), plan.parents, plan))
                hi = mid
            else:
                lo = mid + 1
    candidates.append((_storage(spt, sg), spt.parents, spt))
    return min(candidates)[2]


# --- MP ----------------------------------------------------------------------

def mp(sg: SolverGraph, theta: int) -> StoragePlan:
    """Modified Prim: grow by least marginal storage, keeping every recreation cost within ``theta``."""
    n = sg.n
    sp = shortest_distances(sg)
    for i in range(1, n + 1):
        if sp[i] > theta:
            raise InfeasibleError(
                f"version {i} cannot be recreated within {theta} (shortest path costs {sp[i]})")
    inf = float("inf")
    lcost = [inf] * (n + 1)
    dcost = [inf] * (n + 1)
    parent = [-1] * (n + 1)
    in_tree = [False] * (n + 1)
    lcost[ROOT] = dcost[ROOT] = 0
    heap = [(0, ROOT)]
    while heap:
        l_i, i = heapq.heappop(heap)
        if in_tree[i] or l_i != lcost[i]:
            continue
        in_tree[i] = True
        for j, delta, phi in sg.out_adj[i]:
            if j == ROOT:
                continue
            d_new = dcost[i] + phi
            if in_tree[j]:
                if d_new <= dcost[j] and delta <= lcost[j] and (d_new, delta) != (dcost[j], lcost[j]):
                    if _is_ancestor(parent, j, i):
                        continue
                    parent[j] = i
                    dcost[j] = d_new
                    lcost[j] = delta
            elif d_new <= theta and (delta < lcost[j] or (delta == lcost[j] and d_new < dcost[j])):
                dcost[j] = d_new
                lcost[j] = delta
                parent[j] = i
                heapq.heappush(heap, (delta, j))

    # versions no admissible chain reached: splice in their shortest paths
    spt_par = spt_plan(sg).parents
    for v in range(1, n + 1):
        if in_tree[v]:
            continue
        path = []
        x = v
        while x != ROOT:
            path.append(x)
            x = spt_par[x]
        for x in reversed(path):
            if not in_tree[x] or dcost[x] > sp[x]:
                parent[x] = spt_par[x]
                dcost[x] = sp[x]
                lcost[x] = sg.edges[(spt_par[x], x)].delta
                in_tree[x] = True
    return StoragePlan(tuple(parent))


def _is_ancestor(parent, a: int, v: int) -> bool:
    """Whether ``a`` lies on the parent chain above ``v`` (or is ``v``)."""
    x = v
    while x not in (ROOT, -1):
        if x == a:
            return True
        x = parent[x]
    return False


def mp_budget(sg: SolverGraph, budget: int) -> StoragePlan:
    """Smallest max recreation cost within a storage ``budget``, by bisecting MP's threshold."""
    base = min_storage_plan(sg)
    base_rep = evaluate(base, sg)
    if budget < base_rep.total_storage:
        raise InfeasibleError(f"budget {budget} is below the minimum storage {base_rep.total_storage}")
    fits = [(base_rep.max_recreation, base_rep.total_storage, base.parents, base)]

    def consider(plan):
        rep = evaluate(plan, sg)
        if rep.total_storage <= budget:
            fits.append((rep.max_recreation, rep.total_storage, plan.parents, plan))
            return True
        return False

    sp = shortest_distances(sg)
    lo = max(sp[1:], default=0)
    if consider(mp(sg, lo)):
        return min(fits)[3]
    shortest = spt_plan(sg)
    if consider(shortest):
        return min(fits)[3]
    hi = base_rep.max_recreation - 1
    if hi >= lo and consider(mp(sg, hi)):
        while lo < hi:
            mid = (lo + hi) // 2
            if consider(mp(sg, mid)):
                hi = mid
            else:
                lo = mid + 1
    return min(fits)[3]


# --- LAST --------------------------------------------------------------------

def last(sg: SolverGraph, mst: StoragePlan, spt: StoragePlan, alpha: float) -> StoragePlan:
    """Shallow-light tree: DFS over ``mst``, splicing in shortest paths wherever a
    version's recreation cost exceeds ``alpha`` times its shortest distance.

    Bounds per-version cost and total weight only for undirected graphs with
    storage equal to recreation; on directed graphs it runs without guarantees.
    """
    if not alpha > 1:
        raise InvalidInputError(f"alpha must exceed 1, got {alpha}")
    if sg.directed:
        log.warning("LAST on a directed graph: no guarantee on storage or recreation bounds")
    n = sg.n
    sp = recreation_costs(spt, sg)
    parent = list(mst.parents)
    dist = recreation_costs(mst, sg)
    kids: list[set] = [set() for _ in range(n + 1)]
    for i in range(1, n + 1):
        kids[parent[i]].add(i)

    def reattach(v, p, d):
        kids[parent[v]].discard(v)
        parent[v] = p
        kids[p].add(v)
        shift = d - dist[v]
        stack = [v]
        while stack:
            w = stack.pop()
            dist[w] += shift
            stack.extend(kids[w])

    def relax(a, b):
        c = sg.edges.get((a, b))
        if b != ROOT and c is not None and dist[b] > dist[a] + c.phi:
            reattach(b, a, dist[a] + c.phi)

    def check(v):
        if v == ROOT or dist[v] <= alpha * sp[v]:
            return
        path = []
        x = v
        while x != ROOT:
            path.append(x)
            x = spt[x]
        for x in reversed(path):
            if dist[x] > sp[x]:
                reattach(x, spt[x], sp[x])

    tree_kids = mst.children()
    for k in tree_kids:
        k.sort()
    # iterative DFS; ("down", u, v) walks a tree edge, ("up", v, u) the back edge
    stack = [("down", ROOT, c) for c in reversed(tree_kids[ROOT])]
    while stack:
        step, a, b = stack.pop()
        relax(a, b)
        check(b)
        if step == "down":
            stack.append(("up", b, a))
            stack.extend(("down", b, c) for c in reversed(tree_kids[b]))
    return StoragePlan(tuple(parent))


# --- GitH --------------------------------------------------------------------

@dataclass(frozen=True)
class GitHConfig:
    window: int | None = 10  # None: unbounded
    max_depth: int = 50
    ordering: str = "size_desc"

    def __post_init__(self):
        if self.window is not None and self.window < 1:
            raise InvalidInputError("window must be at least 1")
        if self.max_depth < 1:
            raise InvalidInputError("max_depth must be at least 1")
        if self.ordering not in ("size_desc", "type_namehash_size"):
            raise InvalidInputError(f"unknown ordering {self.ordering!r}")


def name_hash(path: bytes | str) -> int:
    """git's pack name hash: later non-whitespace bytes weigh most, so shared suffixes sort together."""
    if isinstance(path, str):
        path = path.encode("utf-8")
    h = 0
    for c in path:
        if c in b" \t\n\v\f\r":
            continue
        h = ((h >> 2) + (c << 24)) & 0xFFFFFFFF
    return h


def gith_order(sizes: dict[int, int], cfg: GitHConfig, names=None, types=None) -> list[int]:
    ids = sorted(sizes)
    if cfg.ordering == "size_desc":
        return sorted(ids, key=lambda i: (-sizes[i], i))
    names = names or {}
    types = types or {}
    return sorted(ids, key=lambda i: (-types.get(i, 0), -name_hash(names.get(i, b"")), -sizes[i], i))


def gith(sg: SolverGraph, cfg: GitHConfig = GitHConfig(), *, names=None, types=None,
         delta_oracle: Callable[[int, int], int | None] | None = None,
         discovered: dict | None = None) -> StoragePlan:
    """Git-repack style windowed delta selection with a depth bias.

    Costs come from ``sg``; a base whose delta is not revealed is skipped
    unless ``delta_oracle(base, target)`` supplies it, in which case the value
    is also stored in ``discovered``.
    """
    n = sg.n
    sizes = {i: sg.materialize_cost(i).delta for i in range(1, n + 1)}
    d = cfg.max_depth
    depth = [0] * (n + 1)
    parent = [-1] * (n + 1)
    window: deque[int] = deque()
    for target in gith_order(sizes, cfg, names, types):
        best = None  # (delta, depth, base)
        for b in window:
            if depth[b] >= d:
                continue
            c = sg.edges.get((b, target))
            delta = c.delta if c is not None else None
            if delta is None and delta_oracle is not None:
                delta = delta_oracle(b, target)
                if delta is not None and discovered is not None:
                    discovered[(b, target)] = delta
            if delta is None or delta >= sizes[target]:
                continue
            if best is None:
                best = (delta, depth[b], b)
                continue
            bd, bdepth, bb = best
            lhs = delta * (d - bdepth)
            rhs = bd * (d - depth[b])
            if lhs < rhs or (lhs == rhs and b < bb):
                best = (delta, depth[b], b)
        if best is None:
            parent[target] = ROOT
            depth[target] = 0
            window.append(target)
        else:
            base = best[2]
            parent[target] = base
            depth[target] = depth[base] + 1
            window.remove(base)
            window.append(target)
            window.append(base)
        if cfg.window is not None:
            while len(window) > cfg.window:
                window.popleft()
    return StoragePlan(tuple(parent))


# --- dispatch ----------------------------------------------------------------

STRATEGIES = ("mca", "mst", "spt", "lmg", "mp", "last", "gith")


def resolve(value, reference: int) -> int:
    """``"1.2x"`` scales ``reference`` (rounded down); anything else is taken as an absolute integer."""
    text = str(value).strip()
    try:
        if text.endswith("x"):
            return int(Fraction(text[:-1]) * reference)
        return int(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"bad numeric parameter {value!r}") from None


def solve(sg: SolverGraph, strategy: str, *, budget=None, theta=None, theta_sum=None,
          alpha=None, window=10, depth=50, ordering="size_desc",
          workload: WorkloadProfile | None = None) -> StoragePlan:
    """Run one named strategy.

    Relative values: ``budget`` scales C of the min-storage plan, ``theta`` the
    largest shortest-path distance and ``theta_sum`` the SPT's (weighted) sum.
    """
    if strategy not in STRATEGIES:
        raise InvalidInputError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    if strategy in ("mca", "mst"):
        return min_storage_plan(sg)
    if strategy == "spt":
        return spt_plan(sg)
    if strategy == "gith":
        return gith(sg, GitHConfig(None if window is None else int(window), int(depth), ordering))
    base = min_storage_plan(sg)
    shortest = spt_plan(sg)
    if strategy == "last":
        if alpha is None:
            raise InvalidInputError("last needs alpha")
        return last(sg, base, shortest, float(Fraction(str(alpha))))
    if strategy == "lmg":
        if budget is not None:
            return lmg(sg, base, shortest, resolve(budget, _storage(base, sg)), workload)
        if theta_sum is not None:
            rep = evaluate(shortest, sg, workload)
            ref = rep.sum_recreation if workload is None else int(rep.weighted_sum)
            return lmg_min_storage(sg, base, shortest, resolve(theta_sum, ref), workload)
        raise InvalidInputError("lmg needs budget or theta_sum")
    # mp
    if theta is not None:
        return mp(sg, resolve(theta, max(shortest_distances(sg)[1:], default=0)))
    if budget is not None:
        return mp_budget(sg, resolve(budget, _storage(base, sg)))
    raise InvalidInputError("mp needs theta or budget")
