"""Domain types, solver-graph construction, plan validation and cost evaluation.

Version 0 is the dummy root: a plan edge ``0 -> i`` means version ``i`` is
materialized, any other edge ``j -> i`` means ``i`` is stored as a delta from
``j``.  Costs are integers; storage is in bytes and recreation in abstract
units that only need to be additive along a path.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import InvalidInputError, InvalidPlanError

ROOT = 0
INT64_MAX = 2**63 - 1


class Cost(NamedTuple):
    delta: int  # storage bytes
    phi: int  # recreation units


def _check_cost(value, what) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidInputError(f"{what}: cost must be an integer, got {value!r}")
    value = int(value)
    if value < 0 or value > INT64_MAX:
        raise InvalidInputError(f"{what}: cost {value} outside [0, 2^63)")
    return value


@dataclass(frozen=True)
class VersionGraph:
    """Derivation DAG over versions ``1..n`` with per-version full sizes."""

    n: int
    derivation_edges: frozenset = frozenset()
    full_sizes: Mapping[int, Cost] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError("version count must be non-negative")
        edges = frozenset((int(i), int(j)) for i, j in self.derivation_edges)
        object.__setattr__(self, "derivation_edges", edges)
        sizes = {int(i): Cost(*c) for i, c in self.full_sizes.items()}
        object.__setattr__(self, "full_sizes", sizes)
        for i, j in edges:
            if not (1 <= i <= self.n and 1 <= j <= self.n) or i == j:
                raise InvalidInputError(f"bad derivation edge {i}->{j}")
        missing = [i for i in range(1, self.n + 1) if i not in sizes]
        if missing:
            raise InvalidInputError(f"versions without full size: {missing[:10]}")
        if _has_cycle(self.n, edges):
            raise InvalidInputError("derivation edges contain a cycle")

    def parents(self, j: int) -> list[int]:
        return sorted(i for i, k in self.derivation_edges if k == j)

    def undirected_neighbors(self) -> list[list[int]]:
        adj: list[set] = [set() for _ in range(self.n + 1)]
        for i, j in self.derivation_edges:
            adj[i].add(j)
            adj[j].add(i)
        return [sorted(a) for a in adj]


def _has_cycle(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    indeg = [0] * (n + 1)
    out: list[list[int]] = [[] for _ in range(n + 1)]
    for i, j in edges:
        out[i].append(j)
        indeg[j] += 1
    stack = [v for v in range(1, n + 1) if indeg[v] == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen != n


@dataclass(frozen=True)
class CostMatrices:
    """Sparse storage/recreation matrices; an absent entry is unknown."""

    directed: bool
    entries: Mapping[tuple[int, int], Cost]

    def __post_init__(self):
        clean: dict[tuple[int, int], Cost] = {}
        for key, cost in self.entries.items():
            i, j = int(key[0]), int(key[1])
            if i < 1 or j < 1:
                raise InvalidInputError(f"entry ({i}, {j}): version ids start at 1")
            if cost is None or len(cost) != 2 or None in cost:
                raise InvalidInputError(f"entry ({i}, {j}): both delta and phi are required")
            clean[(i, j)] = Cost(_check_cost(cost[0], f"delta[{i},{j}]"),
                                 _check_cost(cost[1], f"phi[{i},{j}]"))
        if not self.directed:
            for (i, j), c in clean.items():
                if i != j and clean.get((j, i)) != c:
                    raise InvalidInputError(
                        f"undirected matrices need equal ({i},{j}) and ({j},{i}) entries")
        object.__setattr__(self, "entries", clean)

    @property
    def n(self) -> int:
        return max((max(k) for k in self.entries), default=0)

    def get(self, i: int, j: int) -> Cost | None:
        return self.entries.get((i, j))

    def off_diagonal(self) -> int:
        return sum(1 for i, j in self.entries if i != j)


@dataclass(frozen=True)
class SolverGraph:
    """Graph over ``{0} | {1..n}`` with ``(delta, phi)`` edge weights."""

    n: int
    directed: bool
    edges: Mapping[tuple[int, int], Cost]
    out_adj: tuple = ()
    in_adj: tuple = ()

    def weight(self, u: int, v: int) -> Cost | None:
        return self.edges.get((u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def materialize_cost(self, i: int) -> Cost:
        return self.edges[(ROOT, i)]

    def edge_list(self) -> list[tuple[int, int, int, int]]:
        return [(u, v, c.delta, c.phi) for (u, v), c in self.edges.items()]

    def restricted(self, keep) -> "SolverGraph":
        """Copy keeping root edges plus the delta edges for which ``keep(u, v)`` holds."""
        edges = {k: c for k, c in self.edges.items() if k[0] == ROOT or keep(*k)}
        return _make_solver_graph(self.n, self.directed, edges)


def _make_solver_graph(n, directed, edges) -> SolverGraph:
    ordered = dict(sorted(edges.items()))
    out_adj: list[list] = [[] for _ in range(n + 1)]
    in_adj: list[list] = [[] for _ in range(n + 1)]
    for (u, v), c in ordered.items():
        out_adj[u].append((v, c.delta, c.phi))
        in_adj[v].append((u, c.delta, c.phi))
    return SolverGraph(n, directed, ordered,
                       tuple(tuple(a) for a in out_adj),
                       tuple(tuple(a) for a in in_adj))


def build_solver_graph(graph: VersionGraph | None, matrices: CostMatrices) -> SolverGraph:
    """Map matrices onto the solver graph: ``0 -> i`` carries the diagonal entry.

    ``graph`` only fixes the version count; pass ``None`` to infer it from the
    matrices.
    """
    n = graph.n if graph is not None else matrices.n
    edges: dict[tuple[int, int], Cost] = {}
    for i in range(1, n + 1):
        diag = matrices.get(i, i)
        if diag is None:
            raise InvalidInputError(f"version {i} has no materialization cost")
        edges[(ROOT, i)] = diag
    for (i, j), c in matrices.entries.items():
        if i == j:
            continue
        if i > n or j > n:
            raise InvalidInputError(f"entry ({i}, {j}) refers to a version beyond {n}")
        edges[(i, j)] = c
        if not matrices.directed:
            edges[(j, i)] = c
    return _make_solver_graph(n, matrices.directed, edges)


@dataclass(frozen=True)
class StoragePlan:
    """Parent assignment; ``parents[i]`` is the storage parent of version ``i``.

    Index 0 is a placeholder for the root and holds -1.
    """

    parents: tuple

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int], n: int | None = None) -> "StoragePlan":
        n = max(mapping, default=0) if n is None else n
        parents = [-1] * (n + 1)
        for i, p in mapping.items():
            if not 1 <= i <= n:
                raise InvalidInputError(f"plan names version {i} outside 1..{n}")
            parents[i] = int(p)
        return cls(tuple(parents))

    @classmethod
    def from_list(cls, parents_of_versions: Iterable[int]) -> "StoragePlan":
        return cls((-1, *(int(p) for p in parents_of_versions)))

    @property
    def n(self) -> int:
        return len(self.parents) - 1

    def __getitem__(self, i: int) -> int:
        return self.parents[i]

    def items(self):
        return ((i, self.parents[i]) for i in range(1, len(self.parents)))

    def edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in self.items()]

    def materialized(self) -> list[int]:
        return [i for i, p in self.items() if p == ROOT]

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(len(self.parents))]
        for i, p in self.items():
            if 0 <= p < len(self.parents):
                kids[p].append(i)
        return kids

    def depths(self) -> list[int]:
        """Delta-chain length per version (materialized = 0); plan must be valid."""
        depth = [0] * len(self.parents)
        kids = self.children()
        stack = [(c, 0) for c in kids[ROOT]]
        while stack:
            v, d = stack.pop()
            depth[v] = d
            stack.extend((c, d + 1) for c in kids[v])
        return depth


@dataclass(frozen=True)
class Violation:
    kind: str  # "cycle" | "unreachable" | "edge" | "parent"
    version: int
    detail: str

    def __str__(self):
        return f"{self.kind} at version {self.version}: {self.detail}"


def validate_plan(plan: StoragePlan, sg: SolverGraph) -> list[Violation]:
    """Every reason ``plan`` is not a V0-rooted spanning tree of ``sg``; empty means valid."""
    out: list[Violation] = []
    n = sg.n
    if plan.n != n:
        out.append(Violation("parent", 0, f"plan covers {plan.n} versions, graph has {n}"))
    good = [False] * (n + 1)
    for i in range(1, n + 1):
        p = plan.parents[i] if i <= plan.n else -1
        if p == -1:
            out.append(Violation("parent", i, "no parent assigned"))
        elif not 0 <= p <= n:
            out.append(Violation("parent", i, f"parent {p} is not a version"))
        elif p == i:
            out.append(Violation("parent", i, "version is its own parent"))
        elif not sg.has_edge(p, i):
            out.append(Violation("edge", i, f"edge not revealed: {p}->{i}"))
            good[i] = True
        else:
            good[i] = True

    # 0 unvisited, 1 on current walk, 2 reaches root, 3 does not
    state = [0] * (n + 1)
    state[ROOT] = 2
    on_cycle: set[int] = set()
    for start in range(1, n + 1):
        walk = []
        v = start
        while True:
            if state[v] in (2, 3):
                result = state[v]
                break
            if state[v] == 1:
                cycle = walk[walk.index(v):]
                on_cycle.update(cycle)
                out.append(Violation("cycle", min(cycle),
                                     "cycle " + "->".join(map(str, cycle + [cycle[0]]))))
                result = 3
                break
            state[v] = 1
            walk.append(v)
            p = plan.parents[v] if v <= plan.n else -1
            if not 0 <= p <= n or p == v:
                result = 3
                break
            v = p
        for w in walk:
            state[w] = result
    for i in range(1, n + 1):
        if state[i] == 3 and good[i] and i not in on_cycle:
            out.append(Violation("unreachable", i, "parent chain never reaches the root"))
    return out


@dataclass(frozen=True)
class CostReport:
    total_storage: int
    recreation: tuple  # index 0 is the root (0)
    sum_recreation: int
    max_recreation: int
    weighted_sum: float | None = None

    def summary(self) -> dict:
        return {
            "storage": self.total_storage,
            "sum_recreation": self.sum_recreation,
            "max_recreation": self.max_recreation,
            "weighted_sum": self.weighted_sum,
        }


@dataclass(frozen=True)
class WorkloadProfile:
    freq: Mapping[int, float]

    def __post_init__(self):
        if any(f < 0 for f in self.freq.values()):
            raise InvalidInputError("workload weights must be non-negative")
        if not any(f > 0 for f in self.freq.values()):
            raise InvalidInputError("workload needs at least one positive weight")

    def weight(self, i: int) -> float:
        return self.freq.get(i, 0)

    def scaled(self, factor) -> "WorkloadProfile":
        return WorkloadProfile({i: f * factor for i, f in self.freq.items()})


def recreation_costs(plan: StoragePlan, sg: SolverGraph) -> list[int]:
    """Per-version path sums of phi; the plan must already be valid."""
    rec = [0] * (sg.n + 1)
    kids = plan.children()
    stack = list(kids[ROOT])
    while stack:
        v = stack.pop()
        p = plan.parents[v]
        rec[v] = rec[p] + sg.edges[(p, v)].phi
        stack.extend(kids[v])
    return rec


def evaluate(plan: StoragePlan, sg: SolverGraph,
             workload: WorkloadProfile | None = None) -> CostReport:
    violations = validate_plan(plan, sg)
    if violations:
        raise InvalidPlanError(violations)
    storage = sum(sg.edges[(p, i)].delta for i, p in plan.items())
    rec = recreation_costs(plan, sg)
    versions = rec[1:]
    weighted = None
    if workload is not None:
        weighted = sum(workload.weight(i) * rec[i] for i in range(1, sg.n + 1))
    return CostReport(storage, tuple(rec), sum(versions), max(versions, default=0), weighted)


@dataclass(frozen=True)
class TriangleViolation:
    nodes: tuple
    detail: str

    def __str__(self):
        return f"{self.nodes}: {self.detail}"


def check_triangle(matrices: CostMatrices) -> list[TriangleViolation]:
    """Report revealed triples and pairs that break the delta triangle inequalities.

    For distinct p, q, w: ``|D[p,q] - D[q,w]| <= D[p,w] <= D[p,q] + D[q,w]``;
    for distinct p, q: ``|D[p,p] - D[p,q]| <= D[q,q] <= D[p,p] + D[p,q]``.
    Only storage values are checked.
    """
    out: list[TriangleViolation] = []
    n = matrices.n
    dense = np.full((n + 1, n + 1), -1, dtype=np.int64)
    for (i, j), c in matrices.entries.items():
        dense[i, j] = c.delta

    for (p, q), c in sorted(matrices.entries.items()):
        if p == q or dense[p, p] < 0 or dense[q, q] < 0:
            continue
        dpp, dqq, dpq = int(dense[p, p]), int(dense[q, q]), c.delta
        if not abs(dpp - dpq) <= dqq <= dpp + dpq:
            out.append(TriangleViolation(
                (p, q), f"|{dpp}-{dpq}| <= {dqq} <= {dpp}+{dpq} fails"))

    off = dense.copy()
    np.fill_diagonal(off, -1)
    for q in range(1, n + 1):
        into = np.flatnonzero(off[:, q] >= 0)  # p with D[p,q]
        outof = np.flatnonzero(off[q, :] >= 0)  # w with D[q,w]
        if len(into) == 0 or len(outof) == 0:
            continue
        dpw = off[np.ix_(into, outof)]
        a = off[into, q][:, None]
        b = off[q, outof][None, :]
        known = (dpw >= 0) & (into[:, None] != outof[None, :])
        bad = known & ((dpw > a + b) | (dpw < np.abs(a - b)))
        for r, s in zip(*np.nonzero(bad)):
            p, w = int(into[r]), int(outof[s])
            out.append(TriangleViolation(
                (p, q, w),
                f"|{int(a[r, 0])}-{int(b[0, s])}| <= {int(dpw[r, s])} <= "
                f"{int(a[r, 0])}+{int(b[0, s])} fails"))
    return out


# --- interchange files -------------------------------------------------------

def dump_matrices(matrices: CostMatrices) -> str:
    buf = io.StringIO()
    buf.write("directed\n" if matrices.directed else "undirected\n")
    for (i, j), c in sorted(matrices.entries.items()):
        buf.write(f"{i}\t{j}\t{c.delta}\t{c.phi}\n")
    return buf.getvalue()


def parse_matrices(text: str) -> CostMatrices:
    lines = text.split("\n")
    header = lines[0].strip()
    if header not in ("directed", "undirected"):
        raise InvalidInputError(f"matrix header must be 'directed' or 'undirected', got {header!r}")
    entries: dict[tuple[int, int], Cost] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise InvalidInputError(f"line {lineno}: expected 4 tab-separated fields")
        try:
            i, j, d, f = (int(x) for x in parts)
        except ValueError:
            raise InvalidInputError(f"line {lineno}: non-integer field") from None
        if (i, j) in entries:
            raise InvalidInputError(f"line {lineno}: duplicate entry ({i}, {j})")
        entries[(i, j)] = Cost(d, f)
    directed = header == "directed"
    if not directed:
        for (i, j), c in list(entries.items()):
            entries.setdefault((j, i), c)
    return CostMatrices(directed, entries)


def read_matrices(path) -> CostMatrices:
    return parse_matrices(Path(path).read_text(encoding="utf-8"))


def write_matrices(matrices: CostMatrices, path) -> None:
    Path(path).write_text(dump_matrices(matrices), encoding="utf-8", newline="\n")


def dump_plan(plan: StoragePlan) -> str:
    return "".join(f"{i}\t{p}\n" for i, p in plan.items())


def parse_plan(text: str) -> StoragePlan:
    mapping = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise InvalidInputError(f"plan line {lineno}: expected 'version<TAB>parent'")
        try:
            i, p = int(parts[0]), int(parts[1])
        except ValueError:
            raise InvalidInputError(f"plan line {lineno}: non-integer field") from None
        if i in mapping:
            raise InvalidInputError(f"plan line {lineno}: version {i} listed twice")
        mapping[i] = p
    return StoragePlan.from_mapping(mapping)


def read_plan(path) -> StoragePlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


def write_plan(plan: StoragePlan, path) -> None:
    Path(path).write_text(dump_plan(plan), encoding="utf-8", newline="\n")


def dump_workload(workload: WorkloadProfile) -> str:
    return "".join(f"{i}\t{workload.freq[i]!r}\n" for i in sorted(workload.freq))


def parse_workload(text: str) -> WorkloadProfile:
    freq = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        try:
            freq[int(parts[0])] = float(parts[1])
        except (ValueError, IndexError):
            raise InvalidInputError(f"workload line {lineno}: expected 'version<TAB>weight'") from None
    return WorkloadProfile(freq)
