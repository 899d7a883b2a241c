"""Ground-truth oracles: exhaustive search on tiny instances and ILP export."""
from __future__ import annotations

import io
from dataclasses import dataclass

from . import kernels
from .core import ROOT, SolverGraph, StoragePlan
from .errors import InfeasibleError, InvalidInputError

MAX_EXACT_VERSIONS = 9

OBJECTIVES = {
    "min_storage": kernels.STORAGE,
    "min_sum_recreation": kernels.SUM_REC,
    "min_max_recreation": kernels.MAX_REC,
}
CONSTRAINTS = {
    "storage_budget": kernels.STORAGE,
    "sum_recreation": kernels.SUM_REC,
    "max_recreation": kernels.MAX_REC,
}


@dataclass(frozen=True)
class Objective:
    kind: str = "min_storage"
    constraint: str | None = None
    bound: int | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise InvalidInputError(f"unknown objective {self.kind!r}; expected one of {sorted(OBJECTIVES)}")
        if self.constraint is None:
            return
        if self.constraint not in CONSTRAINTS:
            raise InvalidInputError(
                f"unknown constraint {self.constraint!r}; expected one of {sorted(CONSTRAINTS)}")
        if OBJECTIVES[self.kind] == CONSTRAINTS[self.constraint]:
            raise InvalidInputError("objective and constraint must measure different quantities")
        if self.bound is None:
            raise InvalidInputError("a constraint needs a bound")


def enumerate_optimal(sg: SolverGraph, obj: Objective) -> tuple[StoragePlan, int]:
    """Exact optimum over every valid plan; ties go to the lexicographically least parent vector."""
    n = sg.n
    if n > MAX_EXACT_VERSIONS:
        raise InvalidInputError(f"instance too large for exhaustive search ({n} > {MAX_EXACT_VERSIONS} versions)")
    if n == 0:
        return StoragePlan((-1,)), 0
    offsets = [0]
    cpar, cdel, cphi = [], [], []
    for v in range(1, n + 1):
        for u, d, f in sg.in_adj[v]:
            if u != v:
                cpar.append(u)
                cdel.append(d)
                cphi.append(f)
        offsets.append(len(cpar))
    constraint = kernels.NO_CONSTRAINT if obj.constraint is None else CONSTRAINTS[obj.constraint]
    bound = 0 if obj.bound is None else int(obj.bound)
    found = kernels.search_optimal(n, offsets, cpar, cdel, cphi,
                                   OBJECTIVES[obj.kind], constraint, bound)
    if found is None:
        raise InfeasibleError(f"no plan satisfies {obj.constraint} <= {obj.bound}")
    value, parents = found
    return StoragePlan.from_list(parents), value


def _var(u: int, v: int) -> str:
    return f"x_{u}_{v}"


def export_ilp(sg: SolverGraph, theta: int) -> str:
    """Least-storage ILP with every recreation cost at most ``theta``, in CPLEX LP format.

    The recreation variable of the root is fixed at zero and substituted out.
    Edges whose own recreation weight exceeds ``theta`` can never be used and
    are left out, which also keeps each big-C row slack when its edge is off.
    """
    if theta <= 0:
        raise InvalidInputError("theta must be positive")
    big_c = 2 * theta
    edges = [(u, v, c.delta, c.phi) for (u, v), c in sg.edges.items() if c.phi <= theta]
    buf = io.StringIO()
    buf.write(f"\\ min storage s.t. every recreation cost <= {theta}; C = {big_c}\n")
    buf.write("Minimize\n obj:")
    terms = [f"{d} {_var(u, v)}" for u, v, d, _ in edges]
    buf.write(_wrap(terms) if terms else " 0 x_dummy")
    buf.write("\nSubject To\n")
    for v in range(1, sg.n + 1):
        into = [_var(u, w) for u, w, _, _ in edges if w == v]
        if not into:
            # no usable edge: emit an unsatisfiable row so solvers report infeasibility
            buf.write(f" assign_{v}: 0 r_{v} = 1\n")
            continue
        buf.write(f" assign_{v}:" + _wrap(into) + " = 1\n")
    for u, v, _, phi in edges:
        lhs = [] if u == ROOT else [f"r_{u}"]
        lhs += [f"- r_{v}", f"+ {big_c} {_var(u, v)}"]
        buf.write(f" link_{u}_{v}: " + " ".join(lhs) + f" <= {big_c - phi}\n")
    buf.write("Bounds\n")
    for v in range(1, sg.n + 1):
        buf.write(f" 0 <= r_{v} <= {theta}\n")
    buf.write("Binary\n")
    for u, v, _, _ in edges:
        buf.write(f" {_var(u, v)}\n")
    buf.write("End\n")
    return buf.getvalue()


def _wrap(terms: list[str], width: int = 8) -> str:
    """Join objective/row terms, breaking long rows across lines (LP lines stay short)."""
    parts = []
    for k in range(0, len(terms), width):
        chunk = terms[k:k + width]
        if k:
            chunk = [t if t.startswith(("+", "-")) else "+ " + t for t in chunk]
            parts.append("\n   " + " ".join(chunk))
        else:
            head = [chunk[0]] + [t if t.startswith(("+", "-")) else "+ " + t for t in chunk[1:]]
            parts.append(" " + " ".join(head))
    return "".join(parts)
