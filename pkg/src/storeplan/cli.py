"""``storeplan`` command line.

Reports go to standard output as tab-separated lines under a ``#`` header.
Failures print one ``error<TAB>kind<TAB>message`` line to standard error and
exit 2 (infeasible), 3 (invalid input) or 4 (corruption).
"""
from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import (build_solver_graph, check_triangle, dump_workload, evaluate, parse_workload,
                   read_matrices, read_plan, validate_plan, write_matrices, write_plan)
from .deltas import parse_policy, populate_matrices
from .errors import (CorruptionError, InfeasibleError, InvalidInputError, InvalidPlanError,
                     StoreplanError)
from .exact import CONSTRAINTS, OBJECTIVES, Objective, enumerate_optimal, export_ilp
from .genlab import DC_STYLE, GenParams, dump_params, gen_workload, generate, parse_params, \
    read_corpus, write_corpus
from .heuristics import STRATEGIES, solve
from .store import Repository

SEED_ENV = "STOREPLAN_SEED"
_KINDS = {InfeasibleError: "infeasible", InvalidInputError: "invalid_input",
          CorruptionError: "corruption"}


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise InvalidInputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _out(text: str, path=None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _report(rep, extra=()) -> str:
    rows = ["# metric\tvalue"]
    rows += [f"{k}\t{v}" for k, v in extra]
    for k, v in rep.summary().items():
        if v is not None:
            rows.append(f"{k}\t{v}")
    return "\n".join(rows) + "\n"


def _load_sg(path):
    return build_solver_graph(None, read_matrices(path))


def _workload(path):
    if path is None:
        return None
    return parse_workload(Path(path).read_text(encoding="utf-8"))


def _solver_kwargs(args) -> dict:
    return {"budget": args.budget, "theta": args.theta, "theta_sum": args.theta_sum,
            "alpha": args.alpha, "window": args.window, "depth": args.depth,
            "ordering": args.ordering}


# --- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.params:
        text = Path(args.params).read_text(encoding="utf-8")
        p = parse_params(text)
        if not re.search(r"^\s*seed\s*=", text, re.M):
            p = replace(p, seed=default_seed())
    else:
        p = replace(DC_STYLE if args.preset == "dc" else GenParams(), seed=default_seed())
    if args.seed is not None:
        p = replace(p, seed=args.seed)
    sk, corpus = generate(p)
    write_corpus(args.out, sk, corpus, p)
    _out(f"# versions\tedges\tbytes\n{sk.n}\t{len(sk.edges())}\t{sum(map(len, corpus.values()))}\n")
    return 0


def cmd_params(args) -> int:
    p = DC_STYLE if args.preset == "dc" else GenParams()
    _out(dump_params(replace(p, seed=default_seed())), args.out)
    return 0


def cmd_matrix(args) -> int:
    graph, corpus = read_corpus(args.corpus)
    m = populate_matrices(corpus, graph, parse_policy(args.policy), args.mode)
    write_matrices(m, args.out)
    _out(f"# versions\tentries\n{graph.n}\t{len(m.entries)}\n")
    return 0


def cmd_solve(args) -> int:
    sg = _load_sg(args.matrix)
    wl = _workload(args.workload)
    plan = solve(sg, args.strategy, workload=wl, **_solver_kwargs(args))
    if args.out:
        write_plan(plan, args.out)
    rep = evaluate(plan, sg, wl)
    extra = [("strategy", args.strategy)]
    if args.strategy == "last" and sg.directed:
        extra.append(("guarantee", "none"))
    _out(_report(rep, extra))
    return 0


def _sweep_points(text: str) -> list[str]:
    try:
        lo, hi, steps = text.split(":")
        steps = int(steps)
    except ValueError:
        raise InvalidInputError(f"bad --param-range {text!r}; expected LO:HI:STEPS") from None
    rel = lo.endswith("x")
    if rel != hi.endswith("x") or steps < 1:
        raise InvalidInputError("--param-range ends must both be relative (x) or both absolute")
    try:
        a, b = Fraction(lo.rstrip("x")), Fraction(hi.rstrip("x"))
    except ValueError:
        raise InvalidInputError(f"bad --param-range {text!r}") from None
    vals = [a] if steps == 1 else [a + (b - a) * k / (steps - 1) for k in range(steps)]
    return [f"{v}x" if rel else str(v) for v in vals]


_SWEEP_PARAM = {"lmg": "budget", "mp": "theta", "last": "alpha", "gith": "window"}


def cmd_sweep(args) -> int:
    if args.strategy not in _SWEEP_PARAM:
        raise InvalidInputError(f"sweep supports {', '.join(_SWEEP_PARAM)}")
    sg = _load_sg(args.matrix)
    wl = _workload(args.workload)
    key = _SWEEP_PARAM[args.strategy]
    rows = []
    for value in _sweep_points(args.param_range):
        kw = _solver_kwargs(args)
        kw[key] = int(Fraction(value)) if key == "window" else value
        rep = evaluate(solve(sg, args.strategy, workload=wl, **kw), sg, wl)
        rows.append([value, rep.total_storage, rep.sum_recreation, rep.max_recreation]
                    + ([rep.weighted_sum] if wl is not None else []))
    header = [key, "storage", "sum_recreation", "max_recreation"] + (["weighted_sum"] if wl else [])
    target = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(target, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if target is not sys.stdout:
            target.close()
    return 0


def cmd_exact(args) -> int:
    sg = _load_sg(args.matrix)
    constraint = args.constraint
    if args.bound is not None and constraint is None:
        constraint = "max_recreation" if args.objective == "min_storage" else "storage_budget"
    plan, value = enumerate_optimal(sg, Objective(args.objective, constraint, args.bound))
    if args.out:
        write_plan(plan, args.out)
    _out(_report(evaluate(plan, sg), [("objective", args.objective), ("optimum", value)]))
    return 0


def cmd_export_ilp(args) -> int:
    _out(export_ilp(_load_sg(args.matrix), args.theta), args.out)
    return 0


def cmd_validate(args) -> int:
    m = read_matrices(args.matrix)
    sg = build_solver_graph(None, m)
    rows = ["# check\tsubject\tdetail"]
    if args.plan:
        rows += [f"plan\t{v.version}\t{v.kind}: {v.detail}" for v in validate_plan(read_plan(args.plan), sg)]
    if args.triangle:
        rows += [f"triangle\t{','.join(map(str, t.nodes))}\t{t.detail}" for t in check_triangle(m)]
    _out("\n".join(rows) + "\n")
    return 0 if len(rows) == 1 else 3


def cmd_workload(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    _out(dump_workload(gen_workload(args.versions, args.exponent, seed)), args.out)
    return 0


def cmd_repo(args) -> int:
    if args.op == "init":
        Repository.init(args.repo, args.policy, args.mode)
        return 0
    repo = Repository(args.repo)
    if args.op == "commit":
        vid = repo.commit(Path(args.file).read_bytes(), args.parent)
        _out(f"# version\n{vid}\n")
    elif args.op == "plan":
        res = repo.plan(args.strategy, args.policy, **_solver_kwargs(args))
        b, a = res.before.summary(), res.after.summary()
        rows = ["# metric\tbefore\tafter"] + [f"{k}\t{b[k]}\t{a[k]}" for k in b if b[k] is not None]
        _out("\n".join(rows) + "\n")
    elif args.op == "checkout":
        data = repo.checkout(args.version)
        if args.out in (None, "-"):
            sys.stdout.buffer.write(data)
        else:
            Path(args.out).write_bytes(data)
    else:  # stats
        du = repo.disk_usage()
        _out(_report(repo.stats(), [("versions", len(repo.versions())),
                                    ("object_bytes", du["objects"]),
                                    ("manifest_bytes", du["manifest"])]))
    return 0


# --- parser ------------------------------------------------------------------

def _solver_flags(p, strategy_required=True):
    p.add_argument("--strategy", choices=STRATEGIES, required=strategy_required)
    p.add_argument("--budget", help="storage budget in bytes, or a multiple of min storage like 1.1x")
    p.add_argument("--theta", help="max recreation bound (mp); NNx scales the largest shortest path")
    p.add_argument("--theta-sum", dest="theta_sum", help="sum recreation bound (lmg)")
    p.add_argument("--alpha", help="stretch factor > 1 (last)")
    p.add_argument("--window", type=int, default=10, help="gith window size")
    p.add_argument("--depth", type=int, default=50, help="gith max chain depth")
    p.add_argument("--ordering", choices=("size_desc", "type_namehash_size"), default="size_desc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="storeplan",
                                     description="Plan materialization vs. delta storage for dataset versions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--params", help="key = value parameter file")
    p.add_argument("--preset", choices=("default", "dc"), default="default")
    p.add_argument("--seed", type=int, help=f"overrides the params file and ${SEED_ENV}")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("params", help="print a parameter file for a preset")
    p.add_argument("--preset", choices=("default", "dc"), default="default")
    p.add_argument("--out")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("matrix", help="compute cost matrices for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--policy", default="k_hop:10")
    p.add_argument("--mode", choices=("directed", "undirected"), default="directed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("solve", help="run a strategy on a matrix file")
    p.add_argument("--matrix", required=True)
    _solver_flags(p)
    p.add_argument("--workload")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a strategy over a parameter range, CSV out")
    p.add_argument("--matrix", required=True)
    _solver_flags(p)
    p.add_argument("--param-range", dest="param_range", required=True, help="LO:HI:STEPS (e.g. 1x:2x:8)")
    p.add_argument("--workload")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exact", help="exhaustive optimum for tiny instances")
    p.add_argument("--matrix", required=True)
    p.add_argument("--objective", choices=sorted(OBJECTIVES), required=True)
    p.add_argument("--constraint", choices=sorted(CONSTRAINTS))
    p.add_argument("--bound", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("export-ilp", help="write the bounded-max-recreation ILP in LP format")
    p.add_argument("--matrix", required=True)
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_ilp)

    p = sub.add_parser("validate", help="check a plan and/or the triangle conditions")
    p.add_argument("--matrix", required=True)
    p.add_argument("--plan")
    p.add_argument("--triangle", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("workload", help="Zipf access weights")
    p.add_argument("--versions", type=int, required=True)
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_workload)

    p = sub.add_parser("repo", help="local version repository")
    ops = p.add_subparsers(dest="op", required=True)
    q = ops.add_parser("init")
    q.add_argument("repo")
    q.add_argument("--policy", default="k_hop:10")
    q.add_argument("--mode", choices=("directed", "undirected"), default="directed")
    q = ops.add_parser("commit")
    q.add_argument("repo")
    q.add_argument("file")
    q.add_argument("--parent", type=int, action="append", default=[])
    q = ops.add_parser("plan")
    q.add_argument("repo")
    _solver_flags(q)
    q.add_argument("--policy", help="overrides the repository's pair policy")
    q = ops.add_parser("checkout")
    q.add_argument("repo")
    q.add_argument("version", type=int)
    q.add_argument("--out")
    q = ops.add_parser("stats")
    q.add_argument("repo")
    p.set_defaults(func=cmd_repo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StoreplanError as exc:
        kind = next((k for cls, k in _KINDS.items() if isinstance(exc, cls)), "error")
        if isinstance(exc, InvalidPlanError):
            kind = "invalid_plan"
        msg = " ".join(str(exc).split())
        print(f"error\t{kind}\t{msg}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error\tinvalid_input\t{exc.strerror or exc}: {exc.filename}", file=sys.stderr)
        return InvalidInputError.exit_code


if __name__ == "__main__":
    sys.exit(main())
