"""Local content-addressed repository whose physical layout follows a storage plan.

Layout::

    objects/<sha256 of artifact file>   delta artifacts (materialized = delta from empty)
    manifest.json                       versions, derivation parents, storage parents
    lock                                flock target: exclusive for writers, shared for readers
"""
from __future__ import annotations

import contextlib
import fcntl
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .core import (Cost, CostReport, StoragePlan, VersionGraph, _make_solver_graph,
                   build_solver_graph, evaluate, validate_plan)
from .deltas import (DeltaArtifact, apply_delta, compute_delta, materialize, parse_policy,
                     populate_matrices)
from .errors import CorruptionError, InvalidInputError, InvalidPlanError
from .heuristics import solve

MANIFEST = "manifest.json"
FORMAT = 1


@dataclass(frozen=True)
class PlanResult:
    before: CostReport
    after: CostReport
    plan: StoragePlan


class Repository:
    def __init__(self, root):
        self.root = Path(root)
        self.objects = self.root / "objects"
        if not (self.root / MANIFEST).exists():
            raise InvalidInputError(f"{self.root} is not a repository (no {MANIFEST})")

    # --- setup & locking -----------------------------------------------------

    @classmethod
    def init(cls, root, policy: str = "k_hop:10", mode: str = "directed") -> "Repository":
        root = Path(root)
        parse_policy(policy)
        if mode not in ("directed", "undirected"):
            raise InvalidInputError(f"unknown delta mode {mode!r}")
        if (root / MANIFEST).exists():
            raise InvalidInputError(f"{root} already holds a repository")
        (root / "objects").mkdir(parents=True, exist_ok=True)
        (root / "lock").touch()
        _write_json_atomic(root / MANIFEST, {"format": FORMAT, "policy": policy, "mode": mode,
                                             "strategy": "commit", "versions": []})
        return cls(root)

    @contextlib.contextmanager
    def _lock(self, exclusive: bool):
        with open(self.root / "lock", "a+b") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def _load(self) -> dict:
        try:
            manifest = json.loads((self.root / MANIFEST).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CorruptionError(f"unreadable manifest: {exc}") from None
        if manifest.get("format") != FORMAT:
            raise CorruptionError(f"unsupported manifest format {manifest.get('format')!r}")
        return manifest

    # --- objects -------------------------------------------------------------

    def _put(self, artifact: DeltaArtifact, created: list) -> str:
        raw = artifact.to_bytes()
        name = hashlib.sha256(raw).hexdigest()
        path = self.objects / name
        if not path.exists():
            _write_atomic(path, raw)
            created.append(path)
        return name

    def _get(self, name: str) -> DeltaArtifact:
        try:
            raw = (self.objects / name).read_bytes()
        except OSError:
            raise CorruptionError(f"object {name} is missing") from None
        if hashlib.sha256(raw).hexdigest() != name:
            raise CorruptionError(f"object {name} does not match its name")
        return DeltaArtifact.from_bytes(raw)

    # --- operations ----------------------------------------------------------

    def commit(self, data: bytes, parents=()) -> int:
        """Add a version; stored as a delta from its first parent when that is smaller."""
        with self._lock(True):
            m = self._load()
            ids = {v["id"] for v in m["versions"]}
            parents = sorted(set(int(p) for p in parents))
            unknown = [p for p in parents if p not in ids]
            if unknown:
                raise InvalidInputError(f"unknown parent version(s) {unknown}")
            art = materialize(data)
            base = 0
            if parents:
                src = self._checkout(m, parents[0])
                delta = compute_delta(src, data, m["mode"])
                if delta.storage_cost < art.storage_cost:
                    art, base = delta, parents[0]
            created: list = []
            try:
                name = self._put(art, created)
                vid = len(m["versions"]) + 1
                m["versions"].append({"id": vid, "parents": parents, "base": base, "object": name,
                                      "digest": hashlib.sha256(data).hexdigest(), "size": len(data)})
                self._check_manifest(m)
                _write_json_atomic(self.root / MANIFEST, m)
            except BaseException:
                for path in created:
                    path.unlink(missing_ok=True)
                raise
            return vid

    def checkout(self, vid: int) -> bytes:
        with self._lock(False):
            return self._checkout(self._load(), vid)

    def _checkout(self, m: dict, vid: int) -> bytes:
        versions = m["versions"]
        if not 1 <= vid <= len(versions):
            raise InvalidInputError(f"no version {vid}")
        chain = []
        x = vid
        while x != 0:
            if len(chain) > len(versions):
                raise CorruptionError("storage parents form a cycle")
            chain.append(x)
            x = versions[x - 1]["base"]
        data = b""
        for x in reversed(chain):
            data = apply_delta(data, self._get(versions[x - 1]["object"]))
        if hashlib.sha256(data).hexdigest() != versions[vid - 1]["digest"]:
            raise CorruptionError(f"version {vid} does not match its committed digest")
        return data

    def _measured_graph(self, m: dict):
        edges = {}
        for v in m["versions"]:
            art = self._get(v["object"])
            edges[(v["base"], v["id"])] = Cost(art.storage_cost, art.recreation_cost)
        plan = StoragePlan.from_list([v["base"] for v in m["versions"]])
        return _make_solver_graph(len(m["versions"]), m["mode"] == "directed", edges), plan

    def _check_manifest(self, m: dict) -> None:
        sg = _make_solver_graph(len(m["versions"]), True,
                                {(v["base"], v["id"]): Cost(0, 0) for v in m["versions"]})
        plan = StoragePlan.from_list([v["base"] for v in m["versions"]])
        bad = validate_plan(plan, sg)
        if bad:
            raise InvalidPlanError(bad)

    def stats(self) -> CostReport:
        """Costs of the current layout measured from the stored artifacts."""
        with self._lock(False):
            m = self._load()
            if not m["versions"]:
                return CostReport(0, (0,), 0, 0)
            sg, plan = self._measured_graph(m)
            return evaluate(plan, sg)

    def disk_usage(self) -> dict:
        """Byte totals of referenced objects and of the manifest."""
        with self._lock(False):
            m = self._load()
            names = {v["object"] for v in m["versions"]}
            return {"objects": sum((self.objects / n).stat().st_size for n in names),
                    "object_count": len(names),
                    "manifest": (self.root / MANIFEST).stat().st_size}

    def versions(self) -> list[dict]:
        with self._lock(False):
            return [dict(v) for v in self._load()["versions"]]

    def plan(self, strategy: str, policy: str | None = None, **params) -> PlanResult:
        """Re-lay out storage according to ``strategy``; all-or-nothing."""
        with self._lock(True):
            m = self._load()
            n = len(m["versions"])
            if n == 0:
                raise InvalidInputError("repository is empty")
            sg_now, plan_now = self._measured_graph(m)
            before = evaluate(plan_now, sg_now)
            contents = {v["id"]: self._checkout(m, v["id"]) for v in m["versions"]}
            sizes = {i: Cost(materialize(d).storage_cost, materialize(d).storage_cost)
                     for i, d in contents.items()}
            graph = VersionGraph(n, frozenset((p, v["id"]) for v in m["versions"] for p in v["parents"]),
                                 sizes)
            matrices = populate_matrices(contents, graph, parse_policy(policy or m["policy"]), m["mode"])
            sg = build_solver_graph(graph, matrices)
            new_plan = solve(sg, strategy, **params)
            bad = validate_plan(new_plan, sg)
            if bad:
                raise InvalidPlanError(bad)

            old_names = {v["object"] for v in m["versions"]}
            created: list = []
            try:
                updated = []
                for v in m["versions"]:
                    i, p = v["id"], new_plan[v["id"]]
                    art = materialize(contents[i]) if p == 0 else compute_delta(contents[p], contents[i], m["mode"])
                    updated.append(dict(v, base=p, object=self._put(art, created)))
                new_m = dict(m, versions=updated, strategy=strategy)
                self._check_manifest(new_m)
                _write_json_atomic(self.root / MANIFEST, new_m)
            except BaseException:
                for path in created:
                    path.unlink(missing_ok=True)
                raise
            keep = {v["object"] for v in updated}
            for name in old_names - keep:
                (self.objects / name).unlink(missing_ok=True)
            sg_after, plan_after = self._measured_graph(new_m)
            return PlanResult(before, evaluate(plan_after, sg_after), new_plan)


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _write_json_atomic(path: Path, obj) -> None:
    _write_atomic(path, (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode("utf-8"))
