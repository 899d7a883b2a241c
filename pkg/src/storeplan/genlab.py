"""Synthetic version histories of CSV datasets, plus Zipf access workloads.

Randomness comes from numpy's PCG64 bit generator seeded with the 64-bit
``seed``; a given parameter set always yields byte-identical corpora.
"""
from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import Cost, VersionGraph, WorkloadProfile
from .deltas import materialize
from .errors import InvalidInputError

# edit command kinds and their default relative frequencies
COMMANDS = ("add_rows", "delete_rows", "modify_rows", "modify_column", "add_column", "remove_column")
DEFAULT_WEIGHTS = (0.3, 0.3, 0.3, 0.06, 0.02, 0.02)
MIN_COLUMNS = 3


@dataclass(frozen=True)
class GenParams:
    num_commits: int = 100
    branch_interval: int = 5
    branch_probability: float = 0.5
    branch_limit: int = 3
    branch_length: int = 5
    seed: int = 0
    merge_probability: float = 0.3
    rows: int = 10000
    cols: int = 10
    edits_per_commit: int = 3  # drawn from [1, edits_per_commit]
    rows_per_edit: int = 20  # drawn from [1, rows_per_edit]
    min_rows: int = 10
    command_weights: tuple = DEFAULT_WEIGHTS

    def __post_init__(self):
        for name in ("num_commits", "branch_interval", "branch_limit", "branch_length",
                     "rows", "edits_per_commit", "rows_per_edit"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be positive")
        for name in ("branch_probability", "merge_probability"):
            if not 0 <= getattr(self, name) <= 1:
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if self.cols < MIN_COLUMNS:
            raise InvalidInputError(f"cols must be at least {MIN_COLUMNS}")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        w = tuple(float(x) for x in self.command_weights)
        if len(w) != len(COMMANDS) or any(x < 0 for x in w) or sum(w) <= 0:
            raise InvalidInputError(f"command_weights needs {len(COMMANDS)} non-negative values")
        object.__setattr__(self, "command_weights", w)


# Deep, bushy history of small tables with row-level churn only.  Schema edits
# rewrite every line, so leaving them out keeps long delta chains cheap.
DC_STYLE = GenParams(num_commits=1000, branch_interval=4, branch_probability=0.6, branch_limit=3,
                     branch_length=3, rows=60, cols=6, rows_per_edit=20,
                     command_weights=(0.3, 0.3, 0.38, 0.02, 0.0, 0.0))


@dataclass
class Skeleton:
    """Derivation DAG plus, per version, the edits applied to its first parent."""

    n: int
    parents: dict = field(default_factory=dict)  # version -> sorted parent list
    edits: dict = field(default_factory=dict)  # version -> list of command tuples

    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, v) for v, ps in self.parents.items() for p in ps)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64([stream, seed]))


def _draw_edits(rng, p: GenParams) -> list[tuple]:
    probs = np.asarray(p.command_weights) / sum(p.command_weights)
    out = []
    for _ in range(int(rng.integers(1, p.edits_per_commit + 1))):
        kind = COMMANDS[int(rng.choice(len(COMMANDS), p=probs))]
        pos = float(rng.random())
        count = int(rng.integers(1, p.rows_per_edit + 1))
        if kind == "modify_column":
            out.append((kind, pos, count, float(rng.random())))
        elif kind in ("add_column", "remove_column"):
            out.append((kind, pos))
        else:
            out.append((kind, pos, count))
    return out


def gen_version_graph(p: GenParams) -> Skeleton:
    """Mainline commits with bursts of branches at every ``branch_interval`` boundary."""
    rng = _rng(p.seed, 1)
    sk = Skeleton(0)

    def commit(parents):
        sk.n += 1
        v = sk.n
        sk.parents[v] = sorted(parents)
        sk.edits[v] = _draw_edits(rng, p) if parents else []
        return v

    tip = commit([])
    mainline = 1
    merges: list[int] = []
    while sk.n < p.num_commits:
        tip = commit([tip] + merges)
        merges = []
        mainline += 1
        if mainline % p.branch_interval or rng.random() >= p.branch_probability:
            continue
        for _ in range(int(rng.integers(1, p.branch_limit + 1))):
            length = int(rng.integers(1, p.branch_length + 1))
            at = tip
            for _ in range(length):
                if sk.n >= p.num_commits:
                    break
                at = commit([at])
            if at != tip and rng.random() < p.merge_probability:
                merges.append(at)
    return sk


class _Table:
    """Mutable CSV table; every row carries a globally unique id so lines never repeat."""

    def __init__(self, header, rows):
        self.header = header
        self.rows = rows

    def copy(self):
        return _Table(list(self.header), [list(r) for r in self.rows])

    def render(self) -> bytes:
        lines = [",".join(self.header)]
        lines.extend(",".join(r) for r in self.rows)
        return ("\n".join(lines) + "\n").encode("ascii")


class _Synth:
    def __init__(self, p: GenParams):
        self.p = p
        self.rng = _rng(p.seed, 2)
        self.next_row = 0
        self.next_col = 0

    def value(self) -> str:
        return f"{int(self.rng.integers(0, 10**6)):06d}"

    def column_name(self) -> str:
        self.next_col += 1
        return f"c{self.next_col - 1}"

    def row(self, width: int) -> list[str]:
        self.next_row += 1
        return [f"r{self.next_row - 1}"] + [self.value() for _ in range(width - 1)]

    def root(self) -> _Table:
        header = ["id"] + [self.column_name() for _ in range(self.p.cols - 1)]
        return _Table(header, [self.row(len(header)) for _ in range(self.p.rows)])

    def apply(self, t: _Table, cmd: tuple) -> None:
        kind = cmd[0]
        n = len(t.rows)
        width = len(t.header)
        # mean reversion keeps row counts in [rows/2, 2*rows] so delta ratios stay put
        if kind == "delete_rows" and n - cmd[2] < max(self.p.min_rows, self.p.rows // 2):
            kind = "add_rows"
        elif kind == "add_rows" and n + cmd[2] > 2 * self.p.rows:
            kind = "delete_rows"
        if kind == "add_rows":
            at = int(cmd[1] * (n + 1))
            t.rows[at:at] = [self.row(width) for _ in range(cmd[2])]
        elif kind == "delete_rows":
            at = int(cmd[1] * (n - cmd[2] + 1))
            del t.rows[at:at + cmd[2]]
        elif kind == "modify_rows":
            count = min(cmd[2], n)
            at = int(cmd[1] * (n - count + 1))
            for r in t.rows[at:at + count]:
                c = 1 + int(self.rng.integers(0, width - 1))
                r[c] = self.value()
        elif kind == "modify_column":
            count = min(cmd[2], n)
            c = 1 + int(cmd[3] * (width - 1))
            at = int(cmd[1] * (n - count + 1))
            for r in t.rows[at:at + count]:
                r[c] = self.value()
        elif kind == "add_column":
            c = 1 + int(cmd[1] * width)
            t.header.insert(c, self.column_name())
            for r in t.rows:
                r.insert(c, self.value())
        elif kind == "remove_column":
            if width - 1 < MIN_COLUMNS:
                return
            c = 1 + int(cmd[1] * (width - 1))
            del t.header[c]
            for r in t.rows:
                del r[c]


def gen_datasets(skeleton: Skeleton, p: GenParams) -> dict[int, bytes]:
    """Render every version; a child starts from its first (lowest-numbered) parent."""
    synth = _Synth(p)
    tables: dict[int, _Table] = {}
    out: dict[int, bytes] = {}
    for v in range(1, skeleton.n + 1):
        parents = skeleton.parents[v]
        if not parents:
            t = synth.root()
        else:
            t = tables[parents[0]].copy()
            for cmd in skeleton.edits[v]:
                synth.apply(t, cmd)
        tables[v] = t
        out[v] = t.render()
    return out


def version_graph(skeleton: Skeleton, corpus: dict[int, bytes]) -> VersionGraph:
    sizes = {}
    for v, data in corpus.items():
        c = materialize(data).storage_cost
        sizes[v] = Cost(c, c)
    return VersionGraph(skeleton.n, frozenset(skeleton.edges()), sizes)


def generate(p: GenParams) -> tuple[Skeleton, dict[int, bytes]]:
    sk = gen_version_graph(p)
    return sk, gen_datasets(sk, p)


def gen_workload(n: int, s: float = 2.0, seed: int = 0) -> WorkloadProfile:
    """Zipf weights ``1/r**s`` by rank over a seeded permutation of versions."""
    if s <= 0:
        raise InvalidInputError("Zipf exponent must be positive")
    if n < 1:
        raise InvalidInputError("need at least one version")
    perm = _rng(seed, 3).permutation(n) + 1
    return WorkloadProfile({int(v): 1.0 / (r + 1) ** s for r, v in enumerate(perm)})


# --- files -------------------------------------------------------------------

def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(GenParams)}
    kind = kinds[name]
    if name == "command_weights":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if kind == "float":
        return float(raw)
    return int(raw)


def parse_params(text: str) -> GenParams:
    """``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(GenParams)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise InvalidInputError(f"params line {lineno}: unknown or malformed entry {line!r}")
        try:
            values[key] = _coerce(key, raw.strip())
        except ValueError:
            raise InvalidInputError(f"params line {lineno}: bad value for {key}") from None
    return GenParams(**values)


def dump_params(p: GenParams) -> str:
    lines = []
    for k, v in asdict(p).items():
        if k == "command_weights":
            v = " ".join(repr(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def write_corpus(out_dir, skeleton: Skeleton, corpus: dict[int, bytes], p: GenParams) -> None:
    out = Path(out_dir)
    (out / "versions").mkdir(parents=True, exist_ok=True)
    for v, data in corpus.items():
        (out / "versions" / f"{v}.csv").write_bytes(data)
    (out / "graph.tsv").write_text("".join(f"{a}\t{b}\n" for a, b in skeleton.edges()),
                                   encoding="utf-8", newline="\n")
    rows = [f"# {line}" for line in dump_params(p).splitlines()]
    rows.append("# version\tbytes\tsha256")
    rows += [f"{v}\t{len(corpus[v])}\t{hashlib.sha256(corpus[v]).hexdigest()}" for v in sorted(corpus)]
    (out / "manifest").write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def read_corpus(in_dir) -> tuple[VersionGraph, dict[int, bytes]]:
    src = Path(in_dir)
    manifest = src / "manifest"
    if not manifest.exists():
        raise InvalidInputError(f"{src} has no manifest")
    corpus = {}
    for line in manifest.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        v, _, sha = line.split("\t")
        data = (src / "versions" / f"{v}.csv").read_bytes()
        if hashlib.sha256(data).hexdigest() != sha:
            raise InvalidInputError(f"version {v} does not match its manifest digest")
        corpus[int(v)] = data
    edges = []
    for line in (src / "graph.tsv").read_text(encoding="utf-8").splitlines():
        if line.strip():
            a, b = line.split("\t")
            edges.append((int(a), int(b)))
    sk = Skeleton(len(corpus), {v: sorted(a for a, b in edges if b == v) for v in corpus})
    return version_graph(sk, corpus), corpus
