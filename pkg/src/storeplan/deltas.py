"""Line-based delta encoding and population of cost matrices from a corpus.

Forward payload layout (little endian)::

    u32 hunk_count
    hunk_count x { u32 skip_lines, u32 delete_lines, u32 insert_len, insert_len bytes }

Applying a hunk copies ``skip_lines`` source lines, drops ``delete_lines`` and
writes the inserted bytes; whatever remains of the source is copied at the end.
An undirected payload is the forward script followed by the reverse script.

Artifact files carry a fixed 80-byte header before the payload::

    4s  magic "SPDL"
    u8  format version (1)
    u8  direction (0 forward, 1 undirected)
    2x  reserved
    32s sha256 of the source
    32s sha256 of the target
    u64 payload length

A materialized version is a forward artifact whose source is the empty file.
"""
from __future__ import annotations

import hashlib
import struct
from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping

from . import kernels
from .core import Cost, CostMatrices, VersionGraph
from .errors import CorruptionError, InvalidInputError

FORWARD, UNDIRECTED = "forward", "undirected"
MAGIC = b"SPDL"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBB2x32s32sQ")
_COUNT = struct.Struct("<I")
_HUNK = struct.Struct("<III")
EMPTY_DIGEST = hashlib.sha256(b"").digest()

# recreation cost from (payload length, direction); identity keeps phi == delta
CostModel = Callable[[int, str], int]


def _identity_cost(size: int, direction: str) -> int:
    return size


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def split_lines(data: bytes) -> list[bytes]:
    """LF-terminated runs; a final unterminated run is kept as is."""
    parts = data.split(b"\n")
    lines = [p + b"\n" for p in parts[:-1]]
    if parts[-1]:
        lines.append(parts[-1])
    return lines


class _Interner:
    def __init__(self):
        self.ids: dict[bytes, int] = {}

    def __call__(self, lines: list[bytes]) -> list[int]:
        ids = self.ids
        return [ids.setdefault(x, len(ids)) for x in lines]


@dataclass(frozen=True)
class DeltaArtifact:
    direction: str
    source_digest: bytes
    target_digest: bytes
    payload: bytes
    recreation_cost: int

    @property
    def storage_cost(self) -> int:
        return len(self.payload)

    def to_bytes(self) -> bytes:
        code = 0 if self.direction == FORWARD else 1
        return _HEADER.pack(MAGIC, FORMAT_VERSION, code, self.source_digest,
                            self.target_digest, len(self.payload)) + self.payload

    @classmethod
    def from_bytes(cls, raw: bytes, cost_model: CostModel = _identity_cost) -> "DeltaArtifact":
        if len(raw) < _HEADER.size:
            raise CorruptionError("delta artifact shorter than its header")
        magic, version, code, src, dst, length = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise CorruptionError("not a delta artifact (bad magic)")
        if version != FORMAT_VERSION:
            raise CorruptionError(f"unsupported delta format version {version}")
        if code not in (0, 1):
            raise CorruptionError(f"unknown delta direction code {code}")
        payload = raw[_HEADER.size:]
        if len(payload) != length:
            raise CorruptionError(f"payload length {len(payload)} does not match header {length}")
        direction = FORWARD if code == 0 else UNDIRECTED
        return cls(direction, src, dst, payload, cost_model(length, direction))


def _hunks(blocks, a_lines, b_lines):
    """Yield (skip, delete, inserted_lines) between the matched blocks."""
    pa = pb = 0
    skip = 0
    for i, j, k in list(blocks) + [(len(a_lines), len(b_lines), 0)]:
        if i > pa or j > pb:
            yield skip, i - pa, b_lines[pb:j]
            skip = 0
        skip += k
        pa, pb = i + k, j + k


def _encode(blocks, a_lines, b_lines) -> bytes:
    out = []
    count = 0
    for skip, delete, ins in _hunks(blocks, a_lines, b_lines):
        data = b"".join(ins)
        out.append(_HUNK.pack(skip, delete, len(data)))
        out.append(data)
        count += 1
    return _COUNT.pack(count) + b"".join(out)


def _script_cost(blocks, a_len: int, b_len: int, b_prefix: list[int]) -> int:
    """Byte length of the forward script without building it."""
    cost = _COUNT.size
    pa = pb = 0
    for i, j, k in list(blocks) + [(a_len, b_len, 0)]:
        if i > pa or j > pb:
            cost += _HUNK.size + b_prefix[j] - b_prefix[pb]
        pa, pb = i + k, j + k
    return cost


def _swap(blocks):
    return [(j, i, k) for i, j, k in blocks]


def _decode_apply(src_lines: list[bytes], payload: bytes, offset: int = 0) -> tuple[bytes, int]:
    try:
        (count,) = _COUNT.unpack_from(payload, offset)
        pos = offset + _COUNT.size
        out = []
        cursor = 0
        for _ in range(count):
            skip, delete, ins_len = _HUNK.unpack_from(payload, pos)
            pos += _HUNK.size
            if cursor + skip + delete > len(src_lines) or pos + ins_len > len(payload):
                raise CorruptionError("delta script runs past its source")
            out.extend(src_lines[cursor:cursor + skip])
            cursor += skip + delete
            out.append(payload[pos:pos + ins_len])
            pos += ins_len
    except struct.error:
        raise CorruptionError("truncated delta script") from None
    out.extend(src_lines[cursor:])
    return b"".join(out), pos


def compute_delta(src: bytes, dst: bytes, mode: str = "directed",
                  cost_model: CostModel = _identity_cost) -> DeltaArtifact:
    """Line edit script turning ``src`` into ``dst`` (and back, for ``mode="undirected"``)."""
    if mode not in ("directed", "undirected"):
        raise InvalidInputError(f"unknown delta mode {mode!r}")
    a, b = split_lines(src), split_lines(dst)
    intern = _Interner()
    blocks = kernels.match_blocks(intern(a), intern(b))
    payload = _encode(blocks, a, b)
    direction = FORWARD
    if mode == "undirected":
        payload += _encode(_swap(blocks), b, a)
        direction = UNDIRECTED
    return DeltaArtifact(direction, digest(src), digest(dst), payload,
                         cost_model(len(payload), direction))


def materialize(data: bytes, cost_model: CostModel = _identity_cost) -> DeltaArtifact:
    """Full copy, encoded as a forward script from the empty file."""
    return compute_delta(b"", data, "directed", cost_model)


def apply_delta(src: bytes, artifact: DeltaArtifact) -> bytes:
    """Rebuild the other endpoint; refuses any base other than the recorded one."""
    have = digest(src)
    lines = split_lines(src)
    if have == artifact.source_digest:
        out, _ = _decode_apply(lines, artifact.payload)
        want = artifact.target_digest
    elif artifact.direction == UNDIRECTED and have == artifact.target_digest:
        out, _ = _decode_apply(lines, artifact.payload, _forward_end(artifact.payload))
        want = artifact.source_digest
    else:
        raise CorruptionError("wrong base version: source digest does not match the artifact")
    if digest(out) != want:
        raise CorruptionError("delta produced bytes that do not match the recorded digest")
    return out


def _forward_end(payload: bytes) -> int:
    (count,) = _COUNT.unpack_from(payload, 0)
    pos = _COUNT.size
    for _ in range(count):
        _, _, ins_len = _HUNK.unpack_from(payload, pos)
        pos += _HUNK.size + ins_len
    return pos


# --- matrix population -------------------------------------------------------

@dataclass(frozen=True)
class KHop:
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidInputError("hop count must be non-negative")


@dataclass(frozen=True)
class SizeThreshold:
    max_difference: int


def parse_policy(text: str):
    """``k_hop:K`` or ``threshold:BYTES``."""
    kind, _, value = text.partition(":")
    try:
        number = int(value)
    except ValueError:
        raise InvalidInputError(f"bad policy {text!r}; expected k_hop:K or threshold:BYTES") from None
    if kind == "k_hop":
        return KHop(number)
    if kind == "threshold":
        return SizeThreshold(number)
    raise InvalidInputError(f"bad policy {text!r}; expected k_hop:K or threshold:BYTES")


def candidate_pairs(graph: VersionGraph, sizes: Mapping[int, int], policy) -> list[tuple[int, int]]:
    """Unordered pairs ``(i, j)``, ``i < j``, admitted by ``policy``."""
    n = graph.n
    pairs = []
    if isinstance(policy, KHop):
        adj = graph.undirected_neighbors()
        for s in range(1, n + 1):
            dist = {s: 0}
            queue = deque([s])
            while queue:
                v = queue.popleft()
                if dist[v] == policy.k:
                    continue
                for w in adj[v]:
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        queue.append(w)
            pairs.extend((s, t) for t in sorted(dist) if t > s)
    elif isinstance(policy, SizeThreshold):
        order = sorted(range(1, n + 1), key=lambda i: (sizes[i], i))
        for a_pos, i in enumerate(order):
            for j in order[a_pos + 1:]:
                if sizes[j] - sizes[i] >= policy.max_difference:
                    break
                pairs.append((min(i, j), max(i, j)))
        pairs.sort()
    else:
        raise InvalidInputError(f"unknown policy {policy!r}")
    return pairs


def populate_matrices(corpus: Mapping[int, bytes], graph: VersionGraph, policy,
                      mode: str = "directed", cost_model: CostModel = _identity_cost) -> CostMatrices:
    """Diagonal from materialized size, plus a delta for every admitted pair."""
    if mode not in ("directed", "undirected"):
        raise InvalidInputError(f"unknown delta mode {mode!r}")
    missing = [i for i in range(1, graph.n + 1) if i not in corpus]
    if missing:
        raise InvalidInputError(f"corpus has no content for versions {missing[:10]}")
    intern = _Interner()
    lines, ids, prefix = {}, {}, {}
    for i in range(1, graph.n + 1):
        ls = split_lines(corpus[i])
        lines[i] = ls
        ids[i] = intern(ls)
        acc = [0]
        for x in ls:
            acc.append(acc[-1] + len(x))
        prefix[i] = acc
    entries: dict[tuple[int, int], Cost] = {}
    for i in range(1, graph.n + 1):
        size = _COUNT.size + (_HUNK.size + len(corpus[i]) if corpus[i] else 0)
        entries[(i, i)] = Cost(size, cost_model(size, FORWARD))
    sizes = {i: len(corpus[i]) for i in range(1, graph.n + 1)}
    for i, j in candidate_pairs(graph, sizes, policy):
        blocks = kernels.match_blocks(ids[i], ids[j])
        fwd = _script_cost(blocks, len(ids[i]), len(ids[j]), prefix[j])
        if mode == "directed":
            # diff again rather than mirror: must equal what compute_delta(j, i) stores
            rev = kernels.match_blocks(ids[j], ids[i])
            back = _script_cost(rev, len(ids[j]), len(ids[i]), prefix[i])
        else:
            back = _script_cost(_swap(blocks), len(ids[j]), len(ids[i]), prefix[i])
        if mode == "directed":
            entries[(i, j)] = Cost(fwd, cost_model(fwd, FORWARD))
            entries[(j, i)] = Cost(back, cost_model(back, FORWARD))
        else:
            both = fwd + back
            c = Cost(both, cost_model(both, UNDIRECTED))
            entries[(i, j)] = c
            entries[(j, i)] = c
    return CostMatrices(mode == "directed", entries)
