"""Single-file snapshots of sparse tables, and CSV export.

File layout::

    SWQTAB 1\\n
    {json header}\\n
    zlib( u32 n_states | u32 n_entries | u32 key_bytes_total
          | u32 key length per state | key bytes
          | entries as (>u4 state, >u2 action, >f8 value) )

State keys are the canonical slot-list encoding; entries reference a state
by its position in the key list, so each key is written once.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .actions import GateSet, enumerate_actions
from .errors import CorruptFile, HeaderMismatch, IoFailure
from .reward import SparseTable, format_triplets
from .sweet import key_width

MAGIC = b"SWQTAB 1\n"
ROLES = ("Q", "R_sta", "R_dyn")

_ENTRY = np.dtype([("s", ">u4"), ("a", ">u2"), ("v", ">f8")])


@dataclass(frozen=True)
class TableHeader:
    n: int
    p: int
    gate_set: tuple[str, ...]
    n_actions: int
    role: str

    def __post_init__(self):
        object.__setattr__(self, "gate_set", tuple(self.gate_set))
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        expected = len(enumerate_actions(GateSet.parse(list(self.gate_set), self.n)))
        if expected != self.n_actions:
            raise ValueError(f"gate set {self.gate_set} on {self.n} qubits has {expected} actions, not {self.n_actions}")


_CHUNK = 65536


def _masks_to_keys(masks: list[int], n: int, p: int) -> tuple[np.ndarray, bytes]:
    """Slot-list keys for many states at once: (length per key, concatenated bytes)."""
    if len(masks) > _CHUNK:
        parts = [_masks_to_keys(masks[i : i + _CHUNK], n, p) for i in range(0, len(masks), _CHUNK)]
        return np.concatenate([lp for lp, _ in parts]), b"".join(bp for _, bp in parts)
    nbits = 1 << (n + p)
    nbytes = max(1, nbits // 8)
    w = key_width(n, p)
    if not masks:
        return np.zeros(0, dtype=">u4"), b""
    raw = np.frombuffer(b"".join(m.to_bytes(nbytes, "little") for m in masks), dtype=np.uint8)
    bits = np.unpackbits(raw.reshape(len(masks), nbytes), axis=1, bitorder="little")[:, :nbits]
    _, cols = np.nonzero(bits)
    lengths = bits.sum(axis=1, dtype=np.int64) * w
    if w == 1:
        body = cols.astype(np.uint8).tobytes()
    else:
        body = cols.astype(f">u{8 if w > 4 else (4 if w > 2 else 2)}").view(np.uint8).reshape(len(cols), -1)[:, -w:].tobytes()
    return lengths.astype(">u4"), body


def _keys_to_masks(lengths: np.ndarray, body: bytes, n: int, p: int) -> list[int]:
    w = key_width(n, p)
    if len(lengths) > _CHUNK:
        out: list[int] = []
        offsets = np.concatenate([[0], np.cumsum(lengths, dtype=np.int64)])
        if offsets[-1] != len(body):
            raise CorruptFile("state key lengths do not match key data")
        for i in range(0, len(lengths), _CHUNK):
            j = min(i + _CHUNK, len(lengths))
            out += _keys_to_masks(lengths[i:j], body[offsets[i] : offsets[j]], n, p)
        return out
    nbits = 1 << (n + p)
    nbytes = max(1, nbits // 8)
    if len(body) != int(lengths.sum()) or np.any(lengths % w) or np.any(lengths == 0):
        raise CorruptFile("state key lengths do not match key data")
    buf = np.frombuffer(body, dtype=np.uint8).reshape(-1, w).astype(np.int64)
    slots = np.zeros(len(buf), dtype=np.int64)
    for col in range(w):
        slots = (slots << 8) | buf[:, col]
    counts = (lengths // w).astype(np.int64)
    rows = np.repeat(np.arange(len(lengths)), counts)
    if len(slots) and slots.max() >= nbits:
        raise CorruptFile("slot out of range")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    if len(slots) > 1:
        step = np.diff(slots)
        boundary = np.zeros(len(slots) - 1, dtype=bool)
        boundary[starts[1:] - 1] = True
        if np.any((step <= 0) & ~boundary):
            raise CorruptFile("state key slots are not strictly increasing")
    basis = (rows << n) | (slots & ((1 << n) - 1))
    if len(np.unique(basis)) != len(basis):
        raise CorruptFile("a state key gives one basis string two phases")
    bits =np.zeros((len(lengths), nbytes * 8), dtype=np.uint8)
    bits[rows, slots] = 1
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def save(table: SparseTable, header: TableHeader, path: str | os.PathLike) -> None:
    if table.n_actions != header.n_actions:
        raise HeaderMismatch(f"table has {table.n_actions} actions, header says {header.n_actions}")
    keys = table.states()
    data = table._data[: len(keys)]
    rows, acts = np.nonzero(data)
    # drop states whose rows hold only zeros
    used = np.unique(rows)
    remap = np.full(len(keys), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    lengths, body = _masks_to_keys([keys[i] for i in used], header.n, header.p)
    entries = np.empty(len(rows), dtype=_ENTRY)
    entries["s"] = remap[rows]
    entries["a"] = acts
    entries["v"] = data[rows, acts]
    payload = b"".join(
        [
            struct.pack(">III", len(used), len(entries), len(body)),
            lengths.tobytes(),
            body,
            entries.tobytes(),
        ]
    )
    head = json.dumps(asdict(header), sort_keys=True).encode() + b"\n"
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(head)
            fh.write(zlib.compress(payload, 6))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load(path: str | os.PathLike, expect: TableHeader | None = None) -> tuple[SparseTable, TableHeader]:
    """Read a snapshot. With ``expect``, any header difference raises HeaderMismatch."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if not blob.startswith(MAGIC):
        raise CorruptFile("bad magic")
    end = blob.find(b"\n", len(MAGIC))
    if end < 0:
        raise CorruptFile("missing header line")
    try:
        fields = json.loads(blob[len(MAGIC) : end])
        header = TableHeader(**fields)
    except (ValueError, TypeError) as exc:
        raise CorruptFile(f"bad header: {exc}") from None
    if expect is not None and header != expect:
        raise HeaderMismatch(f"snapshot header {header} does not match {expect}")
    try:
        payload = zlib.decompress(blob[end + 1 :])
    except zlib.error as exc:
        raise CorruptFile(f"payload does not decompress: {exc}") from None
    if len(payload) < 12:
        raise CorruptFile("truncated payload")
    n_states, n_entries, n_body = struct.unpack_from(">III", payload)
    off = 12
    expected = off + 4 * n_states + n_body + _ENTRY.itemsize * n_entries
    if len(payload) != expected:
        raise CorruptFile(f"payload is {len(payload)} bytes, expected {expected}")
    lengths = np.frombuffer(payload, dtype=">u4", count=n_states, offset=off)
    off += 4 * n_states
    body = payload[off : off + n_body]
    off += n_body
    entries = np.frombuffer(payload, dtype=_ENTRY, count=n_entries, offset=off)
    masks = _keys_to_masks(lengths, body, header.n, header.p)
    if n_entries and (entries["s"].max() >= n_states or entries["a"].max() >= header.n_actions):
        raise CorruptFile("entry references a missing state or action")
    pairs = entries["s"].astype(np.int64) * header.n_actions + entries["a"]
    if len(np.unique(pairs)) != len(pairs):
        raise CorruptFile("duplicate (state, action) entry")

    table = SparseTable(header.n_actions, capacity=max(n_states, 1))
    for m in masks:
        table.ensure_row(m)
    table._data[entries["s"].astype(np.int64), entries["a"].astype(np.int64)] = entries["v"].astype(np.float64)
    return table, header


def export_csv(table: SparseTable, n: int, p: int, path: str | os.PathLike) -> None:
    try:
        Path(path).write_text(format_triplets(table, n, p))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
