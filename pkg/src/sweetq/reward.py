"""Static layered reward, dynamic penalties and the sparse (state, action) table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .actions import Action, GateSet, enumerate_actions
from .errors import GridMismatch, InvalidAction, PhaseGridTooCoarse
from .sweet import SweetState, get_kernel, mask_to_key


class SparseTable:
    """Map ``(state, action) -> float`` where absent entries read as 0.

    States are keyed by their slot bitmask. Storage is one dense row of
    ``n_actions`` float64 per state that has been written; a zero in a row
    is an absent entry and is never reported by :meth:`items` or :attr:`nnz`.
    """

    def __init__(self, n_actions: int, capacity: int = 256):
        self.n_actions = n_actions
        self._index: dict[int, int] = {}
        self._keys: list[int] = []
        self._data = np.zeros((max(capacity, 1), n_actions))

    def row_id(self, key: int) -> int | None:
        return self._index.get(key)

    def ensure_row(self, key: int) -> int:
        i = self._index.get(key)
        if i is None:
            i = len(self._keys)
            if i == self._data.shape[0]:
                grown = np.zeros((2 * i, self.n_actions))
                grown[:i] = self._data
                self._data = grown
            self._index[key] = i
            self._keys.append(key)
        return i

    def get(self, key: int, action: int) -> float:
        i = self._index.get(key)
        return 0.0 if i is None else float(self._data[i, action])

    def set(self, key: int, action: int, value: float) -> None:
        i = self._index.get(key)
        if i is None:
            if value == 0.0:
                return
            i = self.ensure_row(key)
        self._data[i, action] = value

    def add(self, key: int, action: int, delta: float) -> float:
        i = self.ensure_row(key)
        v = float(self._data[i, action]) + delta
        self._data[i, action] = v
        return v

    def row(self, key: int) -> np.ndarray:
        i = self._index.get(key)
        return np.zeros(self.n_actions) if i is None else self._data[i].copy()

    def row_max(self, key: int) -> float:
        i = self._index.get(key)
        return 0.0 if i is None else float(self._data[i].max())

    def argmax(self, key: int) -> int:
        """Best action; ties (including an unseen state) go to the lowest index."""
        i = self._index.get(key)
        return 0 if i is None else int(self._data[i].argmax())

    def states(self) -> list[int]:
        return list(self._keys)

    def items(self) -> Iterator[tuple[int, int, float]]:
        data = self._data
        for i, key in enumerate(self._keys):
            for a in np.flatnonzero(data[i]):
                yield key, int(a), float(data[i, a])

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self._data[: len(self._keys)]))

    def __len__(self) -> int:
        return self.nnz

    def to_dict(self) -> dict[tuple[int, int], float]:
        return {(k, a): v for k, a, v in self.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseTable):
            return NotImplemented
        return self.n_actions == other.n_actions and self.to_dict() == other.to_dict()

    @classmethod
    def from_entries(cls, n_actions: int, entries) -> SparseTable:
        table = cls(n_actions)
        for key, a, v in entries:
            table.set(key, a, v)
        return table


@dataclass(frozen=True)
class StaticRewardConfig:
    r_max: float = 10000.0
    k_max: int = 2

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")


@dataclass(frozen=True)
class PenaltyConfig:
    revisit_enabled: bool = True
    noop_enabled: bool = True
    congestion_enabled: bool = False
    revisit_coeff: float = 1e-4
    noop_coeff: float = 1e-3
    congestion_coeff: float = 1e-4

    def __post_init__(self):
        if min(self.revisit_coeff, self.noop_coeff, self.congestion_coeff) < 0:
            raise ValueError("penalty coefficients must be non-negative")


@dataclass
class EpisodeContext:
    """Per-episode bookkeeping: visited states, per-qubit usage counters, step index."""

    n: int
    visited: set[int] = field(default_factory=set)
    counters: list[int] = field(default_factory=list)
    t: int = 0

    def __post_init__(self):
        if not self.counters:
            self.counters = [0] * self.n

    def reset(self, s0: int) -> None:
        self.visited = {s0}
        self.counters = [0] * self.n
        self.t = 0

    def commit(self, action: Action, s_next: int) -> None:
        self.visited.add(s_next)
        for q in action.qubits:
            self.counters[q] += 1
        self.t += 1


def build_static_reward(target: SweetState, gate_set: GateSet, cfg: StaticRewardConfig) -> SparseTable:
    """Layered reward: ``r_max / 2**k`` on ``(s, a)`` when ``a`` moves ``s`` into stratum ``k``.

    Stratum 0 is the target; stratum ``k + 1`` holds every state one inverse gate
    away from stratum ``k``. Inverse applications that leave the state unchanged,
    or whose forward gate does not lead back, are skipped. Entries only increase.
    """
    if gate_set.n != target.n:
        raise GridMismatch(f"gate set is for {gate_set.n} qubits, target has {target.n}")
    kernel = get_kernel(target.n, target.p)
    actions = enumerate_actions(gate_set)
    try:
        fwd = [kernel.compile(a.kind, a.qubits) for a in actions]
        inv = [kernel.compile(a.kind.inverse, a.qubits) for a in actions]
    except (PhaseGridTooCoarse, InvalidAction) as exc:
        raise GridMismatch(str(exc)) from None

    table = SparseTable(len(actions))
    frontier = {target.mask}
    for k in range(cfg.k_max):
        value = cfg.r_max / 2**k
        nxt: set[int] = set()
        for f in frontier:
            for j in range(len(actions)):
                s = inv[j](f)
                if s == f or fwd[j](s) != f:
                    continue
                if table.get(s, j) < value:
                    table.set(s, j, value)
                nxt.add(s)
        frontier = nxt
    return table


def congestion_level(ctx: EpisodeContext, action: Action) -> int:
    return max(ctx.counters[q] for q in action.qubits)


def dynamic_penalty(
    ctx: EpisodeContext,
    s_t: int,
    action: Action,
    s_next: int,
    r_sta_value: float,
    pcfg: PenaltyConfig,
    r_dyn: SparseTable,
    r_max: float = 10000.0,
) -> float:
    """Penalty for one transition; accumulated into ``r_dyn`` and returned."""
    delta = 0.0
    if s_next == s_t:
        if pcfg.noop_enabled:
            delta -= r_max * pcfg.noop_coeff
    elif pcfg.revisit_enabled and s_next in ctx.visited and r_sta_value == 0.0:
        delta -= r_max * pcfg.revisit_coeff
    if pcfg.congestion_enabled and congestion_level(ctx, action) > ctx.t / 2:
        delta -= r_max * pcfg.congestion_coeff
    if delta:
        r_dyn.add(s_t, action.index, delta)
    return delta


def total_reward(r_sta: SparseTable, r_dyn: SparseTable, s: int, a: int) -> float:
    return r_sta.get(s, a) + r_dyn.get(s, a)


def format_value(v: float) -> str:
    """Shortest round-trip decimal, without a trailing ``.0``."""
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def triplet_rows(table: SparseTable, n: int, p: int) -> list[tuple[bytes, int, float]]:
    rows = [(mask_to_key(k, n, p), a, v) for k, a, v in table.items()]
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def format_triplets(table: SparseTable, n: int, p: int) -> str:
    lines = ["state,action,value"]
    lines += [f"{key.hex()},{a},{format_value(v)}" for key, a, v in triplet_rows(table, n, p)]
    return "\n".join(lines) + "\n"
