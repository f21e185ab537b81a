"""Equal-amplitude, grid-phase states and their gate semantics.

A state over ``n`` qubits with ``p`` phase bits is a set of slots
``m * 2**n + x``: basis string ``x`` (qubit 0 is the most significant bit)
carrying phase ``exp(2j*pi*m/M)`` with ``M = 2**p``. Internally a state is
also held as a bitmask with bit ``slot`` set for every term, which turns
CZ, CNOT, T and T-dagger into a handful of big-integer operations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .actions import Action, GateKind
from .errors import (
    AllTermsCancelled,
    ConflictingPhase,
    EmptyState,
    InvalidAction,
    MalformedKey,
    MalformedLine,
    PhaseGridTooCoarse,
)

# tolerance, in units of one grid step, for deciding that an angle sits on a grid
# point or exactly halfway between two
_GRID_TOL = 1e-9


@dataclass(frozen=True)
class PhaseGrid:
    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be non-negative")

    @property
    def M(self) -> int:
        return 1 << self.p


def iter_bits(mask: int) -> Iterator[int]:
    """Positions of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class SweetState:
    n: int
    grid: PhaseGrid
    terms: tuple[int, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise EmptyState("state has no terms")
        limit = self.grid.M << self.n
        if any(b <= a for a, b in zip(terms, terms[1:])):
            raise ValueError("terms must be strictly increasing")
        if terms[0] < 0 or terms[-1] >= limit:
            raise ValueError(f"slot out of range [0, {limit})")
        xs = [t & ((1 << self.n) - 1) for t in terms]
        if len(set(xs)) != len(xs):
            raise ConflictingPhase("a basis string carries two phases")

    @classmethod
    def from_mask(cls, mask: int, n: int, grid: PhaseGrid) -> SweetState:
        return cls(n, grid, tuple(iter_bits(mask)))

    @cached_property
    def mask(self) -> int:
        out = 0
        for t in self.terms:
            out |= 1 << t
        return out

    @property
    def p(self) -> int:
        return self.grid.p

    def pairs(self) -> list[tuple[int, int]]:
        """``(m, x)`` for every term, in slot order."""
        return [(t >> self.n, t & ((1 << self.n) - 1)) for t in self.terms]

    def to_vector(self) -> np.ndarray:
        """Normalized dense amplitude vector of the representative state."""
        vec = np.zeros(1 << self.n, dtype=complex)
        M = self.grid.M
        for m, x in self.pairs():
            vec[x] = cmath.exp(2j * math.pi * m / M)
        return vec / math.sqrt(len(self.terms))

    def to_text(self) -> str:
        return "".join(f"{m}:{x:0{self.n}b}\n" for m, x in self.pairs())

    @classmethod
    def from_text(cls, text: str, n: int | None = None, grid: PhaseGrid | None = None) -> SweetState:
        """Parse ``m:x`` lines. ``n`` defaults to the width of the bit strings."""
        raw = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            m_txt, sep, x_txt = line.partition(":")
            if not sep or not m_txt.strip().isdigit() or not x_txt.strip() or set(x_txt.strip()) - {"0", "1"}:
                raise MalformedLine(lineno, f"expected 'm:bits', got {line!r}")
            x_txt = x_txt.strip()
            if n is None:
                n = len(x_txt)
            elif len(x_txt) != n:
                raise MalformedLine(lineno, f"expected {n} bits, got {len(x_txt)}")
            raw.append((int(m_txt), int(x_txt, 2)))
        if n is None:
            raise EmptyState("no terms in state text")
        if grid is None:
            top = max(m for m, _ in raw)
            grid = PhaseGrid(max(top, 0).bit_length())
        return canonicalize(raw, n, grid)


@dataclass(frozen=True)
class ApplyOutcome:
    state: SweetState
    exact: bool


def canonicalize(raw_terms: Iterable[tuple[int, int]], n: int, grid: PhaseGrid) -> SweetState:
    M = grid.M
    phase_of: dict[int, int] = {}
    for m, x in raw_terms:
        if not 0 <= m < M:
            raise ValueError(f"phase index {m} outside [0, {M})")
        if not 0 <= x < (1 << n):
            raise ValueError(f"basis string {x} outside {n} qubits")
        if phase_of.setdefault(x, m) != m:
            raise ConflictingPhase(f"basis string {x:0{n}b} given phases {phase_of[x]} and {m}")
    if not phase_of:
        raise EmptyState("no terms")
    return SweetState(n, grid, tuple(sorted((m << n) | x for x, m in phase_of.items())))


def _snap(z: complex, M: int) -> tuple[int, bool]:
    """Nearest grid index to ``arg z`` (halfway ties go to the smaller index) and
    whether ``arg z`` already lies on the grid."""
    t = (cmath.phase(z) / (2 * math.pi) * M) % M
    f = math.floor(t)
    frac = t - f
    if abs(frac - 0.5) <= _GRID_TOL:
        m = min(f % M, (f + 1) % M)
    else:
        m = (f + (frac > 0.5)) % M
    return m, min(frac, 1 - frac) <= _GRID_TOL


class GateKernel:
    """Gate action on state bitmasks for a fixed ``(n, p)``."""

    def __init__(self, n: int, p: int):
        self.n = n
        self.grid = PhaseGrid(p)
        self.M = M = self.grid.M
        self.width = M << n
        self.full = (1 << self.width) - 1
        self._xmask = (1 << n) - 1
        self._h_cache: dict[tuple[int, int], tuple[int, bool]] = {}

    # selectors replicate an x-pattern across all M phase blocks
    def _select(self, pred: Callable[[int], bool]) -> int:
        pattern = 0
        for x in range(1 << self.n):
            if pred(x):
                pattern |= 1 << x
        out = 0
        for m in range(self.M):
            out |= pattern << (m << self.n)
        return out

    def _bit(self, q: int) -> int:
        return 1 << (self.n - 1 - q)

    def _check(self, kind: GateKind, qubits: Sequence[int]) -> None:
        if len(qubits) != kind.arity or len(set(qubits)) != len(qubits):
            raise InvalidAction(f"bad qubits {tuple(qubits)} for {kind.value}")
        if any(not 0 <= q < self.n for q in qubits):
            raise InvalidAction(f"qubit index out of range for n={self.n}: {tuple(qubits)}")
        if kind in (GateKind.T, GateKind.TDG) and self.M < 8:
            raise PhaseGridTooCoarse(f"{kind.value} needs M >= 8, grid has M = {self.M}")
        if kind is GateKind.CZ and self.M < 2:
            raise PhaseGridTooCoarse("CZ needs M >= 2")

    def _rotator(self, sel: int, r: int) -> Callable[[int], int]:
        """Multiply the phase of every selected term by exp(2j*pi*r/M)."""
        keep = self.full ^ sel
        sh = (r % self.M) << self.n
        back = self.width - sh
        full = self.full

        def step(mask: int) -> int:
            s = mask & sel
            return (mask & keep) | (((s << sh) | (s >> back)) & full)

        return step

    def compile(self, kind: GateKind, qubits: Sequence[int]) -> Callable[[int], int]:
        """Return ``step(mask) -> mask`` for one gate application."""
        self._check(kind, qubits)
        n, M = self.n, self.M
        if kind is GateKind.CZ:
            bi, bj = self._bit(qubits[0]), self._bit(qubits[1])
            return self._rotator(self._select(lambda x: x & bi and x & bj), M // 2)
        if kind in (GateKind.T, GateKind.TDG):
            b = self._bit(qubits[0])
            r = M // 8 if kind is GateKind.T else M - M // 8
            return self._rotator(self._select(lambda x: x & b), r)
        if kind is GateKind.CNOT:
            bc, bt = self._bit(qubits[0]), self._bit(qubits[1])
            up = self._select(lambda x: x & bc and not x & bt)
            down = self._select(lambda x: x & bc and x & bt)
            keep = self.full ^ up ^ down
            d = n - 1 - qubits[1]

            def cnot(mask: int) -> int:
                return (mask & keep) | ((mask & up) << (1 << d)) | ((mask & down) >> (1 << d))

            return cnot
        q = qubits[0]
        cache = self._h_cache

        def hadamard(mask: int) -> int:
            hit = cache.get((mask, q))
            if hit is None:
                hit = cache[(mask, q)] = self._hadamard(mask, q)
            return hit[0]

        return hadamard

    def apply(self, mask: int, kind: GateKind, qubits: Sequence[int]) -> tuple[int, bool]:
        """Apply one gate; returns the new mask and the exactness flag."""
        if kind is GateKind.H:
            self._check(kind, qubits)
            key = (mask, qubits[0])
            hit = self._h_cache.get(key)
            if hit is None:
                hit = self._h_cache[key] = self._hadamard(mask, qubits[0])
            return hit
        return self.compile(kind, qubits)(mask), True

    def _hadamard(self, mask: int, q: int) -> tuple[int, bool]:
        # coefficients live in Z[zeta] with basis zeta^0 .. zeta^(L-1), zeta^(M/2) = -1
        n, M = self.n, self.M
        L = M // 2 if M >= 2 else 1
        bit = self._bit(q)
        acc: dict[int, list[int]] = {}
        for slot in iter_bits(mask):
            m, x = slot >> n, slot & self._xmask
            if m < L:
                idx, s = m, 1
            else:
                idx, s = m - L, -1
            v0 = acc.get(x & ~bit)
            if v0 is None:
                v0 = acc[x & ~bit] = [0] * L
            v1 = acc.get(x | bit)
            if v1 is None:
                v1 = acc[x | bit] = [0] * L
            v0[idx] += s
            v1[idx] += -s if x & bit else s

        out = 0
        exact = True
        mag0 = None
        for x, vec in acc.items():
            nz = [(k, c) for k, c in enumerate(vec) if c]
            if not nz:
                continue
            if len(nz) == 1:
                k, c = nz[0]
                if M >= 2:
                    m, on_grid = (k if c > 0 else k + L), True
                else:
                    m, on_grid = 0, c > 0
                mag = float(abs(c))
            else:
                z = sum(c * cmath.exp(2j * math.pi * k / M) for k, c in nz)
                m, on_grid = _snap(z, M)
                mag = abs(z)
            if not on_grid:
                exact = False
            if mag0 is None:
                mag0 = mag
            elif abs(mag - mag0) > 1e-9 * mag0:
                exact = False
            out |= 1 << ((m << n) | x)
        if not out:
            raise AllTermsCancelled("Hadamard cancelled every term")
        return out, exact


@lru_cache(maxsize=64)
def get_kernel(n: int, p: int) -> GateKernel:
    return GateKernel(n, p)


def apply_gate(state: SweetState, action: Action) -> ApplyOutcome:
    kernel = get_kernel(state.n, state.p)
    mask, exact = kernel.apply(state.mask, action.kind, action.qubits)
    return ApplyOutcome(SweetState.from_mask(mask, state.n, state.grid), exact)


def key_width(n: int, p: int) -> int:
    return max(1, -(-(n + p) // 8))


def mask_to_key(mask: int, n: int, p: int) -> bytes:
    w = key_width(n, p)
    if w == 1:
        return bytes(iter_bits(mask))
    return b"".join(s.to_bytes(w, "big") for s in iter_bits(mask))


def encode_state_key(state: SweetState) -> bytes:
    return mask_to_key(state.mask, state.n, state.p)


def key_to_mask(key: bytes, n: int, p: int) -> int:
    w = key_width(n, p)
    if not key or len(key) % w:
        raise MalformedKey(f"key length {len(key)} is not a positive multiple of {w}")
    slots = [int.from_bytes(key[i : i + w], "big") for i in range(0, len(key), w)]
    if any(b <= a for a, b in zip(slots, slots[1:])):
        raise MalformedKey("slots are not strictly increasing")
    if slots[-1] >= (1 << (n + p)):
        raise MalformedKey("slot out of range")
    mask = 0
    for s in slots:
        mask |= 1 << s
    return mask


def decode_state_key(key: bytes, n: int, grid: PhaseGrid) -> SweetState:
    try:
        return SweetState.from_mask(key_to_mask(key, n, grid.p), n, grid)
    except ConflictingPhase as exc:
        raise MalformedKey(str(exc)) from None


def state_space_size(n: int, grid: PhaseGrid) -> int:
    return 2 ** (2 ** (n + grid.p)) - 1


def is_class_representative(amplitudes, state: SweetState, tol: float) -> bool:
    """True iff ``amplitudes`` has the same support as ``state`` and, up to one
    global phase, the same grid phases on that support."""
    amps = np.asarray(amplitudes, dtype=complex).ravel()
    if amps.size != 1 << state.n:
        return False
    support = {int(x) for x in np.flatnonzero(np.abs(amps) > tol)}
    pairs = state.pairs()
    if support != {x for _, x in pairs}:
        return False
    M = state.grid.M
    m0, x0 = pairs[0]
    offset = cmath.phase(amps[x0]) - 2 * math.pi * m0 / M
    for m, x in pairs:
        diff = cmath.phase(amps[x]) - offset - 2 * math.pi * m / M
        diff = (diff + math.pi) % (2 * math.pi) - math.pi
        if abs(diff) > tol:
            return False
    return True
