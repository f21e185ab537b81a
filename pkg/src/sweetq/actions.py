"""Gate kinds, gate sets and the enumerated action list."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations, permutations

from .errors import ConfigError


class GateKind(enum.Enum):
    H = "H"
    T = "T"
    TDG = "TDG"
    CNOT = "CNOT"
    CZ = "CZ"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.CZ) else 1

    @property
    def symmetric(self) -> bool:
        return self is GateKind.CZ

    @property
    def inverse(self) -> GateKind:
        return {GateKind.T: GateKind.TDG, GateKind.TDG: GateKind.T}.get(self, self)


@dataclass(frozen=True)
class Action:
    kind: GateKind
    qubits: tuple[int, ...]
    index: int = -1

    def __post_init__(self):
        if len(self.qubits) != self.kind.arity:
            raise ConfigError(f"{self.kind.value} takes {self.kind.arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ConfigError(f"repeated qubit in {self.kind.value}{self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ConfigError(f"negative qubit index in {self.qubits}")
        if self.kind.symmetric and self.qubits != tuple(sorted(self.qubits)):
            object.__setattr__(self, "qubits", tuple(sorted(self.qubits)))

    def __str__(self) -> str:
        return " ".join([self.kind.value, *map(str, self.qubits)])


@dataclass(frozen=True)
class GateSet:
    kinds: tuple[GateKind, ...]
    n: int

    def __post_init__(self):
        if not self.kinds:
            raise ConfigError("gate set is empty")
        if len(set(self.kinds)) != len(self.kinds):
            raise ConfigError("gate set lists a gate twice")
        if self.n < max(k.arity for k in self.kinds):
            raise ConfigError(f"{self.n} qubit(s) is too few for the gate set")

    @classmethod
    def parse(cls, tokens: str | list[str], n: int) -> GateSet:
        """Build from ``"H,T,CNOT"`` or a token list."""
        if isinstance(tokens, str):
            tokens = [t for t in tokens.replace(",", " ").split() if t]
        try:
            kinds = tuple(GateKind(t.strip().upper()) for t in tokens)
        except ValueError as exc:
            raise ConfigError(f"unknown gate token: {exc}") from None
        return cls(kinds, n)

    @property
    def tokens(self) -> list[str]:
        return [k.value for k in self.kinds]


def enumerate_actions(gate_set: GateSet) -> list[Action]:
    """All actions in a fixed order: gate kind as listed, then lexicographic qubit tuples.

    CZ uses unordered pairs since CZ(i, j) == CZ(j, i); CNOT uses ordered pairs.
    """
    out: list[Action] = []
    qs = range(gate_set.n)
    for kind in gate_set.kinds:
        if kind.arity == 1:
            tuples = [(q,) for q in qs]
        elif kind.symmetric:
            tuples = list(combinations(qs, 2))
        else:
            tuples = list(permutations(qs, 2))
        for qt in tuples:
            out.append(Action(kind, qt, len(out)))
    return out


def inverse_action(action: Action) -> Action:
    """Same qubits, inverse gate; the index is carried over unchanged."""
    return Action(action.kind.inverse, action.qubits, action.index)
