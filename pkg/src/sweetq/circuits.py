"""Circuits: metrics, a line-based text format and a dense state-vector simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import Action, GateKind
from .errors import CapExceeded, ConfigError, MalformedLine

MAX_DENSE_QUBITS = 12

_T_PHASE = np.exp(1j * math.pi / 4)


@dataclass
class Circuit:
    n: int
    gates: list[Action] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            if any(q >= self.n for q in g.qubits):
                raise ValueError(f"{g} acts outside {self.n} qubits")

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class CircuitMetrics:
    gate_count: int
    t_count: int
    entangling_count: int
    depth: int

    def as_dict(self) -> dict[str, int]:
        return {
            "gate_count": self.gate_count,
            "t_count": self.t_count,
            "entangling_count": self.entangling_count,
            "depth": self.depth,
        }


def metrics(circuit: Circuit) -> CircuitMetrics:
    """Counts plus order-preserving ASAP depth (gates sharing a qubit serialize)."""
    layer_of: dict[int, int] = {}
    depth = 0
    t_count = ent = 0
    for g in circuit.gates:
        layer = 1 + max((layer_of.get(q, 0) for q in g.qubits), default=0)
        for q in g.qubits:
            layer_of[q] = layer
        depth = max(depth, layer)
        if g.kind in (GateKind.T, GateKind.TDG):
            t_count += 1
        elif g.kind.arity == 2:
            ent += 1
    return CircuitMetrics(len(circuit.gates), t_count, ent, depth)


def export_circuit(circuit: Circuit) -> str:
    return "".join(f"{g.kind.value} {' '.join(map(str, g.qubits))}\n" for g in circuit.gates)


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    """Inverse of :func:`export_circuit`. ``n`` defaults to 1 + the largest qubit used."""
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok, *args = line.split()
        try:
            kind = GateKind(tok.upper())
        except ValueError:
            raise MalformedLine(lineno, f"unknown gate {tok!r}") from None
        if len(args) != kind.arity or not all(a.isdigit() for a in args):
            raise MalformedLine(lineno, f"{kind.value} needs {kind.arity} qubit index(es)")
        try:
            gates.append(Action(kind, tuple(int(a) for a in args)))
        except ConfigError as exc:
            raise MalformedLine(lineno, str(exc)) from None
    width = 1 + max((q for g in gates for q in g.qubits), default=-1)
    if n is None:
        n = max(width, 1)
    elif width > n:
        raise MalformedLine(0, f"circuit uses {width} qubits, expected at most {n}")
    return Circuit(n, gates)


def basis_vector(n: int, x: int = 0) -> np.ndarray:
    vec = np.zeros(1 << n, dtype=complex)
    vec[x] = 1.0
    return vec


def _apply_dense(psi: np.ndarray, n: int, g: Action) -> np.ndarray:
    # axis k of the reshaped tensor is qubit k (qubit 0 most significant)
    t = psi.reshape((2,) * n)
    kind = g.kind
    if kind is GateKind.H:
        q = g.qubits[0]
        a = np.take(t, 0, axis=q)
        b = np.take(t, 1, axis=q)
        t = np.stack([(a + b), (a - b)], axis=q) / math.sqrt(2)
    elif kind in (GateKind.T, GateKind.TDG):
        q = g.qubits[0]
        t = t.copy()
        idx = [slice(None)] * n
        idx[q] = 1
        t[tuple(idx)] *= _T_PHASE if kind is GateKind.T else np.conj(_T_PHASE)
    elif kind is GateKind.CZ:
        i, j = g.qubits
        t = t.copy()
        idx = [slice(None)] * n
        idx[i] = 1
        idx[j] = 1
        t[tuple(idx)] *= -1
    else:
        c, tq = g.qubits
        t = t.copy()
        idx = [slice(None)] * n
        idx[c] = 1
        sub = t[tuple(idx)]
        # target axis shifts left by one if it came after the control
        t[tuple(idx)] = np.flip(sub, axis=tq - (tq > c))
    return t.reshape(-1)


def simulate_full(circuit: Circuit, initial: np.ndarray, cap: int = MAX_DENSE_QUBITS) -> np.ndarray:
    n = circuit.n
    if n > cap:
        raise CapExceeded(f"{n} qubits exceeds dense simulation cap {cap}")
    psi = np.asarray(initial, dtype=complex).reshape(-1)
    if psi.size != 1 << n:
        raise ValueError(f"initial vector has {psi.size} entries, expected {1 << n}")
    for g in circuit.gates:
        psi = _apply_dense(psi, n, g)
    return psi
