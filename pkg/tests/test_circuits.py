import math

import numpy as np
import pytest

from sweetq.actions import Action, GateKind
from sweetq.circuits import Circuit, basis_vector, export_circuit, metrics, parse_circuit, simulate_full
from sweetq.errors import CapExceeded, MalformedLine

from oracles import gate_matrix


def circ(text, n=None):
    return parse_circuit(text, n)


def test_square_graph_circuit_depth_two():
    m = metrics(circ("CZ 0 1\nCZ 2 3\nCZ 1 2\nCZ 0 3\n"))
    assert (m.gate_count, m.entangling_count, m.t_count, m.depth) == (4, 4, 0, 2)


def test_empty_metrics():
    assert metrics(Circuit(3, [])).as_dict() == {"gate_count": 0, "t_count": 0, "entangling_count": 0, "depth": 0}


def test_t_chain_metrics():
    m = metrics(circ("T 0\nTDG 0\nH 1\n"))
    assert (m.gate_count, m.t_count, m.depth) == (3, 2, 2)


def test_depth_respects_order():
    assert metrics(circ("CZ 0 1\nCZ 1 2\nCZ 2 3\n")).depth == 3
    assert metrics(circ("CZ 0 1\nCZ 2 3\nCZ 1 2\n")).depth == 2


def test_export_format():
    assert export_circuit(Circuit(2, [Action(GateKind.CNOT, (0, 1))])) == "CNOT 0 1\n"


def test_parse_normalises_cz():
    (g,) = circ("CZ 2 1").gates
    assert g.qubits == (1, 2)


def test_round_trip():
    text = "H 0\nT 1\nTDG 2\nCNOT 2 0\nCZ 0 3\n"
    assert export_circuit(circ(text)) == text


@pytest.mark.parametrize("text,line", [("H 0\nFOO 1\n", 2), ("CNOT 0\n", 1), ("H x\n", 1), ("CZ 1 1\n", 1)])
def test_malformed_lines(text, line):
    with pytest.raises(MalformedLine) as exc:
        circ(text)
    assert exc.value.lineno == line


def test_circuit_wider_than_n():
    with pytest.raises(MalformedLine):
        circ("CZ 0 3", n=2)


def test_hadamard_on_zero():
    out = simulate_full(circ("H 0"), basis_vector(1))
    assert np.allclose(out, [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_cz_on_bell():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(simulate_full(circ("CZ 0 1"), bell), np.array([1, 0, 0, -1]) / math.sqrt(2))


def test_simulation_matches_kronecker_oracle():
    rng = np.random.default_rng(7)
    kinds = ["H", "T", "TDG", "CNOT", "CZ"]
    for _ in range(50):
        n = int(rng.integers(2, 5))
        lines = []
        for _ in range(8):
            k = kinds[rng.integers(len(kinds))]
            qs = rng.choice(n, size=2 if k in ("CNOT", "CZ") else 1, replace=False)
            lines.append(f"{k} {' '.join(map(str, qs))}")
        c = circ("\n".join(lines), n)
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        ref = psi
        for g in c.gates:
            ref = gate_matrix(g.kind.value, g.qubits, n) @ ref
        assert np.allclose(simulate_full(c, psi), ref, atol=1e-12)


def test_norm_preserved_over_long_circuit():
    rng = np.random.default_rng(3)
    n = 4
    gates = []
    for _ in range(1000):
        k = ["H", "T", "TDG", "CNOT", "CZ"][rng.integers(5)]
        qs = tuple(int(q) for q in rng.choice(n, size=2 if k in ("CNOT", "CZ") else 1, replace=False))
        gates.append(Action(GateKind(k), qs))
    out = simulate_full(Circuit(n, gates), basis_vector(n, 5))
    assert abs(np.linalg.norm(out) - 1) < 1e-12


def test_dense_cap():
    with pytest.raises(CapExceeded):
        simulate_full(Circuit(13, []), basis_vector(13))


def test_swapping_disjoint_neighbours_keeps_depth():
    a = circ("H 0\nCZ 1 2\nT 0\nCNOT 2 3\n")
    b = circ("CZ 1 2\nH 0\nT 0\nCNOT 2 3\n")
    assert metrics(a).depth == metrics(b).depth
