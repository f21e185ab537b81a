import pytest

from sweetq.actions import Action, GateKind, GateSet, enumerate_actions, inverse_action
from sweetq.errors import ConfigError


def test_universal_set_on_three_qubits_has_fifteen_actions():
    acts = enumerate_actions(GateSet.parse("H T TDG CNOT", 3))
    assert len(acts) == 15
    assert [str(a) for a in acts[:3]] == ["H 0", "H 1", "H 2"]
    assert [str(a) for a in acts[9:]] == ["CNOT 0 1", "CNOT 0 2", "CNOT 1 0", "CNOT 1 2", "CNOT 2 0", "CNOT 2 1"]


def test_cz_uses_unordered_pairs():
    acts = enumerate_actions(GateSet.parse("CZ", 4))
    assert len(acts) == 6
    assert [a.qubits for a in acts] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert len(enumerate_actions(GateSet.parse("CZ", 7))) == 21


def test_single_h():
    assert len(enumerate_actions(GateSet.parse(["H"], 1))) == 1


def test_index_matches_position():
    acts = enumerate_actions(GateSet.parse("CNOT CZ H", 4))
    assert [a.index for a in acts] == list(range(len(acts)))
    assert len({(a.kind, a.qubits) for a in acts}) == len(acts)


def test_cz_qubits_are_sorted():
    assert Action(GateKind.CZ, (2, 1)).qubits == (1, 2)
    assert Action(GateKind.CNOT, (2, 1)).qubits == (2, 1)


def test_inverses():
    assert inverse_action(Action(GateKind.T, (0,))).kind is GateKind.TDG
    assert inverse_action(Action(GateKind.TDG, (0,))).kind is GateKind.T
    assert inverse_action(Action(GateKind.CZ, (1, 3))) == Action(GateKind.CZ, (1, 3))
    assert inverse_action(Action(GateKind.CNOT, (2, 0))) == Action(GateKind.CNOT, (2, 0))
    assert inverse_action(Action(GateKind.H, (1,))).kind is GateKind.H


@pytest.mark.parametrize("bad", [(0, 0), (0,), (1, 2, 3)])
def test_bad_two_qubit_actions(bad):
    with pytest.raises(ConfigError):
        Action(GateKind.CNOT, bad)


@pytest.mark.parametrize("text,n", [("", 2), ("H H", 2), ("SWAP", 2), ("CZ", 1)])
def test_bad_gate_sets(text, n):
    with pytest.raises(ConfigError):
        GateSet.parse(text, n)


def test_arity_and_symmetry():
    assert [k.arity for k in GateKind] == [1, 1, 1, 2, 2]
    assert [k for k in GateKind if k.symmetric] == [GateKind.CZ]
