import random
from itertools import combinations

import pytest

from sweetq.actions import Action, GateKind, GateSet, enumerate_actions
from sweetq.errors import GridMismatch
from sweetq.graphs import Graph, graph_state_target, square_graph
from sweetq.reward import (
    EpisodeContext,
    PenaltyConfig,
    SparseTable,
    StaticRewardConfig,
    build_static_reward,
    congestion_level,
    dynamic_penalty,
    format_triplets,
    format_value,
    total_reward,
)
from sweetq.sweet import PhaseGrid, canonicalize, get_kernel

from oracles import forward_distance, static_reward_recursive

PSI3_TERMS = [(0, 0b010), (0, 0b011), (0, 0b100)]


def g4_reward(k_max=2):
    target = graph_state_target(square_graph(), PhaseGrid(1))
    return target, build_static_reward(target, GateSet.parse("CZ", 4), StaticRewardConfig(k_max=k_max))


def test_g4_first_stratum():
    target, table = g4_reward()
    acts = enumerate_actions(GateSet.parse("CZ", 4))
    kernel = get_kernel(4, 1)
    for a in acts:
        pred = kernel.compile(a.kind, a.qubits)(target.mask)
        assert table.get(pred, a.index) == 10000.0


def test_g4_second_stratum():
    target, table = g4_reward()
    kernel = get_kernel(4, 1)
    cz = {a.qubits: a for a in enumerate_actions(GateSet.parse("CZ", 4))}
    one = kernel.compile(GateKind.CZ, (0, 1))(target.mask)
    two = kernel.compile(GateKind.CZ, (2, 3))(one)
    assert table.get(two, cz[(2, 3)].index) == 5000.0
    assert table.get(two, cz[(0, 1)].index) == 5000.0
    assert table.get(two, cz[(0, 2)].index) == 0.0


def test_g4_entry_count_matches_recursive_oracle():
    target, table = g4_reward()
    oracle = static_reward_recursive(target.pairs(), ["CZ"], 4, 2, 10000.0, 2)
    # stratum one: 6 predecessors, one action each. Stratum two: 15 states two
    # toggles away with two actions each, plus the target itself on all 6 actions
    assert table.nnz == len(oracle) == 6 + 30 + 6
    assert table.get(target.mask, 0) == 5000.0
    assert table.to_dict() == oracle


def test_single_stratum():
    _, table = g4_reward(k_max=1)
    assert {v for _, _, v in table.items()} == {10000.0}


def test_no_op_inverses_are_skipped():
    # T on a qubit that is 0 in every term changes nothing
    target = canonicalize([(0, 0b00)], 2, PhaseGrid(3))
    table = build_static_reward(target, GateSet.parse("T", 2), StaticRewardConfig(k_max=2))
    assert table.nnz == 0


def test_values_are_strata_and_forward_paths_exist():
    target = canonicalize(PSI3_TERMS, 3, PhaseGrid(3))
    gs = GateSet.parse("H T TDG CNOT", 3)
    table = build_static_reward(target, gs, StaticRewardConfig(k_max=3))
    assert {v for _, _, v in table.items()} <= {10000.0, 5000.0, 2500.0}
    kernel = get_kernel(3, 3)
    acts = enumerate_actions(gs)
    rng = random.Random(0)
    entries = list(table.items())
    for mask, a, v in rng.sample(entries, 40):
        k = {10000.0: 0, 5000.0: 1, 2500.0: 2}[v]
        s = kernel.apply(mask, acts[a].kind, acts[a].qubits)[0]
        # forward BFS from the successor must find the target within k more gates
        frontier, seen = {s}, {s}
        for _ in range(k):
            frontier = {kernel.apply(x, b.kind, b.qubits)[0] for x in frontier for b in acts} - seen
            seen |= frontier
        assert target.mask in seen


def test_independent_of_enumeration_order():
    target = canonicalize(PSI3_TERMS, 3, PhaseGrid(3))
    cfg = StaticRewardConfig(k_max=2)
    a = build_static_reward(target, GateSet.parse("H T TDG CNOT", 3), cfg)
    b = build_static_reward(target, GateSet.parse("CNOT TDG H T", 3), cfg)
    acts_a = enumerate_actions(GateSet.parse("H T TDG CNOT", 3))
    acts_b = {(x.kind, x.qubits): x.index for x in enumerate_actions(GateSet.parse("CNOT TDG H T", 3))}
    remapped = {(s, acts_b[(acts_a[i].kind, acts_a[i].qubits)]): v for (s, i), v in a.to_dict().items()}
    assert remapped == b.to_dict()


def test_grid_mismatch():
    target = canonicalize([(0, 1)], 2, PhaseGrid(1))
    with pytest.raises(GridMismatch):
        build_static_reward(target, GateSet.parse("T", 2), StaticRewardConfig())
    with pytest.raises(GridMismatch):
        build_static_reward(target, GateSet.parse("CZ", 3), StaticRewardConfig())


def _all_graphs(n):
    pairs = list(combinations(range(n), 2))
    for r in range(len(pairs) + 1):
        for edges in combinations(pairs, r):
            yield Graph.from_edges(n, edges)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k_max", [1, 2, 3])
def test_cz_targets_match_recursive_oracle(n, k_max):
    for g in _all_graphs(n):
        target = graph_state_target(g, PhaseGrid(1))
        table = build_static_reward(target, GateSet.parse("CZ", n), StaticRewardConfig(k_max=k_max))
        assert table.to_dict() == static_reward_recursive(target.pairs(), ["CZ"], n, 2, 10000.0, k_max)


def test_random_cz_targets_on_finer_grids():
    rng = random.Random(11)
    for _ in range(30):
        n, p = rng.choice([2, 3]), rng.choice([1, 2, 3])
        M = 1 << p
        xs = rng.sample(range(1 << n), rng.randint(1, 1 << n))
        terms = [(rng.randrange(M), x) for x in xs]
        target = canonicalize(terms, n, PhaseGrid(p))
        table = build_static_reward(target, GateSet.parse("CZ", n), StaticRewardConfig(k_max=2))
        assert table.to_dict() == static_reward_recursive(target.pairs(), ["CZ"], n, M, 10000.0, 2)


@pytest.mark.parametrize("k_max", [1, 2])
def test_psi3_matches_recursive_oracle(k_max):
    target = canonicalize(PSI3_TERMS, 3, PhaseGrid(3))
    table = build_static_reward(target, GateSet.parse("H T TDG CNOT", 3), StaticRewardConfig(k_max=k_max))
    oracle = static_reward_recursive(PSI3_TERMS, ["H", "T", "TDG", "CNOT"], 3, 8, 10000.0, k_max)
    assert table.to_dict() == oracle


def test_forward_oracle_sees_psi3_first_stratum():
    target = canonicalize(PSI3_TERMS, 3, PhaseGrid(3))
    acts = enumerate_actions(GateSet.parse("H T TDG CNOT", 3))
    table = build_static_reward(target, GateSet.parse("H T TDG CNOT", 3), StaticRewardConfig(k_max=1))
    from sweetq.sweet import SweetState

    for mask, a, _ in table.items():
        s = SweetState.from_mask(mask, 3, PhaseGrid(3))
        assert forward_distance(s.pairs(), PSI3_TERMS, ["H", "T", "TDG", "CNOT"], 3, 8, 1) == 1


# dynamic penalties

def ctx_after(n, actions, s0=0):
    ctx = EpisodeContext(n)
    ctx.reset(s0)
    for a in actions:
        ctx.commit(a, s0)
    return ctx


def test_noop_penalty():
    ctx = ctx_after(2, [])
    r_dyn = SparseTable(1)
    a = Action(GateKind.T, (0,), 0)
    assert dynamic_penalty(ctx, 5, a, 5, 0.0, PenaltyConfig(), r_dyn) == -10.0
    assert r_dyn.get(5, 0) == -10.0


def test_noop_takes_precedence_over_revisit():
    ctx = ctx_after(2, [])
    ctx.visited.add(5)
    r_dyn = SparseTable(1)
    assert dynamic_penalty(ctx, 5, Action(GateKind.T, (0,), 0), 5, 0.0, PenaltyConfig(), r_dyn) == -10.0


def test_revisit_penalty_only_without_static_reward():
    ctx = ctx_after(2, [])
    ctx.visited.add(9)
    r_dyn = SparseTable(1)
    a = Action(GateKind.H, (0,), 0)
    assert dynamic_penalty(ctx, 5, a, 9, 0.0, PenaltyConfig(), r_dyn) == -1.0
    assert dynamic_penalty(ctx, 5, a, 9, 5000.0, PenaltyConfig(), r_dyn) == 0.0
    assert r_dyn.get(5, 0) == -1.0


def test_fresh_state_no_penalty():
    ctx = ctx_after(2, [])
    r_dyn = SparseTable(1)
    assert dynamic_penalty(ctx, 5, Action(GateKind.H, (0,), 0), 9, 0.0, PenaltyConfig(), r_dyn) == 0.0
    assert r_dyn.nnz == 0


def test_congestion_level_examples():
    ctx = ctx_after(4, [Action(GateKind.CZ, (0, 1)), Action(GateKind.CZ, (0, 2))])
    assert ctx.counters == [2, 1, 1, 0]
    q = Action(GateKind.CZ, (0, 3), 0)
    assert congestion_level(ctx, q) == 2
    r_dyn = SparseTable(1)
    cfg = PenaltyConfig(revisit_enabled=False, noop_enabled=False, congestion_enabled=True)
    assert dynamic_penalty(ctx, 1, q, 2, 0.0, cfg, r_dyn) == -1.0
    assert congestion_level(ctx_after(4, []), q) == 0
    h3 = ctx_after(2, [Action(GateKind.H, (0,))] * 3)
    assert congestion_level(h3, Action(GateKind.CNOT, (1, 0))) == 3


def test_congestion_threshold_is_strict():
    ctx = ctx_after(3, [Action(GateKind.H, (0,))])
    # t = 1, threshold 0.5; counter 1 on qubit 0
    cfg = PenaltyConfig(revisit_enabled=False, noop_enabled=False, congestion_enabled=True)
    assert dynamic_penalty(ctx, 1, Action(GateKind.H, (0,), 0), 2, 0.0, cfg, SparseTable(1)) == -1.0
    ctx = ctx_after(3, [Action(GateKind.H, (0,)), Action(GateKind.H, (1,))])
    # t = 2, threshold 1; counter 1 is not above it
    assert dynamic_penalty(ctx, 1, Action(GateKind.H, (0,), 0), 2, 0.0, cfg, SparseTable(1)) == 0.0


def test_penalties_accumulate():
    ctx = ctx_after(1, [])
    r_dyn = SparseTable(1)
    a = Action(GateKind.T, (0,), 0)
    for _ in range(3):
        dynamic_penalty(ctx, 5, a, 5, 0.0, PenaltyConfig(), r_dyn)
    assert r_dyn.get(5, 0) == -30.0


def test_disabled_penalties():
    ctx = ctx_after(1, [])
    off = PenaltyConfig(revisit_enabled=False, noop_enabled=False)
    assert dynamic_penalty(ctx, 5, Action(GateKind.T, (0,), 0), 5, 0.0, off, SparseTable(1)) == 0.0


def test_total_reward():
    r_sta, r_dyn = SparseTable(2), SparseTable(2)
    r_sta.set(1, 0, 10000.0)
    r_dyn.set(1, 0, -10.0)
    r_sta.set(2, 1, 2500.0)
    assert total_reward(r_sta, r_dyn, 1, 0) == 9990.0
    assert total_reward(r_sta, r_dyn, 3, 0) == 0.0
    assert total_reward(r_sta, r_dyn, 2, 1) == 2500.0


# sparse table and triplet text

def test_sparse_table_drops_zeros():
    t = SparseTable(3)
    t.set(7, 1, 0.0)
    assert t.nnz == 0 and 7 not in t.states()
    t.set(7, 1, 2.5)
    t.set(7, 1, 0.0)
    assert t.nnz == 0 and list(t.items()) == []


def test_argmax_ties_go_low():
    t = SparseTable(4)
    assert t.argmax(99) == 0
    t.set(1, 2, 5.0)
    t.set(1, 3, 5.0)
    assert t.argmax(1) == 2


def test_format_value():
    assert format_value(-1.0) == "-1"
    assert format_value(2500.0) == "2500"
    assert format_value(0.1) == "0.1"
    assert float(format_value(1 / 3)) == 1 / 3


def test_triplets_sorted_by_key_then_action():
    t = SparseTable(3)
    t.set(1 << 7, 2, 1.0)
    t.set(1 << 1, 1, -1.0)
    t.set(1 << 7, 0, 0.5)
    assert format_triplets(t, 2, 1) == "state,action,value\n01,1,-1\n07,0,0.5\n07,2,1\n"
