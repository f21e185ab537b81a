"""Tabular Q-learning: epsilon-greedy training episodes, greedy rollouts, batch loop."""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .actions import Action, GateSet, enumerate_actions
from .circuits import Circuit, metrics
from .errors import ConfigError, GridMismatch, InvalidAction, PhaseGridTooCoarse, Unconverged
from .reward import PenaltyConfig, SparseTable, StaticRewardConfig, build_static_reward
from .sweet import SweetState, get_kernel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epsilon: float = 0.8
    alpha: float = 0.8
    gamma: float = 0.5
    episodes_per_batch: int = 10_000
    episode_length: int = 50
    max_batches: int = 10
    rollout_cap: int = 50
    seed: int = 0
    penalties: PenaltyConfig = field(default_factory=PenaltyConfig)
    reward: StaticRewardConfig = field(default_factory=StaticRewardConfig)
    bellman_window: int = 10_000
    # testing-phase acceptance: a rollout that reaches the target must also stay
    # within these bounds (0 disables the check)
    rollout_max_gates: int = 0
    rollout_max_depth: int = 0

    def __post_init__(self):
        for name in ("epsilon", "alpha", "gamma"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        for name in ("episodes_per_batch", "episode_length", "max_batches", "rollout_cap", "bellman_window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.rollout_max_gates < 0 or self.rollout_max_depth < 0:
            raise ConfigError("rollout bounds must be non-negative")

    def accepts(self, rollout: RolloutResult) -> bool:
        """Does a rollout pass the testing phase: target reached and within the configured bounds."""
        if not rollout.success:
            return False
        if self.rollout_max_gates and rollout.steps > self.rollout_max_gates:
            return False
        if self.rollout_max_depth:
            n = 1 + max((q for a in rollout.actions for q in a.qubits), default=0)
            if metrics(Circuit(n, list(rollout.actions))).depth > self.rollout_max_depth:
                return False
        return True


@dataclass
class TrainStats:
    episodes: int = 0
    steps: int = 0
    window: deque = field(default_factory=lambda: deque(maxlen=10_000))
    q_nonzero: int = 0

    @classmethod
    def with_window(cls, size: int) -> TrainStats:
        return cls(window=deque(maxlen=size))

    @property
    def mean_abs_delta(self) -> float:
        return mean_bellman_error(self)


def mean_bellman_error(stats: TrainStats) -> float:
    if not stats.window:
        raise ValueError("no TD steps recorded")
    return float(sum(stats.window) / len(stats.window))


@dataclass
class RolloutResult:
    success: bool
    actions: list[Action]
    final_state: int
    steps: int


@dataclass
class Problem:
    initial: SweetState
    target: SweetState
    gate_set: GateSet

    def __post_init__(self):
        if not (self.initial.n == self.target.n == self.gate_set.n):
            raise ConfigError("initial state, target and gate set disagree on qubit count")
        if self.initial.grid != self.target.grid:
            raise ConfigError("initial state and target use different phase grids")


@dataclass
class Environment:
    """Everything one training episode touches."""

    actions: list[Action]
    steps: list[Callable[[int], int]]
    r_sta: SparseTable
    r_dyn: SparseTable
    q: SparseTable
    penalties: PenaltyConfig
    r_max: float
    n: int

    @classmethod
    def build(cls, problem: Problem, cfg: TrainConfig, r_sta: SparseTable | None = None) -> Environment:
        actions = enumerate_actions(problem.gate_set)
        kernel = get_kernel(problem.target.n, problem.target.p)
        try:
            steps = [kernel.compile(a.kind, a.qubits) for a in actions]
        except (PhaseGridTooCoarse, InvalidAction) as exc:
            raise GridMismatch(str(exc)) from None
        if r_sta is None:
            r_sta = build_static_reward(problem.target, problem.gate_set, cfg.reward)
        na = len(actions)
        return cls(actions, steps, r_sta, SparseTable(na), SparseTable(na), cfg.penalties, cfg.reward.r_max, problem.target.n)


def episode_rng(seed: int, episode: int) -> random.Random:
    """Independent stream for one episode, derived from the run seed and a counter."""
    words = np.random.SeedSequence(entropy=seed, spawn_key=(episode,)).generate_state(4, np.uint32)
    return random.Random(int.from_bytes(words.tobytes(), "little"))


def select_action(q: SparseTable, s: int, actions: list[Action], epsilon: float, rng: random.Random) -> Action:
    if rng.random() < epsilon:
        return actions[rng.randrange(len(actions))]
    return actions[q.argmax(s)]


def q_update(
    q: SparseTable,
    s_t: int,
    a_t: int,
    r: float,
    s_next: int,
    actions: list[Action],
    alpha: float,
    gamma: float,
) -> float:
    """One temporal-difference update; returns the TD error."""
    old = q.get(s_t, a_t)
    delta = r + gamma * q.row_max(s_next) - old
    q.set(s_t, a_t, old + alpha * delta)
    return delta


def run_episode(env: Environment, s0: int, cfg: TrainConfig, rng: random.Random, stats: TrainStats) -> TrainStats:
    """Exactly ``cfg.episode_length`` epsilon-greedy steps from ``s0``; no early exit."""
    q, rdyn = env.q, env.r_dyn
    steps = env.steps
    n_actions = len(steps)
    qubits = [a.qubits for a in env.actions]
    rsta_index, rsta_data = env.r_sta._index, env.r_sta._data
    pc = env.penalties
    noop_pen = env.r_max * pc.noop_coeff if pc.noop_enabled else 0.0
    revisit_pen = env.r_max * pc.revisit_coeff if pc.revisit_enabled else 0.0
    cong_pen = env.r_max * pc.congestion_coeff
    congestion = pc.congestion_enabled
    eps, alpha, gamma = cfg.epsilon, cfg.alpha, cfg.gamma
    rand, randrange = rng.random, rng.randrange
    q_index, rdyn_index = q._index, rdyn._index
    window = stats.window.append

    visited = {s0}
    counters = [0] * env.n
    s = s0
    for t in range(cfg.episode_length):
        if rand() < eps:
            a = randrange(n_actions)
        else:
            i = q_index.get(s)
            a = 0 if i is None else int(q._data[i].argmax())
        s2 = steps[a](s)

        j = rsta_index.get(s)
        r_sta = 0.0 if j is None else float(rsta_data[j, a])
        pen = 0.0
        if s2 == s:
            pen -= noop_pen
        elif s2 in visited and r_sta == 0.0:
            pen -= revisit_pen
        if congestion:
            qs = qubits[a]
            c = counters[qs[0]] if len(qs) == 1 else max(counters[qs[0]], counters[qs[1]])
            if c > t / 2:
                pen -= cong_pen
        if pen:
            r_dyn = rdyn.add(s, a, pen)
        else:
            k = rdyn_index.get(s)
            r_dyn = 0.0 if k is None else float(rdyn._data[k, a])

        i2 = q_index.get(s2)
        future = 0.0 if i2 is None else float(q._data[i2].max())
        i = q.ensure_row(s)
        data = q._data
        old = float(data[i, a])
        delta = r_sta + r_dyn + gamma * future - old
        data[i, a] = old + alpha * delta
        window(abs(delta))

        visited.add(s2)
        for qb in qubits[a]:
            counters[qb] += 1
        s = s2
    stats.episodes += 1
    stats.steps += cfg.episode_length
    return stats


def greedy_rollout(
    q: SparseTable,
    s0: int,
    target: int,
    actions: list[Action],
    l_c: int,
    steps: list[Callable[[int], int]],
) -> RolloutResult:
    """Follow argmax Q from ``s0`` until the target or ``l_c`` gates. Read-only on ``q``."""
    s, taken = s0, []
    while s != target and len(taken) < l_c:
        a = q.argmax(s)
        taken.append(actions[a])
        s = steps[a](s)
    return RolloutResult(s == target, taken, s, len(taken))


@dataclass
class SynthesisResult:
    problem: Problem
    circuit: Circuit
    rollout: RolloutResult
    stats: TrainStats
    batches: int
    env: Environment

    accepted: bool = False

    @property
    def success(self) -> bool:
        return self.rollout.success


def synthesize(
    problem: Problem,
    cfg: TrainConfig,
    on_batch: Callable[[int, RolloutResult, TrainStats], None] | None = None,
) -> SynthesisResult:
    """Train in batches, testing greedily after each, until a rollout passes the test.

    A rollout passes when it reaches the target within ``cfg.rollout_max_gates``
    gates and ``cfg.rollout_max_depth`` layers (where set). Raises
    :class:`Unconverged` (with the last attempt in ``.result``) when
    ``cfg.max_batches`` batches pass without one.
    """
    env = Environment.build(problem, cfg)
    stats = TrainStats.with_window(cfg.bellman_window)
    s0, target = problem.initial.mask, problem.target.mask
    episode = 0
    rollout = None
    accepted = False
    for batch in range(1, cfg.max_batches + 1):
        for _ in range(cfg.episodes_per_batch):
            run_episode(env, s0, cfg, episode_rng(cfg.seed, episode), stats)
            episode += 1
        rollout = greedy_rollout(env.q, s0, target, env.actions, cfg.rollout_cap, env.steps)
        stats.q_nonzero = env.q.nnz
        log.info(
            "batch %d: rollout %s after %d gates, mean |delta| %.3g",
            batch, "reached target" if rollout.success else "failed", rollout.steps, stats.mean_abs_delta,
        )
        if on_batch is not None:
            on_batch(batch, rollout, stats)
        accepted = cfg.accepts(rollout)
        if accepted:
            break
    result = SynthesisResult(
        problem, Circuit(problem.target.n, list(rollout.actions)), rollout, stats, batch, env, accepted
    )
    if not accepted:
        raise Unconverged(f"no rollout passed the test after {cfg.max_batches} batches", result)
    return result
