"""Run configuration files: flat ``key = value`` text, unknown keys rejected."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .actions import GateSet
from .errors import ConfigError, SweetqError
from .graphs import Graph, graph_state_target, parse_edge_list, uniform_superposition
from .qlearn import Problem, TrainConfig
from .reward import PenaltyConfig, StaticRewardConfig
from .sweet import PhaseGrid, SweetState, canonicalize

PENALTY_NAMES = ("revisit", "noop", "congestion")

_KEYS = {
    "n", "p", "gate_set", "initial_state", "target_state", "graph",
    "epsilon", "alpha", "gamma", "r_max", "k_max",
    "episodes_per_batch", "episode_length", "max_batches", "rollout_cap", "rollout_max_gates", "rollout_max_depth",
    "penalties", "seed", "output",
}


@dataclass
class RunConfig:
    n: int
    p: int
    gate_set: GateSet
    initial_state: SweetState
    target_state: SweetState
    train: TrainConfig
    graph: Graph | None = None
    graph_path: str | None = None
    output: str = "out"
    source: dict[str, str] = field(default_factory=dict)

    @property
    def problem(self) -> Problem:
        return Problem(self.initial_state, self.target_state, self.gate_set)

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, train=replace(self.train, seed=seed))

    def hyperparameters(self) -> dict:
        t = self.train
        return {
            "n": self.n,
            "p": self.p,
            "gate_set": self.gate_set.tokens,
            "epsilon": t.epsilon,
            "alpha": t.alpha,
            "gamma": t.gamma,
            "r_max": t.reward.r_max,
            "k_max": t.reward.k_max,
            "episodes_per_batch": t.episodes_per_batch,
            "episode_length": t.episode_length,
            "max_batches": t.max_batches,
            "rollout_cap": t.rollout_cap,
            "rollout_max_gates": t.rollout_max_gates,
            "rollout_max_depth": t.rollout_max_depth,
            "penalties": [name for name in PENALTY_NAMES if getattr(t.penalties, f"{name}_enabled")],
            "seed": t.seed,
        }


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: {key!r} given twice")
        out[key] = value.strip()
    return out


def parse_terms(text: str, n: int, grid: PhaseGrid) -> SweetState:
    """Term list ``m:x, m:x, ...``; ``plus`` and ``zero`` name the uniform and all-zero states."""
    word = text.strip().lower()
    if word == "plus":
        return uniform_superposition(n, grid)
    if word == "zero":
        return canonicalize([(0, 0)], n, grid)
    raw = []
    for tok in text.replace(",", " ").split():
        m_txt, sep, x_txt = tok.partition(":")
        if not sep or not m_txt.isdigit() or len(x_txt) != n or set(x_txt) - {"0", "1"}:
            raise ConfigError(f"bad term {tok!r}; expected m:x with {n} bits")
        raw.append((int(m_txt), int(x_txt, 2)))
    try:
        return canonicalize(raw, n, grid)
    except (SweetqError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _num(kv: dict[str, str], key: str, cast, default=None):
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return cast(kv[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {kv[key]!r}") from None


def _as_int(text: str) -> int:
    """Integers, also written as ``1e4`` or ``10_000``."""
    value = float(text.replace("_", ""))
    if value != int(value):
        raise ValueError(text)
    return int(value)


def build_config(kv: dict[str, str], base_dir: Path | None = None, graph_override: str | Path | None = None) -> RunConfig:
    n = _num(kv, "n", _as_int)
    p = _num(kv, "p", _as_int)
    if n < 1 or p < 0:
        raise ConfigError("need n >= 1 and p >= 0")
    grid = PhaseGrid(p)
    gate_set = GateSet.parse(kv.get("gate_set", ""), n)

    graph = None
    graph_path = str(graph_override) if graph_override else kv.get("graph")
    if graph_path and "target_state" in kv and not graph_override:
        raise ConfigError("give exactly one of target_state and graph")
    if graph_path:
        path = Path(graph_path)
        if not path.is_absolute() and base_dir is not None and not path.exists():
            path = base_dir / path
        try:
            graph = parse_edge_list(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read graph file {graph_path}: {exc}") from None
        if graph.n != n:
            raise ConfigError(f"graph has {graph.n} vertices but n = {n}")
        if grid.M < 2:
            raise ConfigError("graph-state targets need p >= 1")
        target = graph_state_target(graph, grid)
    elif "target_state" in kv:
        target = parse_terms(kv["target_state"], n, grid)
    else:
        raise ConfigError("give exactly one of target_state and graph")
    initial = parse_terms(kv.get("initial_state", "zero"), n, grid)

    enabled = {t.strip().lower() for t in kv.get("penalties", "revisit, noop").replace(",", " ").split()}
    enabled.discard("none")
    if enabled - set(PENALTY_NAMES):
        raise ConfigError(f"unknown penalty names {sorted(enabled - set(PENALTY_NAMES))}")
    penalties = PenaltyConfig(
        revisit_enabled="revisit" in enabled,
        noop_enabled="noop" in enabled,
        congestion_enabled="congestion" in enabled,
    )
    try:
        reward = StaticRewardConfig(r_max=_num(kv, "r_max", float, 10000.0), k_max=_num(kv, "k_max", _as_int, 2))
        train = TrainConfig(
            epsilon=_num(kv, "epsilon", float, 0.8),
            alpha=_num(kv, "alpha", float, 0.8),
            gamma=_num(kv, "gamma", float, 0.5),
            episodes_per_batch=_num(kv, "episodes_per_batch", _as_int, 10_000),
            episode_length=_num(kv, "episode_length", _as_int, 50),
            max_batches=_num(kv, "max_batches", _as_int, 10),
            rollout_cap=_num(kv, "rollout_cap", _as_int, 50),
            seed=_num(kv, "seed", _as_int, 0),
            rollout_max_gates=_num(kv, "rollout_max_gates", _as_int, 0),
            rollout_max_depth=_num(kv, "rollout_max_depth", _as_int, 0),
            penalties=penalties,
            reward=reward,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        n, p, gate_set, initial, target, train, graph, graph_path, kv.get("output", "out"), dict(kv)
    )


def preset_names() -> list[str]:
    return sorted(f.name[:-4] for f in resources.files("sweetq.presets").iterdir() if f.name.endswith(".cfg"))


def preset_text(name: str) -> str:
    return resources.files("sweetq.presets").joinpath(f"{name}.cfg").read_text()


def load_config(path_or_preset: str | Path, graph_override: str | Path | None = None) -> RunConfig:
    """Load a config file, or a shipped preset by name (``g4``, ``psi3_basic``, ...)."""
    path = Path(path_or_preset)
    if path.exists():
        return build_config(parse_kv(path.read_text()), path.parent, graph_override)
    name = str(path_or_preset)
    if name in preset_names():
        presets = resources.files("sweetq.presets")
        with resources.as_file(presets.joinpath(f"{name}.cfg")) as cfg_path:
            return build_config(parse_kv(cfg_path.read_text()), cfg_path.parent, graph_override)
    raise ConfigError(f"no config file or preset named {name!r}")
