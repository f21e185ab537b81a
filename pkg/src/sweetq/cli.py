"""Command-line entry point: ``sweetq <command> ...``.

Every failure exits nonzero and prints ``error: <token>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .actions import enumerate_actions
from .circuits import export_circuit, metrics, parse_circuit
from .config import RunConfig, load_config, preset_names, preset_text
from .errors import ConfigError, IoFailure, SweetqError, Unconverged
from .graphs import vizing_depth_bound
from .qlearn import SynthesisResult, synthesize
from .reward import build_static_reward
from .store import TableHeader, export_csv, load, save
from .sweet import PhaseGrid, SweetState, apply_gate

log = logging.getLogger("sweetq")

EXIT_ERROR = 1
EXIT_UNCONVERGED = 3


def _header(cfg: RunConfig, role: str) -> TableHeader:
    return TableHeader(cfg.n, cfg.p, tuple(cfg.gate_set.tokens), len(enumerate_actions(cfg.gate_set)), role)


def _config(args) -> RunConfig:
    cfg = load_config(args.config, graph_override=args.graph)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def build_report(cfg: RunConfig, result: SynthesisResult) -> dict:
    """Run summary. Holds nothing time- or host-dependent, so equal seeds give equal bytes."""
    env = result.env
    report = {
        "hyperparameters": cfg.hyperparameters(),
        "batches": result.batches,
        "episodes": result.stats.episodes,
        "steps": result.stats.steps,
        "rollout_success": result.rollout.success,
        "passed": result.accepted,
        "circuit": [str(g) for g in result.circuit.gates],
        "metrics": metrics(result.circuit).as_dict(),
        "mean_abs_bellman_error": result.stats.mean_abs_delta,
        "nonzero": {"Q": env.q.nnz, "R_sta": env.r_sta.nnz, "R_dyn": env.r_dyn.nnz},
    }
    if cfg.graph is not None:
        bound = vizing_depth_bound(cfg.graph)
        report["graph"] = {
            "vertices": cfg.graph.n,
            "edges": len(cfg.graph.edges),
            "max_degree": bound.lower,
            "bipartite": bound.exact_if_bipartite,
        }
    return report


def cmd_reward_build(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    table = build_static_reward(cfg.target_state, cfg.gate_set, cfg.train.reward)
    save(table, _header(cfg, "R_sta"), out / "r_sta.swq")
    values = sorted({v for _, _, v in table.items()}, reverse=True)
    print(f"{table.nnz} entries over {len(table.states())} states; values {values}")
    print(out / "r_sta.swq")
    return 0


def cmd_synth(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, cfg)
    failure = None
    try:
        result = synthesize(cfg.problem, cfg.train)
    except Unconverged as exc:
        failure, result = exc, exc.result
    env = result.env
    _write(out / "circuit.txt", export_circuit(result.circuit))
    _write(out / "report.json", json.dumps(build_report(cfg, result), indent=2, sort_keys=True) + "\n")
    save(env.q, _header(cfg, "Q"), out / "q.swq")
    save(env.r_sta, _header(cfg, "R_sta"), out / "r_sta.swq")
    save(env.r_dyn, _header(cfg, "R_dyn"), out / "r_dyn.swq")
    m = metrics(result.circuit)
    print(f"batches {result.batches}, gates {m.gate_count}, depth {m.depth}, mean |delta| {result.stats.mean_abs_delta:.4g}")
    if failure is not None:
        print(f"error: {failure.token}: {failure}", file=sys.stderr)
        return EXIT_UNCONVERGED
    return 0


def cmd_apply(args) -> int:
    try:
        state_text = Path(args.state).read_text()
        circuit_text = Path(args.circuit).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    state = SweetState.from_text(state_text, grid=PhaseGrid(args.p))
    circuit = parse_circuit(circuit_text, n=state.n)
    flags = []
    for gate in circuit.gates:
        outcome = apply_gate(state, gate)
        state = outcome.state
        flags.append(outcome.exact)
    sys.stdout.write(state.to_text())
    print("exact " + " ".join("1" if f else "0" for f in flags) if flags else "exact")
    print(f"all_exact {str(all(flags)).lower()}")
    return 0


def cmd_metrics(args) -> int:
    try:
        text = Path(args.circuit).read_text()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    print(json.dumps(metrics(parse_circuit(text)).as_dict(), sort_keys=True))
    return 0


def cmd_export(args) -> int:
    table, header = load(args.snapshot)
    export_csv(table, header.n, header.p, args.csv)
    print(f"{table.nnz} rows -> {args.csv}")
    return 0


def cmd_presets(args) -> int:
    if args.name:
        if args.name not in preset_names():
            raise ConfigError(f"no preset named {args.name!r}")
        sys.stdout.write(preset_text(args.name))
    else:
        print("\n".join(preset_names()))
    return 0


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="config file, or a preset name such as g4")
    p.add_argument("--seed", type=int, help="override the config's seed")
    p.add_argument("--out", help="output directory (default: the config's output)")
    p.add_argument("--graph", help="edge-list file replacing the config's target")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sweetq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log each training batch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reward-build", help="build and save the static reward table")
    _run_flags(p)
    p.set_defaults(func=cmd_reward_build)

    p = sub.add_parser("synth", help="train until a rollout passes; write circuit, report and tables")
    _run_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("apply", help="apply a circuit file to a state file")
    p.add_argument("state", help="state file with one m:bits term per line")
    p.add_argument("circuit", help="circuit file")
    p.add_argument("--p", type=int, default=3, help="phase qubits; the grid has 2**p phases (default 3)")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("metrics", help="gate count, T count, entangling count and depth of a circuit")
    p.add_argument("circuit")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export", help="write a table snapshot as CSV triplets")
    p.add_argument("snapshot")
    p.add_argument("csv")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("presets", help="list shipped presets, or print one")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SweetqError as exc:
        print(f"error: {exc.token}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
