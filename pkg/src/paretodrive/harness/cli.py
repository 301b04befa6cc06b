"""Command-line entry point for training, evaluation, and reporting.

Exit codes: 0 success, 2 malformed configuration, 3 missing or empty
checkpoint, 1 any other categorized error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from ..gpils.runner import run_gpils
from ..gpils.store import load_run_state, write_csv
from ..moppo.policy import action_distribution, greedy_action
from ..nn.checkpoint import CheckpointError
from ..sim.config import ConfigError
from ..sim.highway import HighwayEnv
from ..simplex import validate_weight
from .baseline import analytic_optimum
from .evaluate import pareto_eval
from .report import (
    render_baseline_figure,
    render_pareto_figure,
    render_training_figure,
    write_baseline_csv,
    write_pareto_csv,
)
from .runconfig import run_config_from_ini

CONFIG_COPY = "config.ini"


def _output_root(flag: str | None, config_output: str | None = None) -> Path:
    env = os.environ.get("PARETODRIVE_OUTPUT")
    return Path(flag or env or config_output or "runs")


def _load_run_dir(run_dir: Path):
    """(config, state) for a previously trained run directory.

    The checkpoint is probed first so a missing/empty run directory maps
    to the missing-checkpoint exit code rather than a config error.
    """
    state = load_run_state(run_dir)
    cfg_path = run_dir / CONFIG_COPY
    if not cfg_path.exists():
        raise ConfigError(f"no {CONFIG_COPY} in {run_dir}")
    return run_config_from_ini(cfg_path), state


def cmd_train(args) -> int:
    cfg = run_config_from_ini(args.config)
    run_dir = _output_root(args.out, cfg.output) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)
    copy = run_dir / CONFIG_COPY
    if not (copy.exists() and copy.samefile(args.config)):
        shutil.copyfile(args.config, copy)

    env = HighwayEnv(cfg.sim)
    result = run_gpils(env, cfg.spec, cfg.moppo, cfg.gpils,
                       master_seed=cfg.seed, out_dir=run_dir,
                       resume=args.resume,
                       progress=lambda line: print(line, flush=True))
    if result.log_rows:
        render_training_figure(run_dir / "training.svg", result.log_rows)
    last = result.log_rows[-1] if result.log_rows else {}
    print(f"run {cfg.name}: {len(result.state)} coverage-set entries, "
          f"hypervolume {last.get('hypervolume', float('nan')):.6f}")
    print(f"artifacts in {run_dir}")
    return 0


def cmd_eval(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, run = _load_run_dir(run_dir)
    if len(run.ccs) == 0:
        raise CheckpointError(f"checkpoint in {run_dir} has an empty coverage set")
    env = HighwayEnv(cfg.sim)
    records = pareto_eval(run.ccs, env, weight_count=args.weights,
                          episodes=args.episodes, master_seed=cfg.seed,
                          progress=lambda line: print(line, flush=True))
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    write_pareto_csv(out / "pareto.csv", records)
    render_pareto_figure(out / "pareto.svg", records)
    full = [r for r in records if r.success_rate == 100.0]
    if full:
        best = min(full, key=lambda r: r.tcop_per_m)
        print(f"best 100%-success policy: {best.tcop_per_m:.6f} euro/m "
              f"(policy {best.policy_id})")
    print(f"wrote {out / 'pareto.csv'} and {out / 'pareto.svg'} "
          f"({len(records)} non-dominated records)")
    return 0


def cmd_baseline(args) -> int:
    result = analytic_optimum(road_length=args.road_length)
    out = Path(args.out) if args.out else Path(
        os.environ.get("PARETODRIVE_OUTPUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    write_baseline_csv(out / "baseline.csv", result)
    render_baseline_figure(out / "baseline.svg", result)
    print(f"optimal constant speed: {result.optimal_speed:.2f} m/s")
    print(f"minimum total cost over {result.road_length:.0f} m: "
          f"{result.minimal_cost:.2f} euros")
    print(f"wrote {out / 'baseline.csv'} and {out / 'baseline.svg'}")
    return 0


def cmd_replay(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, run = _load_run_dir(run_dir)
    if len(run.ccs) == 0:
        raise CheckpointError(f"checkpoint in {run_dir} has an empty coverage set")
    if args.weight:
        w = validate_weight(np.array([float(p) for p in args.weight.split(",")]),
                            run.ccs.spec.weight_dim)
    else:
        d = run.ccs.spec.weight_dim
        w = np.full(d, 1.0 / d)
    idx = int(np.argmax(run.ccs.values @ w))
    snap = run.ccs.snapshots[idx]

    env = HighwayEnv(cfg.sim, record_trace=True)
    obs = env.reset(args.seed)
    steps, distance, outcome = 0, 0.0, "max steps"
    while True:
        probs, _ = action_distribution(snap.params, run.ccs.spec, obs.features,
                                       snap.weight, obs.mask)
        result = env.step(greedy_action(probs))
        obs, steps = result.obs, steps + 1
        distance += result.info["distance"]
        if result.terminated or result.truncated:
            if result.info.get("collision"):
                outcome = "collision"
            elif result.info.get("reached_target"):
                outcome = "reached target"
            break

    rows = [{"sim_time": t, "vehicle": vid, "lane": lane,
             "x": x, "v": v, "accel": accel}
            for t, vid, lane, x, v, accel in env.trace]
    out = Path(args.out) if args.out else run_dir / "replay.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, rows)
    print(f"policy {snap.policy_id} (weight {np.round(snap.weight, 4)}), "
          f"seed {args.seed}: {outcome} after {steps} steps, {distance:.1f} m")
    print(f"wrote {out} ({len(rows)} substep rows)")
    return 0


def cmd_selftest(_args) -> int:
    from .selftest import run_selftest
    failures = run_selftest()
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paretodrive",
        description="Multi-objective tactical-driving policies: training, "
                    "Pareto-front evaluation, analytic baseline, replay.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run generalized-policy-improvement "
                                     "training from an INI config")
    p.add_argument("config", help="INI run configuration")
    p.add_argument("--out", help="output root (overrides PARETODRIVE_OUTPUT "
                                 "and the config's [run] output)")
    p.add_argument("--resume", action="store_true",
                   help="continue from the run directory's checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Pareto-front sweep over a trained run")
    p.add_argument("run_dir", help="run directory produced by train")
    p.add_argument("--weights", type=int, default=500,
                   help="lattice size target (default 500)")
    p.add_argument("--episodes", type=int, default=5,
                   help="episodes per weight (default 5)")
    p.add_argument("--out", help="artifact directory (default: the run dir)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline", help="analytic constant-speed cost curve")
    p.add_argument("--out", help="artifact directory (default '.')")
    p.add_argument("--road-length", type=float, default=3000.0,
                   help="road length in metres (default 3000)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("replay", help="re-simulate one seeded episode and "
                                      "emit the substep trace CSV")
    p.add_argument("run_dir", help="run directory produced by train")
    p.add_argument("--seed", type=int, required=True, help="episode seed")
    p.add_argument("--weight", help="comma-separated preference weight "
                                    "(default: uniform)")
    p.add_argument("--out", help="trace CSV path (default: run dir/replay.csv)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckpointError as exc:
        print(f"checkpoint error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # keep tracebacks out of normal CLI failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
