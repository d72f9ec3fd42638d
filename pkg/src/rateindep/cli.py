"""Command-line front end: configure a model, run, certify, refine.

Subcommands
    run         solve the incremental problem and write the trajectory table
    verify      certify a run (fresh from --config, or saved via --run DIR)
    refine      hierarchical refinement study
    list-models registered models and their parameters

Exit codes: 0 all certificates pass / run complete; 1 certificate failure;
2 configuration error; 3 solver failure.

File formats (documented column order, full-precision shortest round-trip
floats):

* ``trajectory.csv``: header ``t, z0..z{p-1}, energy, step_dissipation,
  cumulative_dissipation``; one row per grid node.
* ``run.json``: effective configuration (model name and parameters, grid
  nodes, initial state, strategy, seed, tolerance) plus a summary with the
  solver guarantee level, the loading-rate and coercivity constants, and the
  normalization offset.  A saved run re-verifies to a bitwise identical
  certificate given the same seed and tolerances.
* ``certificate.json``: the full certification report.
* ``refinement.csv``: per-level fineness, dissipation, BV-bound values,
  energy-balance gap, and the pointwise gap to the next level.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import yaml

from .core import (GridNodeError, InadmissibleStateError, SingularSystemError,
                   TimeGrid)
from .models import MODEL_REGISTRY, build_model
from .solvers import (IncrementalSolution, SolverStepFailureError,
                      SolverStrategy, solve_incremental)
from .verify import StabilityCheck, certify, refinement_study

__all__ = ["main", "ConfigError"]


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


# --------------------------------------------------------------------------
# configuration

def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return cfg[key]


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(p, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


def _grid_from_config(cfg: dict) -> TimeGrid:
    grid_cfg = _require(cfg, "grid", "config")
    if "nodes" in grid_cfg:
        nodes = grid_cfg["nodes"]
        if not isinstance(nodes, list) or len(nodes) < 2:
            raise ConfigError("grid.nodes: grid requires >= 2 nodes")
        try:
            return TimeGrid(np.asarray(nodes, dtype=np.float64))
        except ValueError as exc:
            raise ConfigError(f"grid.nodes: {exc}") from exc
    T = float(_require(grid_cfg, "T", "grid"))
    n = int(_require(grid_cfg, "n_steps", "grid"))
    if n < 1:
        raise ConfigError("grid.n_steps: grid requires >= 2 nodes")
    if not T > 0:
        raise ConfigError("grid.T: horizon must be positive")
    return TimeGrid(np.linspace(0.0, T, n + 1))


def _strategy_from_config(cfg: dict, seed_override=None) -> SolverStrategy:
    s = dict(cfg.get("strategy", {}))
    s.setdefault("variant", "exact")
    if seed_override is not None:
        s["rng_seed"] = int(seed_override)
    try:
        return SolverStrategy(**s)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"strategy: {exc}") from exc


def build_run(cfg: dict, *, tol_override=None, seed_override=None):
    """Materialize (model, grid, z0, strategy, tolerance, seed) from a config."""
    model_cfg = _require(cfg, "model", "config")
    name = _require(model_cfg, "name", "model")
    params = dict(model_cfg.get("params", {}))
    grid = _grid_from_config(cfg)
    seed = int(cfg.get("seed", 0)) if seed_override is None else int(seed_override)
    try:
        model = build_model(name, params, horizon=grid.T)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"model: {exc}") from exc
    init = _require(cfg, "initial_state", "config")
    try:
        z0 = model.state(np.asarray(init, dtype=np.float64))
        model.validate_state(z0)
    except (ValueError, InadmissibleStateError) as exc:
        raise ConfigError(f"initial_state: {exc}") from exc
    strategy = _strategy_from_config(cfg, seed_override=seed)
    tolerance = float(cfg.get("tolerance", 1e-9)) if tol_override is None \
        else float(tol_override)
    return model, grid, z0, strategy, tolerance, seed


def effective_config(cfg, model, grid, z0, strategy, tolerance, seed) -> dict:
    return {
        "model": {"name": model.name,
                  "params": dict(cfg["model"].get("params", {}))},
        "grid_times": [float(t) for t in grid.times],
        "initial_state": [float(v) for v in z0.values],
        "strategy": asdict(strategy),
        "seed": seed,
        "tolerance": tolerance,
    }


# --------------------------------------------------------------------------
# table output

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory(path: Path, solution: IncrementalSolution) -> None:
    p = len(solution.states[0])
    header = (["t"] + [f"z{i}" for i in range(p)]
              + ["energy", "step_dissipation", "cumulative_dissipation"])
    cum = 0.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, t in enumerate(solution.grid.times):
            step_d = 0.0 if k == 0 else float(solution.per_step_dissipation[k - 1])
            cum += step_d
            row = ([_fmt(t)] + [_fmt(v) for v in solution.states[k].values]
                   + [_fmt(solution.per_step_energy[k]), _fmt(step_d), _fmt(cum)])
            writer.writerow(row)


def read_trajectory(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    p = sum(1 for h in header if h.startswith("z"))
    times = np.array([r[0] for r in rows])
    values = np.array([r[1:1 + p] for r in rows])
    return times, values


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


# --------------------------------------------------------------------------
# commands

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    model, grid, z0, strategy, tolerance, seed = build_run(
        cfg, tol_override=args.tol, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    solution = solve_incremental(model, grid, z0, strategy)
    write_trajectory(out / "trajectory.csv", solution)
    payload = {
        "effective": effective_config(cfg, model, grid, z0, strategy,
                                      tolerance, seed),
        "summary": {
            "model": model.describe(),
            "guarantee": solution.guarantee_level,
            "dissipation_total": float(np.sum(solution.per_step_dissipation)),
            "final_energy": float(solution.per_step_energy[-1]),
            "steps": [asdict(log) for log in solution.solver_log],
        },
    }
    _write_json(out / "run.json", payload)
    print(f"run complete: {grid.n_steps} steps, guarantee "
          f"{solution.guarantee_level}, outputs in {out}")
    return 0


def _solution_for_verify(args):
    """(model, solution, tolerance, seed, guarantee) from --config or --run."""
    if args.run is not None:
        run_dir = Path(args.run)
        run_file = run_dir / "run.json"
        if not run_file.exists():
            raise ConfigError(f"missing run: {run_file} not found")
        with open(run_file, "r", encoding="utf-8") as fh:
            saved = json.load(fh)
        eff = saved["effective"]
        grid = TimeGrid(np.asarray(eff["grid_times"], dtype=np.float64))
        model = build_model(eff["model"]["name"], eff["model"]["params"],
                            horizon=grid.T)
        times, values = read_trajectory(run_dir / "trajectory.csv")
        if len(times) != len(grid) or not np.array_equal(times, grid.times):
            raise ConfigError("trajectory.csv does not match the saved grid")
        states = [model.state(v) for v in values]
        solution = IncrementalSolution.from_states(model, grid, states)
        tolerance = float(eff["tolerance"]) if args.tol is None else float(args.tol)
        seed = int(eff["seed"]) if args.seed is None else int(args.seed)
        guarantee = saved["summary"]["guarantee"]
        return model, solution, tolerance, seed, guarantee
    if args.config is None:
        raise ConfigError("verify needs --config or --run")
    cfg = load_config(args.config)
    model, grid, z0, strategy, tolerance, seed = build_run(
        cfg, tol_override=args.tol, seed_override=args.seed)
    solution = solve_incremental(model, grid, z0, strategy)
    return model, solution, tolerance, seed, solution.guarantee_level


def cmd_verify(args) -> int:
    model, solution, tolerance, seed, guarantee = _solution_for_verify(args)
    check = StabilityCheck(rng_seed=seed, tolerance=tolerance)
    report = certify(model, solution, tolerance=tolerance,
                     stability_check=check)
    payload = report.to_dict()
    payload["solver_guarantee"] = guarantee
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "certificate.json", payload)

    print(f"model {model.name}: {len(report.stability)} nodes, "
          f"tolerance {tolerance}")
    for rec in report.stability:
        line = f"  node {rec.node_index:4d}  t={rec.time:<12g} {rec.status}"
        if rec.worst_violation is not None:
            line += f"  worst_violation={rec.worst_violation:.3e}"
        if rec.status == "failed":
            line += f"  witness_component={rec.component}"
            if rec.witness is not None:
                line += f"  witness={rec.witness}"
        print(line)
    worst_chain = max((max(r.lower_residual, r.upper_residual)
                       for r in report.energy_chain), default=0.0)
    print(f"  worst step-chain residual:  {worst_chain:.3e}")
    print(f"  worst two-sided residual:   "
          f"{max(report.two_sided_worst.lower_residual, report.two_sided_worst.upper_residual):.3e}")
    print(f"  dissipation total:          {report.dissipation_total:.6g}")
    print(f"  energy/dissipation bound:   "
          f"{'holds' if report.energy_bound.holds else 'VIOLATED'} "
          f"(slack {report.energy_bound.min_slack:.3e})")
    print(f"  norm bound:                 "
          f"{'holds' if report.norm_bound.holds else 'VIOLATED'} "
          f"(slack {report.norm_bound.min_slack:.3e})")
    print(f"certificate: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def cmd_refine(args) -> int:
    if args.levels < 2:
        raise ConfigError("--levels: refinement needs >= 2 levels")
    cfg = load_config(args.config)
    model, grid, z0, strategy, tolerance, seed = build_run(
        cfg, tol_override=args.tol, seed_override=args.seed)
    study = refinement_study(model, grid, z0, strategy, args.levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "refinement.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "n_steps", "fineness", "dissipation",
                         "bv_lower", "bv_budget", "bv_slack", "bv_holds",
                         "energy_gap", "max_pointwise_gap_to_next"])
        for rec in study.levels:
            gap_next = ""
            if rec.level < len(study.pointwise_gaps):
                gap_next = _fmt(float(np.max(study.pointwise_gaps[rec.level])))
            writer.writerow([rec.level, rec.n_steps, _fmt(rec.fineness),
                             _fmt(rec.dissipation), _fmt(rec.bv_lower),
                             _fmt(rec.bv_budget),
                             _fmt(rec.bv_budget - rec.dissipation),
                             int(rec.bv_holds), _fmt(rec.energy_gap), gap_next])
    for rec in study.levels:
        print(f"level {rec.level}: N={rec.n_steps:<6d} fineness={rec.fineness:<12g} "
              f"Diss={rec.dissipation:<12.6g} bv={'ok' if rec.bv_holds else 'VIOLATED'} "
              f"gap={rec.energy_gap:.3e}")
    if study.failed_level is not None:
        print(f"solver failed at level {study.failed_level}; partial results "
              f"written", file=sys.stderr)
        return 3
    gaps = [rec.energy_gap for rec in study.levels]
    if len(gaps) >= 2 and gaps[0] > 0:
        shrink = gaps[-1] / gaps[0]
        trend = "shrinking" if all(b <= a for a, b in zip(gaps, gaps[1:])) \
            else "not monotone"
        print(f"convergence: energy-balance gap {trend}, "
              f"total reduction factor {shrink:.3e} over {len(gaps)} levels")
    else:
        print("convergence: energy-balance gap already zero at the base level")
    print(f"refinement table written to {out / 'refinement.csv'}")
    return 0


def cmd_list_models(_args) -> int:
    for name in sorted(MODEL_REGISTRY):
        cls = MODEL_REGISTRY[name]
        doc = (cls.__doc__ or "").strip().splitlines()[0]
        print(f"{name}: {doc}")
        for param, desc in cls.PARAM_DOCS.items():
            print(f"    {param}: {desc}")
    return 0


# --------------------------------------------------------------------------

def _add_common(sub, config_required=True):
    sub.add_argument("--config", required=config_required,
                     help="YAML run configuration")
    sub.add_argument("--out", default="rateindep_out", help="output directory")
    sub.add_argument("--tol", type=float, default=None,
                     help="override the certificate tolerance")
    sub.add_argument("--seed", type=int, default=None, help="override the seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rateindep",
        description="Solve and certify rate-independent evolutions")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="solve and write the trajectory")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_verify = subs.add_parser("verify", help="certify a run")
    _add_common(p_verify, config_required=False)
    p_verify.add_argument("--run", default=None,
                          help="directory of a saved run (run.json + trajectory.csv)")
    p_verify.set_defaults(func=cmd_verify)

    p_refine = subs.add_parser("refine", help="hierarchical refinement study")
    _add_common(p_refine)
    p_refine.add_argument("--levels", type=int, default=4,
                          help="number of refinement levels (>= 2)")
    p_refine.set_defaults(func=cmd_refine)

    p_list = subs.add_parser("list-models", help="registered models")
    p_list.set_defaults(func=cmd_list_models)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (SolverStepFailureError, SingularSystemError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (InadmissibleStateError, GridNodeError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
