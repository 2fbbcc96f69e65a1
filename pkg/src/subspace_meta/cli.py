"""Command-line experiment runner.

Subcommands: simulate, train, test, reproduce, version.  A run directory
holds everything one experiment produces: simulated tasks, posterior
draws, adaptation metrics, and a manifest (config hash, seeds, stage
stream paths, wall clock) sufficient to reproduce every output byte.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (the
failing sweep index goes to stderr).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, ExperimentConfig, load_config
from .errors import ConfigError, NumericFailureError
from .experiments import (
    SamplerSettings,
    TestStageSettings,
    run_cell,
    simulate_stage,
    test_stage,
    train_stage,
)
from .linear import SimConfig, TaskData
from .rng import RngStream
from .storage import (
    read_chain_state,
    read_draws,
    read_json,
    read_matrix_csv,
    read_task_csv,
    write_chain_state,
    write_draws,
    write_json,
    write_matrix_csv,
    write_metrics_csv,
    write_task_csv,
)

STAGE_PATHS = {"simulate": 0, "train": 1, "test": 2}


def _update_manifest(outdir: Path, cfg: ExperimentConfig | None, stage: str, info: dict) -> None:
    path = outdir / "manifest.json"
    manifest = read_json(path) if path.exists() else {"stages": {}}
    manifest["version"] = __version__
    if cfg is not None:
        manifest["scenario"] = cfg.scenario
        manifest["master_seed"] = cfg.seed
        manifest["config_sha256"] = cfg.sha256()
        manifest["config_text"] = cfg.canonical_text()
    manifest["stages"][stage] = info
    write_json(path, manifest)


def _stage_stream(cfg: ExperimentConfig, stage: str) -> RngStream:
    return RngStream(cfg.seed, (STAGE_PATHS[stage],))


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    outdir = Path(args.out)
    t0 = time.perf_counter()
    tasks, truth = simulate_stage(cfg.sim, _stage_stream(cfg, "simulate"))
    taskdir = outdir / "tasks"
    for task in tasks:
        write_task_csv(taskdir / f"task_{task.task_id}.csv", task.y, task.X)
    write_matrix_csv(outdir / "truth_z0.csv", "truth_z0", truth["Z0"].matrix,
                     p=cfg.sim.p, k=cfg.sim.k)
    write_matrix_csv(outdir / "truth_beta0.csv", "truth_beta0", truth["beta0"],
                     S=cfg.sim.S, p=cfg.sim.p)
    write_json(outdir / "truth.json", {
        "phi0": truth["phi0"],
        "sigma2_0": truth["sigma2_0"],
        "p": cfg.sim.p, "k": cfg.sim.k, "S": cfg.sim.S, "n_s": cfg.sim.n_s,
        "noise_mode": cfg.sim.noise_mode,
    })
    _update_manifest(outdir, cfg, "simulate", {
        "stream_path": [STAGE_PATHS["simulate"]],
        "n_tasks": len(tasks),
        "wall_clock_s": time.perf_counter() - t0,
    })
    print(f"simulate: wrote {len(tasks)} tasks to {taskdir}")
    return 0


def _load_tasks(outdir: Path, sim: SimConfig) -> list[TaskData]:
    taskdir = outdir / "tasks"
    files = sorted(taskdir.glob("task_*.csv"), key=lambda f: f.stem)
    if not files:
        raise ConfigError(f"no task files under {taskdir}; run simulate first")
    truth = read_json(outdir / "truth.json")
    sigma2 = "infer" if truth["noise_mode"] == "infer" else truth["sigma2_0"]
    tasks = []
    for f in files:
        y, X = read_task_csv(f)
        if X.shape[1] != sim.p:
            raise ConfigError(
                f"{f.name} has p={X.shape[1]} but the config says p={sim.p}"
            )
        tasks.append(TaskData(y=y, X=X, sigma2=sigma2, task_id=f.stem.replace("task_", "")))
    return tasks


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.seed)
    if args.kernel:
        cfg.sampler.kernel = args.kernel
    outdir = Path(args.out)
    tasks = _load_tasks(outdir, cfg.sim)
    t0 = time.perf_counter()
    stream = _stage_stream(cfg, "train")
    initial = None
    start = 0
    if args.resume:
        state_path = outdir / "chain_state.json"
        if not state_path.exists():
            raise ConfigError("cannot resume: no chain_state.json in the run directory")
        initial, start, kernel, seed = read_chain_state(state_path)
        if kernel != cfg.sampler.kernel or seed != cfg.seed:
            raise ConfigError("resume state does not match the config kernel/seed")
    draws = train_stage(cfg.sim, cfg.sampler, tasks, stream,
                        initial=initial, start_iteration=start,
                        record_task_states=args.save_task_states)
    write_draws(outdir / "draws", draws, include_tasks=args.save_task_states)
    write_chain_state(outdir / "chain_state.json", draws.final_state,
                      completed=draws.total_iterations, kernel=cfg.sampler.kernel,
                      seed=cfg.seed)
    _update_manifest(outdir, cfg, "train", {
        "stream_path": [STAGE_PATHS["train"]],
        "kernel": cfg.sampler.kernel,
        "iterations": draws.total_iterations,
        "n_draws": draws.n_draws,
        "resumed_from": start,
        "wall_clock_s": time.perf_counter() - t0,
    })
    print(f"train: kept {draws.n_draws} draws ({cfg.sampler.kernel} kernel)")
    return 0


def cmd_test(args) -> int:
    cfg = load_config(args.config, args.seed)
    if args.point_estimate:
        cfg.meta_test.mode = "point"
    outdir = Path(args.out)
    drawdir = outdir / "draws"
    if not drawdir.exists():
        raise ConfigError(f"no draws under {drawdir}; run train first")
    draws = read_draws(drawdir)
    truth_meta = read_json(outdir / "truth.json")
    z0, _ = read_matrix_csv(outdir / "truth_z0.csv", "truth_z0")
    from .manifold import StiefelPoint

    truth = {"Z0": StiefelPoint(z0), "phi0": truth_meta["phi0"]}
    t0 = time.perf_counter()
    rows, summary = test_stage(
        cfg.meta_test, draws, truth, truth_meta["sigma2_0"], _stage_stream(cfg, "test")
    )
    write_metrics_csv(
        outdir / "metrics.csv", rows,
        ["test_task", "replication", "r_squared", "coverage_radius", "trace_sigma_y", "covered"],
        scenario=cfg.scenario, mode=cfg.meta_test.mode, level=cfg.meta_test.level,
    )
    write_json(outdir / "metrics_summary.json", summary)
    _update_manifest(outdir, cfg, "test", {
        "stream_path": [STAGE_PATHS["test"]],
        "mode": cfg.meta_test.mode,
        "replications": cfg.meta_test.replications,
        "wall_clock_s": time.perf_counter() - t0,
    })
    print(
        "test: R^2 {r_squared:.4f}  coverage {coverage_probability:.3f}  "
        "trace {trace_sigma_y:.4f}".format(**summary)
    )
    return 0


# ---------------------------------------------------------------------------
# Bundled reproduction grids

FIXED_TRACE = 11.8


def fig1_grid(scale: str):
    """Subspace-recovery trend cells: vary task count and per-task samples."""
    if scale == "desk":
        return dict(p=40, k=5, phi0=0.02, sigma2=0.01, S_list=[20, 80],
                    n_list=[25, 50], iters=2000, seeds=[0, 1, 2])
    return dict(p=100, k=10, phi0=0.02, sigma2=0.01, S_list=[100, 500, 2000],
                n_list=[50, 100], iters=2000, seeds=[0, 1, 2])


def table1_grid(scale: str):
    """Diversity sweep cells: vary the generating phi0, score adaptation."""
    if scale == "desk":
        return dict(p=40, k=5, S=100, n_s=50, sigma2=0.1,
                    phi_list=[0.2, 0.05, 0.01], iters=2000,
                    test=TestStageSettings(n_star=40, n_train=25, n_val=15,
                                           replications=30, sigma2_star=0.1,
                                           n_test_tasks=3))
    return dict(p=100, k=10, S=100, n_s=50, sigma2=0.1,
                phi_list=[0.20, 0.15, 0.10, 0.05, 0.02, 0.01], iters=2000,
                test=TestStageSettings(n_star=100, n_train=70, n_val=30,
                                       replications=100, sigma2_star=0.1))


def trace_fixed_grid(scale: str):
    """Cells with the total coefficient variance held at a fixed trace."""
    if scale == "desk":
        p, S, n_s = 40, 100, 50
        test = TestStageSettings(n_star=40, n_train=25, n_val=15,
                                 replications=30, sigma2_star=0.1,
                                 n_test_tasks=3)
    else:
        p, S, n_s = 100, 100, 50
        test = TestStageSettings(n_star=100, n_train=70, n_val=30,
                                 replications=100, sigma2_star=0.1)
    cells = []
    for k in (2, 5, 10):
        phi0 = (FIXED_TRACE - k) / (p - k)
        cells.append(dict(k=k, phi0=phi0, ratio=k / FIXED_TRACE))
    return dict(p=p, S=S, n_s=n_s, sigma2=0.1, cells=cells, iters=2000, test=test)


def _truncate3(x: float) -> str:
    return f"{math.floor(x * 1000) / 1000:.3f}"


def cmd_reproduce(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else 0
    scale = args.scale
    t0 = time.perf_counter()
    manifest = {
        "version": __version__, "scenario": args.scenario, "scale": scale,
        "master_seed": seed, "stages": {},
    }

    if args.scenario == "fig1":
        grid = fig1_grid(scale)
        rows, samples = [], []
        for S in grid["S_list"]:
            for n_s in grid["n_list"]:
                medians = []
                for rep in grid["seeds"]:
                    sim = SimConfig(S=S, n_s=n_s, p=grid["p"], k=grid["k"],
                                    phi0=grid["phi0"], sigma2_0=grid["sigma2"],
                                    seed=seed)
                    sampler = SamplerSettings(iterations=grid["iters"])
                    cell = run_cell(sim, sampler, None,
                                    RngStream(seed, (4, S, n_s, rep)))
                    medians.append(cell.median_sin2)
                    for i, v in enumerate(cell.sin2_theta1):
                        samples.append({"S": S, "n_s": n_s, "seed": rep,
                                        "draw": i, "sin2_theta1": v})
                rows.append({"S": S, "n_s": n_s,
                             "median_sin2_theta1": float(np.median(medians))})
                print(f"fig1 cell S={S} n_s={n_s}: median sin^2 = {rows[-1]['median_sin2_theta1']:.5f}")
        write_metrics_csv(outdir / "sin2_samples.csv", samples,
                          ["S", "n_s", "seed", "draw", "sin2_theta1"], scenario="fig1")
        write_metrics_csv(outdir / "summary.csv", rows,
                          ["S", "n_s", "median_sin2_theta1"], scenario="fig1")
        manifest["cells"] = rows

    elif args.scenario == "table1":
        grid = table1_grid(scale)
        rows = []
        for phi0 in grid["phi_list"]:
            sim = SimConfig(S=grid["S"], n_s=grid["n_s"], p=grid["p"], k=grid["k"],
                            phi0=phi0, sigma2_0=grid["sigma2"], seed=seed)
            sampler = SamplerSettings(iterations=grid["iters"])
            cell = run_cell(sim, sampler, grid["test"], RngStream(seed, (5,)))
            rows.append({
                "phi0": phi0,
                "coverage": cell.summary["coverage_probability"],
                "r_squared": cell.summary["r_squared"],
                "trace_sigma_y": cell.summary["trace_sigma_y"],
                "median_sin2_theta1": cell.median_sin2,
            })
            print(
                f"table1 cell phi0={phi0}: R^2={rows[-1]['r_squared']:.4f} "
                f"coverage={rows[-1]['coverage']:.3f} trace={rows[-1]['trace_sigma_y']:.3f}"
            )
        write_metrics_csv(outdir / "metrics.csv", rows,
                          ["phi0", "coverage", "r_squared", "trace_sigma_y",
                           "median_sin2_theta1"], scenario="table1")
        manifest["cells"] = rows

    elif args.scenario == "trace-fixed":
        grid = trace_fixed_grid(scale)
        rows = []
        ratio_strings = []
        for cell_spec in grid["cells"]:
            sim = SimConfig(S=grid["S"], n_s=grid["n_s"], p=grid["p"], k=cell_spec["k"],
                            phi0=cell_spec["phi0"], sigma2_0=grid["sigma2"], seed=seed)
            sampler = SamplerSettings(iterations=grid["iters"])
            cell = run_cell(sim, sampler, grid["test"], RngStream(seed, (6,)))
            ratio_strings.append(_truncate3(cell_spec["ratio"]))
            rows.append({
                "k": cell_spec["k"],
                "phi0": cell_spec["phi0"],
                "variance_ratio": cell_spec["ratio"],
                "median_sin2_theta1": cell.median_sin2,
                "r_squared": cell.summary["r_squared"],
                "trace_sigma_y": cell.summary["trace_sigma_y"],
            })
            print(
                f"trace-fixed cell k={cell_spec['k']}: ratio={ratio_strings[-1]} "
                f"median sin^2={rows[-1]['median_sin2_theta1']:.4f} "
                f"R^2={rows[-1]['r_squared']:.4f}"
            )
        write_metrics_csv(outdir / "metrics.csv", rows,
                          ["k", "phi0", "variance_ratio", "median_sin2_theta1",
                           "r_squared", "trace_sigma_y"], scenario="trace-fixed")
        manifest["variance_ratios"] = ratio_strings
        manifest["cells"] = rows
        print("variance ratios: " + ", ".join(ratio_strings))

    else:
        raise ConfigError(f"unknown scenario '{args.scenario}'")

    manifest["stages"]["reproduce"] = {"wall_clock_s": time.perf_counter() - t0}
    write_json(outdir / "manifest.json", manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-meta",
        description="shared-subspace multi-task learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help=f"config file path or preset ({', '.join(sorted(PRESETS))})")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--out", required=True, help="run directory")

    p_sim = sub.add_parser("simulate", parents=[common], help="write task and truth files")
    p_sim.set_defaults(func=cmd_simulate)

    p_train = sub.add_parser("train", parents=[common], help="run the training sweep")
    p_train.add_argument("--kernel", choices=["bingham", "cs"], default=None)
    p_train.add_argument("--resume", action="store_true",
                         help="continue the persisted chain deterministically")
    p_train.add_argument("--save-task-states", action="store_true",
                         help="also persist per-task coefficient draws")
    p_train.set_defaults(func=cmd_train)

    p_test = sub.add_parser("test", parents=[common], help="adapt to a new task and score")
    p_test.add_argument("--point-estimate", action="store_true",
                        help="condition on the posterior point estimate instead of the mixture")
    p_test.set_defaults(func=cmd_test)

    p_rep = sub.add_parser("reproduce", help="run a bundled experiment grid")
    p_rep.add_argument("scenario", choices=["fig1", "table1", "trace-fixed"],
                       help="fig1: recovery trend grid; table1: diversity sweep; "
                            "trace-fixed: fixed total-variance comparison")
    p_rep.add_argument("--scale", choices=["desk", "full"], default="desk")
    p_rep.add_argument("--seed", type=int, default=None)
    p_rep.add_argument("--out", required=True)
    p_rep.set_defaults(func=cmd_reproduce)

    p_ver = sub.add_parser("version", help="print the package version")
    p_ver.set_defaults(func=lambda args: print(__version__) or 0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericFailureError as exc:
        print(f"numeric failure at sweep {exc.iteration}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
