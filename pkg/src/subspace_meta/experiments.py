"""Reusable experiment stages: simulate, train, adapt-and-score, grids.

The command-line runner and the verification suite drive the same
functions, so a preset reproduced from a manifest exercises exactly the
code paths that were validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConfigError
from .linear import (
    HyperParams,
    PosteriorDraws,
    SimConfig,
    TaskData,
    generate_tasks,
    gibbs_meta_train,
    meta_test_posterior,
    posterior_predictive,
    variance_proportion,
)
from .manifold import frechet_mean
from .metrics import coverage_radius, r_squared, sin2_theta_series
from .rng import RngStream

__all__ = [
    "SamplerSettings",
    "TestStageSettings",
    "simulate_stage",
    "train_stage",
    "test_stage",
    "run_cell",
]


@dataclass
class SamplerSettings:
    """Sweep schedule and kernel configuration for meta-training."""

    iterations: int = 2000
    burnin: int | None = None
    thin: int = 5
    kernel: str = "bingham"
    bingham_sweeps: int = 1
    a: float = 2.0
    b: float = 1.0
    kappa: float = 0.0
    phi_convention: str = "density"

    def __post_init__(self):
        if self.iterations < 2:
            raise ConfigError("iterations must be at least 2")
        burnin = self.iterations // 2 if self.burnin is None else self.burnin
        if not 0 <= burnin < self.iterations:
            raise ConfigError("need 0 <= burnin < iterations")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.kernel not in ("bingham", "cs", "cs-decomposition"):
            raise ConfigError(f"unknown kernel '{self.kernel}'")

    def hyper(self, z0_prior=None) -> HyperParams:
        return HyperParams(
            a=self.a, b=self.b, kappa=self.kappa, z0_prior=z0_prior,
            bingham_sweeps=self.bingham_sweeps,
            phi_convention=self.phi_convention,  # type: ignore[arg-type]
        )


@dataclass
class TestStageSettings:
    """Few-shot adaptation protocol for a held-out task."""

    n_star: int = 100
    n_train: int = 70
    n_val: int = 30
    replications: int = 100
    mode: Literal["mixture", "point"] = "mixture"
    sigma2_star: float | None = None
    level: float = 0.95
    draws_per_component: int = 1
    y_draws_per_beta: int = 2
    max_components: int = 200
    n_test_tasks: int = 1

    def __post_init__(self):
        if self.n_train < 1 or self.n_val < 1:
            raise ConfigError("train and validation splits must be nonempty")
        if self.n_train + self.n_val > self.n_star:
            raise ConfigError(
                f"split sizes {self.n_train}+{self.n_val} exceed n_star={self.n_star}"
            )
        if self.mode not in ("mixture", "point"):
            raise ConfigError("mode must be 'mixture' or 'point'")
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        if self.replications < 1 or self.n_test_tasks < 1:
            raise ConfigError("need at least one replication and one test task")


def simulate_stage(sim: SimConfig, stream: RngStream) -> tuple[list[TaskData], dict]:
    return generate_tasks(sim, rng=stream)


def train_stage(
    sim: SimConfig,
    sampler: SamplerSettings,
    tasks: list[TaskData],
    stream: RngStream,
    initial=None,
    start_iteration: int = 0,
    record_task_states: bool = False,
) -> PosteriorDraws:
    return gibbs_meta_train(
        tasks,
        k=sim.k,
        hyper=sampler.hyper(),
        iters=sampler.iterations,
        burnin=sampler.burnin,
        thin=sampler.thin,
        kernel=sampler.kernel,
        rng=stream,
        record_task_states=record_task_states,
        initial=initial,
        start_iteration=start_iteration,
    )


def _mixture_components(draws: PosteriorDraws, limit: int):
    states = draws.global_states
    if len(states) > limit:
        idx = np.linspace(0, len(states) - 1, limit).astype(int)
        states = [states[i] for i in idx]
    return states


def test_stage(
    settings: TestStageSettings,
    draws: PosteriorDraws,
    truth: dict,
    sigma2_0: float,
    stream: RngStream,
) -> tuple[list[dict], dict]:
    """Evaluate few-shot adaptation over replicated datasets of one new task.

    A single test-task coefficient vector is drawn from the generating
    distribution; every replication gets fresh covariates and noise,
    adapts on the labeled split, and scores the validation split.
    """
    z0 = truth["Z0"].matrix
    phi0 = truth["phi0"]
    p = z0.shape[0]
    sigma2_star = settings.sigma2_star if settings.sigma2_star is not None else sigma2_0

    if settings.mode == "point":
        p_hat = frechet_mean(draws.projections())
        phi_hat = float(draws.phi_values().mean())
        source = {"point": (p_hat, phi_hat)}
        draws_per_component = max(
            settings.draws_per_component, settings.max_components
        )
    else:
        source = {"draws": _mixture_components(draws, settings.max_components)}
        draws_per_component = settings.draws_per_component

    rows = []
    for t_idx in range(settings.n_test_tasks):
        task_stream = stream.child(t_idx)
        gen_beta = task_stream.child(0).generator()
        coef = math.sqrt(1.0 - phi0) * (z0 @ gen_beta.standard_normal(z0.shape[1]))
        coef = coef + math.sqrt(phi0) * gen_beta.standard_normal(p)

        for rep in range(settings.replications):
            gen_x = task_stream.child(1, rep).generator()
            gen_e = task_stream.child(2, rep).generator()
            X = gen_x.standard_normal((settings.n_star, p))
            y = X @ coef + math.sqrt(sigma2_star) * gen_e.standard_normal(settings.n_star)
            X_train, y_train = X[: settings.n_train], y[: settings.n_train]
            X_val = X[settings.n_train: settings.n_train + settings.n_val]
            y_val = y[settings.n_train: settings.n_train + settings.n_val]

            test_task = TaskData(
                y=y_train, X=X_train, sigma2=sigma2_star, task_id=f"t{t_idx}r{rep}"
            )
            beta_draws = meta_test_posterior(
                test_task,
                rng=task_stream.child(3, rep),
                sigma2=sigma2_star,
                draws_per_component=draws_per_component,
                **source,
            )
            pred = posterior_predictive(
                X_val, beta_draws, sigma2_star=sigma2_star,
                rng=task_stream.child(4, rep),
                y_draws_per_beta=settings.y_draws_per_beta,
            )
            radius = coverage_radius(pred.y_draws, pred.y_hat, settings.level)
            covered = float(np.linalg.norm(y_val - pred.y_hat) <= radius)
            rows.append(
                {
                    "test_task": t_idx,
                    "replication": rep,
                    "r_squared": r_squared(y_val, pred.y_hat),
                    "coverage_radius": radius,
                    "trace_sigma_y": pred.trace_sigma_y,
                    "covered": covered,
                }
            )
    summary = {
        "r_squared": float(np.mean([r["r_squared"] for r in rows])),
        "coverage_radius": float(np.mean([r["coverage_radius"] for r in rows])),
        "trace_sigma_y": float(np.mean([r["trace_sigma_y"] for r in rows])),
        "coverage_probability": float(np.mean([r["covered"] for r in rows])),
    }
    return rows, summary


@dataclass
class CellResult:
    """Everything one experiment cell produces."""

    sim: SimConfig
    sin2_theta1: list[float] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)

    @property
    def median_sin2(self) -> float:
        return float(np.median(self.sin2_theta1))


def run_cell(
    sim: SimConfig,
    sampler: SamplerSettings,
    test: TestStageSettings | None,
    master: RngStream,
) -> CellResult:
    """Simulate, train, and optionally adapt-and-score one scenario cell."""
    tasks, truth = simulate_stage(sim, master.child(0))
    draws = train_stage(sim, sampler, tasks, master.child(1))
    result = CellResult(sim=sim)
    result.sin2_theta1 = sin2_theta_series(draws, truth["P0"])
    if test is not None:
        rows, summary = test_stage(test, draws, truth, sim.sigma2_0, master.child(2))
        summary["variance_proportion"] = variance_proportion(sim.k, sim.p, sim.phi0)
        result.rows = rows
        result.summary = summary
    return result
