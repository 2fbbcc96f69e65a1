"""Experiment configuration: plain key=value sections, presets, hashing.

The format is INI-style so configs stay diffable and parse with the
standard library.  A config resolves to the simulate / sampler / adapt
settings consumed by the pipeline stages; its canonical text is hashed
into the run manifest.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .experiments import SamplerSettings, TestStageSettings
from .linear import SimConfig

__all__ = ["ExperimentConfig", "PRESETS", "load_config"]


@dataclass
class ExperimentConfig:
    scenario: str
    seed: int
    sim: SimConfig
    sampler: SamplerSettings = field(default_factory=SamplerSettings)
    meta_test: TestStageSettings = field(default_factory=TestStageSettings)

    def canonical_text(self) -> str:
        """Deterministic key=value rendering used for hashing and manifests."""
        out = io.StringIO()
        out.write("[experiment]\n")
        out.write(f"scenario = {self.scenario}\nseed = {self.seed}\n\n")
        out.write("[simulate]\n")
        out.write(f"tasks = {self.sim.S}\n")
        out.write(f"samples_per_task = {self.sim.n_s}\n")
        out.write(f"dim = {self.sim.p}\n")
        out.write(f"subspace_dim = {self.sim.k}\n")
        out.write(f"phi0 = {self.sim.phi0!r}\n")
        out.write(f"noise_variance = {self.sim.sigma2_0!r}\n")
        out.write(f"noise_mode = {self.sim.noise_mode}\n\n")
        out.write("[sampler]\n")
        out.write(f"iterations = {self.sampler.iterations}\n")
        burnin = self.sampler.burnin if self.sampler.burnin is not None else self.sampler.iterations // 2
        out.write(f"burnin = {burnin}\n")
        out.write(f"thin = {self.sampler.thin}\n")
        out.write(f"kernel = {self.sampler.kernel}\n")
        out.write(f"bingham_sweeps = {self.sampler.bingham_sweeps}\n")
        out.write(f"a = {self.sampler.a!r}\n")
        out.write(f"b = {self.sampler.b!r}\n")
        out.write(f"kappa = {self.sampler.kappa!r}\n")
        out.write(f"phi_convention = {self.sampler.phi_convention}\n\n")
        out.write("[meta_test]\n")
        out.write(f"n_star = {self.meta_test.n_star}\n")
        out.write(f"n_train = {self.meta_test.n_train}\n")
        out.write(f"n_val = {self.meta_test.n_val}\n")
        out.write(f"replications = {self.meta_test.replications}\n")
        out.write(f"mode = {self.meta_test.mode}\n")
        sigma2_star = self.meta_test.sigma2_star
        out.write(f"sigma2_star = {sigma2_star if sigma2_star is None else repr(sigma2_star)}\n")
        out.write(f"level = {self.meta_test.level!r}\n")
        out.write(f"draws_per_component = {self.meta_test.draws_per_component}\n")
        out.write(f"y_draws_per_beta = {self.meta_test.y_draws_per_beta}\n")
        out.write(f"max_components = {self.meta_test.max_components}\n")
        out.write(f"n_test_tasks = {self.meta_test.n_test_tasks}\n")
        return out.getvalue()

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def _get(section, key, cast, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing key '{key}' in section [{section.name}]")
        return default
    raw = section[key]
    if raw == "None":
        return None
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}': {raw!r}") from exc


def parse_config_text(text: str, seed_override: int | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for name in ("experiment", "simulate", "sampler", "meta_test"):
        if name not in parser:
            raise ConfigError(f"missing section [{name}]")
    exp = parser["experiment"]
    simsec = parser["simulate"]
    samp = parser["sampler"]
    test = parser["meta_test"]
    try:
        sim = SimConfig(
            S=_get(simsec, "tasks", int, required=True),
            n_s=_get(simsec, "samples_per_task", int, required=True),
            p=_get(simsec, "dim", int, required=True),
            k=_get(simsec, "subspace_dim", int, required=True),
            phi0=_get(simsec, "phi0", float, required=True),
            sigma2_0=_get(simsec, "noise_variance", float, required=True),
            seed=0,
            noise_mode=_get(simsec, "noise_mode", str, default="known"),
        )
        sampler = SamplerSettings(
            iterations=_get(samp, "iterations", int, default=2000),
            burnin=_get(samp, "burnin", int),
            thin=_get(samp, "thin", int, default=5),
            kernel=_get(samp, "kernel", str, default="bingham"),
            bingham_sweeps=_get(samp, "bingham_sweeps", int, default=1),
            a=_get(samp, "a", float, default=2.0),
            b=_get(samp, "b", float, default=1.0),
            kappa=_get(samp, "kappa", float, default=0.0),
            phi_convention=_get(samp, "phi_convention", str, default="density"),
        )
        meta_test = TestStageSettings(
            n_star=_get(test, "n_star", int, required=True),
            n_train=_get(test, "n_train", int, required=True),
            n_val=_get(test, "n_val", int, required=True),
            replications=_get(test, "replications", int, default=100),
            mode=_get(test, "mode", str, default="mixture"),
            sigma2_star=_get(test, "sigma2_star", float),
            level=_get(test, "level", float, default=0.95),
            draws_per_component=_get(test, "draws_per_component", int, default=1),
            y_draws_per_beta=_get(test, "y_draws_per_beta", int, default=2),
            max_components=_get(test, "max_components", int, default=200),
            n_test_tasks=_get(test, "n_test_tasks", int, default=1),
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    seed = seed_override if seed_override is not None else _get(exp, "seed", int, default=0)
    sim.seed = seed
    return ExperimentConfig(
        scenario=_get(exp, "scenario", str, default="custom"),
        seed=seed,
        sim=sim,
        sampler=sampler,
        meta_test=meta_test,
    )


def _preset(scenario, seed, sim, sampler=None, meta_test=None) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=scenario,
        seed=seed,
        sim=sim,
        sampler=sampler or SamplerSettings(),
        meta_test=meta_test or TestStageSettings(),
    )


def _build_presets() -> dict[str, ExperimentConfig]:
    presets: dict[str, ExperimentConfig] = {}
    presets["smoke"] = _preset(
        "smoke",
        seed=5,
        sim=SimConfig(S=3, n_s=20, p=3, k=1, phi0=0.05, sigma2_0=0.01, seed=5),
        sampler=SamplerSettings(iterations=2000, thin=5),
        meta_test=TestStageSettings(
            n_star=20, n_train=10, n_val=10, replications=20, sigma2_star=0.01,
        ),
    )
    presets["desk"] = _preset(
        "desk",
        seed=0,
        sim=SimConfig(S=50, n_s=50, p=40, k=5, phi0=0.05, sigma2_0=0.1, seed=0),
        sampler=SamplerSettings(iterations=2000, thin=5),
        meta_test=TestStageSettings(
            n_star=40, n_train=25, n_val=15, replications=40, sigma2_star=0.1,
        ),
    )
    # full-scale diversity sweep (one preset per generating phi0)
    for phi0 in (0.20, 0.15, 0.10, 0.05, 0.02, 0.01):
        presets[f"table1-phi{phi0:.2f}"] = _preset(
            f"table1-phi{phi0:.2f}",
            seed=0,
            sim=SimConfig(S=100, n_s=50, p=100, k=10, phi0=phi0, sigma2_0=0.1, seed=0),
            sampler=SamplerSettings(iterations=2000, thin=5),
            meta_test=TestStageSettings(
                n_star=100, n_train=70, n_val=30, replications=100, sigma2_star=0.1,
            ),
        )
    return presets


PRESETS = _build_presets()


def load_config(spec: str, seed_override: int | None = None) -> ExperimentConfig:
    """Load a config from a preset name or a key=value file path."""
    if spec in PRESETS:
        cfg = PRESETS[spec]
        return parse_config_text(cfg.canonical_text(), seed_override)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(
            f"config '{spec}' is neither a preset ({', '.join(sorted(PRESETS))}) "
            "nor an existing file"
        )
    return parse_config_text(path.read_text(), seed_override)
