import json
from pathlib import Path

import numpy as np
import pytest

from subspace_meta import RngStream, SimConfig, generate_tasks, gibbs_meta_train
from subspace_meta.cli import main
from subspace_meta.config import PRESETS, load_config
from subspace_meta.errors import ConfigError
from subspace_meta.storage import (
    read_draws,
    read_task_csv,
    write_draws,
)

FAST_CONFIG = """
[experiment]
scenario = fast
seed = 21

[simulate]
tasks = 3
samples_per_task = 15
dim = 3
subspace_dim = 1
phi0 = 0.05
noise_variance = 0.01
noise_mode = known

[sampler]
iterations = 300
burnin = 150
thin = 5
kernel = bingham

[meta_test]
n_star = 16
n_train = 8
n_val = 8
replications = 8
sigma2_star = 0.01
draws_per_component = 2
y_draws_per_beta = 2
"""


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CONFIG)
    return str(path)


def run_pipeline(config, outdir):
    assert main(["simulate", "--config", config, "--out", str(outdir)]) == 0
    assert main(["train", "--config", config, "--out", str(outdir)]) == 0
    assert main(["test", "--config", config, "--out", str(outdir)]) == 0


def strip_wall_clock(manifest: dict) -> dict:
    out = json.loads(json.dumps(manifest))
    for stage in out.get("stages", {}).values():
        stage.pop("wall_clock_s", None)
    return out


class TestPipeline:
    def test_outputs_exist_with_schemas(self, fast_config, tmp_path):
        outdir = tmp_path / "run"
        run_pipeline(fast_config, outdir)
        assert (outdir / "tasks" / "task_0.csv").exists()
        assert (outdir / "draws" / "draws_z.csv").exists()
        assert (outdir / "draws" / "draws_phi.csv").exists()
        assert (outdir / "metrics.csv").exists()
        assert (outdir / "manifest.json").exists()
        first = (outdir / "draws" / "draws_z.csv").read_text().splitlines()[0]
        assert first.startswith("# subspace-meta draws_z v1")
        metrics_lines = (outdir / "metrics.csv").read_text().splitlines()
        assert metrics_lines[0].startswith("# subspace-meta metrics v1")
        assert metrics_lines[1].split(",")[:3] == ["test_task", "replication", "r_squared"]

    def test_task_files_round_trip(self, fast_config, tmp_path):
        outdir = tmp_path / "run"
        assert main(["simulate", "--config", fast_config, "--out", str(outdir)]) == 0
        cfg = load_config(fast_config)
        tasks, _ = generate_tasks(cfg.sim, rng=RngStream(cfg.seed, (0,)))
        y, X = read_task_csv(outdir / "tasks" / "task_1.csv")
        assert np.array_equal(y, tasks[1].y)
        assert np.array_equal(X, tasks[1].X)

    def test_byte_identical_rerun(self, fast_config, tmp_path):
        run_a = tmp_path / "a"
        run_b = tmp_path / "b"
        run_pipeline(fast_config, run_a)
        run_pipeline(fast_config, run_b)
        files_a = sorted(p.relative_to(run_a) for p in run_a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(run_b) for p in run_b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            if rel.name == "manifest.json":
                ma = strip_wall_clock(json.loads((run_a / rel).read_text()))
                mb = strip_wall_clock(json.loads((run_b / rel).read_text()))
                assert ma == mb
            else:
                assert (run_a / rel).read_bytes() == (run_b / rel).read_bytes(), rel

    def test_resume_matches_uninterrupted(self, tmp_path):
        base = FAST_CONFIG
        half = base.replace("iterations = 300", "iterations = 150").replace("burnin = 150", "burnin = 0")
        full = base.replace("iterations = 300", "iterations = 300").replace("burnin = 150", "burnin = 0")
        cfg_half = tmp_path / "half.cfg"
        cfg_half.write_text(half)
        cfg_full = tmp_path / "full.cfg"
        cfg_full.write_text(full)

        run_full = tmp_path / "full"
        assert main(["simulate", "--config", str(cfg_full), "--out", str(run_full)]) == 0
        assert main(["train", "--config", str(cfg_full), "--out", str(run_full)]) == 0

        run_res = tmp_path / "res"
        assert main(["simulate", "--config", str(cfg_half), "--out", str(run_res)]) == 0
        assert main(["train", "--config", str(cfg_half), "--out", str(run_res)]) == 0
        assert main(["train", "--config", str(cfg_half), "--out", str(run_res), "--resume"]) == 0

        full_draws = read_draws(run_full / "draws")
        res_draws = read_draws(run_res / "draws")
        # resumed second half equals the uninterrupted run's second half
        tail = full_draws.global_states[-res_draws.n_draws:]
        for g1, g2 in zip(tail, res_draws.global_states):
            assert np.array_equal(g1.basis.matrix, g2.basis.matrix)
            assert g1.phi == g2.phi

    def test_cs_kernel_flag(self, fast_config, tmp_path):
        outdir = tmp_path / "cs"
        assert main(["simulate", "--config", fast_config, "--out", str(outdir)]) == 0
        assert main(["train", "--config", fast_config, "--out", str(outdir),
                     "--kernel", "cs"]) == 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["stages"]["train"]["kernel"] == "cs"

    def test_point_estimate_trace_not_above_mixture(self, fast_config, tmp_path):
        outdir = tmp_path / "pt"
        run_pipeline(fast_config, outdir)
        mixture = json.loads((outdir / "metrics_summary.json").read_text())
        assert main(["test", "--config", fast_config, "--out", str(outdir),
                     "--point-estimate"]) == 0
        point = json.loads((outdir / "metrics_summary.json").read_text())
        assert point["trace_sigma_y"] <= mixture["trace_sigma_y"] * 1.05

    def test_seed_override_changes_outputs(self, fast_config, tmp_path):
        a = tmp_path / "s1"
        b = tmp_path / "s2"
        assert main(["simulate", "--config", fast_config, "--out", str(a)]) == 0
        assert main(["simulate", "--config", fast_config, "--out", str(b), "--seed", "99"]) == 0
        ya, _ = read_task_csv(a / "tasks" / "task_0.csv")
        yb, _ = read_task_csv(b / "tasks" / "task_0.csv")
        assert not np.array_equal(ya, yb)


class TestErrors:
    def test_missing_config_file_exit_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_malformed_config_exit_2(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[experiment]\nseed = 1\n")  # missing sections
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2

    def test_train_without_tasks_exit_2(self, fast_config, tmp_path):
        assert main(["train", "--config", fast_config, "--out", str(tmp_path / "empty")]) == 2

    def test_dimension_mismatch_exit_2(self, fast_config, tmp_path):
        outdir = tmp_path / "run"
        assert main(["simulate", "--config", fast_config, "--out", str(outdir)]) == 0
        other = FAST_CONFIG.replace("dim = 3", "dim = 4")
        cfg2 = tmp_path / "other.cfg"
        cfg2.write_text(other)
        assert main(["train", "--config", str(cfg2), "--out", str(outdir)]) == 2


class TestPresets:
    def test_full_scale_preset_values(self):
        cfg = load_config("table1-phi0.02")
        assert cfg.sim.S == 100
        assert cfg.sim.n_s == 50
        assert cfg.sim.p == 100
        assert cfg.sim.k == 10
        assert cfg.sim.phi0 == 0.02

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigError):
            load_config("definitely-not-a-preset")

    def test_all_presets_parse(self):
        for name in PRESETS:
            cfg = load_config(name)
            assert cfg.sha256()


class TestDrawsRoundTrip:
    def test_round_trip_equality(self, tmp_path):
        cfg = SimConfig(S=2, n_s=10, p=4, k=2, phi0=0.1, sigma2_0=0.1, seed=1,
                        noise_mode="infer")
        tasks, _ = generate_tasks(cfg)
        draws = gibbs_meta_train(tasks, k=2, iters=40, burnin=20, thin=2, rng=3)
        write_draws(tmp_path / "d", draws, include_tasks=True)
        back = read_draws(tmp_path / "d")
        assert back.n_draws == draws.n_draws
        for g1, g2 in zip(draws.global_states, back.global_states):
            assert np.array_equal(g1.basis.matrix, g2.basis.matrix)
            assert g1.phi == g2.phi
        for s1, s2 in zip(draws.task_states, back.task_states):
            for t1, t2 in zip(s1, s2):
                assert np.array_equal(t1.beta, t2.beta)
                assert t1.sigma2 == t2.sigma2


class TestVersionCommand:
    def test_version_prints(self, capsys):
        assert main(["version"]) == 0
        out = capsys.readouterr().out.strip()
        assert out.count(".") == 2
