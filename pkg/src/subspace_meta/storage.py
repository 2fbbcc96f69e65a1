"""Canonical on-disk formats: CSV for matrices and samples, JSON for records.

Every float is written with repr-exact precision so files round-trip
bit-for-bit and reruns can be compared byte-for-byte.  Each CSV starts
with one schema comment line carrying a format version and the shape
metadata needed to read it back.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .linear import GlobalState, PosteriorDraws, TaskState
from .manifold import StiefelPoint

SCHEMA_VERSION = 1

__all__ = [
    "write_json",
    "read_json",
    "write_task_csv",
    "read_task_csv",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_vector_csv",
    "read_vector_csv",
    "write_draws",
    "read_draws",
    "write_chain_state",
    "read_chain_state",
    "write_metrics_csv",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def _row(vals) -> str:
    return ",".join(_fmt(v) for v in vals)


def _header(kind: str, **meta) -> str:
    parts = " ".join(f"{k}={v}" for k, v in meta.items())
    return f"# subspace-meta {kind} v{SCHEMA_VERSION} {parts}".rstrip()


def _parse_header(line: str, kind: str) -> dict:
    if not line.startswith(f"# subspace-meta {kind} v"):
        raise ConfigError(f"not a subspace-meta {kind} file: {line[:60]!r}")
    meta = {}
    for token in line.split()[3:]:
        if "=" in token:
            key, val = token.split("=", 1)
            meta[key] = val
    return meta


def write_json(path: Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path: Path):
    return json.loads(Path(path).read_text())


def write_task_csv(path: Path, y: np.ndarray, X: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, p = X.shape
    lines = [_header("task", n=n, p=p, columns="y,x1..xp")]
    for i in range(n):
        lines.append(_fmt(y[i]) + "," + _row(X[i]))
    path.write_text("\n".join(lines) + "\n")


def read_task_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    lines = Path(path).read_text().strip().split("\n")
    meta = _parse_header(lines[0], "task")
    n, p = int(meta["n"]), int(meta["p"])
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if data.shape != (n, p + 1):
        raise ConfigError(f"task file shape {data.shape} does not match header ({n}, {p + 1})")
    return data[:, 0].copy(), data[:, 1:].copy()


def write_matrix_csv(path: Path, kind: str, arr: np.ndarray, **meta) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    lines = [_header(kind, rows=arr.shape[0], cols=arr.shape[1], **meta)]
    lines.extend(_row(r) for r in arr)
    path.write_text("\n".join(lines) + "\n")


def read_matrix_csv(path: Path, kind: str) -> tuple[np.ndarray, dict]:
    lines = Path(path).read_text().strip().split("\n")
    meta = _parse_header(lines[0], kind)
    arr = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    expected = (int(meta["rows"]), int(meta["cols"]))
    if arr.shape != expected:
        raise ConfigError(f"{kind} file shape {arr.shape} does not match header {expected}")
    return arr, meta


def write_vector_csv(path: Path, kind: str, vec: np.ndarray, **meta) -> None:
    write_matrix_csv(path, kind, np.asarray(vec, dtype=np.float64)[:, None], **meta)


def read_vector_csv(path: Path, kind: str) -> tuple[np.ndarray, dict]:
    arr, meta = read_matrix_csv(path, kind)
    return arr[:, 0].copy(), meta


def write_draws(outdir: Path, draws: PosteriorDraws, include_tasks: bool = False) -> None:
    """Persist thinned draws: the basis blocks, the diversity values, and
    optionally the per-task states."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if draws.n_draws == 0:
        raise ConfigError("no draws to persist")
    p = draws.global_states[0].p
    k = draws.global_states[0].k
    stacked = np.vstack([g.basis.matrix for g in draws.global_states])
    write_matrix_csv(
        outdir / "draws_z.csv", "draws_z", stacked,
        p=p, k=k, n_draws=draws.n_draws, burnin=draws.burnin, thin=draws.thin,
    )
    write_vector_csv(
        outdir / "draws_phi.csv", "draws_phi", draws.phi_values(),
        n_draws=draws.n_draws, burnin=draws.burnin, thin=draws.thin,
    )
    if include_tasks and draws.task_states is not None:
        betas = np.vstack([
            np.array([ts.beta for ts in states]) for states in draws.task_states
        ])
        n_tasks = len(draws.task_states[0])
        write_matrix_csv(
            outdir / "draws_beta.csv", "draws_beta", betas,
            p=p, n_tasks=n_tasks, n_draws=draws.n_draws,
        )
        sig = np.array([
            [ts.sigma2 if ts.sigma2 is not None else np.nan for ts in states]
            for states in draws.task_states
        ])
        write_matrix_csv(
            outdir / "draws_sigma2.csv", "draws_sigma2", sig,
            n_tasks=n_tasks, n_draws=draws.n_draws,
        )


def read_draws(outdir: Path) -> PosteriorDraws:
    outdir = Path(outdir)
    zs, zmeta = read_matrix_csv(outdir / "draws_z.csv", "draws_z")
    phis, _ = read_vector_csv(outdir / "draws_phi.csv", "draws_phi")
    p, k = int(zmeta["p"]), int(zmeta["k"])
    n_draws = int(zmeta["n_draws"])
    burnin, thin = int(zmeta["burnin"]), int(zmeta["thin"])
    globals_ = [
        GlobalState(basis=StiefelPoint(zs[i * p:(i + 1) * p]), phi=float(phis[i]))
        for i in range(n_draws)
    ]
    task_states = None
    beta_path = outdir / "draws_beta.csv"
    if beta_path.exists():
        betas, bmeta = read_matrix_csv(beta_path, "draws_beta")
        sig, _ = read_matrix_csv(outdir / "draws_sigma2.csv", "draws_sigma2")
        n_tasks = int(bmeta["n_tasks"])
        task_states = []
        for i in range(n_draws):
            block = betas[i * n_tasks:(i + 1) * n_tasks]
            task_states.append([
                TaskState(
                    beta=block[s],
                    sigma2=None if np.isnan(sig[i, s]) else float(sig[i, s]),
                )
                for s in range(n_tasks)
            ])
    return PosteriorDraws(
        global_states=globals_,
        task_states=task_states,
        iteration_index=[burnin + thin * (i + 1) for i in range(n_draws)],
        burnin=burnin,
        thin=thin,
    )


def write_chain_state(path: Path, state, completed: int, kernel: str, seed: int) -> None:
    betas, sig2, z, phi = state
    write_json(
        path,
        {
            "completed_iterations": completed,
            "kernel": kernel,
            "seed": seed,
            "betas": np.asarray(betas).tolist(),
            "sigma2": np.asarray(sig2).tolist(),
            "z": np.asarray(z).tolist(),
            "phi": float(phi),
        },
    )


def read_chain_state(path: Path):
    obj = read_json(path)
    state = (
        np.array(obj["betas"], dtype=np.float64),
        np.array(obj["sigma2"], dtype=np.float64),
        np.array(obj["z"], dtype=np.float64),
        float(obj["phi"]),
    )
    return state, int(obj["completed_iterations"]), obj["kernel"], int(obj["seed"])


def write_metrics_csv(path: Path, rows: list[dict], columns: list[str], **meta) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_header("metrics", **meta), ",".join(columns)]
    for row in rows:
        vals = []
        for c in columns:
            v = row[c]
            if isinstance(v, (bool, np.bool_, int, np.integer)):
                vals.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                vals.append(_fmt(v))
            else:
                vals.append(str(v))
        lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")
