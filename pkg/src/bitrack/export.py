"""Write run outputs: metrics.csv, trajectories.csv, report.json and plots.svg.

Every file carries the master seed and the config hash. CSV numbers use 17
significant digits, so re-running the same inputs gives byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .analysis import _clean, theory_report
from .config import config_hash, config_to_dict
from .engine import RunResult, fit_rate

__all__ = ["export", "metrics_header", "fitted_slopes", "build_report", "write_svg"]

FMT = "%.17g"


def _meta_line(result: RunResult) -> str:
    return f"# seed={result.config.seed},config_sha256={config_hash(result.config)}\n"


def metrics_header(n_followers: int) -> str:
    return ",".join(["k", "L1", "L2", *(f"mse_{i}" for i in range(1, n_followers + 1)), "leader"])


def _write_csv(path: Path, meta: str, header: str, rows: np.ndarray, int_cols: int = 1):
    with open(path, "w", newline="") as fh:
        fh.write(meta)
        fh.write(header + "\n")
        for row in rows:
            head = [str(int(v)) for v in row[:int_cols]]
            tail = [FMT % v for v in row[int_cols:]]
            fh.write(",".join(head + tail) + "\n")


def fitted_slopes(result: RunResult) -> dict:
    """Log-log slopes over the last two decades of the horizon, when there are enough points."""
    K = result.config.horizon
    k_min = max(10, K // 100)
    out = {"window": [k_min, K]}
    for name in ("tracking_mean", "tracking_max", "L2"):
        try:
            fit = fit_rate(result.metrics, k_min, K, metric=name)
            out[name] = {"slope": fit.slope, "stderr": fit.stderr, "n_points": fit.n_points}
        except ValueError as exc:
            out[name] = {"error": str(exc)}
    return out


def build_report(result: RunResult) -> dict:
    c = result.config
    return _clean({
        "seed": c.seed,
        "config_sha256": config_hash(c),
        "config": config_to_dict(c),
        "theory": theory_report(c),
        "fits": fitted_slopes(result),
        "diagnostics": result.diagnostics,
    })


def write_svg(result: RunResult, path: Path, replica: int = 0):
    """Four stacked panels: states, estimates, estimate error, tracking error."""
    import matplotlib

    matplotlib.use("Agg")
    # fixed hash salt gives stable element ids; text stays searchable
    rc = {"svg.hashsalt": f"{result.config.seed}", "svg.fonttype": "none"}
    with matplotlib.rc_context(rc):
        _draw(result, path, replica)


def _draw(result, path, replica):
    import matplotlib.pyplot as plt

    lg = result.log
    t = result.config.topology
    n = t.n_followers
    k = lg.k
    edges = [(i + 1, j + 1) for i, j in t.edges]
    fig, axes = plt.subplots(4, 1, figsize=(8, 11), sharex=True)
    ax = axes[0]
    for i in range(n):
        ax.plot(k, lg.x[:, replica, i], lw=0.8, label=f"x{i + 1}")
    ax.plot(k, lg.x[:, replica, n], "k--", lw=1.0, label=f"x{n + 1} (leader)")
    ax.set_ylabel("state")
    ax.legend(fontsize=7, ncol=3)
    for e, (i, j) in enumerate(edges):
        axes[1].plot(k, lg.xhat[:, replica, e], lw=0.7, label=f"x̂{i}{j}")
        axes[2].plot(k, lg.theta[:, replica, e], lw=0.7, label=f"θ{i}{j}")
    axes[1].set_ylabel("estimate")
    axes[2].set_ylabel("estimate error")
    axes[1].legend(fontsize=6, ncol=4)
    dev = lg.x[:, replica, :n] - lg.x[:, replica, n:]
    for i in range(n):
        axes[3].plot(k, dev[:, i], lw=0.8, label=f"x{i + 1} - x{n + 1}")
    axes[3].set_ylabel("tracking error")
    axes[3].set_xlabel("k")
    axes[3].legend(fontsize=7, ncol=3)
    fig.suptitle(f"seed={result.config.seed} config_sha256={config_hash(result.config)[:16]}", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def export(result: RunResult, out_dir, svg: bool = True) -> dict:
    """Write all outputs into ``out_dir``; returns a name -> path map."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")

    m, lg = result.metrics, result.log
    t = result.config.topology
    n = t.n_followers
    meta = _meta_line(result)
    paths = {}

    rows = np.column_stack([m.k, m.L1, m.L2, m.mse, m.leader])
    paths["metrics"] = out / "metrics.csv"
    _write_csv(paths["metrics"], meta, metrics_header(n), rows)

    # the first replica's sample path at the logged steps
    labels = [(i + 1, j + 1) for i, j in t.edges]
    header = ",".join(
        ["k"]
        + [f"x_{i}" for i in range(1, n + 2)]
        + [f"xhat_{i}_{j}" for i, j in labels]
        + [f"theta_{i}_{j}" for i, j in labels]
        + [f"u_{i}" for i in range(1, n + 1)]
        + ["f"]
    )
    rows = np.column_stack([lg.k, lg.x[:, 0], lg.xhat[:, 0], lg.theta[:, 0], lg.u[:, 0, :n], lg.f])
    paths["trajectories"] = out / "trajectories.csv"
    _write_csv(paths["trajectories"], meta, header, rows)

    paths["report"] = out / "report.json"
    paths["report"].write_text(json.dumps(build_report(result), sort_keys=True, indent=2) + "\n")

    if svg:
        paths["plots"] = out / "plots.svg"
        write_svg(result, paths["plots"])
    return paths
