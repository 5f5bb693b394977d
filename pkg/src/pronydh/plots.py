"""Figure rendering for experiment reports (written next to the CSV output)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

__all__ = ["render_experiment_figures"]


def _median_by(rows, key_fields, value_field):
    buckets = defaultdict(list)
    for row in rows:
        v = row.get(value_field)
        if v is None or (isinstance(v, float) and not np.isfinite(v)):
            continue
        buckets[tuple(row[k] for k in key_fields)].append(float(v))
    return {k: float(np.median(v)) for k, v in buckets.items()}


def render_experiment_figures(report, out_dir) -> list[Path]:
    """Render error-vs-stride and conditioning figures to PNG files.

    Returns the list of written figure paths (empty when the report has no
    plottable rows).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = list(report.rows)
    if not rows:
        return []
    written = []

    methods = sorted({row["method"] for row in rows})
    err = _median_by(rows, ("method", "p"), "node_err")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method in methods:
        ps = sorted({p for (m, p) in err if m == method})
        if not ps:
            continue
        ax.semilogy(ps, [err[(method, p)] for p in ps], marker="o", label=method)
    eta = report.config.get("eta")
    if eta is None and report.config.get("N"):
        eta = 1.0 / report.config["N"]
    if eta:
        ax.axhline(eta, color="gray", linestyle="--", linewidth=1, label="eta")
    ax.set_xlabel("decimation stride p")
    ax.set_ylabel("median node error")
    ax.set_title("Reconstruction error vs. decimation")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    path = out_dir / "error_vs_p.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    cn_full = _median_by(rows, ("p",), "cn_full")
    cn_dec = _median_by(rows, ("p",), "cn_dec")
    if cn_full or cn_dec:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        if cn_full:
            ps = sorted(p for (p,) in cn_full)
            ax.semilogy(ps, [cn_full[(p,)] for p in ps], marker="s", label="CN full")
        if cn_dec:
            ps = sorted(p for (p,) in cn_dec)
            ax.semilogy(ps, [cn_dec[(p,)] for p in ps], marker="^", label="CN decimated")
        ax.set_xlabel("decimation stride p")
        ax.set_ylabel("condition number (max over nodes)")
        ax.set_title("Conditioning vs. decimation")
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        path = out_dir / "condition_numbers.png"
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    return written
