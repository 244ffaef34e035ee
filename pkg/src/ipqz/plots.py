"""Figure rendering for evaluation reports.

Writes static PNGs next to the delimited report: one error histogram
per resolution and one two-panel summary (space ratio and error
quantiles against delta).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _delta_tag(delta) -> str:
    return f"{delta.numerator}_{delta.denominator}"


def error_histogram(errors: np.ndarray, delta, worst_case: float, path: str) -> str:
    """Histogram of absolute estimate errors with the worst-case line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(errors, bins=60, color="#3b6ea5", edgecolor="none")
    ax.axvline(worst_case, color="#c23b22", linestyle="--",
               label=f"worst case {worst_case:.4g}")
    ax.axvline(errors.max(), color="#444444", linestyle=":",
               label=f"observed max {errors.max():.4g}")
    ax.set_xlabel("absolute inner-product error")
    ax.set_ylabel("pairs")
    ax.set_title(f"delta = {delta} ({float(delta):.4g})")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def summary_figure(reports, path: str) -> str:
    """Space ratio and error quantiles across the evaluated resolutions."""
    deltas = [float(r.delta) for r in reports]
    order = np.argsort(deltas)
    deltas = np.asarray(deltas)[order]
    ratio = np.asarray([r.space_ratio for r in reports])[order]
    med = np.asarray([r.median_err for r in reports])[order]
    p90 = np.asarray([r.p90_err for r in reports])[order]
    mx = np.asarray([r.max_err for r in reports])[order]
    wc = np.asarray([r.worst_case for r in reports])[order]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(deltas, ratio, marker="o", color="#3b6ea5")
    ax1.set_xscale("log")
    ax1.set_xlabel("delta")
    ax1.set_ylabel("space ratio vs 32-bit floats")
    ax1.set_title("space usage")
    ax1.grid(True, alpha=0.3)

    ax2.plot(deltas, med, marker="o", label="median")
    ax2.plot(deltas, p90, marker="s", label="90th pct")
    ax2.plot(deltas, mx, marker="^", label="max")
    ax2.plot(deltas, wc, linestyle="--", color="#c23b22", label="worst case")
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.set_xlabel("delta")
    ax2.set_ylabel("absolute error")
    ax2.set_title("inner-product error")
    ax2.legend(frameon=False)
    ax2.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(reports, errors_by_delta, out_dir: str) -> list[str]:
    """Write all figures for one eval run; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for rep in reports:
        p = os.path.join(out_dir, f"errors_{_delta_tag(rep.delta)}.png")
        paths.append(error_histogram(errors_by_delta[rep.delta], rep.delta,
                                     rep.worst_case, p))
    paths.append(summary_figure(reports, os.path.join(out_dir, "summary.png")))
    return paths
