"""Figure rendering for evaluation and sweep reports.

Figures are written next to the delimited output so a report directory is
self-contained: CSV for machines, PNG for eyes.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EvalReport, gradient_histogram, sweep_means

_PNG_META = {"metadata": {"Software": None}}  # keep re-runs byte-identical


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, **_PNG_META)
    plt.close(fig)


def render_eval_figure(report: EvalReport, path) -> None:
    """Per-image PSNR/SSIM bars."""
    rows = report.per_image
    ids = [r["id"] for r in rows]
    psnrs = [r["psnr_db"] if math.isfinite(r["psnr_db"]) else 60.0 for r in rows]
    ssims = [r["ssim"] for r in rows]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    x = np.arange(len(ids))
    ax1.bar(x, psnrs, color="steelblue")
    ax1.set_xticks(x, ids, rotation=60, ha="right", fontsize=7)
    ax1.set_ylabel("PSNR (dB)")
    ax1.set_title("PSNR per image")
    ax2.bar(x, ssims, color="darkseagreen")
    ax2.set_xticks(x, ids, rotation=60, ha="right", fontsize=7)
    ax2.set_ylabel("SSIM")
    ax2.set_ylim(0, 1.05)
    ax2.set_title("SSIM per image")
    fig.tight_layout()
    _save(fig, path)


def render_sweep_figure(report: EvalReport, path) -> None:
    """Trend curves over the sweep grid.

    Left: PSNR vs sparsity/fidelity ratio and vs angle error.  Right:
    retained detail and residual rain vs ratio (the two strength dials).
    """
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))

    ratios = sweep_means(report, "psnr_db", by="ratio")
    if len(ratios) > 1:
        ax1.plot(list(ratios), list(ratios.values()), "o-", label="vs ratio")
    angles = sweep_means(report, "psnr_db", by="angle_err_deg")
    if len(angles) > 1:
        ax1.plot(list(angles), list(angles.values()), "s--",
                 label="vs angle error (deg)")
    ax1.set_xlabel("grid value")
    ax1.set_ylabel("mean PSNR (dB)")
    ax1.set_title("Restoration quality")
    ax1.legend(fontsize=8)

    detail = sweep_means(report, "detail_tv", by="ratio")
    resid = sweep_means(report, "residual_rain", by="ratio")
    if len(detail) > 1:
        ax2.plot(list(detail), list(detail.values()), "o-", color="steelblue",
                 label="retained detail")
        twin = ax2.twinx()
        twin.plot(list(resid), list(resid.values()), "s--", color="indianred",
                  label="residual rain")
        twin.set_ylabel("residual rain (L1)")
        lines, labels = ax2.get_legend_handles_labels()
        tl, tlab = twin.get_legend_handles_labels()
        ax2.legend(lines + tl, labels + tlab, fontsize=8)
    ax2.set_xlabel("lambda_along / lambda_across")
    ax2.set_ylabel("detail (L1 of gradient)")
    ax2.set_title("Deraining strength control")
    fig.tight_layout()
    _save(fig, path)


def render_histogram_figure(img, path, bins: int = 64) -> None:
    """Along/across gradient histograms of one image, log-count scale."""
    counts_along, edges = gradient_histogram(img, "along", bins=bins)
    counts_across, _ = gradient_histogram(img, "across", bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(centers, counts_along + 1, label="along streaks")
    ax.semilogy(centers, counts_across + 1, label="across streaks")
    ax.set_xlabel("gradient value")
    ax.set_ylabel("count + 1")
    ax.set_title("Directional gradient histograms")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_trace_figure(trace, path) -> None:
    """Objective value per outer iteration."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(np.arange(len(trace)), trace, "o-")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("objective")
    ax.set_title("Decomposition energy trace")
    fig.tight_layout()
    _save(fig, path)
