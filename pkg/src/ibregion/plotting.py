"""Figures written next to the CSV/JSON reports.

Uses the Agg backend and strips PNG metadata so identical inputs give
identical files.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.4,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "ibregion",
}


def figure_size(scale=1.0):
    width = 6.0 * scale
    return width, width * (math.sqrt(5.0) - 1.0) / 2.0


def _new(scale=1.0):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=figure_size(scale))
    return fig, ax


def save(fig, path) -> Path:
    path = Path(path)
    with plt.rc_context(_RC):
        fig.tight_layout()
        fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_curve(curve, path, unit_scale=1.0, unit="nats", analytic=None):
    """Solved points, their concave envelope and optionally a reference curve.

    ``analytic`` is a callable rate -> score in nats.
    """
    fig, ax = _new()
    raw_r = np.array([p.rate for p in curve.raw]) * unit_scale
    raw_s = np.array([p.score for p in curve.raw]) * unit_scale
    env_r = np.concatenate([[0.0], curve.rates]) * unit_scale
    env_s = np.concatenate([[0.0], curve.scores]) * unit_scale
    if analytic is not None:
        grid = np.linspace(0.0, max(env_r.max() / unit_scale, 1e-9) * 1.05, 200)
        ax.plot(grid * unit_scale, np.asarray(analytic(grid)) * unit_scale, color="0.6",
                linestyle="--", label="closed form")
    ax.plot(env_r, env_s, color="C0", label="envelope")
    ax.scatter(raw_r, raw_s, s=8, color="C1", zorder=3, label="solved points")
    ax.set_xlabel(f"I(X;U) [{unit}]")
    ax.set_ylabel(f"I(Y;U) [{unit}]")
    ax.legend(frameon=False)
    return save(fig, path)


def plot_region(points, curve, path, passed=None, unit_scale=1.0, unit="nats"):
    """Exhaustive block-code points under the single-letter curve."""
    fig, ax = _new()
    env_r = np.concatenate([[0.0], curve.rates]) * unit_scale
    env_s = np.concatenate([[0.0], curve.scores]) * unit_scale
    ax.plot(env_r, env_s, color="C0", label="IB envelope")
    ns = sorted({p.n for p in points})
    for k, n in enumerate(ns):
        sel = [p for p in points if p.n == n]
        ax.scatter([p.rate * unit_scale for p in sel], [p.score * unit_scale for p in sel],
                   s=14, marker="o", color=f"C{k + 1}", alpha=0.7, label=f"codes, n={n}")
    if passed is not None:
        bad = [p for p, ok in zip(points, passed) if not ok]
        if bad:
            ax.scatter([p.rate * unit_scale for p in bad], [p.score * unit_scale for p in bad],
                       s=40, marker="x", color="red", label="converse failure")
    ax.set_xlabel(f"rate [{unit}]")
    ax.set_ylabel(f"score [{unit}]")
    ax.legend(frameon=False)
    return save(fig, path)


def plot_quantization(src, q, path):
    """kappa_{u|x}(0|x) across grid cells against the representative of each cell's bin."""
    fig, ax = _new()
    cells = np.arange(len(src.weights))
    ax.plot(cells, src.u_channel.rows[:, 0], color="C0", label="channel row")
    ax.step(cells, q.surrogate_rows()[:, 0], where="mid", color="C1", label="representative")
    ax.set_xlabel("grid cell")
    ax.set_ylabel("probability of u = 0")
    ax.set_title(f"delta = {q.partition.delta:g}, {q.occupied} occupied cells", fontsize=9)
    ax.legend(frameon=False)
    return save(fig, path)


def plot_cover(labels, covers, path):
    """Code cells on a 2-letter grid with the outline of every cover box."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("cover plots need n = 2")
    fig, ax = _new(0.8)
    ax.imshow(labels.T, origin="lower", cmap="Pastel1", interpolation="nearest")
    for c in covers:
        for box in c.rectangles:
            x0, x1 = box[0][0] - 0.5, box[0][-1] + 0.5
            y0, y1 = box[1][0] - 0.5, box[1][-1] + 0.5
            ax.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False,
                                       edgecolor=f"C{c.label}", linewidth=1.2))
    ax.set_xlabel("letter 1")
    ax.set_ylabel("letter 2")
    return save(fig, path)
