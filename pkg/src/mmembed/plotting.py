"""Figure rendering for the report paths.

Every CSV the CLI emits gets a PNG sibling; these helpers hold the
matplotlib boilerplate. The Agg backend keeps things headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def histogram(values, path, xlabel: str, title: str = "", bins: int = 40) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    values = np.asarray(values, float)
    if values.size:
        ax.hist(values, bins=bins, color="#4878d0", edgecolor="white")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    _finish(fig, path)


def f1_curve(values, counts, path, title: str = "") -> None:
    ks = np.arange(1, len(values) + 1)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ks, values, marker="o", color="#4878d0", label="F1@k")
    ax.set_xlabel("k (hops)")
    ax.set_ylabel("F1")
    ax.set_ylim(-0.02, 1.02)
    ax2 = ax.twinx()
    total = max(int(np.sum(counts)), 1)
    ax2.bar(ks, np.asarray(counts) / total, alpha=0.25, color="#888888", label="pair PMF")
    ax2.set_ylabel("pair fraction")
    if title:
        ax.set_title(title)
    _finish(fig, path)


def loss_history(epochs, losses, rates, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(epochs, losses, color="#4878d0")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax2 = ax.twinx()
    ax2.plot(epochs, rates, color="#d65f5f", alpha=0.6)
    ax2.set_ylabel("learning rate")
    ax2.set_yscale("log")
    if title:
        ax.set_title(title)
    _finish(fig, path)


def sweep_curves(sweep, path, title: str = "") -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    t = sweep.thresholds
    ax1.plot(t, sweep.degree_q[:, 1], marker="o", color="#4878d0")
    ax1.fill_between(t, sweep.degree_q[:, 0], sweep.degree_q[:, 2], alpha=0.25)
    ax1.set_xlabel("distance threshold")
    ax1.set_ylabel("node degree (median, IQR)")
    ok = ~np.isnan(sweep.curv_q[:, 1])
    ax2.plot(t[ok], sweep.curv_q[ok, 1], marker="o", color="#d65f5f")
    ax2.fill_between(t[ok], sweep.curv_q[ok, 0], sweep.curv_q[ok, 2], alpha=0.25, color="#d65f5f")
    ax2.set_xlabel("distance threshold")
    ax2.set_ylabel("graph sectional curvature")
    if title:
        fig.suptitle(title)
    _finish(fig, path)


def ricci_scatter(edge_values, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 3.2))
    vals = [v for _, _, v in edge_values]
    if vals:
        ax.hist(vals, bins=40, color="#6acc64", edgecolor="white")
    ax.axvline(0.0, color="black", lw=0.8)
    ax.set_xlabel("edge Ollivier-Ricci curvature")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    _finish(fig, path)
