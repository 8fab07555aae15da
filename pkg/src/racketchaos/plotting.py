"""Optional figures for the report directory (matplotlib, non-interactive)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update({
    "figure.dpi": 120,
    "savefig.bbox": "tight",
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
})


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_scaffolds(world, path):
    """Scaffolds and envelopes with their linear growth profile removed."""
    m = world.consts.m
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2), sharey=True)
    for ax, seq, env, label in ((axes[0], world.sub, world.w_lower, "sub"),
                                (axes[1], world.sup, world.w_upper, "super")):
        n = seq.indices
        ref = np.where(n >= 0, (m + 1) * n, (m + 2) * n) if label == "sub" else \
            np.where(n >= 0, (m + 2) * n, (m + 1) * n)
        ax.plot(n, (seq.base - ref) + seq.offset, lw=1, label=f"{label}-solution")
        ax.plot(env.indices, env.offset, lw=1.5, label="translate envelope")
        ax.axhline(0, color="0.6", lw=0.6)
        ax.set_xlabel("n")
        ax.legend(frameon=False)
    axes[0].set_ylabel("t_n minus growth profile")
    axes[0].set_ylim(-4, 4)
    return _save(fig, path)


def plot_configuration(result, path):
    cfg = result.config
    n = np.arange(cfg.n0, cfg.n0 + len(cfg))
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.fill_between(n, cfg.lower, cfg.upper, color="0.9", step="mid", label="sandwich band")
    ax.plot(n, cfg.offset, "o-", ms=2.5, lw=1, label="stationary offsets")
    ax.set_xlabel("n")
    ax.set_ylabel("t_n - zeta_e(n)")
    ax.set_title(f"code {result.word}")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_kset(points_by_label, path):
    """``points_by_label``: mapping label -> list of (t mod 1, E)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, pts in points_by_label.items():
        arr = np.asarray(pts)
        ax.scatter(arr[:, 0], arr[:, 1], s=6, label=label)
    ax.set_xlabel("impact phase t mod 1")
    ax.set_ylabel("energy E")
    ax.legend(frameon=False, fontsize=7)
    return _save(fig, path)
