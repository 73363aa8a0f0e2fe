"""Figure rendering for CLI reports (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_profile(profile, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(profile.grid, profile.h, label=f"h_{profile.k}")
    r = profile.grid
    ax.loglog(r, r**profile.exponents.small_r *
              profile.h[0] / r[0]**profile.exponents.small_r,
              "--", lw=0.8, label="small-r power")
    if np.isfinite(profile.c_k):
        ax.loglog(r, np.abs(profile.large_r_model(r)), ":", lw=0.8,
                  label="large-r model")
    ax.set_xlabel("r")
    ax.set_ylabel("h")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)


def plot_evolution(centers, snapshots, times, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for t, v in zip(times, snapshots):
        ax.semilogx(centers, v, label=f"t={t:g}")
    ax.set_xlabel("r")
    ax.set_ylabel("v")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)


def plot_decay(report, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(report.times, report.measured, "o-", ms=3, label="measured")
    finite = np.isfinite(report.thm_rhs)
    if finite.any():
        ax.loglog(report.times[finite], report.thm_rhs[finite], "--",
                  label="theorem RHS")
    finite = np.isfinite(report.cor_rhs)
    if finite.any():
        ax.loglog(report.times[finite], report.cor_rhs[finite], ":",
                  label="corollary RHS")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(f"measured ~ {report.fit_measured.describe()}")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)


def plot_kernel(rx, kernel, bound, t, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(rx, np.maximum(kernel, 1e-300), label="kernel slice")
    ax.loglog(rx, bound, "--", label="Gaussian envelope")
    ax.set_xlabel("|x|")
    ax.set_ylabel(f"p(x, y, t={t:g})")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=150)
    plt.close(fig)
