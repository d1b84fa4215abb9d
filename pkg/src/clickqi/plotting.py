"""Figure rendering for CLI reports.

Each report command can save a matplotlib figure next to its delimited
output.  Rendering is file-only (Agg backend); nothing interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_sweep", "plot_wigner", "plot_trajectories", "plot_bounds"]

_KIND_COLORS = {
    "coherent": "tab:pink",
    "tmsv": "tab:blue",
    "tmsv_matched": "tab:orange",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, columns, path):
    """Click probabilities (left) and click posteriors (right) vs nbar."""
    data = {c: np.array([r[i] for r in rows]) for i, c in enumerate(columns)}
    nbar = data["nbar"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(nbar, data["p_h0"], "k--", label="background only")
    ax1.plot(nbar, data["p_h1_coherent"], color="tab:pink", label="coherent")
    ax1.plot(nbar, data["p_h1_vst"], color="tab:blue", label="heralded (click)")
    ax1.plot(nbar, data["p_h1_vst_matched"], color="tab:orange", label="heralded, matched")
    ax1.set_xlabel(r"$\bar{n}$")
    ax1.set_ylabel("click probability")
    ax1.legend(fontsize=8)
    ax2.plot(nbar, data["posterior_click_coherent"], color="tab:pink", label="coherent")
    ax2.plot(nbar, data["posterior_click_vst"], color="tab:blue", label="heralded (click)")
    ax2.plot(nbar, data["posterior_click_matched"], color="tab:orange", label="heralded, matched")
    ax2.axhline(0.5, color="gray", lw=0.6)
    ax2.set_xlabel(r"$\bar{n}$")
    ax2.set_ylabel(r"$\Pr(H_1\,|\,\checkmark)$")
    ax2.legend(fontsize=8)
    _save(fig, path)


def plot_wigner(rows, columns, path):
    """Wigner-function slices of the two heralded states per idler efficiency."""
    data = np.array(rows, dtype=float)
    idx = {c: i for i, c in enumerate(columns)}
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for eta_i in np.unique(data[:, idx["eta_i"]]):
        sel = data[data[:, idx["eta_i"]] == eta_i]
        ax.plot(sel[:, idx["x"]], sel[:, idx["w_pnst"]], "--",
                label=rf"no-click, $\eta_I={eta_i:g}$")
        ax.plot(sel[:, idx["x"]], sel[:, idx["w_vst"]], "-",
                label=rf"click, $\eta_I={eta_i:g}$")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("q")
    ax.set_ylabel("W(q, 0)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_trajectories(curves, threshold, path, stride=1):
    """Ensemble-mean posterior curves per probe kind."""
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for kind, curve in curves.items():
        shots = np.arange(curve.size) * stride
        ax.plot(shots, curve, color=_KIND_COLORS.get(kind), label=kind)
    ax.axhline(threshold, color="gray", lw=0.6, ls=":")
    ax.set_xlabel("shot")
    ax.set_ylabel(r"mean $\Pr(H_1)$")
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_bounds(rows, columns, path):
    """Single-shot click error against the discrimination bounds."""
    data = {c: np.array([r[i] for r in rows], dtype=float)
            for i, c in enumerate(columns)}
    nbar = data["nbar"]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(nbar, data["err_click_vst"], color="tab:blue", label="click error, heralded")
    ax.plot(nbar, data["helstrom_coherent"], color="tab:pink", label="Helstrom, coherent")
    ax.plot(nbar, data["chernoff_coherent"], color="tab:green", ls="--",
            label="Chernoff, coherent")
    ax.set_xlabel(r"$\bar{n}$")
    ax.set_ylabel("single-shot error")
    ax.legend(fontsize=8)
    _save(fig, path)
