"""Static figures for the report path (rendered next to the CSV output).

matplotlib is imported lazily with the Agg backend so that library use
never touches a display; every function writes one figure file (format
inferred from the suffix, SVG by default) and returns the path.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_evolution_figure(trace, path, title="evolution"):
    """Line chart of min_component and mass against time."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(trace.times, trace.min_component, label="min component", lw=1.6)
    ax.plot(trace.times, trace.mass, label="mass", lw=1.6, ls="--")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("t")
    ax.set_title(title)
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_sweep_figure(rows, path, thresholds=None, title="coupling sweep"):
    """Leading eigenvalue pair (real and imaginary parts) against tau.

    rows: sequence of dicts with keys tau, re1, im1, re2, im2; optional
    threshold constants draw the transition lines.
    """
    plt = _plt()
    taus = np.array([r["tau"] for r in rows], dtype=float)
    re1 = np.array([r["re1"] for r in rows], dtype=float)
    im1 = np.array([r["im1"] for r in rows], dtype=float)
    re2 = np.array([r["re2"] for r in rows], dtype=float)

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(taus, re1, label="Re lambda_1", lw=1.6)
    ax.plot(taus, re2, label="Re lambda_2", lw=1.2, ls="--")
    ax.plot(taus, im1, label="Im lambda_1", lw=1.2, ls=":")
    if thresholds is not None:
        for value, name in ((thresholds.tau_p, "tau_p"),
                            (thresholds.tau_s, "tau_s"),
                            (thresholds.tau_star, "tau_star")):
            if taus.min() <= value <= taus.max():
                ax.axvline(value, color="0.5", lw=0.8, ls="-.")
                ax.annotate(name, (value, ax.get_ylim()[1]),
                            ha="left", va="top", fontsize=8, rotation=90)
    ax.set_xlabel("tau")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_eigenfunction_figure(sample, path, title=None):
    """Leading eigenfunction profile with its zero marked."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(sample.x, sample.values, lw=1.6)
    ax.axhline(0.0, color="0.6", lw=0.8)
    if sample.zero is not None:
        ax.axvline(sample.zero, color="crimson", lw=0.9, ls="--")
        ax.annotate(f"zero at x = {sample.zero:.6f}",
                    (sample.zero, 0.0), textcoords="offset points",
                    xytext=(6, 8), fontsize=8, color="crimson")
    ax.set_xlabel("x")
    ax.set_title(title or f"eigenfunction, tau = {sample.tau:g}, "
                          f"lambda = {sample.lam:.6f}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_spectrum_figure(eigenvalues, path, box=None, title="spectrum"):
    """Scatter of eigenvalues in the complex plane, optional analysis box."""
    plt = _plt()
    lam = np.asarray(eigenvalues, dtype=complex)
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    ax.scatter(lam.real, lam.imag, s=22, zorder=3)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.axvline(0.0, color="0.6", lw=0.8)
    if box is not None:
        re0, re1, im0, im1 = box
        ax.plot([re0, re1, re1, re0, re0], [im0, im0, im1, im1, im0],
                color="0.4", lw=0.9, ls="--")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
