"""Figure rendering for spectra, bound regions, and contrast sweeps.

Every renderer writes a PNG next to the delimited data it illustrates and
returns the path.  Rendering is headless (Agg); nothing here opens a
window.  Figures are a convenience for eyeballing runs — the CSV/JSON
payloads remain the authoritative outputs, and the byte-determinism
guarantee covers only those.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bounds import BoundsRegion
from .spectral_engine import SpectralMeasure, smoothed_density

__all__ = [
    "render_spectrum_figure",
    "render_bounds_figure",
    "render_sweep_figure",
]

_PNG_META = {"Software": "effmed"}  # constant so reruns differ only by data


def render_spectrum_figure(measures: list[SpectralMeasure], path,
                           eps: tuple[float, ...] = (1e-2, 1e-3)) -> str:
    """Atom stems plus smoothed densities for one or more measures."""
    fig, axes = plt.subplots(
        len(measures), 1, figsize=(6.4, 2.6 * len(measures)),
        squeeze=False, sharex=True,
    )
    grid = np.linspace(0.0, 1.0, 2001)
    for ax, m in zip(axes[:, 0], measures):
        lam, w = m.lambdas, m.weights
        markerline, stemlines, _ = ax.stem(lam, w)
        plt.setp(stemlines, linewidth=0.6, color="0.3")
        plt.setp(markerline, markersize=2.5, color="0.2")
        for e in eps:
            ax.plot(grid, smoothed_density(m, grid, e), lw=1.0,
                    label=f"eps={e:g}")
        ax.set_ylabel("weight / density")
        ax.set_title(
            f"{m.kind}  (j,k)=({m.j},{m.k})  d={m.d} L={m.L}  "
            f"mass={m.mass:.4f}", fontsize=9,
        )
        ax.legend(fontsize=7, loc="upper right")
    axes[-1, 0].set_xlabel("lambda")
    fig.tight_layout()
    fig.savefig(path, dpi=140, metadata=_PNG_META)
    plt.close(fig)
    return str(path)


def render_bounds_figure(regions: list[BoundsRegion], values, path,
                         labels: list[str] | None = None) -> str:
    """Bound-region arcs with computed effective values overlaid."""
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    colors = ["tab:blue", "tab:orange", "tab:green", "tab:red"]
    for i, reg in enumerate(regions):
        c = colors[i % len(colors)]
        lbl = labels[i] if labels else f"order {reg.order}"
        for k, arc in enumerate(reg.arcs):
            arc = np.asarray(arc)
            ax.plot(arc.real, arc.imag, color=c, lw=1.2,
                    label=lbl if k == 0 else None)
        verts = np.asarray(reg.vertices)
        ax.plot(verts.real, verts.imag, "o", color=c, ms=4)
    vals = np.asarray(values, dtype=complex)
    if vals.size:
        ax.plot(vals.real, vals.imag, "k+", ms=7, mew=1.4,
                label="computed sigma*")
    ax.set_xlabel("Re sigma*")
    ax.set_ylabel("Im sigma*")
    ax.legend(fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=140, metadata=_PNG_META)
    plt.close(fig)
    return str(path)


def render_sweep_figure(sig_values, path, labels=None) -> str:
    """Complex-plane trajectories of sigma* across a contrast sweep.

    sig_values: sequence of 1-D complex arrays, one trajectory per entry
    (e.g. one per realization or per route).
    """
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    for i, traj in enumerate(sig_values):
        traj = np.asarray(traj, dtype=complex)
        lbl = labels[i] if labels else None
        ax.plot(traj.real, traj.imag, "-o", ms=3, lw=0.9, label=lbl)
    ax.set_xlabel("Re sigma*")
    ax.set_ylabel("Im sigma*")
    if labels:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=140, metadata=_PNG_META)
    plt.close(fig)
    return str(path)
