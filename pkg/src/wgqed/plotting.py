"""Quick-look matplotlib renderings of the CSV products.

The CSV files remain the authoritative output; these figures are
conveniences written next to them when a command is run with --plot.
Heat maps use the (detuning, phase) axes of the sweep grids, with phases
displayed in units of pi.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _heatmap(ax, deltas, phis, values, label, cmap, vmin=None, vmax=None):
    mesh = ax.pcolormesh(deltas, phis / np.pi, values, cmap=cmap,
                         vmin=vmin, vmax=vmax, shading="nearest")
    ax.set_xlabel(r"$\Delta/\Gamma$")
    ax.set_ylabel(r"$\phi/\pi$")
    plt.colorbar(mesh, ax=ax, label=label)


def render_sweep(deltas, phis, p_t, phase_shift, png_path, title="") -> Path:
    """Transmission-probability and phase-shift maps side by side."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    _heatmap(ax1, deltas, phis, p_t, r"$p_\mathrm{t}$", "viridis", 0.0, 1.0)
    _heatmap(ax2, deltas, phis, phase_shift / np.pi, r"$\delta\phi/\pi$",
             "twilight", -1.0, 1.0)
    if title:
        fig.suptitle(title)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return Path(png_path)


def render_deviation(deltas, phis, dp_t, dphase, png_path, title="") -> Path:
    """Deviation maps (probability and phase) against a reference sweep."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    lim = float(np.nanmax(np.abs(dp_t))) or 1.0
    _heatmap(ax1, deltas, phis, dp_t, r"$\Delta p_\mathrm{t}$", "RdBu_r", -lim, lim)
    _heatmap(ax2, deltas, phis, dphase / np.pi, r"$\Delta\delta\phi/\pi$",
             "RdBu_r")
    if title:
        fig.suptitle(title)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return Path(png_path)


def render_pulse(deltas, phis, dp_t, dshift, png_path, title="") -> Path:
    """Pulse-vs-monochromatic deviation maps."""
    return render_deviation(deltas, phis, dp_t, dshift, png_path, title)


def render_two_photon(delta_out, density, phase, png_path, title="") -> Path:
    """Inelastic density and phase over the output photon-photon detuning."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True,
                                   constrained_layout=True)
    ax1.plot(delta_out, density)
    ax1.set_ylabel("density")
    ax2.plot(delta_out, np.asarray(phase) / np.pi)
    ax2.set_ylabel(r"phase$/\pi$")
    ax2.set_xlabel(r"$\delta_\mathrm{out}/\Gamma$")
    if title:
        fig.suptitle(title)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return Path(png_path)


def render_loss_scaling(samples, fits, png_path, title="") -> Path:
    """Log-log area ratios per gamma with their fitted power laws.

    ``samples``: (N, gamma, A) triples; ``fits``: {gamma: PowerLawFit}.
    """
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    gammas = sorted({g for _, g, _ in samples})
    for g in gammas:
        ns = np.array([n for n, gg, _ in samples if gg == g], float)
        areas = np.array([a for _, gg, a in samples if gg == g])
        line, = ax.loglog(ns, areas, "o", label=rf"$\gamma={g:g}\,\Gamma$")
        fit = fits.get(g)
        if fit is not None and ns.size > 1:
            grid = np.geomspace(ns.min(), ns.max(), 64)
            ax.loglog(grid, fit.prefactor * grid ** fit.exponent, "--",
                      color=line.get_color(),
                      label=rf"$\propto N^{{{fit.exponent:.2f}}}$")
    ax.set_xlabel("N")
    ax.set_ylabel(r"$A_\gamma$")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return Path(png_path)


def render_design_points(rows, png_path, title="") -> Path:
    """Candidate operating points: detuning vs branch index, coverage flagged."""
    fig, ax = plt.subplots(figsize=(6, 4.5), constrained_layout=True)
    for row in rows:
        marker = "o" if row["covers_full_range"] else "x"
        color = "tab:blue" if row["covers_full_range"] else "tab:red"
        ax.plot(row["branch_index"], row["delta_over_gamma"], marker, color=color)
    ax.set_xlabel("branch index")
    ax.set_ylabel(r"$\Delta/\Gamma$")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return Path(png_path)
