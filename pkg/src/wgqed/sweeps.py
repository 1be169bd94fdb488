"""Grid sweeps over (detuning, propagation phase) and the loss-area scaling.

The response of a periodic chain is evaluated on rectangular grids for
dark/bright maps and loss-deviation maps; a thresholded area ratio reduces
each (N, gamma) pair to a single figure of merit whose growth with N is
captured by a log-log power-law fit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFit, GridMismatch
from .scattering import EmitterParams, emitter_q, singular_mask
from .transfer import ArrayGeometry, array_response_from_params, chain_many, wrap_phase

DEFAULT_LOSS_THRESHOLD = 0.1
TRANSPARENCY_THRESHOLD = 1.0 - 1e-6


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular (detuning, phase) window with its node counts."""

    delta_range: tuple[float, float]
    phi_range: tuple[float, float]
    resolution: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.delta_range[0] < self.delta_range[1]:
            raise ValueError(f"empty detuning range {self.delta_range}")
        if not self.phi_range[0] < self.phi_range[1]:
            raise ValueError(f"empty phase range {self.phi_range}")
        if min(self.resolution) < 2:
            raise ValueError(f"resolution must be at least 2x2, got {self.resolution}")

    def deltas(self) -> np.ndarray:
        return np.linspace(*self.delta_range, self.resolution[0])

    def phis(self) -> np.ndarray:
        return np.linspace(*self.phi_range, self.resolution[1])


@dataclass
class SweepField:
    """Periodic-chain response on a grid; arrays indexed [phi, delta].

    Nodes whose transfer matrix is undefined (resonant lossless emitters)
    are flagged in ``singular`` and carry NaNs.
    """

    grid: SweepGrid
    n_emitters: int
    gamma: float
    p_t: np.ndarray
    phase_shift: np.ndarray
    flux_deficit: np.ndarray
    singular: np.ndarray


@dataclass
class DeviationField:
    """Nodewise differences between two sweeps on the same grid."""

    grid: SweepGrid
    dp_t: np.ndarray
    dphase: np.ndarray


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    residual: float


def _sweep_rows(deltas: np.ndarray, phis: np.ndarray, n: int, gamma: float):
    """Response arrays for a block of phi rows against all deltas."""
    q = emitter_q(deltas, gamma)[np.newaxis, :]
    bad = singular_mask(deltas, gamma)[np.newaxis, :]
    phi_col = phis[:, np.newaxis]
    chain = chain_many([q] * n, [phi_col] * (n - 1) if n > 1 else [])
    shape = np.broadcast_shapes(q.shape, phi_col.shape)
    singular = np.broadcast_to(bad, shape).copy()
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        p_t = np.broadcast_to(chain.p_t(), shape).copy()
        p_r = np.broadcast_to(chain.p_r(), shape).copy()
        shift = np.broadcast_to(
            wrap_phase(chain.arg_t() - (n - 1) * phi_col), shape).copy()
    for a in (p_t, p_r, shift):
        a[singular] = np.nan
    return p_t, shift, 1.0 - p_t - p_r, singular


def sweep_response(grid: SweepGrid, n: int, gamma: float = 0.0,
                   threads: int = 1) -> SweepField:
    """Evaluate the periodic chain on every grid node.

    Rows (fixed phi) are independent, so they are farmed out in contiguous
    blocks; results land in preallocated arrays by row index and are
    bit-identical for any thread count.
    """
    if n < 1:
        raise ValueError("need at least one emitter")
    deltas = grid.deltas()
    phis = grid.phis()
    n_phi, n_delta = phis.size, deltas.size
    p_t = np.empty((n_phi, n_delta))
    shift = np.empty((n_phi, n_delta))
    deficit = np.empty((n_phi, n_delta))
    singular = np.empty((n_phi, n_delta), bool)

    workers = threads if threads > 0 else min(8, os.cpu_count() or 1)
    blocks = np.array_split(np.arange(n_phi), min(workers * 4, n_phi))

    def fill(rows: np.ndarray) -> None:
        pt_b, sh_b, fd_b, sg_b = _sweep_rows(deltas, phis[rows], n, gamma)
        p_t[rows] = pt_b
        shift[rows] = sh_b
        deficit[rows] = fd_b
        singular[rows] = sg_b

    if workers <= 1:
        for rows in blocks:
            fill(rows)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    return SweepField(grid=grid, n_emitters=n, gamma=gamma, p_t=p_t,
                      phase_shift=shift, flux_deficit=deficit, singular=singular)


def _require_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")


def deviation_map(field_a: SweepField, field_b: SweepField) -> DeviationField:
    """Nodewise (p_t, phase) differences, phases wrapped to (-pi, pi]."""
    _require_same_grid(field_a, field_b)
    return DeviationField(
        grid=field_a.grid,
        dp_t=field_a.p_t - field_b.p_t,
        dphase=wrap_phase(field_a.phase_shift - field_b.phase_shift),
    )


def loss_area_ratio(field_lossless: SweepField, field_lossy: SweepField,
                    threshold: float = DEFAULT_LOSS_THRESHOLD) -> float:
    """Fraction of grid nodes where loss removes more than ``threshold`` of
    the transmission probability.  Node-count fraction: convergent under
    refinement and free of any contouring scheme."""
    _require_same_grid(field_lossless, field_lossy)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    with np.errstate(invalid="ignore"):
        exceeded = (field_lossless.p_t - field_lossy.p_t) > threshold
    return float(np.mean(exceeded))


def fit_power_law(samples) -> PowerLawFit:
    """Ordinary least squares of log A against log N.

    ``samples`` is a sequence of (N, A) pairs with A > 0; returns the slope
    as the exponent, exp(intercept) as the prefactor and the RMS log-space
    residual.
    """
    pts = [(float(n), float(a)) for n, a in samples]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 samples for a credible fit, got {len(pts)}")
    if any(a <= 0 for _, a in pts):
        raise ValueError("all sample values must be positive for a log-log fit")
    log_n = np.log([n for n, _ in pts])
    log_a = np.log([a for _, a in pts])
    if np.unique(log_n).size < 2:
        raise DegenerateFit("all abscissae equal; slope undetermined")
    slope, intercept = np.polyfit(log_n, log_a, 1)
    resid = log_a - (slope * log_n + intercept)
    return PowerLawFit(exponent=float(slope), prefactor=float(np.exp(intercept)),
                       residual=float(np.sqrt(np.mean(resid ** 2))))


def loss_scaling_samples(n_values, gamma_values, grid: SweepGrid,
                         threshold: float = DEFAULT_LOSS_THRESHOLD,
                         threads: int = 1) -> list[tuple[int, float, float]]:
    """Loss-area ratios for every (N, gamma) combination on one grid."""
    out = []
    for n in n_values:
        lossless = sweep_response(grid, n, 0.0, threads=threads)
        for g in gamma_values:
            lossy = sweep_response(grid, n, g, threads=threads)
            out.append((int(n), float(g), loss_area_ratio(lossless, lossy, threshold)))
    return out


def _slice_p_t(delta: float, phi: float, n: int, gamma: float) -> float:
    geom = ArrayGeometry.periodic(n, phi, EmitterParams(gamma_loss=gamma))
    return array_response_from_params(delta, geom).p_t


def find_transparency_points(n: int, phi: float, gamma: float = 0.0,
                             threshold: float = TRANSPARENCY_THRESHOLD) -> np.ndarray:
    """Detunings of the distinct unit-transmission maxima along a fixed-phi
    slice of the periodic-chain response.

    Candidate locations come from the chain's pass band: the unit cell's
    Bloch angle theta satisfies cos(theta) = cos(phi) + sin(phi)/(2*delta),
    and full transparency needs n*theta to be a multiple of pi, giving n-1
    candidates.  Each candidate is refined numerically inside its private
    bracket and counted only if the refined response really exceeds
    ``threshold``, so the returned count is a property of the numeric field,
    not of the candidate formula.
    """
    if n < 2:
        return np.array([])
    ks = np.arange(1, n)
    denom = np.cos(ks * np.pi / n) - math.cos(phi)
    with np.errstate(divide="ignore"):
        cands = 0.5 * math.sin(phi) / denom
    cands = np.sort(cands[np.isfinite(cands)])
    gaps = np.diff(cands)
    lo = cands - np.concatenate([[gaps[0] if gaps.size else 1.0], gaps]) / 2.0
    hi = cands + np.concatenate([gaps, [gaps[-1] if gaps.size else 1.0]]) / 2.0
    found = []
    for left, center, right in zip(lo, cands, hi):
        best_d, best_p = float(center), _slice_p_t(float(center), phi, n, gamma)
        res = minimize_scalar(lambda d: -_slice_p_t(d, phi, n, gamma),
                              bounds=(left, right), method="bounded",
                              options={"xatol": 1e-13})
        if -res.fun > best_p:
            best_d, best_p = float(res.x), -res.fun
        if best_p > threshold:
            found.append(best_d)
    return np.asarray(found)
