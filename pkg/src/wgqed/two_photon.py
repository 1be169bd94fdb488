"""Two-photon scattering from a single emitter: elastic and inelastic parts.

Two photons traversing one emitter either keep (or swap) their individual
frequencies — the elastic channel, a plain product of single-photon
transmissions — or exchange energy subject only to total-energy
conservation.  On that energy shell it is natural to work in centre-of-mass
coordinates: the conserved central frequency and the photon-photon
detunings before and after scattering.  Delta distributions are never
materialised; the functions here return the smooth coefficients living on
the constraint surface, which is exactly what gets plotted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooNarrow
from .scattering import (EmitterParams, reflection_coefficient_single,
                         transmission_coefficient_single)

TAIL_FRACTION = 1e-8


@dataclass(frozen=True)
class EnergyShellPoint:
    """Centre-of-mass coordinates on the total-energy shell.

    omega_c: conserved central frequency (omega_1 + omega_2)/2
    delta_in / delta_out: photon-photon detuning omega_1 - omega_2 before
    and after scattering.  The output central frequency is structurally
    identical to the input one, so it never appears as a free parameter.
    """

    omega_c: float
    delta_in: float
    delta_out: float


@dataclass(frozen=True)
class InelasticResult:
    """Normalized inelastic density and phase at one output detuning."""

    delta_out: float
    density: float
    phase: float


def elastic_coefficient(k1: float, k2: float, p: EmitterParams) -> complex:
    """Coefficient of the frequency-preserving (direct + exchange) channel:
    the product of the two single-photon transmissions."""
    return (transmission_coefficient_single(k1 - p.omega_e, p)
            * transmission_coefficient_single(k2 - p.omega_e, p))


def inelastic_amplitude(point: EnergyShellPoint, p: EmitterParams) -> complex:
    """Smooth coefficient of the energy-exchanging channel on the shell.

    Product of reflections at both output frequencies times the symmetrised
    sum of reflections at the input frequencies; manifestly symmetric under
    either detuning changing sign.
    """
    r_out_hi = reflection_coefficient_single(
        point.omega_c + point.delta_out / 2.0 - p.omega_e, p)
    r_out_lo = reflection_coefficient_single(
        point.omega_c - point.delta_out / 2.0 - p.omega_e, p)
    r_in_hi = reflection_coefficient_single(
        point.omega_c + point.delta_in / 2.0 - p.omega_e, p)
    r_in_lo = reflection_coefficient_single(
        point.omega_c - point.delta_in / 2.0 - p.omega_e, p)
    prefactor = 2.0 / (np.pi * p.gamma_wg)
    # pair products before applying the prefactor: commutativity then makes
    # the detuning sign flips exact, not just close
    return prefactor * ((r_out_hi * r_out_lo) * (r_in_hi + r_in_lo))


def symmetric_grid(half_width: float, n_points: int) -> np.ndarray:
    """Grid over [-half_width, half_width] that is exactly sign-symmetric.

    Built by mirroring the nonnegative half so x[i] == -x[-1-i] bitwise;
    n_points must be odd so zero sits in the middle.
    """
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("n_points must be odd and at least 3")
    half = np.linspace(0.0, half_width, (n_points + 1) // 2)
    return np.concatenate([-half[:0:-1], half])


def inelastic_density(omega_c: float, delta_in: float, delta_out_grid,
                      p: EmitterParams) -> list[InelasticResult]:
    """Normalized |amplitude|^2 over the output-detuning grid, plus phases.

    The grid must be symmetric about zero and wide enough that the edge
    amplitudes are negligible against the peak (GridTooNarrow otherwise);
    normalization is by the trapezoid rule on the same grid.
    """
    grid = np.asarray(delta_out_grid, float)
    if grid.ndim != 1 or grid.size < 3:
        raise ValueError("delta_out_grid must be a 1-D grid of at least 3 points")
    if np.max(np.abs(grid + grid[::-1])) > 0:
        raise ValueError("delta_out_grid must be symmetric about zero")
    amps = np.array([inelastic_amplitude(
        EnergyShellPoint(omega_c, delta_in, float(d)), p) for d in grid])
    mag2 = np.abs(amps) ** 2
    peak = mag2.max()
    if peak == 0.0:
        raise GridTooNarrow("inelastic amplitude vanishes on the whole grid")
    if max(mag2[0], mag2[-1]) > TAIL_FRACTION * peak:
        raise GridTooNarrow(
            f"edge density {max(mag2[0], mag2[-1]):.3e} exceeds "
            f"{TAIL_FRACTION:g} of the peak {peak:.3e}; widen the grid")
    norm = np.trapezoid(mag2, grid)
    density = mag2 / norm
    phase = np.angle(amps)
    return [InelasticResult(delta_out=float(d), density=float(rho), phase=float(ph))
            for d, rho, ph in zip(grid, density, phase)]
