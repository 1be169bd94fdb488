"""Closed-form scattering coefficients of a single two-level emitter.

Everything downstream (transfer matrices, gate design, disorder ensembles)
is built from the three functions here.  Frequencies, detunings and rates
are all expressed in units of the waveguide coupling rate; ``gamma_wg``
appears in the API only so mixed-rate chains remain expressible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularTransmission

# |t1| below this floor is treated as an exact zero (perfect reflector).
SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True)
class EmitterParams:
    """One two-level emitter.

    omega_e     transition frequency (same units as the detuning grid)
    gamma_loss  decay rate into non-waveguide modes, >= 0
    gamma_wg    decay rate into the waveguide, > 0; the unit of all rates
    """

    omega_e: float = 0.0
    gamma_loss: float = 0.0
    gamma_wg: float = 1.0

    def __post_init__(self) -> None:
        if not self.gamma_wg > 0:
            raise ValueError(f"gamma_wg must be positive, got {self.gamma_wg}")
        if self.gamma_loss < 0:
            raise ValueError(f"gamma_loss must be nonnegative, got {self.gamma_loss}")


@dataclass(frozen=True)
class SingleEmitterResponse:
    """Transmission amplitude, reflection amplitude and their ratio."""

    t1: complex
    r1: complex
    q: complex


def reflection_coefficient_single(delta, p: EmitterParams) -> complex:
    """Complex reflection amplitude at detuning ``delta``.

    -i*Gamma / (2*delta + i*(gamma + Gamma)); accepts scalars or arrays.
    """
    return -1j * p.gamma_wg / (2.0 * delta + 1j * (p.gamma_loss + p.gamma_wg))


def transmission_coefficient_single(delta, p: EmitterParams) -> complex:
    """Complex transmission amplitude at detuning ``delta``.

    Algebraically (2*delta + i*gamma) / (2*delta + i*(gamma + Gamma)); written
    as 1 + r so the amplitude identity t - r = 1 holds to the last bit instead
    of picking up a rounding error from two separate divisions.
    """
    return 1.0 + reflection_coefficient_single(delta, p)


def reflection_transmission_ratio(delta: float, p: EmitterParams,
                                  floor: float = SINGULAR_FLOOR) -> complex:
    """r1/t1 for one emitter, the quantity the transfer matrix is built from.

    Simplifies to -i*Gamma / (2*delta + i*gamma), which diverges for a
    resonant lossless emitter; raises SingularTransmission when |t1| < floor.
    """
    t1 = transmission_coefficient_single(delta, p)
    if abs(t1) < floor:
        raise SingularTransmission(
            f"resonant lossless emitter (delta={delta!r}, gamma_loss="
            f"{p.gamma_loss!r}): |t1| < {floor:g}, perfect reflector")
    return -1j * p.gamma_wg / (2.0 * delta + 1j * p.gamma_loss)


def single_emitter_response(delta: float, p: EmitterParams) -> SingleEmitterResponse:
    """Bundle t1, r1 and q at one detuning; raises where q is undefined."""
    return SingleEmitterResponse(
        t1=transmission_coefficient_single(delta, p),
        r1=reflection_coefficient_single(delta, p),
        q=reflection_transmission_ratio(delta, p),
    )


def emitter_q(delta, gamma_loss=0.0, gamma_wg=1.0):
    """Array-friendly r1/t1 without the singularity check.

    Used by the batched chain kernels, which flag singular samples through
    ``singular_mask`` instead of raising; singular entries come out as
    inf/nan and are masked downstream.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        return -1j * gamma_wg / (2.0 * np.asarray(delta) + 1j * gamma_loss)


def singular_mask(delta, gamma_loss=0.0, gamma_wg=1.0, floor=SINGULAR_FLOOR):
    """Boolean mask of samples where the transfer matrix is undefined."""
    t1 = 1.0 - 1j * gamma_wg / (2.0 * np.asarray(delta) + 1j * (gamma_loss + gamma_wg))
    return np.abs(t1) < floor
