"""Operating-point analytics for perfectly periodic, lossless arrays.

An even-length chain transmits perfectly whenever the detuning sits on the
curve delta = -tan(phi)/2 (units of the waveguide rate).  Along that curve
the transmitted phase, referenced to free propagation, is the wrapped value
of (n/2)*(pi - 2*phi): an affine function of phi with slope -n, so it sweeps
the full circle on windows of width 2*pi/n.  Each window is a "branch"; a
branch makes a usable phase gate if it stays away from resonance and from
the tan singularity at phi = pi/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (LossyResponse, NearSingularPhase, NotReachable,
                     OddEmitterCount, TargetOutsideBranch)
from .scattering import EmitterParams
from .transfer import (ArrayGeometry, ArrayResponse,
                       array_response_from_params, wrap_phase)

NEAR_SINGULAR_PHI = 1e-9
DELTA_MAX_DEFAULT = 20.0
LOSSY_FLUX_TOLERANCE = 1e-6
CONCATENATION_CAP = 10 ** 6


@dataclass(frozen=True)
class OperatingPoint:
    """A point on the perfect-transmission curve of an even-length array."""

    phi: float
    delta: float
    n_emitters: int
    predicted_shift: float

    def __post_init__(self) -> None:
        if self.n_emitters % 2 or self.n_emitters < 2:
            raise OddEmitterCount(f"even emitter count required, got {self.n_emitters}")
        on_curve = -0.5 * math.tan(self.phi)
        if abs(self.delta - on_curve) > 1e-12 * max(1.0, abs(on_curve)):
            raise ValueError(
                f"delta={self.delta!r} is off the perfect-transmission curve "
                f"for phi={self.phi!r} (expected {on_curve!r})")


@dataclass(frozen=True)
class CoverageBranch:
    """phi window on which the gate shift sweeps the whole circle exactly once."""

    index: int
    phi_interval: tuple[float, float]
    delta_interval: tuple[float, float]


@dataclass(frozen=True)
class QubitState:
    """Dual-rail logical qubit amplitudes (photon in channel A / channel B)."""

    amp0: complex
    amp1: complex

    def __post_init__(self) -> None:
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |amp0|^2+|amp1|^2 = {norm!r}")


def deterministic_detuning(phi: float) -> float:
    """Detuning (units of the waveguide rate) of the perfect-transmission
    curve at propagation phase ``phi``; undefined within NEAR_SINGULAR_PHI
    of pi/2."""
    if abs(phi - math.pi / 2.0) < NEAR_SINGULAR_PHI:
        raise NearSingularPhase(f"phi={phi!r} too close to pi/2")
    return -0.5 * math.tan(phi)


def deterministic_phase_shift(n: int, phi: float) -> float:
    """Referenced transmission phase on the curve, wrapped to (-pi, pi]."""
    if n % 2 or n < 2:
        raise OddEmitterCount(f"even emitter count >= 2 required, got {n}")
    return float(wrap_phase((n / 2.0) * (math.pi - 2.0 * phi)))


def operating_point(n: int, phi: float) -> OperatingPoint:
    """Operating point at phase ``phi`` on the curve for an even-n array."""
    return OperatingPoint(phi=float(phi), delta=deterministic_detuning(phi),
                          n_emitters=n, predicted_shift=deterministic_phase_shift(n, phi))


def curve_response(point: OperatingPoint, gamma_loss: float = 0.0) -> ArrayResponse:
    """Numeric chain response at an operating point."""
    geom = ArrayGeometry.periodic(point.n_emitters, point.phi,
                                  EmitterParams(gamma_loss=gamma_loss))
    return array_response_from_params(point.delta, geom)


def verify_operating_point(point: OperatingPoint) -> tuple[float, float]:
    """Residuals of the analytic operating point against the lossless chain.

    Returns (| |T|^2 - 1 |, |wrapped phase mismatch|).
    """
    resp = curve_response(point)
    assert resp.phase_shift is not None
    return (abs(resp.p_t - 1.0),
            abs(float(wrap_phase(resp.phase_shift - point.predicted_shift))))


def find_coverage_branches(n: int, delta_max: float = DELTA_MAX_DEFAULT) -> list[CoverageBranch]:
    """Branches giving full (-pi, pi] coverage within |delta| <= delta_max.

    Branch m occupies phi in [pi/2 - (2m+1)pi/n, pi/2 - (2m-1)pi/n].  It
    qualifies only if the whole window sits strictly inside (0, pi), excludes
    pi/2 (where the curve detuning diverges) and maps to detunings bounded by
    delta_max; windows touching phi = 0 or pi reach zero detuning and are
    rejected.  The list may be empty (it is for n = 2).
    """
    if n % 2 or n < 2:
        raise OddEmitterCount(f"even emitter count >= 2 required, got {n}")
    if delta_max <= 0:
        raise ValueError("delta_max must be positive")
    half = math.pi / 2.0
    branches = []
    for m in range(-n, n + 1):
        lo = half - (2 * m + 1) * math.pi / n
        hi = half - (2 * m - 1) * math.pi / n
        if lo <= 0.0 or hi >= math.pi:
            continue
        if lo <= half <= hi:
            continue
        d_lo = -0.5 * math.tan(lo)
        d_hi = -0.5 * math.tan(hi)
        if max(abs(d_lo), abs(d_hi)) > delta_max:
            continue
        branches.append(CoverageBranch(
            index=m,
            phi_interval=(lo, hi),
            delta_interval=(min(d_lo, d_hi), max(d_lo, d_hi)),
        ))
    branches.sort(key=lambda b: b.index)
    return branches


def design_gate(target_shift: float, n: int,
                branch: CoverageBranch | int = 0) -> OperatingPoint:
    """Invert the shift rule on one branch: target phase -> operating point.

    ``branch`` may be a CoverageBranch or a bare branch index; index 0 is the
    window containing phi = pi/2, usable for targets away from zero shift.
    """
    if n % 2 or n < 2:
        raise OddEmitterCount(f"even emitter count >= 2 required, got {n}")
    if not (-math.pi < target_shift <= math.pi):
        raise TargetOutsideBranch(
            f"target shift {target_shift!r} outside (-pi, pi]")
    m = branch.index if isinstance(branch, CoverageBranch) else int(branch)
    phi = math.pi / 2.0 - (target_shift + 2.0 * math.pi * m) / n
    if not 0.0 < phi < math.pi:
        raise TargetOutsideBranch(
            f"branch {m} puts phi = {phi!r} outside (0, pi) for n = {n}")
    if isinstance(branch, CoverageBranch):
        lo, hi = branch.phi_interval
        if not lo <= phi <= hi:
            raise TargetOutsideBranch(
                f"phi = {phi!r} falls outside branch {m} window [{lo!r}, {hi!r}]")
    return operating_point(n, phi)


def concatenation_plan(per_pass_shift: float, target_shift: float,
                       tolerance: float, k_max: int = CONCATENATION_CAP) -> int:
    """Smallest number of gate passes whose accumulated shift hits the target.

    Searches k = 1..k_max for |wrap(k*per_pass - target)| <= tolerance; a
    per-pass shift that is an irrational multiple of pi reaches every target
    eventually, a rational one may never get close (NotReachable).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    chunk = 100_000
    for start in range(1, k_max + 1, chunk):
        ks = np.arange(start, min(start + chunk, k_max + 1))
        miss = np.abs(wrap_phase(ks * per_pass_shift - target_shift))
        hits = np.nonzero(miss <= tolerance)[0]
        if hits.size:
            return int(ks[hits[0]])
    raise NotReachable(
        f"no k <= {k_max} brings k*{per_pass_shift!r} within "
        f"{tolerance!r} of {target_shift!r}")


def prepare_qubit_state_phase_gate(theta: float, shift: float) -> QubitState:
    """Qubit state produced by a beam splitter of angle theta followed by the
    phase gate acting on the transmitted-channel amplitude."""
    return QubitState(amp0=math.cos(theta / 2.0),
                      amp1=cmath.exp(1j * shift) * math.sin(theta / 2.0))


def prepare_qubit_state_beamsplitter(response: ArrayResponse,
                                     reflect_shift: float = 0.0) -> QubitState:
    """Qubit state when the array itself plays the beam splitter.

    Reflected photons feed channel A, transmitted ones channel B; the
    relative phase is transmission minus reflection phase, with
    ``reflect_shift`` available for extra path phase in the reflected arm.
    Requires an essentially lossless response.
    """
    if response.flux_deficit > LOSSY_FLUX_TOLERANCE:
        raise LossyResponse(
            f"flux deficit {response.flux_deficit:.3e} exceeds "
            f"{LOSSY_FLUX_TOLERANCE:g}: not a pure qubit state")
    p_t = min(max(response.p_t, 0.0), 1.0)
    phase_t = (response.phase_shift if response.phase_shift is not None
               else cmath.phase(response.t_n))
    phase_r = cmath.phase(response.r_n) + reflect_shift if p_t < 1.0 else reflect_shift
    return QubitState(amp0=math.sqrt(1.0 - p_t),
                      amp1=cmath.exp(1j * (phase_t - phase_r)) * math.sqrt(p_t))
