"""2x2 transfer-matrix composition for emitter chains.

A chain of emitters and free-propagation stretches is the ordered product
T(q_N) P(phi_{N-1}) ... P(phi_1) T(q_1), relating right/left mode amplitudes
just left of the first emitter to those just right of the last.  Deep in
reflecting regions the product grows like exp(N), so every matrix carries a
separate log-magnitude factor and the running product is renormalized
whenever an entry leaves the comfortable float range.

Sign conventions, fixed once and asserted in the test suite: the array
transmission is 1/M22 (reduces to the single-emitter t1 exactly for N=1)
and the array reflection is -M21/M22 (reduces to r1, and agrees with the
plane-wave mode-matching solution for every N).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateMatrix, SingularTransmission
from .scattering import (EmitterParams, SINGULAR_FLOOR, emitter_q,
                         reflection_transmission_ratio, singular_mask)

# Entry magnitude above which a running product is rescaled into log_scale.
RENORM_THRESHOLD = 1e2


def wrap_phase(x):
    """Wrap angle(s) to the interval (-pi, pi]; exact at the branch point."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


@dataclass(frozen=True)
class ScaledMatrix:
    """2x2 complex matrix with its magnitude split off as exp(log_scale).

    The represented matrix is [[m11, m12], [m21, m22]] * exp(log_scale).
    Products of emitter and propagation factors have determinant 1, so
    det(m) * exp(2*log_scale) == 1 is an invariant of every composition.
    """

    m11: complex
    m12: complex
    m21: complex
    m22: complex
    log_scale: float = 0.0

    @classmethod
    def identity(cls) -> "ScaledMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    def left_multiplied(self, o: "ScaledMatrix") -> "ScaledMatrix":
        """Return o @ self, accumulating log scales."""
        return ScaledMatrix(
            o.m11 * self.m11 + o.m12 * self.m21,
            o.m11 * self.m12 + o.m12 * self.m22,
            o.m21 * self.m11 + o.m22 * self.m21,
            o.m21 * self.m12 + o.m22 * self.m22,
            self.log_scale + o.log_scale,
        )

    def renormalized(self, threshold: float = RENORM_THRESHOLD) -> "ScaledMatrix":
        """Push entry magnitude into log_scale once it exceeds ``threshold``."""
        a = max(abs(self.m11), abs(self.m12), abs(self.m21), abs(self.m22))
        if a <= threshold:
            return self
        return ScaledMatrix(self.m11 / a, self.m12 / a, self.m21 / a,
                            self.m22 / a, self.log_scale + math.log(a))

    def det(self) -> complex:
        """Determinant of the represented matrix, scale reinstated."""
        return (self.m11 * self.m22 - self.m12 * self.m21) * math.exp(2.0 * self.log_scale)

    def as_array(self) -> np.ndarray:
        """Represented matrix as a dense 2x2 array (may overflow if huge)."""
        s = math.exp(self.log_scale)
        return np.array([[self.m11, self.m12], [self.m21, self.m22]]) * s


@dataclass(frozen=True)
class ArrayGeometry:
    """Ordered emitters plus the N-1 propagation phases between neighbours."""

    emitters: tuple[EmitterParams, ...]
    phases: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.phases) != len(self.emitters) - 1:
            raise ValueError(
                f"{len(self.emitters)} emitters need {len(self.emitters) - 1} "
                f"phases, got {len(self.phases)}")
        for ph in self.phases:
            if not math.isfinite(ph) or ph < 0:
                raise ValueError(f"phases must be finite and nonnegative, got {ph!r}")

    @classmethod
    def periodic(cls, n: int, phi: float,
                 emitter: EmitterParams = EmitterParams()) -> "ArrayGeometry":
        """n identical emitters separated by a common phase phi."""
        if n < 1:
            raise ValueError("need at least one emitter")
        return cls((emitter,) * n, (float(phi),) * (n - 1))

    @property
    def n_emitters(self) -> int:
        return len(self.emitters)

    @property
    def total_phase(self) -> float:
        """Phase a photon picks up traversing the whole array freely."""
        return float(sum(self.phases))


@dataclass(frozen=True)
class TimedArray:
    """Emitters with fixed temporal spacings (units of 1/gamma_wg).

    Unlike ArrayGeometry, whose phases are frozen numbers, a TimedArray
    yields frequency-dependent phases phi_j = omega * gap_j, which is what
    finite-bandwidth pulses sample.
    """

    emitters: tuple[EmitterParams, ...]
    gaps: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gaps) != len(self.emitters) - 1:
            raise ValueError("gaps length must be one less than emitter count")
        for g in self.gaps:
            if not math.isfinite(g) or g < 0:
                raise ValueError(f"gaps must be finite and nonnegative, got {g!r}")

    @classmethod
    def periodic(cls, n: int, tau: float,
                 emitter: EmitterParams = EmitterParams()) -> "TimedArray":
        return cls((emitter,) * n, (float(tau),) * (n - 1))

    @classmethod
    def at_operating_point(cls, n: int, phi: float, delta: float,
                           omega_e: float, gamma_loss: float = 0.0) -> "TimedArray":
        """Periodic array whose spacing realises phase ``phi`` at detuning
        ``delta`` from an emitter line at ``omega_e`` (requires omega > 0)."""
        omega = omega_e + delta
        if omega <= 0:
            raise ValueError(f"carrier frequency must be positive, got {omega!r}")
        emitter = EmitterParams(omega_e=omega_e, gamma_loss=gamma_loss)
        return cls.periodic(n, phi / omega, emitter)

    @property
    def total_delay(self) -> float:
        return float(sum(self.gaps))

    def geometry_at(self, omega: float) -> ArrayGeometry:
        return ArrayGeometry(self.emitters, tuple(omega * g for g in self.gaps))


@dataclass(frozen=True)
class ArrayResponse:
    """Transmission/reflection of a whole chain at one frequency.

    phase_shift is the transmitted phase referenced to free propagation
    through the same span; it is filled by callers that know the span
    (array_response_from_params) and None otherwise.
    """

    t_n: complex
    r_n: complex
    p_t: float
    phase_shift: float | None = None

    @property
    def p_r(self) -> float:
        return abs(self.r_n) ** 2

    @property
    def flux_deficit(self) -> float:
        return 1.0 - self.p_t - self.p_r


def emitter_transmission_matrix(q: complex) -> ScaledMatrix:
    """Transfer factor of a single emitter with reflection-transmission ratio q.

    The generator behind it is nilpotent, so the matrix exponential truncates
    exactly after the linear term: [[1+q, q], [-q, 1-q]], determinant 1.
    """
    return ScaledMatrix(1.0 + q, q, -q, 1.0 - q)


def propagation_matrix(phi: float) -> ScaledMatrix:
    """Free-propagation factor diag(e^{i*phi}, e^{-i*phi})."""
    e = cmath.exp(1j * phi)
    return ScaledMatrix(e, 0.0, 0.0, e.conjugate())


def compose_array(geometry: ArrayGeometry, omega: float,
                  renorm_threshold: float = RENORM_THRESHOLD) -> ScaledMatrix:
    """Full-chain transfer matrix at frequency ``omega``.

    Per-emitter detunings are omega - omega_e, so chains with unequal
    transition frequencies compose the same way as uniform ones.
    """
    m: ScaledMatrix | None = None
    for idx, em in enumerate(geometry.emitters):
        try:
            qv = reflection_transmission_ratio(omega - em.omega_e, em)
        except SingularTransmission as exc:
            raise SingularTransmission(
                f"emitter {idx}: {exc}", emitter_index=idx) from None
        factor = emitter_transmission_matrix(qv)
        if m is None:
            m = factor
        else:
            m = m.left_multiplied(propagation_matrix(geometry.phases[idx - 1]))
            m = m.left_multiplied(factor)
        m = m.renormalized(renorm_threshold)
    assert m is not None
    return m


def array_response(m: ScaledMatrix) -> ArrayResponse:
    """Extract transmission and reflection from a composed transfer matrix.

    t = exp(-log_scale)/m22 may underflow to zero deep in dark regions; the
    probability is computed from log_scale directly so it degrades gracefully
    instead of overflowing.
    """
    if m.m22 == 0:
        raise DegenerateMatrix("transfer matrix has m22 == 0")
    t = cmath.exp(-m.log_scale) / m.m22
    r = -m.m21 / m.m22
    p_t = math.exp(-2.0 * m.log_scale) / abs(m.m22) ** 2
    return ArrayResponse(t_n=t, r_n=r, p_t=p_t)


def array_response_from_params(omega: float, geometry: ArrayGeometry,
                               renorm_threshold: float = RENORM_THRESHOLD) -> ArrayResponse:
    """Compose the chain at ``omega`` and fill in the referenced phase shift.

    The reference subtracts the free-propagation phase over the array span,
    i.e. the sum of the geometry's phases; the phase is taken from m22 rather
    than from t itself so it stays meaningful where |t| underflows.
    """
    m = compose_array(geometry, omega, renorm_threshold)
    resp = array_response(m)
    shift = float(wrap_phase(-cmath.phase(complex(m.m22)) - geometry.total_phase))
    return replace(resp, phase_shift=shift)


@dataclass
class ChainResult:
    """Batched transfer-matrix products: one entry per parameter sample."""

    m11: np.ndarray
    m12: np.ndarray
    m21: np.ndarray
    m22: np.ndarray
    log_scale: np.ndarray

    def transmission(self) -> np.ndarray:
        return np.exp(-self.log_scale) / self.m22

    def reflection(self) -> np.ndarray:
        return -self.m21 / self.m22

    def p_t(self) -> np.ndarray:
        return np.exp(-2.0 * self.log_scale) / np.abs(self.m22) ** 2

    def p_r(self) -> np.ndarray:
        return np.abs(self.m21) ** 2 / np.abs(self.m22) ** 2

    def arg_t(self) -> np.ndarray:
        return -np.angle(self.m22)

    def det(self) -> np.ndarray:
        return (self.m11 * self.m22 - self.m12 * self.m21) * np.exp(2.0 * self.log_scale)


def chain_many(q_rows, phi_rows, renorm_threshold: float = RENORM_THRESHOLD) -> ChainResult:
    """Compose many chains at once.

    q_rows is a sequence of N arrays (ratio per emitter), phi_rows a sequence
    of N-1 arrays (phase per gap); all broadcast against each other to the
    common sample shape.  Rows may be shared objects — passing [q] * N costs
    nothing — which keeps grid sweeps at O(grid) memory.
    """
    q_rows = [np.asarray(q) for q in q_rows]
    phi_rows = [np.asarray(ph) for ph in phi_rows]
    if len(phi_rows) != len(q_rows) - 1:
        raise ValueError("need exactly one phase row between consecutive emitters")
    shape = np.broadcast_shapes(*(a.shape for a in q_rows),
                                *(a.shape for a in phi_rows))
    # inf/nan entries (singular emitters) flow through; callers mask them
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        q0 = np.broadcast_to(q_rows[0], shape)
        m11 = np.ones(shape, complex) + q0
        m12 = np.empty(shape, complex)
        m12[...] = q0
        m21 = -q0
        m22 = 1.0 - q0
        log_scale = np.zeros(shape)
        for n in range(1, len(q_rows)):
            e = np.exp(1j * phi_rows[n - 1])
            a11 = m11 * e
            a12 = m12 * e
            a21 = m21 * np.conj(e)
            a22 = m22 * np.conj(e)
            q = q_rows[n]
            m11 = (1.0 + q) * a11 + q * a21
            m12 = (1.0 + q) * a12 + q * a22
            m21 = -q * a11 + (1.0 - q) * a21
            m22 = -q * a12 + (1.0 - q) * a22
            peak = np.maximum(np.maximum(np.abs(m11), np.abs(m12)),
                              np.maximum(np.abs(m21), np.abs(m22)))
            over = peak > renorm_threshold
            if over.any():
                s = np.where(over, peak, 1.0)
                m11 = m11 / s
                m12 = m12 / s
                m21 = m21 / s
                m22 = m22 / s
                log_scale = log_scale + np.log(s)
    return ChainResult(m11, m12, m21, m22, log_scale)


def chain_singular_mask(deltas_rows, gamma_loss=0.0, gamma_wg=1.0,
                        floor: float = SINGULAR_FLOOR) -> np.ndarray:
    """Samples for which any emitter in the chain is a perfect reflector."""
    mask = None
    for deltas in deltas_rows:
        m = singular_mask(deltas, gamma_loss, gamma_wg, floor)
        mask = m if mask is None else (mask | m)
    return np.asarray(mask)


__all__ = [
    "ArrayGeometry", "ArrayResponse", "ChainResult", "RENORM_THRESHOLD",
    "ScaledMatrix", "TimedArray", "array_response",
    "array_response_from_params", "chain_many", "chain_singular_mask",
    "compose_array", "emitter_q", "emitter_transmission_matrix",
    "propagation_matrix", "wrap_phase",
]
