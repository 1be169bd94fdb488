"""Monte Carlo ensembles over positional and frequency disorder.

Positional disorder draws the inter-emitter phases from a Gaussian and
rejects negative draws (redrawing preserves a proper truncated-Gaussian
law; the quoted mean is by convention the pre-truncation one).  Frequency
disorder draws emitter transition frequencies, untruncated.  Every
realization owns an RNG stream keyed by (seed, realization index), so
results are bit-identical no matter how the work is scheduled.

Phase averages are vectorial: the argument of the weighted phasor sum.
Averaging wrapped angles arithmetically is wrong near +-pi — two shifts of
pi - eps and -(pi - eps) must average to pi, not 0 — and the suite keeps a
negative control demonstrating exactly that failure.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AllRealizationsSingular, ZeroResultant
from .scattering import emitter_q, singular_mask
from .transfer import ArrayGeometry, chain_many, wrap_phase

POSITION = "position"
FREQUENCY = "frequency"

# Phasor sums whose magnitude is pure rounding noise relative to the total
# weight have no meaningful argument; antipodal pairs land here.
RESULTANT_FLOOR = 1e-12


@dataclass(frozen=True)
class DisorderSpec:
    """What to randomize, how strongly, how often, and from which seed."""

    kind: str
    mean: float
    sigma: float
    n_realizations: int
    seed: int

    def __post_init__(self) -> None:
        if self.kind not in (POSITION, FREQUENCY):
            raise ValueError(f"kind must be {POSITION!r} or {FREQUENCY!r}, got {self.kind!r}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.n_realizations < 1:
            raise ValueError(f"need at least one realization, got {self.n_realizations}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class DisorderEnsembleResult:
    """Per-realization observables plus their ensemble summaries.

    mean_pt is arithmetic; mean_shift is the vectorial mean with
    resultant_length as its dispersion diagnostic (1 = concentrated,
    0 = uniform).  Realizations hitting a singular transfer matrix are
    dropped and only n_effective survivors enter the averages.
    """

    p_t_samples: np.ndarray
    shift_samples: np.ndarray
    mean_pt: float
    mean_shift: float
    resultant_length: float
    n_effective: int

    @property
    def se_pt(self) -> float:
        """Standard error of mean_pt (zero for a single survivor)."""
        if self.n_effective < 2:
            return 0.0
        return float(np.std(self.p_t_samples, ddof=1) / np.sqrt(self.n_effective))


def _stream(seed: int, realization_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(realization_index,)))


def sample_position_phases(spec: DisorderSpec, n_gaps: int,
                           realization_index: int) -> np.ndarray:
    """Gaussian inter-emitter phases with negative draws redrawn."""
    if spec.kind != POSITION:
        raise ValueError(f"spec.kind is {spec.kind!r}, expected {POSITION!r}")
    if spec.sigma == 0.0:
        if spec.mean < 0:
            raise ValueError("mean phase must be nonnegative when sigma is 0")
        return np.full(n_gaps, spec.mean)
    rng = _stream(spec.seed, realization_index)
    out = rng.normal(spec.mean, spec.sigma, n_gaps)
    bad = out < 0
    while bad.any():
        out[bad] = rng.normal(spec.mean, spec.sigma, int(bad.sum()))
        bad = out < 0
    return out


def sample_frequencies(spec: DisorderSpec, n_emitters: int,
                       realization_index: int) -> np.ndarray:
    """Gaussian transition frequencies; negative detunings are physical, so
    no truncation."""
    if spec.kind != FREQUENCY:
        raise ValueError(f"spec.kind is {spec.kind!r}, expected {FREQUENCY!r}")
    rng = _stream(spec.seed, realization_index)
    return rng.normal(spec.mean, spec.sigma, n_emitters)


def vectorial_phase_average(shifts, weights=None) -> tuple[float, float]:
    """Mean direction and resultant length of weighted phase samples.

    Returns (Arg of the weighted phasor sum wrapped to (-pi, pi],
    |sum| / sum of weights).  Raises ZeroResultant when the phasors cancel
    so completely that no direction survives.
    """
    shifts = np.asarray(shifts, float)
    if weights is None:
        weights = np.ones_like(shifts)
    weights = np.asarray(weights, float)
    if weights.shape != shifts.shape:
        raise ValueError("weights and shifts must have matching shapes")
    if (weights < 0).any():
        raise ValueError("weights must be nonnegative")
    total = weights.sum()
    if not total > 0:
        raise ValueError("weights must not all vanish")
    z = np.sum(weights * np.exp(1j * shifts))
    if abs(z) < RESULTANT_FLOOR * total:
        raise ZeroResultant("phasor sum vanished; mean phase undefined")
    return float(wrap_phase(np.angle(z))), float(abs(z) / total)


@dataclass
class DisorderField:
    """Ensemble maps on a (detuning, mean-phase) grid; arrays [phi, delta]."""

    deltas: np.ndarray
    phis: np.ndarray
    mean_pt: np.ndarray
    mean_shift: np.ndarray
    resultant_length: np.ndarray
    n_effective: np.ndarray


def run_disorder_ensemble(base_geometry: ArrayGeometry, spec: DisorderSpec,
                          omega: float,
                          phase_weighting: str = "uniform") -> DisorderEnsembleResult:
    """Ensemble means of transmission probability and referenced phase shift.

    For positional disorder the base geometry fixes the gap count and the
    emitters; sampled phases replace the base phases wholesale (spec.mean is
    the authoritative mean).  For frequency disorder the base phases are kept
    and each emitter's transition frequency is redrawn around spec.mean.
    Each realization's phase shift is referenced to free propagation through
    that realization's own span.

    phase_weighting: "uniform" gives every survivor weight 1 (the plain
    Monte Carlo estimator); "transmission" weights by each realization's
    transmission probability.
    """
    if phase_weighting not in ("uniform", "transmission"):
        raise ValueError(f"unknown phase_weighting {phase_weighting!r}")
    n = base_geometry.n_emitters
    reals = spec.n_realizations

    if spec.kind == POSITION:
        phis = np.empty((max(n - 1, 0), reals))
        for r in range(reals):
            phis[:, r] = sample_position_phases(spec, n - 1, r)
        phi_rows = list(phis)
        deltas_rows = [np.asarray(omega - em.omega_e) for em in base_geometry.emitters]
        total_phase = phis.sum(axis=0) if n > 1 else np.zeros(reals)
    else:
        freqs = np.empty((n, reals))
        for r in range(reals):
            freqs[:, r] = sample_frequencies(spec, n, r)
        deltas_rows = [omega - freqs[i] for i in range(n)]
        phi_rows = [np.asarray(ph) for ph in base_geometry.phases]
        total_phase = base_geometry.total_phase

    singular = np.zeros(reals, bool)
    q_rows = []
    for em, deltas in zip(base_geometry.emitters, deltas_rows):
        singular |= np.broadcast_to(
            singular_mask(deltas, em.gamma_loss, em.gamma_wg), (reals,))
        q_rows.append(emitter_q(deltas, em.gamma_loss, em.gamma_wg))

    chain = chain_many(q_rows, phi_rows)
    p_t = np.broadcast_to(chain.p_t(), (reals,))
    shifts = np.broadcast_to(wrap_phase(chain.arg_t() - total_phase), (reals,))

    valid = ~singular
    n_effective = int(valid.sum())
    if n_effective == 0:
        raise AllRealizationsSingular(
            f"all {reals} realizations hit a singular transfer matrix")
    p_valid = p_t[valid]
    s_valid = shifts[valid]
    weights = p_valid if phase_weighting == "transmission" else None
    mean_shift, resultant = vectorial_phase_average(s_valid, weights)
    return DisorderEnsembleResult(
        p_t_samples=p_valid,
        shift_samples=s_valid,
        mean_pt=float(np.mean(p_valid)),
        mean_shift=mean_shift,
        resultant_length=resultant,
        n_effective=n_effective,
    )


def _ensemble_stats(p_t: np.ndarray, shifts: np.ndarray, singular: np.ndarray,
                    phase_weighting: str):
    """Summaries over the realization axis (last) of node-shaped arrays."""
    valid = ~singular
    n_eff = valid.sum(axis=-1)
    w = np.where(valid, p_t if phase_weighting == "transmission" else 1.0, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_pt = np.where(valid, p_t, 0.0).sum(axis=-1) / n_eff
        z = (w * np.exp(1j * np.where(valid, shifts, 0.0))).sum(axis=-1)
        mean_shift = wrap_phase(np.angle(z))
        resultant = np.abs(z) / w.sum(axis=-1)
    empty = n_eff == 0
    for arr in (mean_pt, mean_shift, resultant):
        arr[..., empty] = np.nan
    return mean_pt, mean_shift, resultant, n_eff


def disorder_sweep(deltas, phis, n_emitters: int, spec_kind: str, sigma: float,
                   n_realizations: int, seed: int, gamma_loss: float = 0.0,
                   phase_weighting: str = "uniform", threads: int = 1,
                   block_elements: int = 2_000_000) -> DisorderField:
    """Ensemble maps over a rectangular (detuning, mean-phase) grid.

    Realization streams are keyed by (seed, realization index) only, exactly
    as in run_disorder_ensemble, so a map cell equals the single-point result
    at the same parameters bit for bit.  For positional disorder the phase
    draws depend on the row's mean phase and are shared across the detuning
    axis; for frequency disorder one set of frequency draws serves the whole
    grid.  Rows are processed in detuning blocks to bound memory, and may be
    farmed out to threads (results land by index; any thread count gives
    identical bytes).
    """
    if phase_weighting not in ("uniform", "transmission"):
        raise ValueError(f"unknown phase_weighting {phase_weighting!r}")
    deltas = np.asarray(deltas, float)
    phis = np.asarray(phis, float)
    n = n_emitters
    reals = n_realizations
    shape = (phis.size, deltas.size)
    mean_pt = np.empty(shape)
    mean_shift = np.empty(shape)
    resultant = np.empty(shape)
    n_eff = np.empty(shape, int)

    block = max(1, block_elements // max(1, reals * n))

    if spec_kind == FREQUENCY:
        fspec = DisorderSpec(kind=FREQUENCY, mean=0.0, sigma=sigma,
                             n_realizations=reals, seed=seed)
        offsets = np.empty((n, reals))
        for r in range(reals):
            offsets[:, r] = sample_frequencies(fspec, n, r)

    def fill_row(i: int) -> None:
        phi = float(phis[i])
        if spec_kind == POSITION:
            pspec = DisorderSpec(kind=POSITION, mean=phi, sigma=sigma,
                                 n_realizations=reals, seed=seed)
            gaps = np.empty((max(n - 1, 0), reals))
            for r in range(reals):
                gaps[:, r] = sample_position_phases(pspec, n - 1, r)
            phi_rows = [g[np.newaxis, :] for g in gaps]
            total = gaps.sum(axis=0)[np.newaxis, :] if n > 1 else 0.0
        else:
            phi_rows = [np.asarray(phi)] * (n - 1)
            row_total = float(sum((phi,) * (n - 1)))  # match ArrayGeometry.total_phase
        for start in range(0, deltas.size, block):
            dblk = deltas[start:start + block, np.newaxis]
            if spec_kind == POSITION:
                q_rows = [emitter_q(dblk, gamma_loss)] * n
                sing = np.broadcast_to(singular_mask(dblk, gamma_loss),
                                       (dblk.size, reals))
                tot = total
            else:
                drows = [dblk - offsets[j] for j in range(n)]
                sing = np.zeros((dblk.size, reals), bool)
                for d in drows:
                    sing |= singular_mask(d, gamma_loss)
                q_rows = [emitter_q(d, gamma_loss) for d in drows]
                tot = row_total
            chain = chain_many(q_rows, phi_rows)
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                p_t = np.broadcast_to(chain.p_t(), (dblk.size, reals))
                shifts = np.broadcast_to(
                    wrap_phase(chain.arg_t() - tot), (dblk.size, reals))
            mp, ms, rl, ne = _ensemble_stats(p_t, shifts, sing, phase_weighting)
            sl = slice(start, start + dblk.size)
            mean_pt[i, sl] = mp
            mean_shift[i, sl] = ms
            resultant[i, sl] = rl
            n_eff[i, sl] = ne

    workers = threads if threads > 0 else min(8, os.cpu_count() or 1)
    if workers <= 1:
        for i in range(phis.size):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_row, range(phis.size)))
    return DisorderField(deltas=deltas, phis=phis, mean_pt=mean_pt,
                         mean_shift=mean_shift, resultant_length=resultant,
                         n_effective=n_eff)
