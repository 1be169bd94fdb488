import numpy as np
import pytest

from wgqed import (EmitterParams, reflection_coefficient_single,
                   reflection_transmission_ratio, single_emitter_response,
                   transmission_coefficient_single)
from wgqed.errors import SingularTransmission

P = EmitterParams()


def test_emitter_params_validation():
    with pytest.raises(ValueError):
        EmitterParams(gamma_wg=0.0)
    with pytest.raises(ValueError):
        EmitterParams(gamma_wg=-1.0)
    with pytest.raises(ValueError):
        EmitterParams(gamma_loss=-0.1)


def test_resonant_lossless_values():
    assert transmission_coefficient_single(0.0, P) == 0.0
    assert reflection_coefficient_single(0.0, P) == -1.0 + 0.0j


def test_half_linewidth_detuning():
    # direct substitution: 1 / (1 + i)
    assert transmission_coefficient_single(0.5, P) == pytest.approx(0.5 - 0.5j, abs=1e-15)


def test_far_detuned_limits():
    for d in (1e9, -1e9):
        assert transmission_coefficient_single(d, P) == pytest.approx(1.0, abs=1e-8)
        assert reflection_coefficient_single(d, P) == pytest.approx(0.0, abs=1e-8)


def test_matches_direct_quotient():
    rng = np.random.default_rng(7)
    d = rng.uniform(-30, 30, 1000)
    g = rng.uniform(0, 5, 1000)
    t = transmission_coefficient_single(d, EmitterParams(gamma_loss=0.0))
    # gamma enters through the params object, so loop a few gammas explicitly
    for gamma in (0.0, 0.3, 2.0):
        p = EmitterParams(gamma_loss=gamma)
        t = transmission_coefficient_single(d, p)
        direct = (2 * d + 1j * gamma) / (2 * d + 1j * (gamma + 1.0))
        assert np.max(np.abs(t - direct)) < 5e-16


def test_amplitude_identity_exact():
    rng = np.random.default_rng(0)
    d = rng.uniform(-50, 50, 200_000)
    for gamma in (0.0, 0.18, 3.0):
        p = EmitterParams(gamma_loss=gamma)
        t = transmission_coefficient_single(d, p)
        r = reflection_coefficient_single(d, p)
        assert np.max(np.abs(t - r - 1.0)) <= 2 * np.spacing(1.0)


def test_flux_conservation_lossless():
    d = np.logspace(-6, 6, 2000)
    d = np.concatenate([d, -d])
    t = transmission_coefficient_single(d, P)
    r = reflection_coefficient_single(d, P)
    assert np.max(np.abs(np.abs(t) ** 2 + np.abs(r) ** 2 - 1.0)) < 1e-12


def test_flux_strictly_subunitary_with_loss():
    d = np.linspace(-20, 20, 4001)
    p = EmitterParams(gamma_loss=0.05)
    flux = (np.abs(transmission_coefficient_single(d, p)) ** 2
            + np.abs(reflection_coefficient_single(d, p)) ** 2)
    assert np.all(flux < 1.0)


def test_ratio_values():
    assert reflection_transmission_ratio(0.5, P) == pytest.approx(-1j, abs=1e-15)
    lossy = EmitterParams(gamma_loss=1.0)
    assert reflection_transmission_ratio(0.0, lossy) == pytest.approx(-1.0, abs=1e-15)


def test_ratio_purely_imaginary_lossless():
    rng = np.random.default_rng(3)
    for d in rng.uniform(0.01, 50, 50):
        q = reflection_transmission_ratio(d, P)
        assert q.real == 0.0


def test_ratio_singular_at_lossless_resonance():
    with pytest.raises(SingularTransmission):
        reflection_transmission_ratio(0.0, P)


def test_response_bundle():
    resp = single_emitter_response(0.5, P)
    assert resp.t1 - resp.r1 == pytest.approx(1.0, abs=1e-15)
    assert resp.q == pytest.approx(resp.r1 / resp.t1, abs=1e-14)
