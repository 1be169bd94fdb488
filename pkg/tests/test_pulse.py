import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from wgqed import (EmitterParams, GaussianPulse, TimedArray,
                   deterministic_detuning, pulse_amplitude, pulse_phase_shift,
                   pulse_transmission_probability, scattered_pulse_amplitude)
from wgqed.errors import QuadratureNotConverged, SingularTransmission
from wgqed.pulse import (adaptive_expectation, gaussian_expectation,
                         transmission_at)

OMEGA_E = 100.0


def on_curve_array(n=4, phi=1.3, omega_e=OMEGA_E):
    delta = deterministic_detuning(phi)
    return TimedArray.at_operating_point(n, phi, delta, omega_e), omega_e + delta


def test_pulse_validation():
    with pytest.raises(ValueError):
        GaussianPulse(omega_c=100.0, bandwidth=0.0)


def test_pulse_amplitude_peak_and_symmetry():
    pulse = GaussianPulse(omega_c=100.0, bandwidth=0.05)
    peak = (2 * math.pi * 0.05 ** 2) ** -0.25
    assert pulse_amplitude(100.0, pulse) == pytest.approx(peak, rel=1e-14)
    for x in (0.01, 0.1, 0.5):
        assert pulse_amplitude(100.0 + x, pulse) == pulse_amplitude(100.0 - x, pulse)


def test_pulse_amplitude_unit_mass():
    pulse = GaussianPulse(omega_c=42.0, bandwidth=0.3)
    mass, _ = quad(lambda w: float(pulse_amplitude(w, pulse)) ** 2,
                   42.0 - 8 * 0.3, 42.0 + 8 * 0.3, epsabs=1e-13, epsrel=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_scattered_amplitude_is_product():
    array, omega_c = on_curve_array()
    pulse = GaussianPulse(omega_c=omega_c, bandwidth=0.05)
    w = omega_c + 0.07
    expected = (complex(transmission_at(np.array([w]), array, reference=False)[0])
                * float(pulse_amplitude(w, pulse)))
    assert scattered_pulse_amplitude(w, pulse, array) == pytest.approx(expected, rel=1e-14)


def test_scattered_amplitude_far_detuned_transparent():
    array = TimedArray.periodic(4, 0.01, EmitterParams(omega_e=OMEGA_E))
    pulse = GaussianPulse(omega_c=OMEGA_E + 100.0, bandwidth=0.05)
    w = pulse.omega_c
    psi = float(pulse_amplitude(w, pulse))
    amp = scattered_pulse_amplitude(w, pulse, array)
    assert abs(amp) == pytest.approx(psi, rel=1e-4)


def test_gaussian_expectation_constant():
    pulse = GaussianPulse(omega_c=10.0, bandwidth=0.2)
    val = gaussian_expectation(lambda w: np.full_like(w, 3.25), pulse)
    assert val == pytest.approx(3.25, rel=1e-12)


def test_gaussian_expectation_moments():
    # second central moment of the spectral density is bandwidth^2
    pulse = GaussianPulse(omega_c=5.0, bandwidth=0.4)
    second = gaussian_expectation(lambda w: (w - 5.0) ** 2, pulse)
    assert second == pytest.approx(0.16, rel=1e-10)


def test_gaussian_expectation_not_converged():
    pulse = GaussianPulse(omega_c=0.0, bandwidth=1.0)
    with pytest.raises(QuadratureNotConverged):
        gaussian_expectation(lambda w: np.cos(1e7 * w), pulse, rtol=1e-12)


def test_quadrature_scheme_agreement():
    array, omega_c = on_curve_array()
    pulse = GaussianPulse(omega_c=omega_c, bandwidth=0.05)
    gauss = pulse_transmission_probability(pulse, array, method="gauss")
    adaptive = pulse_transmission_probability(pulse, array, method="adaptive")
    assert gauss == pytest.approx(adaptive, abs=1e-8)


def test_pulse_probability_bounded_and_near_unity_on_curve():
    array, omega_c = on_curve_array(phi=1.3)
    for bw in (0.1, 0.01):
        p = pulse_transmission_probability(GaussianPulse(omega_c, bw), array)
        assert 0.0 <= p <= 1.0
    p_narrow = pulse_transmission_probability(GaussianPulse(omega_c, 1e-3), array)
    assert p_narrow == pytest.approx(1.0, abs=1e-6)


def test_monochromatic_limit_quadratic_in_bandwidth():
    array, omega_c = on_curve_array(phi=1.3)
    mono = 1.0  # on-curve point transmits perfectly
    bws = [1e-1, 1e-2, 1e-3]
    errs = [abs(pulse_transmission_probability(GaussianPulse(omega_c, bw), array) - mono)
            for bw in bws]
    slope = np.polyfit(np.log(bws), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.2)


def test_phase_shift_constant_response():
    pulse = GaussianPulse(omega_c=3.0, bandwidth=0.1)
    val = gaussian_expectation(
        lambda w: np.full(w.shape, cmath.exp(0.77j), complex), pulse)
    assert np.angle(val) == pytest.approx(0.77, abs=1e-12)


def test_phase_shift_monochromatic_limit():
    array, omega_c = on_curve_array(n=4, phi=1.0)
    t_mono = complex(transmission_at(np.array([omega_c]), array)[0])
    shift_mono = cmath.phase(t_mono)
    shift_narrow = pulse_phase_shift(GaussianPulse(omega_c, 1e-4), array)
    assert shift_narrow == pytest.approx(shift_mono, abs=1e-6)


def test_phase_shift_antisymmetric_profile_cancels():
    pulse = GaussianPulse(omega_c=0.0, bandwidth=0.3)

    def response(w):
        return np.exp(1j * 0.4 * w)  # odd phase, even magnitude

    val = gaussian_expectation(response, pulse)
    assert np.angle(val) == pytest.approx(0.0, abs=1e-12)


def test_phase_shift_weighting_modes_differ():
    array, omega_c = on_curve_array(n=4, phi=0.6)
    pulse = GaussianPulse(omega_c + 0.3, 0.1)
    cubic = pulse_phase_shift(pulse, array, cubic_weight=True)
    plain = pulse_phase_shift(pulse, array, cubic_weight=False)
    assert cubic != plain  # near structure the probability weight matters
    assert abs(cubic - plain) < 0.2


def test_reference_flag_changes_phase():
    array, omega_c = on_curve_array(n=4, phi=0.9)
    pulse = GaussianPulse(omega_c, 0.01)
    with_ref = pulse_phase_shift(pulse, array, include_reference=True)
    without = pulse_phase_shift(pulse, array, include_reference=False)
    span = array.total_delay * omega_c
    expected = (without - span) % (2 * math.pi)
    assert (with_ref - without) % (2 * math.pi) == pytest.approx(
        (-span) % (2 * math.pi), abs=1e-6)


def test_transmission_at_rejects_singular_nodes():
    array = TimedArray.periodic(2, 0.01, EmitterParams(omega_e=OMEGA_E))
    with pytest.raises(SingularTransmission):
        transmission_at(np.array([OMEGA_E]), array)


def test_gauss_order_doubling_stability():
    array, omega_c = on_curve_array()
    pulse = GaussianPulse(omega_c, 0.05)
    p1 = pulse_transmission_probability(pulse, array, rtol=1e-9)
    p2 = pulse_transmission_probability(pulse, array, rtol=1e-11)
    assert p1 == pytest.approx(p2, abs=1e-10)
