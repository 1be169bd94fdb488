import math

import numpy as np
import pytest

from wgqed import (EmitterParams, SweepGrid, deviation_map,
                   find_transparency_points, fit_power_law, loss_area_ratio,
                   loss_scaling_samples, sweep_response,
                   transmission_coefficient_single)
from wgqed.errors import DegenerateFit, GridMismatch

SMALL = SweepGrid(delta_range=(-6.0, 6.0), phi_range=(0.1, 3.0),
                  resolution=(41, 21))


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid((1.0, 1.0), (0.0, 1.0), (10, 10))
    with pytest.raises(ValueError):
        SweepGrid((0.0, 1.0), (2.0, 1.0), (10, 10))
    with pytest.raises(ValueError):
        SweepGrid((0.0, 1.0), (0.0, 1.0), (1, 10))


def test_single_emitter_grid_matches_closed_form():
    field = sweep_response(SMALL, 1, 0.0)
    deltas = SMALL.deltas()
    p = EmitterParams()
    expected = np.abs(transmission_coefficient_single(deltas, p)) ** 2
    ok = ~field.singular[0]  # the exact-resonance node has no q representation
    assert np.isnan(field.p_t[0, ~ok]).all()
    for row in field.p_t:
        assert row[ok] == pytest.approx(expected[ok], rel=1e-12)


def test_lossless_flux_conservation_everywhere():
    field = sweep_response(SMALL, 12, 0.0)
    ok = ~field.singular
    assert np.abs(field.flux_deficit[ok]).max() < 1e-10


def test_singular_nodes_flagged_not_poisoned():
    grid = SweepGrid((-1.0, 1.0), (0.2, 1.2), (3, 3))  # delta=0 is a node
    field = sweep_response(grid, 5, 0.0)
    assert field.singular[:, 1].all()
    assert np.isnan(field.p_t[:, 1]).all()
    assert np.isfinite(field.p_t[:, [0, 2]]).all()


def test_sweep_thread_count_invariance():
    a = sweep_response(SMALL, 30, 0.1, threads=1)
    b = sweep_response(SMALL, 30, 0.1, threads=5)
    assert np.array_equal(a.p_t, b.p_t, equal_nan=True)
    assert np.array_equal(a.phase_shift, b.phase_shift, equal_nan=True)


def test_deviation_map_self_is_zero():
    field = sweep_response(SMALL, 8, 0.05)
    dev = deviation_map(field, field)
    ok = ~field.singular
    assert np.all(dev.dp_t[ok] == 0.0)
    assert np.all(dev.dphase[ok] == 0.0)


def test_deviation_map_grid_mismatch():
    other = SweepGrid((-6.0, 6.0), (0.1, 3.0), (41, 22))
    with pytest.raises(GridMismatch):
        deviation_map(sweep_response(SMALL, 4, 0.0),
                      sweep_response(other, 4, 0.0))


def test_loss_area_zero_without_loss():
    field = sweep_response(SMALL, 10, 0.0)
    assert loss_area_ratio(field, field) == 0.0


def test_loss_area_monotone_in_gamma():
    grid = SweepGrid((0.0, 20.0), (0.0, math.pi / 2), (120, 120))
    lossless = sweep_response(grid, 20, 0.0)
    r1 = loss_area_ratio(lossless, sweep_response(grid, 20, 0.1))
    r2 = loss_area_ratio(lossless, sweep_response(grid, 20, 0.2))
    assert 0.0 < r1 <= r2 < 1.0


def test_loss_area_threshold_validation():
    field = sweep_response(SMALL, 4, 0.0)
    with pytest.raises(ValueError):
        loss_area_ratio(field, field, threshold=0.0)


def test_fit_power_law_exact():
    ns = [10, 20, 40, 80, 160]
    fit = fit_power_law([(n, 3.0 * n ** (2.0 / 3.0)) for n in ns])
    assert fit.exponent == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-12)
    assert fit.residual < 1e-14


def test_fit_power_law_noisy():
    rng = np.random.default_rng(6)
    ns = np.geomspace(10, 320, 12)
    samples = [(n, 3.0 * n ** (2.0 / 3.0) * float(np.exp(rng.normal(0, 0.01))))
               for n in ns]
    fit = fit_power_law(samples)
    assert fit.exponent == pytest.approx(2.0 / 3.0, abs=0.02)


def test_fit_power_law_validation():
    with pytest.raises(ValueError):
        fit_power_law([(10, 1.0), (20, 2.0)])
    with pytest.raises(ValueError):
        fit_power_law([(10, 1.0), (20, -2.0), (40, 1.0), (80, 1.0)])
    with pytest.raises(DegenerateFit):
        fit_power_law([(10, 1.0), (10, 2.0), (10, 3.0), (10, 4.0)])


def test_loss_scaling_samples_shape():
    grid = SweepGrid((0.0, 20.0), (0.0, math.pi / 2), (60, 60))
    samples = loss_scaling_samples([5, 10], [0.1, 0.2], grid)
    assert len(samples) == 4
    for n, g, a in samples:
        assert 0.0 <= a <= 1.0


def test_transparency_points_small_chain():
    pts = find_transparency_points(6, 1.1)
    assert pts.size == 5
    # every reported point really transmits perfectly
    from wgqed import ArrayGeometry, array_response_from_params
    for d in pts:
        resp = array_response_from_params(
            float(d), ArrayGeometry.periodic(6, 1.1))
        assert abs(resp.p_t - 1.0) < 1e-9


def test_transparency_points_n30():
    for phi in (0.7, 2.0):
        assert find_transparency_points(30, phi).size == 29


def test_transparency_points_gamma_destroys_unity():
    pts = find_transparency_points(6, 1.1, gamma=0.05)
    assert pts.size < 5


def test_transparency_adjacent_maxima_separated():
    pts = np.sort(find_transparency_points(30, 1.0))
    from wgqed import ArrayGeometry, array_response_from_params
    mids = 0.5 * (pts[1:] + pts[:-1])
    geom = ArrayGeometry.periodic(30, 1.0)
    for mid in mids:
        resp = array_response_from_params(float(mid), geom)
        assert resp.p_t < 1.0 - 1e-6


def test_grid_refinement_stability_of_loss_area():
    g1 = SweepGrid((0.0, 20.0), (0.0, math.pi / 2), (200, 200))
    g2 = SweepGrid((0.0, 20.0), (0.0, math.pi / 2), (400, 400))
    vals = []
    for g in (g1, g2):
        lossless = sweep_response(g, 20, 0.0)
        lossy = sweep_response(g, 20, 0.18)
        vals.append(loss_area_ratio(lossless, lossy))
    assert abs(vals[1] - vals[0]) / vals[1] < 0.02
