"""
Tests for the DPT, WKBPT and iWKBPT engines and the bounds built on them.
"""
import math

import numpy as np
import pytest

from varstring.density import cosine, oscillating, polynomial_trial, power_density, uniform
from varstring.errors import ParameterError
from varstring.perturbation import (
    PerturbationSeries,
    asymptotic_factor,
    dpt_direct_resummed,
    dpt_energy,
    dpt_variational_bound,
    iwkbpt_energy,
    ratio_first_order,
    series_energy,
    sigma_residual,
    trial_function_bound,
    trial_ground_bound,
    weyl_estimate,
    window_indices,
    wkbpt_eigenfunction,
    wkbpt_energy,
    wkbpt_first_order_bound,
)
from varstring.reference import agrees_to_digits
from varstring.spectral import SpectralConfig, solve_dense
from varstring.wkb_basis import WkbBasis, build_table, closed_form_element_quartic

QUARTIC_E1 = 0.00174401354381855
QUARTIC_N0_BOUND = 0.00174580776578874

def test_window_indices():
    """Nearest states to n, ties toward smaller indices, never below 1."""
    assert window_indices(1, 4).tolist() == [2, 3, 4, 5]
    assert window_indices(10, 4).tolist() == [8, 9, 11, 12]
    assert window_indices(2, 3).tolist() == [1, 3, 4]
    with pytest.raises(ParameterError):
        window_indices(0, 4)

def test_series_container():
    series = PerturbationSeries(2, "wkbpt", (1.0, 0.5, -0.25), indices=np.arange(1, 4),
                                coefficients=(np.array([0.1, 0.0, 0.2]),))
    assert series.order == 2
    assert series.energy == 1.25
    assert series_energy(series) == [1.0, 1.5, 1.25]
    np.testing.assert_array_equal(series.mode_vector(), [0.1, 1.0, 0.2])
    np.testing.assert_array_equal(series.mode_vector(0), [0.0, 1.0, 0.0])

    with pytest.raises(ParameterError):
        PerturbationSeries(1, "dpt", (1.0, float("nan")))

def test_wkbpt_quartic_ground_state(quartic_basis, quartic_table):
    series = wkbpt_energy(quartic_basis, quartic_table, 1, order=2, window=20)
    assert series.engine == "wkbpt"
    assert series.truncation == 20
    assert series.corrections[0] == pytest.approx(9.0 / (49.0 * math.pi ** 4), rel=1e-14)
    first, second = series.partial_sums()[1], series.partial_sums()[2]
    assert first == pytest.approx(QUARTIC_N0_BOUND, rel=1e-12)
    assert agrees_to_digits(second, 0.00174405, 6)
    assert second < first

def test_wkbpt_errors(quartic_basis, quartic_table):
    with pytest.raises(ParameterError):
        wkbpt_energy(quartic_basis, quartic_table, 35, window=20)
    with pytest.raises(ParameterError):
        wkbpt_energy(quartic_basis, quartic_table, 1, order=4)

def test_wkbpt_eigenfunction(quartic_basis, quartic_table):
    corrections = wkbpt_eigenfunction(quartic_basis, quartic_table, 3, order=2, window=6)
    assert len(corrections) == 2
    for c in corrections:
        assert c.shape == (quartic_table.size,)
        assert c[2] == 0.0
        # only the window around n = 3 is populated
        assert np.all(c[10:] == 0.0)
    assert np.any(corrections[0] != 0.0)

def test_first_order_bound(quartic_table):
    """Rayleigh quotients of e_1 + c^(1): ten-digit agreement and monotone in size."""
    expected = {2: 0.0017442945174961415, 10: 0.0017440149552016950,
                20: 0.0017440146360548171, 40: 0.0017440146306353234}
    previous = math.inf
    for size in sorted(expected):
        value = wkbpt_first_order_bound(quartic_table, size)
        assert agrees_to_digits(value, expected[size], 10)
        assert value <= previous
        assert value >= QUARTIC_E1
        previous = value

    with pytest.raises(ParameterError):
        wkbpt_first_order_bound(quartic_table, 41)
    with pytest.raises(ParameterError):
        wkbpt_first_order_bound(quartic_table, 3, n=4)

def test_iwkbpt_with_physical_trial(quartic_model, quartic_basis, quartic_table):
    """trial = physical is ordinary WKBPT."""
    series = iwkbpt_energy(quartic_model, quartic_model, 1, table=quartic_table)
    assert series.engine == "wkbpt"
    assert series.energy == wkbpt_energy(quartic_basis, quartic_table, 1).energy

def test_iwkbpt_trial_basis(quartic_model):
    """A trial copy of the density goes through the operator quadrature."""
    trial = polynomial_trial(quartic_model, [1.0])
    series = iwkbpt_energy(trial, quartic_model, 1, order=1, window=4)
    assert series.engine == "iwkbpt"
    assert series.energy == pytest.approx(QUARTIC_N0_BOUND, rel=1e-9)
    assert trial_ground_bound(trial, quartic_model) == pytest.approx(
        closed_form_element_quartic(1, 1), rel=1e-9)

def test_trial_diagnostics(quartic_model):
    same = uniform(1.0, 0.5)
    assert sigma_residual(same, uniform(1.0, 0.5), 1, window=4) == pytest.approx(0.0, abs=1e-20)
    assert asymptotic_factor(quartic_model, quartic_model) == pytest.approx(1.0, rel=1e-12)

def test_dpt_uniform_string_is_exact():
    """rho = rho0: every correction past the first vanishes."""
    series = dpt_energy(uniform(2.0), 1, order=3, K=10)
    assert series.engine == "dpt"
    assert series.corrections[0] == pytest.approx(math.pi ** 2 / 2.0, rel=1e-14)
    for c in series.corrections[1:]:
        assert c == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ParameterError):
        dpt_energy(uniform(2.0), 5, K=5)

def test_dpt_mild_cosine_density():
    """E^(1) = -pi^2 <1|delta rho|1> with <1|delta rho|1> = amplitude / 2."""
    model = cosine(0.02)
    series = dpt_energy(model, 1, order=3, K=60)
    assert series.corrections[1] == pytest.approx(-math.pi ** 2 * 0.01, rel=1e-10)
    dense = solve_dense(model, SpectralConfig(size=20))
    assert series.energy == pytest.approx(dense[0].energy, rel=1e-5)

def test_uniform_string_bounds(uniform_model):
    assert dpt_variational_bound(uniform_model) == pytest.approx(math.pi ** 2, rel=1e-12)
    assert trial_function_bound(uniform_model) == pytest.approx(math.pi ** 2, rel=1e-12)
    direct, limit = dpt_direct_resummed(uniform(2.0), 1)
    assert direct == pytest.approx(math.pi ** 2 / 2.0, rel=1e-12)
    assert limit == pytest.approx(math.pi ** 2 / 2.0, rel=1e-12)
    assert ratio_first_order(uniform_model, "dpt") == pytest.approx(4.0, abs=1e-12)
    assert ratio_first_order(uniform_model, "wkbpt") == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ParameterError):
        ratio_first_order(uniform_model, "lsf")

def test_quartic_bounds(quartic_model):
    assert dpt_variational_bound(quartic_model) == pytest.approx(0.002868007277, rel=1e-6)
    assert weyl_estimate(quartic_model, 1) == pytest.approx(9.0 / (49.0 * math.pi ** 4),
                                                            rel=1e-14)

@pytest.mark.slow
def test_oscillating_string_bounds():
    """DPT and the rho^2 trial density both bound the (2 + sin 100 pi x)^2 fundamental."""
    model = oscillating()
    assert dpt_variational_bound(model) == pytest.approx(6335.15, abs=5e-3)
    assert trial_ground_bound(power_density(model, 2.0), model) == pytest.approx(3.07325, abs=5e-6)

def test_ratio_sign_follows_density_shape():
    """A centre-heavy density pushes E2/E1 above 4, an end-heavy one below."""
    for amplitude in (0.02, -0.02):
        model = cosine(amplitude)
        dense = solve_dense(model, SpectralConfig(size=20))
        exact = dense[1].energy / dense[0].energy
        for engine in ("dpt", "wkbpt"):
            ratio = ratio_first_order(model, engine)
            assert (ratio > 4.0) == (amplitude > 0.0), (engine, amplitude, ratio)
            assert ratio == pytest.approx(exact, abs=1e-3)
        assert (exact > 4.0) == (amplitude > 0.0)

def test_engines_agree_on_a_mild_density():
    """Order-2 DPT and WKBPT against the dense engine for the first five modes."""
    model = cosine(0.02)
    dense = solve_dense(model, SpectralConfig(size=40))
    basis = WkbBasis(model, size=30)
    table = build_table(basis, 30)
    for n in range(1, 6):
        exact = dense[n - 1].energy
        assert dpt_energy(model, n, order=2, K=60).energy == pytest.approx(exact, rel=1e-4)
        assert wkbpt_energy(basis, table, n, order=2, window=20).energy == pytest.approx(
            exact, rel=1e-6)

@pytest.mark.slow
def test_rho_squared_trial_beats_uniform_basis():
    model = oscillating()
    flat = sigma_residual(uniform(1.0, 0.5), model, 1)
    squared = sigma_residual(power_density(model, 2.0), model, 1)
    assert flat > squared > 0.0

@pytest.mark.slow
def test_quartic_residual_shrinks_with_n(quartic_model):
    """The physical basis becomes diagonally dominated for high modes."""
    residuals = [sigma_residual(quartic_model, quartic_model, n, window=20) for n in (50, 100, 200)]
    assert residuals[0] > residuals[1] > residuals[2] > 0.0
