"""
Tests for the LSF collocation engine and its Fourier diagnostics.
"""
import math

import numpy as np
import pytest

from varstring.collocation import (
    LsfGrid,
    fourier_coefficients,
    localized_modes,
    lsf_eigenpairs,
    lsf_operator_matrix,
    lsf_solve,
    participation_ratio,
    spectral_gaps,
)
from varstring.density import oscillating, uniform
from varstring.errors import ParameterError

def test_grid_geometry():
    grid = LsfGrid(0.5, 8)
    assert grid.spacing == 0.125
    assert grid.size == 7
    np.testing.assert_allclose(grid.nodes, np.arange(-3, 4) * 0.125)
    s = grid.sine_matrix()
    np.testing.assert_allclose(s @ s, np.eye(7), atol=1e-14)
    np.testing.assert_allclose(grid.wavenumbers_squared()[:2], [math.pi ** 2, 4 * math.pi ** 2])

    with pytest.raises(ParameterError):
        LsfGrid(0.5, 7)
    with pytest.raises(ParameterError):
        LsfGrid(0.5, 6)

def test_uniform_string_is_exact(uniform_model):
    """The sine basis diagonalizes the uniform string at any grid size."""
    modes = lsf_solve(uniform_model, 64, 5)
    assert [m.n for m in modes] == [1, 2, 3, 4, 5]
    assert all(m.engine == "lsf" and m.truncation == 64 for m in modes)
    for m in modes:
        assert m.energy == pytest.approx((m.n * math.pi) ** 2, rel=1e-12)
    assert modes[0].as_row() == {"n": 1, "energy": modes[0].energy, "engine": "lsf",
                                 "truncation": 64}

def test_direct_and_inverse_operators_agree(uniform_model):
    grid = LsfGrid(0.5, 32)
    direct = lsf_eigenpairs(lsf_operator_matrix(uniform_model, grid), grid, 3)
    inverse = lsf_eigenpairs(lsf_operator_matrix(uniform_model, grid, inverse=True), grid, 3)
    for a, b in zip(direct, inverse):
        assert a.energy == pytest.approx(b.energy, rel=1e-11)

    with pytest.raises(ParameterError):
        lsf_eigenpairs(lsf_operator_matrix(uniform_model, grid), grid, 40)

def test_grid_must_match_density():
    with pytest.raises(ParameterError):
        lsf_operator_matrix(uniform(1.0, 0.5), LsfGrid(1.0, 16))

def test_fourier_decomposition(uniform_model):
    """Uniform-string modes are single sine harmonics."""
    grid = LsfGrid(0.5, 64)
    modes = lsf_solve(uniform_model, 64, 5)
    for m in modes:
        dec = fourier_coefficients(m, grid)
        assert dec.n == m.n
        assert dec.norm_squared == pytest.approx(1.0, rel=1e-10)
        assert abs(dec.coefficients[m.n - 1]) == pytest.approx(1.0, rel=1e-10)
        assert dec.top_fraction(1) == pytest.approx(1.0, rel=1e-10)
        assert participation_ratio(dec) == pytest.approx(1.0, rel=1e-9)
    assert localized_modes(modes, grid) == []
    assert localized_modes(modes, grid, threshold=0.5) == [1, 2, 3, 4, 5]

    with pytest.raises(ParameterError):
        fourier_coefficients(modes[0], LsfGrid(0.5, 32))

def test_spectral_gaps():
    assert spectral_gaps([1.0, 4.0, 9.0, 100.0]) == [3]
    assert spectral_gaps([(n * math.pi) ** 2 for n in range(1, 10)]) == []
    with pytest.raises(ParameterError):
        spectral_gaps([1.0, 4.0])

@pytest.mark.slow
def test_quartic_ground_state(quartic_model):
    modes = lsf_solve(quartic_model, 2000, 1)
    assert modes[0].energy == pytest.approx(0.0017440135432079554, rel=1e-9)

@pytest.mark.slow
def test_oscillating_string_localized_modes():
    """Modes at multiples of 50 sit at the band edges and spread over many harmonics."""
    grid = LsfGrid(0.5, 2500)
    modes = lsf_solve(oscillating(), 2500, 160)
    assert localized_modes(modes, grid) == [50, 100, 150]
    edge = participation_ratio(fourier_coefficients(modes[49], grid))
    inside = participation_ratio(fourier_coefficients(modes[48], grid))
    assert edge > 3.0 * inside
