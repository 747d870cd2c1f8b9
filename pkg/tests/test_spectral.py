"""
Tests for the Galerkin engines and the exact Horgan-Chan spectrum.
"""
import math

import numpy as np
import pytest

from varstring.errors import ParameterError
from varstring.spectral import (
    SpectralConfig,
    horgan_exact,
    solve_dense,
    solve_windowed,
    windowed_energies,
)

def test_config_validation():
    assert SpectralConfig(center=30, half_width=10).center == 30
    with pytest.raises(ParameterError):
        SpectralConfig(center=5, half_width=10)
    with pytest.raises(ParameterError):
        SpectralConfig(size=1)

def test_dense_uniform_string(uniform_model):
    """The WKB basis is exact for a constant density."""
    modes = solve_dense(uniform_model, SpectralConfig(size=8))
    assert len(modes) == 4
    for m in modes:
        assert m.engine == "spectral"
        assert m.truncation == 8
        assert m.energy == pytest.approx((m.n * math.pi) ** 2, rel=1e-13)

def test_dense_matches_exact_spectrum(horgan_model, horgan_spectrum):
    modes = solve_dense(horgan_model, SpectralConfig(size=40))
    assert modes[0].energy == pytest.approx(horgan_spectrum.energies[0], rel=1e-8)
    assert modes[0].coefficients.shape == (40,)

def test_windowed_solve(horgan_model, horgan_spectrum):
    modes = solve_windowed(horgan_model, SpectralConfig(center=30, half_width=10))
    assert [m.n for m in modes] == list(range(25, 36))
    for m in modes:
        assert m.engine == "spectral-window"
        assert m.extra["center"] == 30
        assert m.energy == pytest.approx(horgan_spectrum.energies[m.n - 1], rel=1e-8)

    with pytest.raises(ParameterError):
        solve_windowed(horgan_model, SpectralConfig(size=10))

def test_windowed_energies(horgan_model):
    rows = windowed_energies(horgan_model, [30], 10, 3)
    assert [n for n, _ in rows] == list(range(27, 34))

def test_horgan_exact_spectrum(horgan_spectrum):
    energies = horgan_spectrum.energies
    assert len(energies) == 200
    assert np.all(np.diff(energies) > 0.0)
    n = np.arange(10, 201)
    deviation = energies[9:] - math.pi ** 2 * n ** 2 - 0.375
    assert np.all(np.abs(deviation) < 0.04 / n ** 2)
    assert horgan_spectrum.pairs()[0] == (1, float(energies[0]))
    modes = horgan_spectrum.as_modes()
    assert modes[4].n == 5 and modes[4].engine == "horgan-exact"

def test_horgan_exact_rejects_bad_parameter():
    with pytest.raises(ParameterError):
        horgan_exact(0.0, 5)
    with pytest.raises(ParameterError):
        horgan_exact(-1.0, 5)
    with pytest.raises(ParameterError):
        horgan_exact(1.0, 0)
