"""
Tests for the special-function wrappers.
"""
import math

import numpy as np
import pytest

from varstring.errors import DomainError, ParameterError
from varstring.specfun import (
    AUX_ASYMPTOTIC_THRESHOLD,
    ZETA3,
    SpecFunResult,
    bessel_j1_y1,
    cos_integral,
    elliptic_E_complete,
    elliptic_E_incomplete,
    elliptic_F_incomplete,
    elliptic_K_complete,
    sici,
    sin_integral,
    xf_minus_one,
    xf_minus_one_estimate,
    zeta_even,
)

def test_sine_and_cosine_integrals():
    """Si and Ci against known values."""
    assert sin_integral(0.0) == 0.0
    assert sin_integral(1.0) == pytest.approx(0.9460830703671830, abs=1e-15)
    assert cos_integral(1.0) == pytest.approx(0.3374039229009681, abs=1e-15)
    si, ci = sici(1.0)
    assert si == pytest.approx(sin_integral(1.0))
    assert ci == pytest.approx(cos_integral(1.0))
    si, ci = sici(np.array([1.0, 2.0]))
    assert si.shape == (2,)

def test_cosine_integral_domain():
    with pytest.raises(DomainError):
        cos_integral(0.0)
    with pytest.raises(DomainError):
        sici(np.array([1.0, -1.0]))

def test_bessel_j1_y1():
    j, y = bessel_j1_y1(1.0)
    assert j == pytest.approx(0.44005058574493355, abs=1e-15)
    assert y == pytest.approx(-0.7812128213002887, abs=1e-15)
    with pytest.raises(DomainError):
        bessel_j1_y1(0.0)

def test_complete_elliptic_integrals():
    """Parameter convention m, with the singular ends rejected."""
    assert elliptic_K_complete(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert elliptic_E_complete(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert elliptic_E_complete(1.0) == pytest.approx(1.0, abs=1e-15)
    assert elliptic_K_complete(0.5) == pytest.approx(1.8540746773013719, abs=1e-14)
    assert elliptic_E_complete(0.5) == pytest.approx(1.3506438810476755, abs=1e-14)

    with pytest.raises(DomainError):
        elliptic_K_complete(1.0)
    with pytest.raises(DomainError):
        elliptic_E_complete(1.5)

def test_incomplete_elliptic_integrals():
    assert elliptic_E_incomplete(math.pi / 2, 0.5) == pytest.approx(elliptic_E_complete(0.5))
    assert elliptic_F_incomplete(math.pi / 2, 0.5) == pytest.approx(elliptic_K_complete(0.5))
    assert elliptic_F_incomplete(0.3, 0.0) == pytest.approx(0.3, abs=1e-15)
    # 1 - m sin^2 t turns negative before phi
    with pytest.raises(DomainError):
        elliptic_E_incomplete(1.2, 2.0)
    with pytest.raises(DomainError):
        elliptic_F_incomplete(math.pi / 2, 1.0)

def test_zeta():
    assert zeta_even(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta_even(4) == pytest.approx(math.pi ** 4 / 90, rel=1e-14)
    assert zeta_even(3) == ZETA3
    with pytest.raises(ParameterError):
        zeta_even(1)

def test_xf_minus_one_asymptotic_branch():
    """Above the threshold the series -2/x^2 + 24/x^4 - 720/x^6 takes over."""
    x = 50.0
    expected = (-2.0 / x ** 2 + 24.0 / x ** 4 - 720.0 / x ** 6 + 40320.0 / x ** 8
                - 3628800.0 / x ** 10)
    assert xf_minus_one(x) == pytest.approx(expected, rel=1e-8)

def test_xf_minus_one_is_continuous_at_threshold():
    below = xf_minus_one(AUX_ASYMPTOTIC_THRESHOLD * (1.0 - 1e-12))
    above = xf_minus_one(AUX_ASYMPTOTIC_THRESHOLD)
    assert below == pytest.approx(above, rel=1e-8)

def test_xf_minus_one_vectorized():
    x = np.array([0.5, 5.0, 100.0])
    values = xf_minus_one(x)
    assert values.shape == (3,)
    assert values[1] == pytest.approx(xf_minus_one(5.0))
    with pytest.raises(DomainError):
        xf_minus_one(np.array([1.0, 0.0]))

def test_error_estimates():
    """Both branches report a small positive absolute error."""
    near = xf_minus_one_estimate(2.0)
    assert near.value == xf_minus_one(2.0)
    assert 0.0 < near.est_error < 1e-13
    far = xf_minus_one_estimate(100.0)
    assert far.value == xf_minus_one(100.0)
    assert 0.0 < far.est_error < 1e-18
    with pytest.raises(DomainError):
        xf_minus_one_estimate(-1.0)
    with pytest.raises(DomainError):
        SpecFunResult(1.0, -1.0)
