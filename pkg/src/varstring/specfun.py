"""
Special functions used by the closed-form results.

Thin wrappers over scipy.special that pin down argument conventions
(elliptic integrals take the parameter m, not the modulus k) and raise
DomainError instead of returning nan. The one combination scipy does not
give accurately, x*f(x) - 1 with f(x) = Ci(x) sin x - (Si(x) - pi/2) cos x,
is evaluated from its asymptotic series for large x.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import special

from .errors import DomainError
from .utils import validate_index

ArrayLike = Union[float, np.ndarray]

ZETA3 = 1.2020569031595942854

# Above this argument x*f(x) - 1 is summed from its asymptotic series;
# below it the Si/Ci form keeps at least 13 digits.
AUX_ASYMPTOTIC_THRESHOLD = 40.0


@dataclass(frozen=True)
class SpecFunResult:
    """A special-function value with an absolute error estimate."""
    value: float
    est_error: float

    def __post_init__(self):
        if not self.est_error >= 0.0:
            raise DomainError(f"est_error must be non-negative, got {self.est_error}")


def sin_integral(x: ArrayLike) -> ArrayLike:
    """Si(x) = integral of sin(t)/t from 0 to x."""
    si, _ = special.sici(x)
    return si if np.ndim(si) else float(si)


def cos_integral(x: ArrayLike) -> ArrayLike:
    """
    Ci(x) = gamma + ln x + integral of (cos t - 1)/t from 0 to x.

    Raises:
        DomainError: If any x <= 0
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError(f"cos_integral needs x > 0, got min {arr.min()}")
    _, ci = special.sici(arr)
    return ci if np.ndim(ci) else float(ci)


def sici(x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Both Si(x) and Ci(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError(f"sici needs x > 0, got min {arr.min()}")
    si, ci = special.sici(arr)
    if np.ndim(si) == 0:
        return float(si), float(ci)
    return si, ci


def bessel_j1_y1(x: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """
    Bessel functions J1(x) and Y1(x).

    Raises:
        DomainError: If any x <= 0
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError(f"bessel_j1_y1 needs x > 0, got min {arr.min()}")
    j, y = special.j1(arr), special.y1(arr)
    if np.ndim(j) == 0:
        return float(j), float(y)
    return j, y


def _check_elliptic_path(phi: float, m: float, allow_zero: bool) -> None:
    # max of sin^2 t over [0, phi]
    if abs(phi) >= math.pi / 2:
        smax = 1.0
    else:
        smax = math.sin(phi) ** 2
    worst = 1.0 - m * smax
    if worst < 0.0 or (worst == 0.0 and not allow_zero):
        raise DomainError(f"1 - m sin^2 t vanishes on [0, {phi}] for m = {m}")


def elliptic_E_incomplete(phi: float, m: float) -> float:
    """E(phi|m) = integral of sqrt(1 - m sin^2 t) from 0 to phi."""
    phi, m = float(phi), float(m)
    _check_elliptic_path(phi, m, allow_zero=True)
    return float(special.ellipeinc(phi, m))


def elliptic_F_incomplete(phi: float, m: float) -> float:
    """F(phi|m) = integral of 1/sqrt(1 - m sin^2 t) from 0 to phi."""
    phi, m = float(phi), float(m)
    _check_elliptic_path(phi, m, allow_zero=False)
    return float(special.ellipkinc(phi, m))


def elliptic_E_complete(m: float) -> float:
    """Complete integral E(m) = E(pi/2|m)."""
    m = float(m)
    if m > 1.0:
        raise DomainError(f"elliptic_E_complete needs m <= 1, got {m}")
    return float(special.ellipe(m))


def elliptic_K_complete(m: float) -> float:
    """Complete integral K(m) = F(pi/2|m)."""
    m = float(m)
    if m >= 1.0:
        raise DomainError(f"elliptic_K_complete needs m < 1, got {m}")
    return float(special.ellipk(m))


def zeta_even(k: int) -> float:
    """Riemann zeta(k) for integer k >= 2 (odd k allowed, zeta(3) included)."""
    k = validate_index(k, min_value=2, name="k")
    if k == 3:
        return ZETA3
    return float(special.zeta(k, 1))


def _aux_asymptotic(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # x f(x) - 1 ~ sum_{k>=1} (-1)^k (2k)! / x^(2k), with the first omitted term
    inv2 = 1.0 / (x * x)
    term = np.ones_like(x)
    total = np.zeros_like(x)
    omitted = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 40):
        new_term = -term * (2 * k) * (2 * k - 1) * inv2
        if k > 1:
            grows = active & (np.abs(new_term) >= np.abs(term))
            omitted = np.where(grows, np.abs(new_term), omitted)
            active &= ~grows
        total = np.where(active, total + new_term, total)
        term = new_term
        if not np.any(active & (np.abs(term) > 1e-17 * np.abs(total))):
            break
    following = np.abs(term) * (2 * k + 2) * (2 * k + 1) * inv2
    return total, np.where(active, following, omitted)


def xf_minus_one(x: ArrayLike) -> ArrayLike:
    """
    x*f(x) - 1 with f(x) = Ci(x) sin x - (Si(x) - pi/2) cos x, for x > 0.

    The auxiliary function f decays like 1/x, so the difference cancels
    catastrophically for large x; the asymptotic series takes over there.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr <= 0.0):
        raise DomainError(f"xf_minus_one needs x > 0, got min {arr.min()}")
    out = np.empty_like(arr)
    small = arr < AUX_ASYMPTOTIC_THRESHOLD
    if np.any(small):
        xs = arr[small]
        si, ci = special.sici(xs)
        f = ci * np.sin(xs) - (si - 0.5 * math.pi) * np.cos(xs)
        out[small] = xs * f - 1.0
    if np.any(~small):
        out[~small] = _aux_asymptotic(arr[~small])[0]
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def xf_minus_one_estimate(x: float) -> SpecFunResult:
    """
    xf_minus_one at a scalar x with an absolute error estimate.

    Below the series threshold the estimate is the roundoff of the Si/Ci
    combination, above it the first omitted series term.
    """
    x = float(x)
    value = xf_minus_one(x)
    eps = np.finfo(float).eps
    if x < AUX_ASYMPTOTIC_THRESHOLD:
        si, ci = special.sici(x)
        error = eps * (x * (abs(ci) + abs(si - 0.5 * math.pi)) + 1.0)
    else:
        error = float(_aux_asymptotic(np.array([x]))[1][0]) + eps * abs(value)
    return SpecFunResult(value, error)
