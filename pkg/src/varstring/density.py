"""
Density models for the inhomogeneous string.

A DensityModel bundles rho and its first three derivatives on [-L, L], the
stretched coordinate sigma(x) = integral of sqrt(rho) from -L to x with its
inverse, and the WKB potential V = (4 rho rho'' - 5 rho'^2) / (16 rho^3).
Every engine consumes a DensityModel; models are immutable once built.

Catalog densities carry closed-form derivatives, and where one exists a
closed-form V(sigma) that also accepts complex sigma (needed for the Borel
evaluation of the 1/n^2 coefficient).
"""

import math
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special
from scipy.interpolate import CubicSpline

from .config import (
    CHEB_TAIL_TOL,
    FD_CHECK_TOL,
    POINTS_PER_OSCILLATION,
    POSITIVITY_SAMPLES,
    SIGMA_CONSISTENCY_TOL,
)
from .errors import ContinuationUnavailableError, DensityError, DomainError, ParameterError
from .logging_config import get_logger
from .numerics import GridFunction
from .utils import validate_number, validate_odd_order, validate_positive

logger = get_logger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]

# Highest odd sigma-derivative of V available without a closed form
MAX_SPECTRAL_ORDER = 7
MAX_CLOSED_FORM_ORDER = 15


def _out(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _next_pow2(n: float) -> int:
    return 1 << max(5, int(math.ceil(math.log2(max(n, 2.0)))))


def _newton_inverse(func: Callable, deriv: Callable, targets: np.ndarray,
                    lo: float, hi: float, seed: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized safeguarded Newton for a strictly increasing func."""
    x = np.clip(seed, lo, hi)
    a = np.full_like(targets, lo)
    b = np.full_like(targets, hi)
    for _ in range(100):
        f = func(x) - targets
        done = np.abs(f) <= tol
        if np.all(done):
            break
        a = np.where(f < 0, x, a)
        b = np.where(f > 0, x, b)
        step = f / deriv(x)
        trial = x - step
        outside = (trial <= a) | (trial >= b)
        trial = np.where(outside, 0.5 * (a + b), trial)
        x = np.where(done, x, trial)
    return x


class DensityModel:
    """
    A positive density on [-L, L] with the calculus the engines need.

    Args:
        name: Catalog tag
        half_length: L > 0
        rho, drho, d2rho, d3rho: Vectorized evaluators of rho and derivatives
        parameters: Model parameters, echoed in outputs and cache keys
        sigma: Optional closed-form sigma(x)
        sigma_inverse: Optional closed-form inverse of sigma
        v_sigma: Optional closed-form V as a function of sigma; must accept
            complex arguments when given
        v_sigma_derivative: Optional closed-form d^k V / d sigma^k (s, k)
        potential_family: Tag of the closed-form V(sigma), e.g. "horgan"
        oscillations: Number of density oscillations on [-L, L]
        analytic: True when derivatives are exact (enables the
            finite-difference consistency check)
        check: Run the sigma and derivative checks (positivity is always
            checked)

    Raises:
        DensityError: If a construction check fails
    """

    def __init__(self, name: str, half_length: float, rho: Evaluator, drho: Evaluator,
                 d2rho: Evaluator, d3rho: Evaluator,
                 parameters: Optional[Dict[str, float]] = None,
                 sigma: Optional[Evaluator] = None,
                 sigma_inverse: Optional[Evaluator] = None,
                 v_sigma: Optional[Callable] = None,
                 v_sigma_derivative: Optional[Callable] = None,
                 potential_family: Optional[str] = None,
                 oscillations: float = 0.0, analytic: bool = True, check: bool = True):
        self.name = name
        self.half_length = validate_positive(half_length, name="half_length")
        self.parameters = dict(parameters or {})
        self.oscillations = float(oscillations)
        self.analytic = analytic
        self.potential_family = potential_family
        self._rho, self._d1, self._d2, self._d3 = rho, drho, d2rho, d3rho
        self._sigma_closed = sigma
        self._sigma_inverse_closed = sigma_inverse
        self._v_sigma = v_sigma
        self._v_sigma_derivative = v_sigma_derivative
        self._sqrt_rho_gf: Optional[GridFunction] = None
        self._sigma_gf: Optional[GridFunction] = None
        self._seed_table = None
        self._v_sigma_gf: Optional[GridFunction] = None
        self._v_sigma_derivs: Dict[int, GridFunction] = {}

        self._check_positive()
        self._sigma_total = float(self.sigma(self.half_length)) if sigma is not None \
            else float(self._sigma_grid().values[-1])
        if check:
            self._check_sigma()
            if analytic:
                self._check_derivatives()

    # -- identity -----------------------------------------------------------

    @property
    def key(self) -> str:
        params = ",".join(f"{k}={self.parameters[k]!r}" for k in sorted(self.parameters))
        return f"{self.name}({params})"

    def __repr__(self) -> str:
        return f"DensityModel({self.key}, L={self.half_length})"

    @property
    def has_closed_potential(self) -> bool:
        return self._v_sigma is not None

    # -- evaluators ---------------------------------------------------------

    def sample_points(self, count: Optional[int] = None) -> np.ndarray:
        if count is None:
            count = max(POSITIVITY_SAMPLES, int(20 * self.oscillations) + 1)
        return np.linspace(-self.half_length, self.half_length, count)

    def _check_domain(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        slack = 1e-12 * self.half_length
        if np.any(arr < -self.half_length - slack) or np.any(arr > self.half_length + slack):
            raise DomainError(f"x outside [-{self.half_length}, {self.half_length}]")
        return arr

    def rho(self, x):
        arr = np.asarray(x, dtype=float)
        return _out(self._rho(arr) * np.ones_like(arr), x)

    def rho_prime(self, x):
        arr = np.asarray(x, dtype=float)
        return _out(self._d1(arr) * np.ones_like(arr), x)

    def rho_second(self, x):
        arr = np.asarray(x, dtype=float)
        return _out(self._d2(arr) * np.ones_like(arr), x)

    def rho_third(self, x):
        arr = np.asarray(x, dtype=float)
        return _out(self._d3(arr) * np.ones_like(arr), x)

    def potential_V(self, x):
        """V(x) = (4 rho rho'' - 5 rho'^2) / (16 rho^3)."""
        arr = self._check_domain(x)
        r, r1, r2 = self.rho(arr), self.rho_prime(arr), self.rho_second(arr)
        return _out((4.0 * r * r2 - 5.0 * r1 * r1) / (16.0 * r ** 3), x)

    def potential_V_prime(self, x):
        """dV/dx from rho and its first three derivatives."""
        arr = self._check_domain(x)
        r, r1, r2, r3 = (self.rho(arr), self.rho_prime(arr), self.rho_second(arr),
                         self.rho_third(arr))
        return _out(r3 / (4.0 * r ** 2) - 9.0 * r1 * r2 / (8.0 * r ** 3)
                    + 15.0 * r1 ** 3 / (16.0 * r ** 4), x)

    # -- stretched coordinate ------------------------------------------------

    def _sqrt_rho_grid(self) -> GridFunction:
        if self._sqrt_rho_gf is None:
            L = self.half_length
            min_deg = _next_pow2(POINTS_PER_OSCILLATION * self.oscillations)
            self._sqrt_rho_gf = GridFunction.adaptive(
                lambda x: np.sqrt(self.rho(x)), -L, L, tol=CHEB_TAIL_TOL,
                min_degree=min_deg, freq_hint=self.oscillations or None)
        return self._sqrt_rho_gf

    def _sigma_grid(self) -> GridFunction:
        if self._sigma_gf is None:
            self._sigma_gf = self._sqrt_rho_grid().antiderivative()
        return self._sigma_gf

    def sigma(self, x):
        """sigma(x) = integral of sqrt(rho) from -L to x."""
        arr = self._check_domain(x)
        if self._sigma_closed is not None:
            return _out(self._sigma_closed(arr) * np.ones_like(arr), x)
        return _out(self._sigma_grid()(arr), x)

    @property
    def sigma_total(self) -> float:
        """sigma(L), the length of the equivalent uniform string."""
        return self._sigma_total

    def sigma_inverse(self, s):
        """x with sigma(x) = s, for s in [0, sigma(L)]."""
        arr = np.asarray(s, dtype=float)
        slack = 1e-12 * self._sigma_total
        if np.any(arr < -slack) or np.any(arr > self._sigma_total + slack):
            raise DomainError(f"s outside [0, {self._sigma_total}]")
        arr = np.clip(arr, 0.0, self._sigma_total)
        L = self.half_length
        if self._sigma_inverse_closed is not None:
            x = np.clip(self._sigma_inverse_closed(arr) * np.ones_like(arr), -L, L)
            return _out(x, s)
        if self._seed_table is None:
            xs = self.sample_points(max(2001, int(40 * self.oscillations) + 1))
            self._seed_table = (self.sigma(xs), xs)
        ss, xs = self._seed_table
        flat = np.atleast_1d(arr).ravel()
        seed = np.interp(flat, ss, xs)
        x = _newton_inverse(self.sigma, lambda y: np.sqrt(self.rho(y)), flat,
                            -L, L, seed, 1e-14 * self._sigma_total)
        return _out(x.reshape(np.shape(arr)), s)

    # -- V as a function of sigma ---------------------------------------------

    def v_sigma(self, s):
        """V at stretched coordinate s; complex s only with a closed form."""
        if np.iscomplexobj(s):
            if self._v_sigma is None:
                raise ContinuationUnavailableError(
                    f"{self.key} has no analytic continuation of V(sigma)")
            return self._v_sigma(s)
        if self._v_sigma is not None:
            arr = np.asarray(s, dtype=float)
            return _out(self._v_sigma(arr) * np.ones_like(arr), s)
        return self.potential_V(self.sigma_inverse(s))

    def _v_sigma_grid(self) -> GridFunction:
        if self._v_sigma_gf is None:
            min_deg = _next_pow2(POINTS_PER_OSCILLATION * self.oscillations)
            self._v_sigma_gf = GridFunction.adaptive(
                lambda s: self.potential_V(self.sigma_inverse(s)), 0.0, self._sigma_total,
                tol=1e-13, min_degree=min_deg, freq_hint=self.oscillations or None)
        return self._v_sigma_gf

    def v_sigma_derivative(self, s, order: int):
        """
        Odd-order derivative d^k V / d sigma^k at s.

        Closed forms are used when the catalog supplies them. Order 1 falls
        back to the closed expression in rho, rho', rho'', rho'''; higher
        orders to spectral differentiation of V(sigma^-1(s)).
        """
        max_order = MAX_CLOSED_FORM_ORDER if self._v_sigma_derivative else MAX_SPECTRAL_ORDER
        order = validate_odd_order(order, max_order)
        arr = np.asarray(s, dtype=float)
        slack = 1e-12 * self._sigma_total
        if np.any(arr < -slack) or np.any(arr > self._sigma_total + slack):
            raise DomainError(f"s outside [0, {self._sigma_total}]")
        if self._v_sigma_derivative is not None:
            return _out(self._v_sigma_derivative(arr, order) * np.ones_like(arr), s)
        if order == 1 and self.analytic:
            x = self.sigma_inverse(arr)
            return _out(self.potential_V_prime(x) / np.sqrt(self.rho(x)), s)
        if order not in self._v_sigma_derivs:
            self._v_sigma_derivs[order] = self._v_sigma_grid().derivative(order)
        return _out(self._v_sigma_derivs[order](arr), s)

    def mean_rho(self) -> float:
        """Domain mean of rho."""
        L = self.half_length
        gf = GridFunction.adaptive(self.rho, -L, L, min_degree=_next_pow2(
            POINTS_PER_OSCILLATION * self.oscillations))
        return gf.integral() / (2.0 * L)

    # -- construction checks ---------------------------------------------------

    def _check_positive(self) -> None:
        xs = self.sample_points()
        values = self.rho(xs)
        if not np.all(np.isfinite(values)):
            raise DensityError(f"{self.key}: rho is not finite on [-L, L]")
        bad = np.nonzero(values <= 0.0)[0]
        if len(bad):
            raise DensityError(f"{self.key}: rho <= 0 at x = {xs[bad[0]]:.6g}")

    def _check_sigma(self) -> None:
        if self._sigma_closed is None:
            return
        xs = self.sample_points(201)
        reference = self._sigma_grid()(xs)
        deviation = np.max(np.abs(self.sigma(xs) - reference))
        if deviation > SIGMA_CONSISTENCY_TOL * self._sigma_total:
            raise DensityError(
                f"{self.key}: sigma disagrees with the integral of sqrt(rho) by {deviation:.3e}")
        if abs(float(self.sigma(-self.half_length))) > SIGMA_CONSISTENCY_TOL * self._sigma_total:
            raise DensityError(f"{self.key}: sigma(-L) != 0")

    def _check_derivatives(self) -> None:
        L = self.half_length
        h = 1e-3 * 2.0 * L / max(1.0, self.oscillations)
        xs = np.linspace(-L + 2 * h, L - 2 * h, 41)
        pairs = (("rho'", self._rho, self._d1), ("rho''", self._d1, self._d2),
                 ("rho'''", self._d2, self._d3))
        eps = np.finfo(float).eps
        for label, lower, supplied in pairs:
            fd = (-lower(xs + 2 * h) + 8 * lower(xs + h) - 8 * lower(xs - h)
                  + lower(xs - 2 * h)) / (12 * h) * np.ones_like(xs)
            exact = supplied(xs) * np.ones_like(xs)
            scale = max(np.max(np.abs(exact)), np.max(np.abs(fd)))
            roundoff = 1e3 * eps * np.max(np.abs(lower(xs) * np.ones_like(xs))) / h
            deviation = np.max(np.abs(fd - exact))
            if deviation > FD_CHECK_TOL * scale + roundoff:
                raise DensityError(
                    f"{self.key}: supplied {label} fails the finite-difference check "
                    f"(deviation {deviation:.3e}, scale {scale:.3e})")


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def potential_V(model: DensityModel, x):
    """WKB potential of the model at x in [-L, L]."""
    return model.potential_V(x)


def sigma_inverse(model: DensityModel, s):
    """Inverse of the stretched coordinate, for s in [0, sigma(L)]."""
    return model.sigma_inverse(s)


def potential_V_sigma_derivative(model: DensityModel, s, order: int):
    """Odd-order sigma-derivative of V at stretched coordinate s."""
    return model.v_sigma_derivative(s, order)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _constant_potential(value: float):
    def v(s):
        return value * np.ones_like(s)

    def dv(s, order):
        return np.zeros_like(np.asarray(s, dtype=float))

    return v, dv


def uniform(rho0: float = 1.0, half_length: float = 0.5) -> DensityModel:
    """Constant density rho0."""
    rho0 = validate_positive(rho0, name="rho0")
    L = validate_positive(half_length, name="half_length")
    root = math.sqrt(rho0)
    v, dv = _constant_potential(0.0)
    return DensityModel(
        "uniform", L,
        lambda x: rho0 * np.ones_like(x), _zero, _zero, _zero,
        parameters={"rho0": rho0, "L": L},
        sigma=lambda x: root * (x + L),
        sigma_inverse=lambda s: s / root - L,
        v_sigma=v, v_sigma_derivative=dv, potential_family="constant")


def borg(c1: float, c2: float, kappa: float = 0.0, half_length: float = 0.5,
         check: bool = True) -> DensityModel:
    """
    rho = 256 c1^2 / (c1^2 (c2 + x)^2 - 256 kappa)^2, whose potential is the
    constant kappa. The phi_n basis functions are then exact eigenfunctions.
    """
    c1 = validate_number(c1, name="c1")
    c2 = validate_number(c2, name="c2")
    kappa = validate_number(kappa, name="kappa")
    L = validate_positive(half_length, name="half_length")
    if c1 == 0.0:
        raise ParameterError("c1 must be nonzero")
    A = 256.0 * c1 * c1

    def P(x):
        return c1 * c1 * (c2 + x) ** 2 - 256.0 * kappa

    def P1(x):
        return 2.0 * c1 * c1 * (c2 + x)

    P2 = 2.0 * c1 * c1

    def rho(x):
        return A / P(x) ** 2

    def d1(x):
        return -2.0 * A * P1(x) / P(x) ** 3

    def d2(x):
        return A * (6.0 * P1(x) ** 2 / P(x) ** 4 - 2.0 * P2 / P(x) ** 3)

    def d3(x):
        return A * (-24.0 * P1(x) ** 3 / P(x) ** 5 + 18.0 * P1(x) * P2 / P(x) ** 4)

    sigma = sigma_inv = None
    if kappa == 0.0:
        if -L <= -c2 <= L:
            raise DensityError("borg density with kappa = 0 is singular at x = -c2")
        k = 16.0 / abs(c1)
        base = 1.0 / (c2 - L)

        def sigma(x):
            return k * (base - 1.0 / (c2 + x))

        def sigma_inv(s):
            return 1.0 / (base - s / k) - c2

    v, dv = _constant_potential(kappa)
    return DensityModel("borg", L, rho, d1, d2, d3,
                        parameters={"c1": c1, "c2": c2, "kappa": kappa, "L": L},
                        sigma=sigma, sigma_inverse=sigma_inv, v_sigma=v,
                        v_sigma_derivative=dv, potential_family="constant", check=check)


def borg_exact(alpha: float = 1.0, half_length: float = 0.5) -> DensityModel:
    """The Borg special case c1 = 16 alpha^2/(1 + alpha), c2 = L + 1/alpha, kappa = 0."""
    alpha = validate_number(alpha, name="alpha")
    if alpha <= 0.0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    L = validate_positive(half_length, name="half_length")
    model = borg(16.0 * alpha ** 2 / (1.0 + alpha), L + 1.0 / alpha, 0.0, L)
    model.name = "borg_exact"
    model.parameters = {"alpha": alpha, "L": L}
    return model


def _horgan_potential(a: float):
    def v(s):
        return 0.75 * a * a / (1.0 + a * s) ** 2

    def dv(s, order):
        return (0.75 * a * a * (-1.0) ** order * math.factorial(order + 1) * a ** order
                / (1.0 + a * s) ** (order + 2))

    return v, dv


def horgan(a: float = 1.0) -> DensityModel:
    """
    rho = (a+2)^2 / (2 (a (a+2) (2x+1) + 2)) on the unit string, for which
    sigma(L) = 1 and V(sigma) = 3 a^2 / (4 (1 + a sigma)^2).
    """
    a = validate_number(a, name="a")
    if a <= -1.0:
        raise ParameterError(f"a must be greater than -1, got {a}")
    if a == 0.0:
        raise ParameterError("a = 0 is the uniform string; use the uniform density")
    K = 0.5 * (a + 2.0) ** 2
    wp = 2.0 * a * (a + 2.0)

    def w(x):
        return a * (a + 2.0) * (2.0 * x + 1.0) + 2.0

    v, dv = _horgan_potential(a)
    return DensityModel(
        "horgan", 0.5,
        lambda x: K / w(x),
        lambda x: -K * wp / w(x) ** 2,
        lambda x: 2.0 * K * wp ** 2 / w(x) ** 3,
        lambda x: -6.0 * K * wp ** 3 / w(x) ** 4,
        parameters={"a": a},
        sigma=lambda x: (np.sqrt(w(x) / 2.0) - 1.0) / a,
        sigma_inverse=lambda s: ((2.0 * (1.0 + a * s) ** 2 - 2.0) / (a * (a + 2.0)) - 1.0) / 2.0,
        v_sigma=v, v_sigma_derivative=dv, potential_family="horgan")


def _quartic_potential():
    pi3 = math.pi ** 3

    def v(s):
        return -2.0 / (pi3 + 3.0 * s) ** 2

    def dv(s, order):
        return (-2.0 * (-1.0) ** order * math.factorial(order + 1) * 3.0 ** order
                / (pi3 + 3.0 * s) ** (order + 2))

    return v, dv


def quartic() -> DensityModel:
    """rho = (x + 3 pi / 2)^4 on [-pi/2, pi/2]."""
    shift = 1.5 * math.pi
    pi3 = math.pi ** 3
    v, dv = _quartic_potential()
    return DensityModel(
        "quartic", 0.5 * math.pi,
        lambda x: (x + shift) ** 4,
        lambda x: 4.0 * (x + shift) ** 3,
        lambda x: 12.0 * (x + shift) ** 2,
        lambda x: 24.0 * (x + shift),
        sigma=lambda x: ((x + shift) ** 3 - pi3) / 3.0,
        sigma_inverse=lambda s: np.cbrt(3.0 * s + pi3) - shift,
        v_sigma=v, v_sigma_derivative=dv, potential_family="quartic")


def oscillating(frequency: float = 100.0 * math.pi, half_length: float = 0.5) -> DensityModel:
    """rho = (2 + sin(frequency x))^2."""
    w = validate_positive(frequency, name="frequency")
    L = validate_positive(half_length, name="half_length")

    def g(x):
        return 2.0 + np.sin(w * x)

    def rho(x):
        return g(x) ** 2

    def d1(x):
        return 2.0 * g(x) * w * np.cos(w * x)

    def d2(x):
        return 2.0 * ((w * np.cos(w * x)) ** 2 - g(x) * w * w * np.sin(w * x))

    def d3(x):
        return 2.0 * (-3.0 * w ** 3 * np.cos(w * x) * np.sin(w * x)
                      - g(x) * w ** 3 * np.cos(w * x))

    cos_l = math.cos(w * L)
    return DensityModel(
        "oscillating", L, rho, d1, d2, d3,
        parameters={"frequency": w, "L": L},
        sigma=lambda x: 2.0 * (x + L) + (cos_l - np.cos(w * x)) / w,
        oscillations=w * L / math.pi)


def epsilon_oscillating(epsilon: float = 0.02, half_length: float = 0.5) -> DensityModel:
    """
    rho = 2 + sin(2 pi (x + L) / epsilon), a rapidly oscillating density with
    1/epsilon periods per unit length. sigma is an incomplete elliptic
    integral with parameter m = 2/3.
    """
    eps = validate_number(epsilon, name="epsilon")
    if eps <= 0.0:
        raise ParameterError(f"epsilon must be positive, got {eps}")
    L = validate_positive(half_length, name="half_length")
    k = 2.0 * math.pi / eps
    m = 2.0 / 3.0
    pref = math.sqrt(3.0) * eps / math.pi
    e0 = float(special.ellipeinc(math.pi / 4.0, m))

    def theta(x):
        return k * (x + L)

    def sigma(x):
        return pref * (e0 - special.ellipeinc(math.pi / 4.0 - 0.5 * theta(x), m))

    return DensityModel(
        "epsilon", L,
        lambda x: 2.0 + np.sin(theta(x)),
        lambda x: k * np.cos(theta(x)),
        lambda x: -k * k * np.sin(theta(x)),
        lambda x: -k ** 3 * np.cos(theta(x)),
        parameters={"epsilon": eps, "L": L},
        sigma=sigma, oscillations=2.0 * L / eps)


def cosine(amplitude: float, rho0: float = 1.0, half_length: float = 0.5,
           harmonic: int = 1) -> DensityModel:
    """rho = rho0 (1 + amplitude cos(harmonic pi x / L)), a mild inhomogeneity."""
    amp = validate_number(amplitude, name="amplitude")
    rho0 = validate_positive(rho0, name="rho0")
    L = validate_positive(half_length, name="half_length")
    q = int(harmonic) * math.pi / L
    return DensityModel(
        "cosine", L,
        lambda x: rho0 * (1.0 + amp * np.cos(q * x)),
        lambda x: -rho0 * amp * q * np.sin(q * x),
        lambda x: -rho0 * amp * q * q * np.cos(q * x),
        lambda x: rho0 * amp * q ** 3 * np.sin(q * x),
        parameters={"amplitude": amp, "rho0": rho0, "L": L, "harmonic": int(harmonic)},
        oscillations=0.5 * int(harmonic))


# ---------------------------------------------------------------------------
# Derived densities
# ---------------------------------------------------------------------------

def gottlieb_transform(model: DensityModel, alpha: float, check: bool = True) -> DensityModel:
    """
    The isospectral density rho_bar(x) = xi'(x)^2 rho(xi(x)), with
    xi(x) = (1 + 2 alpha L)(x + L) / (1 + alpha (x + L)) - L.

    sigma_bar = sigma o xi, so sigma(L) and V as a function of sigma are
    unchanged.

    Raises:
        ParameterError: If alpha <= -1/(2L)
    """
    alpha = validate_number(alpha, name="alpha")
    L = model.half_length
    if alpha <= -1.0 / (2.0 * L):
        raise ParameterError(f"alpha must exceed -1/(2L) = {-1.0 / (2.0 * L)}, got {alpha}")
    beta = 1.0 + 2.0 * alpha * L

    def parts(x):
        u = x + L
        D = 1.0 + alpha * u
        xi = beta * u / D - L
        x1 = beta / D ** 2
        x2 = -2.0 * alpha * beta / D ** 3
        x3 = 6.0 * alpha ** 2 * beta / D ** 4
        x4 = -24.0 * alpha ** 3 * beta / D ** 5
        return np.clip(xi, -L, L), x1, x2, x3, x4

    def xi_inverse(y):
        v = y + L
        return v / (beta - alpha * v) - L

    def rho(x):
        xi, x1, _, _, _ = parts(x)
        return x1 * x1 * model.rho(xi)

    def d1(x):
        xi, x1, x2, _, _ = parts(x)
        g, g1 = x1 * x1, 2.0 * x1 * x2
        h, h1 = model.rho(xi), model.rho_prime(xi) * x1
        return g1 * h + g * h1

    def d2(x):
        xi, x1, x2, x3, _ = parts(x)
        g, g1, g2 = x1 * x1, 2.0 * x1 * x2, 2.0 * (x2 * x2 + x1 * x3)
        r1, r2 = model.rho_prime(xi), model.rho_second(xi)
        h, h1, h2 = model.rho(xi), r1 * x1, r2 * x1 * x1 + r1 * x2
        return g2 * h + 2.0 * g1 * h1 + g * h2

    def d3(x):
        xi, x1, x2, x3, x4 = parts(x)
        g, g1 = x1 * x1, 2.0 * x1 * x2
        g2 = 2.0 * (x2 * x2 + x1 * x3)
        g3 = 2.0 * (3.0 * x2 * x3 + x1 * x4)
        r1, r2, r3 = model.rho_prime(xi), model.rho_second(xi), model.rho_third(xi)
        h = model.rho(xi)
        h1 = r1 * x1
        h2 = r2 * x1 * x1 + r1 * x2
        h3 = r3 * x1 ** 3 + 3.0 * r2 * x1 * x2 + r1 * x3
        return g3 * h + 3.0 * g2 * h1 + 3.0 * g1 * h2 + g * h3

    def sigma(x):
        return model.sigma(parts(x)[0])

    def sigma_inv(s):
        return xi_inverse(model.sigma_inverse(s))

    params = dict(model.parameters)
    params["alpha"] = alpha
    return DensityModel(
        f"gottlieb:{model.name}", L, rho, d1, d2, d3, parameters=params,
        sigma=sigma, sigma_inverse=sigma_inv,
        v_sigma=model._v_sigma, v_sigma_derivative=model._v_sigma_derivative,
        potential_family=model.potential_family,
        oscillations=model.oscillations, analytic=model.analytic, check=check)


def power_density(model: DensityModel, p: float, check: bool = True) -> DensityModel:
    """rho^p with chain-rule derivatives (p = 2 gives the rho^2 trial density)."""
    p = validate_number(p, name="p")

    def d1(x):
        return p * model.rho(x) ** (p - 1.0) * model.rho_prime(x)

    def d2(x):
        r, r1, r2 = model.rho(x), model.rho_prime(x), model.rho_second(x)
        return p * (p - 1.0) * r ** (p - 2.0) * r1 ** 2 + p * r ** (p - 1.0) * r2

    def d3(x):
        r, r1, r2, r3 = model.rho(x), model.rho_prime(x), model.rho_second(x), model.rho_third(x)
        return (p * (p - 1.0) * (p - 2.0) * r ** (p - 3.0) * r1 ** 3
                + 3.0 * p * (p - 1.0) * r ** (p - 2.0) * r1 * r2
                + p * r ** (p - 1.0) * r3)

    params = dict(model.parameters)
    params["power"] = p
    return DensityModel(f"power:{model.name}", model.half_length,
                        lambda x: model.rho(x) ** p, d1, d2, d3, parameters=params,
                        oscillations=model.oscillations, analytic=model.analytic,
                        check=check)


def polynomial_trial(model: DensityModel, coefficients: Sequence[float],
                     check: bool = False) -> DensityModel:
    """
    rho(x) [sum_j a_j x^j]^2, the polynomial-multiplier trial density.

    Raises:
        DensityError: If the multiplier makes the density vanish
    """
    q = Polynomial(np.asarray(coefficients, dtype=float))
    q1, q2, q3 = q.deriv(1), q.deriv(2), q.deriv(3)

    def s(x):
        return q(x) ** 2

    def s1(x):
        return 2.0 * q(x) * q1(x)

    def s2(x):
        return 2.0 * (q1(x) ** 2 + q(x) * q2(x))

    def s3(x):
        return 2.0 * (3.0 * q1(x) * q2(x) + q(x) * q3(x))

    def d1(x):
        return model.rho_prime(x) * s(x) + model.rho(x) * s1(x)

    def d2(x):
        return (model.rho_second(x) * s(x) + 2.0 * model.rho_prime(x) * s1(x)
                + model.rho(x) * s2(x))

    def d3(x):
        return (model.rho_third(x) * s(x) + 3.0 * model.rho_second(x) * s1(x)
                + 3.0 * model.rho_prime(x) * s2(x) + model.rho(x) * s3(x))

    params = dict(model.parameters)
    params.update({f"a{j}": float(c) for j, c in enumerate(q.coef)})
    return DensityModel(f"trial:{model.name}", model.half_length,
                        lambda x: model.rho(x) * s(x), d1, d2, d3, parameters=params,
                        oscillations=model.oscillations, analytic=model.analytic,
                        check=check)


def _finite_difference_derivatives(f: Evaluator, L: float):
    h1 = max(1e-5 * L, 1e-6)
    h2 = 1e-3 * L
    h3 = 5e-3 * L

    def d1(x):
        return (-f(x + 2 * h1) + 8 * f(x + h1) - 8 * f(x - h1) + f(x - 2 * h1)) / (12 * h1)

    def d2(x):
        return (-f(x + 2 * h2) + 16 * f(x + h2) - 30 * f(x) + 16 * f(x - h2)
                - f(x - 2 * h2)) / (12 * h2 * h2)

    def d3(x):
        return (-f(x + 3 * h3) + 8 * f(x + 2 * h3) - 13 * f(x + h3) + 13 * f(x - h3)
                - 8 * f(x - 2 * h3) + f(x - 3 * h3)) / (8 * h3 ** 3)

    return d1, d2, d3


def from_callable(rho: Evaluator, half_length: float, name: str = "custom",
                  oscillations: float = 0.0) -> DensityModel:
    """
    A user density with 4th-order finite-difference derivatives.

    rho must accept arguments slightly outside [-L, L] (up to 3 * 5e-3 L).
    """
    L = validate_positive(half_length, name="half_length")

    def f(x):
        return np.asarray(rho(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x)

    d1, d2, d3 = _finite_difference_derivatives(f, L)
    return DensityModel(name, L, f, d1, d2, d3, oscillations=oscillations, analytic=False)


def from_csv(path: str) -> DensityModel:
    """
    A density tabulated as (x, rho) rows in a CSV file.

    The table is recentred on its midpoint; rho is a cubic spline and its
    derivatives come from finite differences.
    """
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"Cannot read density table {path}: {exc}")
    if data.shape[1] < 2 or data.shape[0] < 4:
        raise ParameterError(f"{path}: need at least four rows of (x, rho)")
    order = np.argsort(data[:, 0])
    x, r = data[order, 0], data[order, 1]
    if np.any(np.diff(x) <= 0.0):
        raise ParameterError(f"{path}: x values must be distinct")
    centre = 0.5 * (x[0] + x[-1])
    L = 0.5 * (x[-1] - x[0])
    spline = CubicSpline(x - centre, r, extrapolate=True)
    model = from_callable(spline, L, name="csv")
    model.parameters = {"path": path, "L": L}
    return model


def from_grid_function(gf: GridFunction, name: str = "grid", root: bool = False) -> DensityModel:
    """
    A density held as a Chebyshev grid function on [-L, L].

    With root set, gf holds sqrt(rho): rho and its derivatives are formed
    from gf and its spectral derivatives, and sigma is the antiderivative
    of gf, so rho stays nonnegative between the nodes.
    """
    if abs(gf.a + gf.b) > 1e-12 * (gf.b - gf.a):
        raise ParameterError("grid function domain must be symmetric [-L, L]")
    d1, d2, d3 = gf.derivative(1), gf.derivative(2), gf.derivative(3)
    if not root:
        return DensityModel(name, gf.b, gf, d1, d2, d3,
                            oscillations=gf.freq_hint or 0.0, analytic=False)
    return DensityModel(
        name, gf.b,
        lambda x: gf(x) ** 2,
        lambda x: 2.0 * gf(x) * d1(x),
        lambda x: 2.0 * (d1(x) ** 2 + gf(x) * d2(x)),
        lambda x: 2.0 * (3.0 * d1(x) * d2(x) + gf(x) * d3(x)),
        sigma=gf.antiderivative(),
        oscillations=gf.freq_hint or 0.0, analytic=False)


CATALOG = {
    "uniform": uniform,
    "borg": borg,
    "borg_exact": borg_exact,
    "horgan": horgan,
    "quartic": quartic,
    "oscillating": oscillating,
    "epsilon": epsilon_oscillating,
    "cosine": cosine,
}

_PARAM_ALIASES = {"L": "half_length"}


def catalog_model(name: str, **params: Any) -> DensityModel:
    """
    Build a catalog density by name.

    Raises:
        ParameterError: On an unknown name or parameter
    """
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ParameterError(f"Unknown density {name!r}; known: {', '.join(sorted(CATALOG))}")
    kwargs = {_PARAM_ALIASES.get(k, k): v for k, v in params.items()}
    try:
        return factory(**kwargs)
    except TypeError as exc:
        raise ParameterError(f"Bad parameters for density {name!r}: {exc}")
