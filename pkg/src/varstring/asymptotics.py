"""
High-energy expansion E_n ~ A1 n^2 + A2 + A3/n^2 + ...

A1 = pi^2/sigma(L)^2 and A2 = <V> are the classic WKB terms. A3 has a first
order part from the endpoint derivatives of V and a second order part
written as a single series over gamma_k, whose terms come from the Borel
transform F of the odd-derivative series of V at the two ends of the
string. The gamma_k decay like C/k^4, so the tail can be added in closed
form.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .config import BOREL_T_MAX, DEFAULT_GAMMA_TERMS, POINTS_PER_OSCILLATION
from .density import DensityModel
from .errors import ContinuationUnavailableError, ParameterError, RootNotFoundError
from .logging_config import get_logger
from .numerics import FitResult, GridFunction, bracket_root, fit_inverse_even_powers, integrate_adaptive
from .specfun import ZETA3, xf_minus_one
from .utils import validate_index

logger = get_logger(__name__)

# V(sigma) = c / (p + sigma)^2 families with a closed-form Borel transform
INVERSE_SQUARE_FAMILIES = ("horgan", "quartic")
CONSTANT_FAMILIES = ("constant",)

GAMMA_PLATEAU_TOL = 1e-3


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """
    Coefficients of E_n ~ A1 n^2 + A2 + A3/n^2 + A4/n^4 + A5/n^6.

    Attributes:
        A1, A2, A3: Leading coefficients
        A4, A5: Higher coefficients, only from fits
        provenance: "formula" or "fit" per coefficient name
        errors: Error estimate per coefficient name
    """
    A1: float
    A2: float
    A3: float
    A4: Optional[float] = None
    A5: Optional[float] = None
    provenance: Dict[str, str] = field(default_factory=dict)
    errors: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.A1 > 0.0:
            raise ParameterError(f"A1 must be positive, got {self.A1}")

    def energy(self, n: int) -> float:
        """The truncated expansion at mode n."""
        terms = [self.A1 * n * n, self.A2, self.A3 / n ** 2]
        if self.A4 is not None:
            terms.append(self.A4 / n ** 4)
        if self.A5 is not None:
            terms.append(self.A5 / n ** 6)
        return math.fsum(terms)

    def as_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {"A1": self.A1, "A2": self.A2, "A3": self.A3}
        if self.A4 is not None:
            out["A4"] = self.A4
        if self.A5 is not None:
            out["A5"] = self.A5
        out["provenance"] = dict(self.provenance)
        out["errors"] = dict(self.errors)
        return out


# ---------------------------------------------------------------------------
# A1, A2 and the first-order part of A3
# ---------------------------------------------------------------------------

def _min_degree(oscillations: float) -> int:
    return 1 << max(5, int(math.ceil(math.log2(max(POINTS_PER_OSCILLATION * oscillations, 2.0)))))


def mean_V(model: DensityModel) -> float:
    """
    <V> = (1/sigma(L)) * integral of V over [0, sigma(L)], which is A2.

    With no closed V(sigma) the x-form
    (1/sigma(L)) * integral of (4 rho rho'' - 5 rho'^2) / (16 rho^(5/2)) dx is used.
    """
    sl = model.sigma_total
    if model.has_closed_potential:
        gf = GridFunction.adaptive(model.v_sigma, 0.0, sl)
        return gf.integral() / sl
    L = model.half_length

    def integrand(x):
        r, r1, r2 = model.rho(x), model.rho_prime(x), model.rho_second(x)
        return (4.0 * r * r2 - 5.0 * r1 * r1) / (16.0 * r ** 2.5)

    gf = GridFunction.adaptive(integrand, -L, L, min_degree=_min_degree(model.oscillations),
                               freq_hint=model.oscillations or None)
    return gf.integral() / sl


def a3_first_order(model: DensityModel) -> float:
    """A3 from <n|V|n>: -(sigma(L)/(4 pi^2)) [V'(sigma(L)) - V'(0)]."""
    sl = model.sigma_total
    top = model.v_sigma_derivative(sl, 1)
    bottom = model.v_sigma_derivative(0.0, 1)
    return -sl / (4.0 * math.pi ** 2) * (top - bottom)


# ---------------------------------------------------------------------------
# Borel transform
# ---------------------------------------------------------------------------

def _inverse_square_parameters(model: DensityModel) -> Tuple[float, float]:
    # V = c/(p + sigma)^2: V(0) = c/p^2, V'(0) = -2c/p^3
    v0 = float(model.v_sigma(0.0))
    d0 = float(model.v_sigma_derivative(0.0, 1))
    p = -2.0 * v0 / d0
    return v0 * p * p, p


@dataclass(frozen=True, eq=False)
class BorelEvaluator:
    """
    F(upsilon, sigma0) = integral over t >= 0 of exp(-t) G(t upsilon) dt,
    G(upsilon) = Im V(sigma0 + i upsilon), at one end sigma0 of the string.

    Attributes:
        model: Density with a closed-form V(sigma)
        sigma0: 0 or sigma(L)
        method: "closed", "numeric" or "auto" (closed when the potential
            family has a closed form, numeric otherwise)
    """
    model: DensityModel
    sigma0: float
    method: str = "auto"

    def __post_init__(self):
        sl = self.model.sigma_total
        s0 = float(self.sigma0)
        if not (abs(s0) <= 1e-12 * sl or abs(s0 - sl) <= 1e-12 * sl):
            raise ParameterError(f"sigma0 must be 0 or sigma(L) = {sl}, got {s0}")
        family = self.model.potential_family
        closed = family in INVERSE_SQUARE_FAMILIES or family in CONSTANT_FAMILIES
        method = self.method
        if method == "auto":
            method = "closed" if closed else "numeric"
        if method not in ("closed", "numeric"):
            raise ParameterError(f"unknown Borel method {self.method!r}")
        if method == "closed" and not closed:
            raise ParameterError(f"no closed-form Borel transform for {self.model.key}")
        if method == "numeric" and not self.model.has_closed_potential:
            raise ContinuationUnavailableError(
                f"{self.model.key} has no analytic continuation of V(sigma)")
        object.__setattr__(self, "method", method)

    def G(self, upsilon: float) -> float:
        return float(np.imag(self.model.v_sigma(complex(self.sigma0, upsilon))))

    def _closed(self, upsilon: np.ndarray) -> np.ndarray:
        if self.model.potential_family in CONSTANT_FAMILIES:
            return np.zeros_like(upsilon)
        c, p = _inverse_square_parameters(self.model)
        omega = (p + self.sigma0) / upsilon
        return c * xf_minus_one(omega) / (omega * upsilon ** 2)

    def _numeric(self, upsilon: float) -> float:
        scale = abs(upsilon * self.model.v_sigma_derivative(self.sigma0, 1)) + 1e-300
        return integrate_adaptive(lambda t: math.exp(-t) * self.G(t * upsilon),
                                  0.0, BOREL_T_MAX, tol=max(1e-15, 1e-13 * scale))

    def __call__(self, upsilon):
        arr = np.atleast_1d(np.asarray(upsilon, dtype=float))
        if np.any(arr <= 0.0):
            raise ParameterError("upsilon must be positive")
        if self.method == "closed":
            out = self._closed(arr)
        else:
            out = np.array([self._numeric(float(u)) for u in arr])
        return float(out[0]) if np.ndim(upsilon) == 0 else out


def borel_F(evaluator: BorelEvaluator, upsilon):
    """F(upsilon, sigma0) for scalar or array upsilon > 0."""
    return evaluator(upsilon)


# ---------------------------------------------------------------------------
# Second-order part of A3
# ---------------------------------------------------------------------------

def gamma_terms(model: DensityModel, N: int = DEFAULT_GAMMA_TERMS,
                method: str = "auto") -> Tuple[np.ndarray, np.ndarray]:
    """
    The (k, gamma_k) pairs for k = 1..N, where
    gamma_k = (sigma^2/pi^4) (1/(2 k^2)) {[F(s/(pi k), s) + F(s/(pi k), 0)]^2
              - F(s/(2 pi k), s) F(s/(2 pi k), 0)} with s = sigma(L).
    """
    N = validate_index(N, name="N")
    sl = model.sigma_total
    top = BorelEvaluator(model, sl, method)
    bottom = BorelEvaluator(model, 0.0, method)
    k = np.arange(1, N + 1, dtype=float)
    u1 = sl / (math.pi * k)
    u2 = sl / (2.0 * math.pi * k)
    bracket = (top(u1) + bottom(u1)) ** 2 - top(u2) * bottom(u2)
    return k.astype(int), (sl ** 2 / math.pi ** 4) * bracket / (2.0 * k ** 2)


def tail_constant(model: DensityModel) -> float:
    """C = sigma^4/(2 pi^6) [(a + b)^2 - a b / 4], a = V'(sigma(L)), b = V'(0)."""
    sl = model.sigma_total
    a = model.v_sigma_derivative(sl, 1)
    b = model.v_sigma_derivative(0.0, 1)
    return sl ** 4 / (2.0 * math.pi ** 6) * ((a + b) ** 2 - 0.25 * a * b)


def fitted_tail_constant(k: np.ndarray, gamma: np.ndarray) -> float:
    """C from the mean of gamma_k k^4 over the upper half of the terms."""
    half = len(k) // 2
    return float(np.mean(gamma[half:] * k[half:].astype(float) ** 4))


def a3_second_order(model: DensityModel, N_terms: int = DEFAULT_GAMMA_TERMS,
                    accelerate: bool = False, method: str = "auto") -> float:
    """
    Sum of gamma_k, optionally with the C/k^4 tail summed in closed form.

    With acceleration the result is C pi^4/90 + sum_k (gamma_k - C/k^4).
    A warning is logged when gamma_N N^4 has not settled on C.
    """
    k, gamma = gamma_terms(model, N_terms, method)
    try:
        c = tail_constant(model)
    except ParameterError:
        c = fitted_tail_constant(k, gamma)
    kf = k.astype(float)
    if c != 0.0:
        drift = abs(gamma[-1] * kf[-1] ** 4 / c - 1.0)
        if drift > GAMMA_PLATEAU_TOL:
            logger.warning("gamma_k k^4 has not settled on C after %d terms (drift %.2e)",
                           len(k), drift)
    if not accelerate:
        return math.fsum(gamma)
    return c * math.pi ** 4 / 90.0 + math.fsum(gamma - c / kf ** 4)


def j0l0_weight(a: float, b: float) -> float:
    """(a^2 + b^2)/180 + 7 a b / 720; equals 1/48 for a = b = 1."""
    return (a * a + b * b) / 180.0 + 7.0 * a * b / 720.0


def a3_j0l0_approximation(model: DensityModel) -> float:
    """
    A3 with the second-order sums restricted to their lowest terms:
    a3_first_order + (sigma^4/pi^2) j0l0_weight(V'(sigma(L)), V'(0)).
    """
    sl = model.sigma_total
    a = model.v_sigma_derivative(sl, 1)
    b = model.v_sigma_derivative(0.0, 1)
    return a3_first_order(model) + sl ** 4 / math.pi ** 2 * j0l0_weight(a, b)


def s_series(j: int, l: int, n: int, kind: str = "I", K: Optional[int] = None) -> float:
    """
    Direct partial sum over k = 1..K, k != n, of
    w_j(k) w_l(k) / (n^2 - k^2) with w_j(k) = (k-n)^-(2j+2) - (k+n)^-(2j+2);
    kind "II" adds the factor (-1)^(k+n).
    """
    n = validate_index(n)
    j = validate_index(j, min_value=0, name="j")
    l = validate_index(l, min_value=0, name="l")
    if kind not in ("I", "II"):
        raise ParameterError(f"kind must be 'I' or 'II', got {kind!r}")
    K = validate_index(K if K is not None else 10 * n, min_value=10 * n, name="K")
    k = np.arange(1, K + 1, dtype=float)
    k = k[k != n]
    d, s = k - n, k + n

    def w(order):
        return 1.0 / d ** (2 * order + 2) - 1.0 / s ** (2 * order + 2)

    terms = w(j) * w(l) / (n * n - k * k)
    if kind == "II":
        terms = terms * np.where((k.astype(int) + n) % 2 == 0, 1.0, -1.0)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# WKB quantization and the Casimir pieces
# ---------------------------------------------------------------------------

def expanded_energy(model: DensityModel, n: int) -> float:
    """n^2 pi^2 / sigma(L)^2 + <V>."""
    n = validate_index(n)
    return (n * math.pi / model.sigma_total) ** 2 + mean_V(model)


def wkb_quantization(model: DensityModel, n: int) -> float:
    """
    E_n from sqrt(E) sigma(L) + (1/(32 sqrt(E))) * integral of
    (5 rho'^2 - 4 rho rho'') / rho^(5/2) dx = n pi.

    The integral equals -16 sigma(L) <V>, so the condition reads
    sigma(L) k - sigma(L) <V> / (2k) = n pi with k = sqrt(E).

    Raises:
        RootNotFoundError: If the condition has no root in the search bracket
    """
    n = validate_index(n)
    sl = model.sigma_total
    v = mean_V(model)
    target = n * math.pi

    def condition(k):
        return sl * k - sl * v / (2.0 * k) - target

    k0 = target / sl
    lo, hi = 0.25 * k0, 4.0 * k0 + math.sqrt(abs(v)) + 1.0
    try:
        k = bracket_root(condition, lo, hi)
    except RootNotFoundError as exc:
        raise RootNotFoundError(f"WKB quantization for n = {n}: {exc}", exc.endpoints)
    return k * k


@dataclass(frozen=True)
class CasimirTerms:
    """
    Pieces of the cutoff-regularized sum of the frequencies, inside an
    overall factor `prefactor`. The divergent pieces carry their cutoff
    dependence as structure tags; only alpha-independent numbers are given.
    """
    leading_coefficient: float
    log_coefficient: float
    zeta3_finite_term: float
    leading_structure: str = "(-1/12 + 1/alpha^2)"
    log_structure: str = "-log(alpha)"
    prefactor: float = 0.5


def frequency_expansion(coeffs: AsymptoticCoefficients, model: DensityModel, n: int) -> float:
    """
    omega_n ~ pi n/sigma + sigma <V>/(2 n pi)
              + (sigma^3/(8 n^3 pi^3)) [4 pi^2 A3/sigma^2 - <V>^2].
    """
    n = validate_index(n)
    sl = model.sigma_total
    v = coeffs.A2
    return math.fsum([
        math.pi * n / sl,
        sl * v / (2.0 * n * math.pi),
        sl ** 3 / (8.0 * n ** 3 * math.pi ** 3) * (4.0 * math.pi ** 2 * coeffs.A3 / sl ** 2 - v * v),
    ])


def casimir_terms(coeffs: AsymptoticCoefficients, model: DensityModel) -> CasimirTerms:
    """Named pieces of the regularized frequency sum."""
    sl = model.sigma_total
    v = coeffs.A2
    bracket = 4.0 * math.pi ** 2 * coeffs.A3 / sl ** 2 - v * v
    return CasimirTerms(
        leading_coefficient=math.pi / sl,
        log_coefficient=sl * v / (2.0 * math.pi),
        zeta3_finite_term=ZETA3 * sl ** 3 / (8.0 * math.pi ** 3) * bracket)


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------

def formula_coefficients(model: DensityModel, N_terms: int = DEFAULT_GAMMA_TERMS,
                         accelerate: bool = True) -> AsymptoticCoefficients:
    """A1, A2 and A3 from their closed expressions."""
    sl = model.sigma_total
    a1 = math.pi ** 2 / sl ** 2
    a2 = mean_V(model)
    first = a3_first_order(model)
    second = a3_second_order(model, N_terms, accelerate)
    if accelerate:
        err = abs(tail_constant(model)) / (3.0 * N_terms ** 3) * 1e-3
    else:
        err = abs(tail_constant(model)) / (3.0 * N_terms ** 3)
    logger.info("A3 for %s: first order %.15g, second order %.15g", model.key, first, second)
    return AsymptoticCoefficients(
        a1, a2, first + second,
        provenance={"A1": "formula", "A2": "formula", "A3": "formula"},
        errors={"A1": 1e-16 * a1, "A2": 1e-13 * max(abs(a2), 1e-300), "A3": err})


def coefficients_from_spectrum(energies: Sequence[Tuple[int, float]], n_min: int = 1,
                               p: int = 5) -> AsymptoticCoefficients:
    """
    Fit E_n over n^2, 1, n^-2, ... and return the leading coefficients
    with their one-sigma errors.
    """
    if p < 3:
        raise ParameterError(f"need at least three fit coefficients, got {p}")
    fit: FitResult = fit_inverse_even_powers(energies, p, n_min)
    names = ["A1", "A2", "A3", "A4", "A5"]
    values = list(fit.coefficients[:5])
    errors = list(fit.standard_errors[:5])
    extra = {name: values[i] for i, name in enumerate(names) if 3 <= i < len(values)}
    logger.info("fit over %d rows: residual %.3e, condition %.3e", fit.rows,
                fit.residual_norm, fit.condition)
    return AsymptoticCoefficients(
        values[0], values[1], values[2], extra.get("A4"), extra.get("A5"),
        provenance={name: "fit" for name in names[:len(values)]},
        errors={name: errors[i] for i, name in enumerate(names[:len(values)])})
