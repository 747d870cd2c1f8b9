"""
Numerical infrastructure shared by the engines.

Adaptive quadrature, Chebyshev grid functions, root bracketing, the dense
symmetric eigensolver, the inverse-even-power least-squares fit and the
simplex optimizer. Everything here is pure; callers pass immutable inputs
and get new objects back.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import fft, integrate, linalg, optimize

from .config import (
    CHEB_MAX_DEGREE,
    CHEB_TAIL_TOL,
    DEFAULT_QUAD_TOL,
    QUAD_MAX_SUBDIVISIONS,
    SIMPLEX_MAX_EVALUATIONS,
    SIMPLEX_TOL,
)
from .errors import ConvergenceError, DomainError, ParameterError, QuadratureError, RootNotFoundError
from .logging_config import get_logger
from .utils import validate_index, validate_positive

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def integrate_adaptive(f: Callable[[float], float], a: float, b: float,
                       tol: float = DEFAULT_QUAD_TOL,
                       freq_hint: Optional[float] = None) -> float:
    """
    Adaptive quadrature of f over [a, b].

    The interval is cut into ceil(4 * freq_hint) panels when a frequency
    hint (number of oscillation periods over [a, b]) is given, and each
    panel is handed to QUADPACK.

    Args:
        f: Scalar integrand
        a: Lower limit
        b: Upper limit, b > a
        tol: Absolute tolerance for the whole integral
        freq_hint: Optional number of oscillation periods on [a, b]

    Returns:
        The integral

    Raises:
        QuadratureError: If the error estimate exceeds the tolerance
    """
    if not b > a:
        raise ParameterError(f"integrate_adaptive needs a < b, got [{a}, {b}]")
    validate_positive(tol, name="tol")
    panels = 1
    if freq_hint:
        panels = max(1, int(math.ceil(4.0 * float(freq_hint))))
    edges = np.linspace(a, b, panels + 1)
    values = []
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, info = _quad_panel(f, lo, hi, tol / panels)
        values.append(val)
        total_err += err
        if info:
            logger.warning("quad flagged panel [%g, %g]: %s", lo, hi, info)
    result = math.fsum(values)
    if total_err > max(tol, 1e-10 * abs(result)):
        raise QuadratureError(
            f"quadrature on [{a}, {b}] reached only {total_err:.3e} (tol {tol:.1e})",
            best_estimate=result, achieved_tolerance=total_err)
    return result


def _quad_panel(f, lo, hi, tol):
    out = integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-14,
                         limit=QUAD_MAX_SUBDIVISIONS, full_output=1)
    val, err = out[0], out[1]
    info = out[3] if len(out) > 3 else ""
    return val, err, info


def gauss_legendre_edges(edges: np.ndarray,
                         points: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a Gauss-Legendre rule on each cell between ascending edges."""
    x, w = np.polynomial.legendre.leggauss(points)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gauss_legendre_panels(a: float, b: float, panels: int,
                          points: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    return gauss_legendre_edges(np.linspace(a, b, panels + 1), points)


# ---------------------------------------------------------------------------
# Chebyshev grid functions
# ---------------------------------------------------------------------------

def lobatto_nodes(a: float, b: float, degree: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points on [a, b], ascending."""
    j = np.arange(degree + 1)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid - half * np.cos(np.pi * j / degree)
    nodes[0], nodes[-1] = a, b
    return nodes


def _values_to_coeffs(values: np.ndarray) -> np.ndarray:
    n = len(values) - 1
    c = fft.dct(values[::-1], type=1) / n
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def _coeffs_to_values(coeffs: np.ndarray) -> np.ndarray:
    c = np.array(coeffs, dtype=float)
    c[0] *= 2.0
    c[-1] *= 2.0
    return (fft.dct(c, type=1) * 0.5)[::-1]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """
    A function on [a, b] held as values at Chebyshev-Lobatto nodes.

    Attributes:
        a: Left end of the domain
        b: Right end of the domain
        values: Values at the degree+1 ascending Lobatto nodes
        freq_hint: Optional number of oscillation periods on [a, b]
    """
    a: float
    b: float
    values: np.ndarray
    freq_hint: Optional[float] = None
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 2:
            raise ParameterError("GridFunction needs at least two node values")
        if not self.b > self.a:
            raise ParameterError(f"GridFunction domain must have a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_coeffs", _values_to_coeffs(vals))

    @classmethod
    def from_coefficients(cls, a: float, b: float, coeffs: np.ndarray,
                          freq_hint: Optional[float] = None) -> "GridFunction":
        return cls(a, b, _coeffs_to_values(np.asarray(coeffs, dtype=float)), freq_hint)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                      degree: int, freq_hint: Optional[float] = None) -> "GridFunction":
        """Sample a vectorized f at the Lobatto nodes of the given degree."""
        degree = validate_index(degree, min_value=1, name="degree")
        x = lobatto_nodes(a, b, degree)
        return cls(a, b, np.asarray(f(x), dtype=float) * np.ones_like(x), freq_hint)

    @classmethod
    def adaptive(cls, f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 tol: float = CHEB_TAIL_TOL, min_degree: int = 32,
                 max_degree: int = CHEB_MAX_DEGREE,
                 freq_hint: Optional[float] = None) -> "GridFunction":
        """
        Sample f with the degree doubled until the Chebyshev tail is below tol.

        Raises:
            ConvergenceError: If max_degree is reached first
        """
        degree = int(min_degree)
        while True:
            gf = cls.from_function(f, a, b, degree, freq_hint)
            if gf.tail_magnitude() <= tol * max(1.0, gf.scale()):
                logger.debug("adaptive Chebyshev degree %d on [%g, %g]", degree, a, b)
                return gf
            if degree >= max_degree:
                raise ConvergenceError(
                    f"Chebyshev interpolant did not resolve at degree {degree} "
                    f"(tail {gf.tail_magnitude():.2e})")
            degree *= 2

    @property
    def degree(self) -> int:
        return len(self.values) - 1

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs.copy()

    @property
    def nodes(self) -> np.ndarray:
        return lobatto_nodes(self.a, self.b, self.degree)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.b - self.a)

    def scale(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def tail_magnitude(self) -> float:
        """Interpolation error estimate: size of the trailing coefficients."""
        tail = min(8, max(2, self.degree // 16))
        return float(np.max(np.abs(self._coeffs[-tail:])))

    def _to_ref(self, x):
        return (2.0 * np.asarray(x, dtype=float) - (self.a + self.b)) / (self.b - self.a)

    def __call__(self, x):
        out = C.chebval(self._to_ref(x), self._coeffs)
        return out if np.ndim(out) else float(out)

    def _like(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.a, self.b, values, self.freq_hint)

    def derivative(self, order: int = 1) -> "GridFunction":
        c = self._coeffs
        for _ in range(order):
            c = C.chebder(c) / self.half_width
        padded = np.zeros(self.degree + 1)
        padded[:len(c)] = c
        return GridFunction.from_coefficients(self.a, self.b, padded, self.freq_hint)

    def antiderivative(self) -> "GridFunction":
        """The antiderivative that vanishes at a."""
        c = C.chebint(self._coeffs, lbnd=-1.0) * self.half_width
        c = np.array(c)
        # T_{N+1} aliases onto T_{N-1} at the Lobatto nodes
        if len(c) > self.degree + 1:
            c[self.degree - 1] += c[self.degree + 1]
            c = c[:self.degree + 1]
        gf = GridFunction.from_coefficients(self.a, self.b, c, self.freq_hint)
        return self._like(gf.values - gf.values[0])

    def integral(self) -> float:
        """Clenshaw-Curtis integral over [a, b]."""
        k = np.arange(self.degree + 1)
        w = np.zeros(self.degree + 1)
        even = k % 2 == 0
        w[even] = 2.0 / (1.0 - k[even] ** 2)
        return float(np.dot(w, self._coeffs) * self.half_width)

    def inner(self, other: "GridFunction") -> float:
        return (self * other).integral()

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    def resample(self, degree: int) -> "GridFunction":
        return GridFunction.from_function(self, self.a, self.b, degree, self.freq_hint)

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            if other.degree != self.degree or (other.a, other.b) != (self.a, self.b):
                raise DomainError("GridFunction operands live on different grids")
            return self._like(op(self.values, other.values))
        return self._like(op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return self._like(-self.values)


def dirichlet_energy(gf: GridFunction) -> float:
    """Integral of (f')^2 over the domain, on a doubled grid so the square is resolved."""
    d = gf.derivative().resample(2 * gf.degree)
    return (d * d).integral()


# ---------------------------------------------------------------------------
# Roots
# ---------------------------------------------------------------------------

def bracket_root(f: Callable[[float], float], a: float, b: float,
                 tol: float = 1e-15) -> float:
    """
    Root of f in [a, b] by Brent's method.

    Raises:
        RootNotFoundError: If f(a) and f(b) have the same sign
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return float(a)
    if fb == 0.0:
        return float(b)
    if np.sign(fa) == np.sign(fb):
        raise RootNotFoundError(
            f"no sign change on [{a}, {b}]: f = ({fa:.6e}, {fb:.6e})",
            endpoints=(float(a), float(b)))
    return float(optimize.brentq(f, a, b, xtol=tol * max(1.0, abs(a), abs(b)),
                                 rtol=4 * np.finfo(float).eps, maxiter=500))


def scan_sign_changes(values: np.ndarray) -> np.ndarray:
    """Indices i with a sign change between values[i] and values[i+1]."""
    s = np.sign(values)
    return np.nonzero(s[:-1] * s[1:] < 0)[0]


# ---------------------------------------------------------------------------
# Dense symmetric eigenproblems
# ---------------------------------------------------------------------------

class SymmetricMatrix:
    """
    A dense real symmetric matrix built from its lower triangle.

    Attributes:
        inverse: True when the matrix represents the inverse operator
    """

    def __init__(self, data, inverse: bool = False):
        arr = np.array(data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ParameterError(f"SymmetricMatrix needs a square array, got shape {arr.shape}")
        lower = np.tril(arr)
        self._data = lower + np.tril(arr, -1).T
        self.inverse = inverse

    @property
    def dimension(self) -> int:
        return self._data.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self._data

    def norm(self) -> float:
        return float(np.linalg.norm(self._data, 2)) if self.dimension < 400 \
            else float(np.max(np.sum(np.abs(self._data), axis=1)))

    def __getitem__(self, idx):
        return self._data[idx]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.nonzero(np.abs(col) > 1e-14 * np.max(np.abs(col)))[0]
        if len(nz) and col[nz[0]] < 0:
            vectors[:, j] = -col
    return vectors


def eigen_symmetric(matrix: SymmetricMatrix,
                    subset: Optional[Tuple[int, int]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Args:
        matrix: The matrix
        subset: Optional inclusive (lo, hi) index range of eigenvalues

    Returns:
        (eigenvalues, eigenvectors as columns)

    Raises:
        ConvergenceError: If LAPACK fails to converge
    """
    if not isinstance(matrix, SymmetricMatrix):
        matrix = SymmetricMatrix(matrix)
    try:
        vals, vecs = linalg.eigh(matrix.array, subset_by_index=subset,
                                 check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(
            f"eigensolver failed for dimension {matrix.dimension}: {exc}")
    order = np.argsort(vals, kind="stable")
    return vals[order], _fix_signs(vecs[:, order])


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """
    Least-squares fit of E_n = A1 n^2 + A2 + A3/n^2 + ...

    Attributes:
        coefficients: A1..Ap
        residual_norm: Unweighted 2-norm of E - fit over the rows used
        condition: Condition number of the scaled design matrix
        standard_errors: One-sigma errors of the coefficients
        rows: Number of data rows used
    """
    coefficients: Tuple[float, ...]
    residual_norm: float
    condition: float
    standard_errors: Tuple[float, ...]
    rows: int


def _design_row_powers(p: int) -> np.ndarray:
    return np.array([2] + [-2 * j for j in range(p - 1)], dtype=float)


def fit_inverse_even_powers(energies: Sequence[Tuple[int, float]], num_coeffs: int,
                            n_min: int = 1) -> FitResult:
    """
    Fit E_n over the basis n^2, 1, n^-2, n^-4, ...

    Rows are weighted by 1/n^2 (relative accuracy) and the design columns
    are normalized before a QR solve.

    Args:
        energies: (n, E_n) pairs
        num_coeffs: Number of coefficients p
        n_min: Smallest n included

    Returns:
        The FitResult

    Raises:
        ParameterError: If fewer than 3p rows survive the n_min cut
        ConvergenceError: If the design matrix is rank deficient
    """
    p = validate_index(num_coeffs, min_value=1, name="num_coeffs")
    rows = sorted((int(n), float(e)) for n, e in energies if int(n) >= n_min)
    if len(rows) < 3 * p:
        raise ParameterError(f"need at least {3 * p} rows with n >= {n_min}, got {len(rows)}")
    n = np.array([r[0] for r in rows], dtype=float)
    e = np.array([r[1] for r in rows])
    powers = _design_row_powers(p)
    design = n[:, None] ** powers[None, :]
    weight = 1.0 / n ** 2
    a = design * weight[:, None]
    rhs = e * weight
    col_norm = np.linalg.norm(a, axis=0)
    a_scaled = a / col_norm
    q, r = np.linalg.qr(a_scaled)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-14 * diag.max():
        raise ConvergenceError(f"fit design matrix is rank deficient (p = {p})")
    y = linalg.solve_triangular(r, q.T @ rhs)
    coeffs = y / col_norm
    cond = float(np.linalg.cond(r))
    resid = e - design @ coeffs
    wres = rhs - a @ coeffs
    dof = max(len(rows) - p, 1)
    s2 = float(wres @ wres) / dof
    rinv = linalg.solve_triangular(r, np.eye(p))
    cov = s2 * (rinv @ rinv.T) / np.outer(col_norm, col_norm)
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    logger.debug("fit p=%d rows=%d cond=%.3e", p, len(rows), cond)
    return FitResult(tuple(float(c) for c in coeffs), float(np.linalg.norm(resid)),
                     cond, tuple(float(x) for x in errs), len(rows))


# ---------------------------------------------------------------------------
# Simplex
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    value: float
    converged: bool
    evaluations: int


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    dim = len(x0)
    simplex = np.tile(x0, (dim + 1, 1))
    for i in range(dim):
        delta = step * max(abs(x0[i]), 1.0)
        simplex[i + 1, i] += delta
    return simplex


def minimize_simplex(objective: Callable[[np.ndarray], float], start: Sequence[float],
                     tol: float = SIMPLEX_TOL, step: float = 0.05,
                     max_evaluations: int = SIMPLEX_MAX_EVALUATIONS) -> SimplexResult:
    """
    Nelder-Mead minimization with one restart from the minimum found.

    The restart uses an initial simplex shrunk by a factor of 10 so that a
    collapsed simplex gets a second look at its neighbourhood.

    Returns:
        SimplexResult with converged False when the evaluation budget ran out
    """
    x0 = np.asarray(start, dtype=float)
    if not np.isfinite(objective(x0)):
        raise ParameterError("objective is not finite at the starting point")
    total = 0
    best = None
    converged = True
    for shrink in (1.0, 0.1):
        centre = x0 if best is None else best.x
        res = optimize.minimize(
            objective, centre, method="Nelder-Mead",
            options={"initial_simplex": _initial_simplex(centre, step * shrink),
                     "xatol": tol, "fatol": tol * 1e-6,
                     "maxfev": max_evaluations, "adaptive": len(x0) > 2})
        total += res.nfev
        converged = converged and bool(res.success)
        if best is None or res.fun <= best.fun:
            best = res
    if not converged:
        logger.warning("simplex budget exhausted after %d evaluations", total)
    return SimplexResult(np.array(best.x), float(best.fun), converged, total)
