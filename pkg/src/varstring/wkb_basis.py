"""
WKB-type basis and its matrix elements.

phi_n(x) = sqrt(2/sigma(L)) rho(x)^(1/4) sin(n pi sigma(x)/sigma(L)) are the
exact eigenfunctions of Q = O - V, with eigenvalues n^2 pi^2 / sigma(L)^2.
A basis may be generated by a trial density while the operator O belongs
to a different (physical) density; off-diagonal elements of O are then
the elements of W = O - Q~.

Potential elements are integrated in u = sigma/sigma(L), where the sine
factors have uniform frequency. Operator elements are integrated in x
after one integration by parts, so only first derivatives of the
densities enter.
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .asymptotics import mean_V
from .config import DEFAULT_BASIS_SIZE, DEFAULT_QUAD_TOL, GAUSS_POINTS_PER_PANEL
from .density import DensityModel
from .errors import ConfigError, DomainError, ParameterError, QuadratureError
from .logging_config import get_logger
from .numerics import GridFunction, gauss_legendre_panels, integrate_adaptive
from .specfun import sici
from .utils import validate_index

logger = get_logger(__name__)

MAX_PANEL_DOUBLINGS = 6
MAX_SERIES_ORDER = 7


class WkbBasis:
    """
    The orthonormal basis phi_n generated by a density.

    Args:
        model: Basis-generating density (physical or trial rho~)
        physical: Density whose operator O is represented; defaults to model
        size: Largest index used by default when building tables
    """

    def __init__(self, model: DensityModel, physical: Optional[DensityModel] = None,
                 size: int = DEFAULT_BASIS_SIZE):
        self.model = model
        self.physical = physical if physical is not None else model
        if abs(self.physical.half_length - model.half_length) > 1e-14 * model.half_length:
            raise ParameterError(
                f"trial and physical densities live on different strings "
                f"(L = {model.half_length} vs {self.physical.half_length})")
        self.size = validate_index(size, min_value=1, name="size")
        self.sigma_total = model.sigma_total

    def __repr__(self) -> str:
        if self.is_physical:
            return f"WkbBasis({self.model.key}, size={self.size})"
        return f"WkbBasis(trial={self.model.key}, physical={self.physical.key}, size={self.size})"

    @property
    def is_physical(self) -> bool:
        return self.physical is self.model

    @property
    def half_length(self) -> float:
        return self.model.half_length

    @property
    def oscillations(self) -> float:
        return max(self.model.oscillations, self.physical.oscillations)

    def energy0(self, n):
        """Unperturbed energies n^2 pi^2 / sigma(L)^2 (scalar or array n)."""
        n = np.asarray(n, dtype=float)
        out = (n * math.pi / self.sigma_total) ** 2
        return float(out) if out.ndim == 0 else out

    def phi(self, n: int, x):
        """phi_n at x in [-L, L]."""
        n = validate_index(n)
        s = self.model.sigma(x)
        r = self.model.rho(x)
        out = math.sqrt(2.0 / self.sigma_total) * np.power(r, 0.25) \
            * np.sin(n * math.pi * np.asarray(s) / self.sigma_total)
        return float(out) if np.ndim(out) == 0 else out

    def expand(self, coefficients: Sequence[float], x, first: int = 1):
        """Sum of c_k phi_k at x, with coefficients starting at index `first`."""
        coeffs = np.asarray(coefficients, dtype=float)
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.asarray(self.model.sigma(arr)) / self.sigma_total
        k = np.arange(first, first + len(coeffs))
        sines = np.sin(math.pi * np.outer(u, k))
        out = math.sqrt(2.0 / self.sigma_total) * np.power(self.model.rho(arr), 0.25) \
            * (sines @ coeffs)
        return float(out[0]) if np.ndim(x) == 0 else out

    def phi_grid(self, n: int, degree: int) -> GridFunction:
        """phi_n sampled as a Chebyshev grid function on [-L, L]."""
        L = self.half_length
        return GridFunction.from_function(lambda x: self.phi(n, x), -L, L, degree,
                                          freq_hint=n + self.oscillations)

    # -- quadrature building blocks -----------------------------------------

    def _initial_panels(self, max_index: int) -> int:
        return max(4, int(math.ceil(max_index + self.oscillations)))

    def _operator_factors(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """u(x), B(x) and C(x) of the integrated-by-parts operator elements."""
        trial, phys = self.model, self.physical
        rt, rt1 = trial.rho(x), trial.rho_prime(x)
        rp, rp1 = phys.rho(x), phys.rho_prime(x)
        amp = np.power(rt, 0.25) / np.sqrt(rp)
        b = amp * (rt1 / (4.0 * rt) - rp1 / (2.0 * rp))
        c = amp * math.pi * np.sqrt(rt) / self.sigma_total
        u = np.asarray(trial.sigma(x)) / self.sigma_total
        return u, b, c


def phi(basis: WkbBasis, n: int, x):
    """phi_n(x) = sqrt(2/sigma(L)) rho^(1/4) sin(n pi sigma(x)/sigma(L))."""
    return basis.phi(n, x)


def _refine(build: Callable[[int], np.ndarray], panels: int, tol: float,
            what: str) -> np.ndarray:
    """Double the panel count until two successive matrices agree."""
    current = build(panels)
    for _ in range(MAX_PANEL_DOUBLINGS):
        panels *= 2
        refined = build(panels)
        change = float(np.max(np.abs(refined - current)))
        scale = max(1.0, float(np.max(np.abs(refined))))
        logger.debug("%s: %d panels, change %.3e", what, panels, change)
        if change <= tol * scale:
            return refined
        current = refined
    raise QuadratureError(f"{what} did not settle after {panels} panels",
                          best_estimate=float(np.max(np.abs(current))),
                          achieved_tolerance=change)


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return np.tril(matrix) + np.tril(matrix, -1).T


def sine_moment_matrix(g: Callable[[np.ndarray], np.ndarray], indices: Sequence[int],
                       tol: float = DEFAULT_QUAD_TOL, oscillations: float = 0.0) -> np.ndarray:
    """
    M_ij = 2 * integral over [0, 1] of sin(i pi u) sin(j pi u) g(u) du.

    Args:
        g: Vectorized weight on [0, 1]
        indices: Sine indices (rows and columns)
        tol: Agreement required between successive panel doublings
        oscillations: Oscillation count of g, used for the first panel count

    Returns:
        Symmetric matrix over the given indices
    """
    idx = np.asarray(indices, dtype=float)

    def build(panels):
        u, w = gauss_legendre_panels(0.0, 1.0, panels, GAUSS_POINTS_PER_PANEL)
        s = np.sin(math.pi * np.outer(idx, u))
        return _symmetric(2.0 * (s * (w * g(u))) @ s.T)

    panels = max(4, int(math.ceil(idx.max() + oscillations)))
    return _refine(build, panels, tol, "sine moments")


def potential_matrix(basis: WkbBasis, indices: Sequence[int],
                     tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """<n|V|k> over the given indices for the basis-generating density."""
    model = basis.model
    sl = basis.sigma_total
    return sine_moment_matrix(lambda u: model.v_sigma(np.clip(u, 0.0, 1.0) * sl),
                              indices, tol, basis.oscillations)


def operator_matrix(basis: WkbBasis, indices: Sequence[int],
                    tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """
    <n|O|k> over the given indices, from the once-integrated form
    integral of (phi_n/sqrt(rho))' (phi_k/sqrt(rho))' dx.
    """
    idx = np.asarray(indices, dtype=float)
    L = basis.half_length

    def build(panels):
        x, w = gauss_legendre_panels(-L, L, panels, GAUSS_POINTS_PER_PANEL)
        u, b, c = basis._operator_factors(x)
        arg = math.pi * np.outer(idx, u)
        rows = b * np.sin(arg) + idx[:, None] * c * np.cos(arg)
        return _symmetric((2.0 / basis.sigma_total) * (rows * w) @ rows.T)

    return _refine(build, basis._initial_panels(int(idx.max())), tol, "operator elements")


def matrix_element_V(basis: WkbBasis, n: int, k: int, tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    <n|V|k> = 2 * integral over [0, 1] of sin(n pi u) sin(k pi u) V(u sigma(L)) du.

    Raises:
        QuadratureError: If the adaptive quadrature does not converge
    """
    n, k = validate_index(n), validate_index(k, name="k")
    if k < n:
        n, k = k, n
    sl = basis.sigma_total
    model = basis.model

    def f(u):
        return 2.0 * math.sin(n * math.pi * u) * math.sin(k * math.pi * u) * model.v_sigma(u * sl)

    return integrate_adaptive(f, 0.0, 1.0, tol, freq_hint=n + k + basis.oscillations)


def matrix_element_O(basis: WkbBasis, n: int, k: int, tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    <n|O|k> by adaptive quadrature of the integrated-by-parts form.

    For the physical basis this equals delta_nk n^2 pi^2/sigma(L)^2 + <n|V|k>;
    for a trial basis the off-diagonal values are the elements of W.
    """
    n, k = validate_index(n), validate_index(k, name="k")
    if k < n:
        n, k = k, n
    L = basis.half_length
    pref = 2.0 / basis.sigma_total

    def f(x):
        u, b, c = basis._operator_factors(np.array([x]))
        an, ak = n * math.pi * u[0], k * math.pi * u[0]
        return pref * (b[0] * math.sin(an) + n * c[0] * math.cos(an)) \
            * (b[0] * math.sin(ak) + k * c[0] * math.cos(ak))

    return integrate_adaptive(f, -L, L, tol, freq_hint=n + k + basis.oscillations)


# ---------------------------------------------------------------------------
# Closed forms for rho = (x + 3 pi/2)^4
# ---------------------------------------------------------------------------

def _quartic_potential_block(n: np.ndarray, k: np.ndarray) -> np.ndarray:
    pi5 = math.pi ** 5
    n = n.astype(float)
    k = k.astype(float)
    out = np.empty(np.broadcast(n, k).shape)
    diag = n == k
    if np.any(diag):
        m = np.broadcast_to(n, out.shape)[diag]
        a = 2.0 * m * math.pi / 7.0
        si_a, ci_a = sici(a)
        si_8a, ci_8a = sici(8.0 * a)
        out[diag] = (4.0 * m / (49.0 * pi5)) * (
            (ci_8a - ci_a) * np.sin(a) + (si_a - si_8a) * np.cos(a))
    off = ~diag
    if np.any(off):
        nn = np.broadcast_to(n, out.shape)[off]
        kk = np.broadcast_to(k, out.shape)[off]
        d = np.abs(kk - nn)
        s = kk + nn
        bd, bs = d * math.pi / 7.0, s * math.pi / 7.0
        si_d, ci_d = sici(bd)
        si_8d, ci_8d = sici(8.0 * bd)
        si_s, ci_s = sici(bs)
        si_8s, ci_8s = sici(8.0 * bs)
        out[off] = (2.0 / (49.0 * pi5)) * (
            d * (ci_d - ci_8d) * np.sin(bd)
            + s * (ci_8s - ci_s) * np.sin(bs)
            + d * (si_8d - si_d) * np.cos(bd)
            + s * (si_s - si_8s) * np.cos(bs))
    return out


def closed_form_element_quartic(n: int, k: int) -> float:
    """
    <n|O|k> for rho = (x + 3 pi/2)^4 from its sine/cosine-integral closed forms.

    The diagonal is 9 n^2/(49 pi^4) + <n|V|n>; off the diagonal the value
    is <n|V|k>. Symmetric in (n, k) by construction.
    """
    n, k = validate_index(n), validate_index(k, name="k")
    value = float(_quartic_potential_block(np.array([n]), np.array([k]))[0])
    if n == k:
        value += 9.0 * n * n / (49.0 * math.pi ** 4)
    return value


def quartic_closed_form_matrix(indices: Sequence[int]) -> np.ndarray:
    """<n|V|k> over the given indices for the quartic density, all pairs at once."""
    idx = np.asarray(indices, dtype=int)
    nn, kk = np.meshgrid(idx, idx, indexing="ij")
    return _symmetric(_quartic_potential_block(nn, kk))


# ---------------------------------------------------------------------------
# Large-index series
# ---------------------------------------------------------------------------

def matrix_element_asymptotic(model: DensityModel, n: int, k: int,
                              j_max: int) -> Tuple[float, float]:
    """
    Partial sum of the large-index series for <n|V|k>.

    Diagonal: <V> - sum_j sigma^(2j+1)/(2 pi n)^(2j+2) (-1)^j [V^(2j+1)(sigma(L)) - V^(2j+1)(0)].
    Off the diagonal: sum_j (-1)^j sigma^(2j+1)/pi^(2j+2)
    [1/(k-n)^(2j+2) - 1/(k+n)^(2j+2)] [(-1)^(k+n) V^(2j+1)(sigma(L)) - V^(2j+1)(0)].

    Returns:
        (partial sum, magnitude of the first omitted term or, when that
        derivative order is unavailable, of the last included term)

    Raises:
        ParameterError: If j_max exceeds the available derivative orders
    """
    n, k = validate_index(n), validate_index(k, name="k")
    if not 0 <= int(j_max) <= MAX_SERIES_ORDER:
        raise ParameterError(f"j_max must be in [0, {MAX_SERIES_ORDER}], got {j_max}")
    j_max = int(j_max)
    sl = model.sigma_total

    def term(j: int) -> float:
        order = 2 * j + 1
        top = model.v_sigma_derivative(sl, order)
        bottom = model.v_sigma_derivative(0.0, order)
        if n == k:
            return -(-1.0) ** j * sl ** order / (2.0 * math.pi * n) ** (order + 1) * (top - bottom)
        parity = -1.0 if (n + k) % 2 else 1.0
        weight = 1.0 / abs(k - n) ** (order + 1) - 1.0 / (k + n) ** (order + 1)
        return (-1.0) ** j * sl ** order / math.pi ** (order + 1) * weight * (parity * top - bottom)

    terms = [term(j) for j in range(j_max + 1)]
    total = math.fsum(terms) + (mean_V(model) if n == k else 0.0)
    try:
        err = abs(term(j_max + 1))
    except ParameterError:
        err = abs(terms[-1])
    return total, err


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixElementTable:
    """
    Symmetric matrix elements over the contiguous indices first..first+size-1.

    Attributes:
        key: Cache key (density keys, index range, tolerance, method)
        first: First basis index covered
        operator: <n|O|k>
        energies0: n^2 pi^2 / sigma~(L)^2 over the covered indices
        potential: <n|V|k> when the basis is physical
        tol: Quadrature tolerance used
        method: "closed_form", "quadrature" or "quadrature-ibp"
    """
    key: str
    first: int
    operator: np.ndarray
    energies0: np.ndarray
    potential: Optional[np.ndarray] = None
    tol: float = DEFAULT_QUAD_TOL
    method: str = "quadrature"

    @property
    def size(self) -> int:
        return self.operator.shape[0]

    @property
    def last(self) -> int:
        return self.first + self.size - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first, self.last + 1)

    @property
    def W(self) -> np.ndarray:
        """O - Q~ over the covered indices."""
        return self.operator - np.diag(self.energies0)

    def _pos(self, n: int) -> int:
        if not self.first <= n <= self.last:
            raise DomainError(f"index {n} outside table range [{self.first}, {self.last}]")
        return int(n) - self.first

    def O(self, n: int, k: int) -> float:
        return float(self.operator[self._pos(n), self._pos(k)])

    def V(self, n: int, k: int) -> float:
        if self.potential is None:
            raise DomainError("table holds no potential elements (trial basis)")
        return float(self.potential[self._pos(n), self._pos(k)])

    def block(self, size: int) -> np.ndarray:
        """The leading size x size block of the operator."""
        if not 1 <= size <= self.size:
            raise DomainError(f"block size {size} outside [1, {self.size}]")
        return self.operator[:size, :size]

    def save(self, path: str) -> None:
        meta = json.dumps({"key": self.key, "first": self.first, "tol": self.tol,
                           "method": self.method})
        arrays = {"operator": self.operator, "energies0": self.energies0,
                  "meta": np.array(meta)}
        if self.potential is not None:
            arrays["potential"] = self.potential
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path: str) -> "MatrixElementTable":
        try:
            with np.load(path, allow_pickle=False) as data:
                meta = json.loads(str(data["meta"]))
                potential = data["potential"] if "potential" in data.files else None
                return cls(meta["key"], int(meta["first"]), np.array(data["operator"]),
                           np.array(data["energies0"]),
                           None if potential is None else np.array(potential),
                           float(meta["tol"]), meta["method"])
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read matrix-element cache {path}: {exc}")


def _uses_quartic_closed_form(basis: WkbBasis) -> bool:
    return basis.is_physical and basis.model.potential_family == "quartic"


def table_key(basis: WkbBasis, first: int, size: int, tol: float) -> str:
    """Stable cache key for a table request."""
    if _uses_quartic_closed_form(basis):
        method = "closed_form"
    elif basis.is_physical:
        method = "quadrature"
    else:
        method = "quadrature-ibp"
    raw = repr((basis.model.key, basis.physical.key, basis.half_length, first, size,
                tol, method))
    return f"{basis.model.name}-{hashlib.sha256(raw.encode()).hexdigest()[:16]}"


def build_table(basis: WkbBasis, size: Optional[int] = None, first: int = 1,
                tol: float = DEFAULT_QUAD_TOL,
                cache_dir: Optional[str] = None) -> MatrixElementTable:
    """
    Assemble the matrix elements for indices first..first+size-1.

    The quartic density (and its Gottlieb transforms) use the closed forms;
    other physical bases integrate V in u; trial bases integrate the
    operator in x. With a cache directory, tables are read from and
    written to `<cache_dir>/<key>.npz`.
    """
    size = validate_index(size if size is not None else basis.size, name="size")
    first = validate_index(first, name="first")
    key = table_key(basis, first, size, tol)
    path = os.path.join(cache_dir, f"{key}.npz") if cache_dir else None
    if path and os.path.exists(path):
        logger.debug("matrix-element cache hit %s", path)
        return MatrixElementTable.load(path)

    indices = np.arange(first, first + size)
    e0 = basis.energy0(indices)
    if _uses_quartic_closed_form(basis):
        potential = quartic_closed_form_matrix(indices)
        table = MatrixElementTable(key, first, potential + np.diag(e0), e0, potential,
                                   tol, "closed_form")
    elif basis.is_physical:
        potential = potential_matrix(basis, indices, tol)
        table = MatrixElementTable(key, first, potential + np.diag(e0), e0, potential,
                                   tol, "quadrature")
    else:
        table = MatrixElementTable(key, first, operator_matrix(basis, indices, tol), e0,
                                   None, tol, "quadrature-ibp")
    logger.info("built %s table for %r, indices %d..%d", table.method, basis,
                first, first + size - 1)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        table.save(path)
    return table
