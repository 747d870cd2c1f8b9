"""
Perturbation engines for the inhomogeneous string.

DPT expands about the uniform string with the density fluctuation
delta rho as the perturbation. WKBPT works in the WKB basis of a density
and treats W = O - Q as the perturbation; with the physical density W is
the potential V, with a trial density (iWKBPT) it is the full mismatch.
Both run the Rayleigh-Schroedinger recursion up to third order.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_ORDER, DEFAULT_QUAD_TOL, DEFAULT_WINDOW, POINTS_PER_OSCILLATION
from .density import DensityModel
from .errors import ParameterError
from .logging_config import get_logger
from .numerics import GridFunction, dirichlet_energy
from .utils import validate_index
from .wkb_basis import (
    MatrixElementTable,
    WkbBasis,
    build_table,
    operator_matrix,
    potential_matrix,
    sine_moment_matrix,
)

logger = get_logger(__name__)

MAX_ORDER = 3
DPT_DEFAULT_STATES = 200
ENGINES = ("dpt", "wkbpt", "iwkbpt")


@dataclass(frozen=True, eq=False)
class PerturbationSeries:
    """
    Energy and eigenfunction corrections of one mode.

    Attributes:
        n: Mode index
        engine: "dpt", "wkbpt" or "iwkbpt"
        corrections: E^(0)..E^(order)
        coefficients: Eigenfunction corrections of orders 1..order, as
            coefficient vectors over `indices`
        indices: Basis indices the coefficient vectors refer to
        truncation: Number of states summed over
        truncation_error: Magnitude of the last included second-order term
    """
    n: int
    engine: str
    corrections: Tuple[float, ...]
    coefficients: Tuple[np.ndarray, ...] = ()
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    truncation: int = 0
    truncation_error: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.corrections):
            raise ParameterError(f"non-finite correction in {self.engine} series for n = {self.n}")

    @property
    def order(self) -> int:
        return len(self.corrections) - 1

    @property
    def energy(self) -> float:
        return math.fsum(self.corrections)

    def partial_sums(self) -> List[float]:
        return [math.fsum(self.corrections[:p + 1]) for p in range(len(self.corrections))]

    def mode_vector(self, order: Optional[int] = None) -> np.ndarray:
        """Unperturbed state plus the corrections up to `order`, over `indices`."""
        order = self.order if order is None else order
        vec = (self.indices == self.n).astype(float)
        for c in self.coefficients[:order]:
            vec = vec + c
        return vec


def series_energy(series: PerturbationSeries) -> List[float]:
    """Partial sums E^(0), E^(0)+E^(1), ... of a series."""
    return series.partial_sums()


def _check_order(order: int) -> int:
    order = validate_index(order, min_value=0, name="order")
    if order > MAX_ORDER:
        raise ParameterError(f"order must be at most {MAX_ORDER}, got {order}")
    return order


def window_indices(n: int, window: int) -> np.ndarray:
    """
    The `window` indices k != n closest to n, ties broken toward smaller k.

    Together with n they always form a contiguous range.
    """
    n = validate_index(n)
    window = validate_index(window, min_value=1, name="window")
    lo = max(1, n - window)
    candidates = [k for k in range(lo, n + window + 1) if k != n]
    candidates.sort(key=lambda k: (abs(k - n), k))
    return np.array(sorted(candidates[:window]), dtype=int)


def _rs_recursion(energies: np.ndarray, coupling: np.ndarray, pos: int,
                  order: int) -> Tuple[List[float], List[np.ndarray]]:
    """
    Rayleigh-Schroedinger recursion with intermediate normalization.

    E_p = (W c_{p-1})_n and, for k != n,
    c_{p,k} = [(W c_{p-1})_k - sum_{q=1}^{p-1} E_q c_{p-q,k}] / (e_n - e_k).
    """
    gaps = energies[pos] - energies
    others = np.arange(len(energies)) != pos
    if np.any(gaps[others] == 0.0):
        raise ParameterError("degenerate unperturbed levels in the perturbation window")
    c = [np.zeros(len(energies))]
    c[0][pos] = 1.0
    corrections = [float(energies[pos])]
    for p in range(1, order + 1):
        wc = coupling @ c[p - 1]
        corrections.append(float(wc[pos]))
        rhs = wc.copy()
        for q in range(1, p):
            rhs -= corrections[q] * c[p - q]
        nxt = np.zeros(len(energies))
        nxt[others] = rhs[others] / gaps[others]
        c.append(nxt)
    return corrections, c[1:]


# ---------------------------------------------------------------------------
# WKBPT and iWKBPT
# ---------------------------------------------------------------------------

def _table_series(table: MatrixElementTable, n: int, order: int, window: int,
                  engine: str) -> PerturbationSeries:
    order = _check_order(order)
    states = window_indices(n, window)
    lo, hi = min(states.min(), n), max(states.max(), n)
    if lo < table.first or hi > table.last:
        raise ParameterError(
            f"table covers {table.first}..{table.last} but mode {n} with window {window} "
            f"needs {lo}..{hi}")
    sel = np.arange(lo, hi + 1) - table.first
    e = table.energies0[sel]
    w = table.W[np.ix_(sel, sel)]
    pos = n - lo
    corrections, coeffs = _rs_recursion(e, w, pos, order)
    far = int(states[np.argmax(np.abs(states - n))])
    far_pos = far - lo
    trunc_err = abs(w[pos, far_pos] ** 2 / (e[pos] - e[far_pos]))
    logger.debug("%s n=%d order=%d window=%d: E=%.15g", engine, n, order, window,
                 math.fsum(corrections))
    return PerturbationSeries(n, engine, tuple(corrections), tuple(coeffs),
                              np.arange(lo, hi + 1), window, trunc_err)


def wkbpt_energy(basis: WkbBasis, table: MatrixElementTable, n: int,
                 order: int = DEFAULT_ORDER, window: int = DEFAULT_WINDOW) -> PerturbationSeries:
    """
    WKBPT series of mode n from a matrix-element table.

    E^(0) = n^2 pi^2/sigma(L)^2, E^(1) = <n|V|n>, and the higher orders sum
    over the `window` states closest to n.

    Raises:
        ParameterError: If the table does not cover the window
    """
    n = validate_index(n)
    engine = "wkbpt" if basis.is_physical else "iwkbpt"
    return _table_series(table, n, order, window, engine)


def wkbpt_eigenfunction(basis: WkbBasis, table: MatrixElementTable, n: int,
                        order: int = DEFAULT_ORDER,
                        window: int = DEFAULT_WINDOW) -> List[np.ndarray]:
    """
    Coefficient vectors of the eigenfunction corrections of orders 1..order,
    laid out over the whole table range.
    """
    series = wkbpt_energy(basis, table, n, order, window)
    out = []
    for c in series.coefficients:
        full = np.zeros(table.size)
        full[series.indices - table.first] = c
        out.append(full)
    return out


def _window_table(basis: WkbBasis, n: int, window: int, tol: float,
                  cache_dir: Optional[str]) -> MatrixElementTable:
    states = window_indices(n, window)
    lo, hi = min(states.min(), n), max(states.max(), n)
    return build_table(basis, hi - lo + 1, lo, tol, cache_dir)


def iwkbpt_energy(trial: DensityModel, physical: DensityModel, n: int,
                  order: int = DEFAULT_ORDER, window: int = DEFAULT_WINDOW,
                  tol: float = DEFAULT_QUAD_TOL, table: Optional[MatrixElementTable] = None,
                  cache_dir: Optional[str] = None) -> PerturbationSeries:
    """
    WKBPT in the basis of a trial density, with W = O - Q~ as perturbation.

    With trial = physical the basis is the physical one and the series is
    the ordinary WKBPT series.
    """
    n = validate_index(n)
    basis = WkbBasis(trial, physical)
    if table is None:
        table = _window_table(basis, n, window, tol, cache_dir)
    return wkbpt_energy(basis, table, n, order, window)


def wkbpt_first_order_bound(table: MatrixElementTable, size: int, n: int = 1) -> float:
    """
    Rayleigh quotient of e_n + c^(1) restricted to the first `size` states.

    Raises:
        ParameterError: If the table does not start at index 1 or is too small
    """
    size = validate_index(size, name="size")
    n = validate_index(n)
    if table.first != 1 or size > table.size or n > size:
        raise ParameterError(f"need a table starting at 1 with at least {size} states")
    block = table.block(size)
    e = table.energies0[:size]
    vec = np.zeros(size)
    vec[n - 1] = 1.0
    others = np.arange(size) != n - 1
    vec[others] = table.W[:size, n - 1][others] / (e[n - 1] - e[others])
    return float(vec @ block @ vec / (vec @ vec))


def sigma_residual(trial: DensityModel, physical: DensityModel, n: int,
                   window: int = DEFAULT_WINDOW, tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    Sum of <n|O|k>^2 over the `window` states k closest to n, in the
    trial basis. Zero when the trial n-th mode is an exact eigenfunction.
    """
    n = validate_index(n)
    basis = WkbBasis(trial, physical)
    table = _window_table(basis, n, window, tol, None)
    states = window_indices(n, window)
    row = table.operator[n - table.first, states - table.first]
    return math.fsum(row * row)


def asymptotic_factor(trial: DensityModel, physical: DensityModel) -> float:
    """(sigma(L)^2 / sigma~(L)^3) * integral of rho~^(3/2)/rho, the high-mode ratio E~_n/E_n."""
    L = physical.half_length
    osc = max(trial.oscillations, physical.oscillations)
    gf = GridFunction.adaptive(lambda x: trial.rho(x) ** 1.5 / physical.rho(x), -L, L,
                               min_degree=_min_degree(osc), freq_hint=osc or None)
    return physical.sigma_total ** 2 / trial.sigma_total ** 3 * gf.integral()


def _min_degree(oscillations: float) -> int:
    return 1 << max(6, int(math.ceil(math.log2(POINTS_PER_OSCILLATION * (oscillations + 2.0)))))


# ---------------------------------------------------------------------------
# DPT
# ---------------------------------------------------------------------------

def _uniform_energies(half_length: float, indices: np.ndarray) -> np.ndarray:
    return (indices * math.pi / (2.0 * half_length)) ** 2


def density_fluctuation_matrix(model: DensityModel, indices: Sequence[int],
                               tol: float = DEFAULT_QUAD_TOL) -> Tuple[float, np.ndarray]:
    """
    rho0 = mean of rho and <n|delta rho|k> in the uniform-string basis,
    with rho = rho0 (1 + delta rho).
    """
    rho0 = model.mean_rho()
    L = model.half_length

    def fluctuation(u):
        return model.rho(np.clip(-L + 2.0 * L * u, -L, L)) / rho0 - 1.0

    return rho0, sine_moment_matrix(fluctuation, indices, tol, model.oscillations)


def dpt_energy(model: DensityModel, n: int, order: int = DEFAULT_ORDER,
               K: int = DPT_DEFAULT_STATES, tol: float = DEFAULT_QUAD_TOL) -> PerturbationSeries:
    """
    DPT series of mode n summed over the uniform-string states 1..K.

    With eps_n = n^2 pi^2/(2L)^2, omega_nk = eps_n - eps_k and d = <n|delta rho|n>:
    E0 = eps_n/rho0, E1 = -eps_n d/rho0,
    E2 = [eps_n d^2 + eps_n^2 sum delta_nk^2/omega_nk]/rho0,
    E3 = [-eps_n d^3 + eps_n^3 d sum delta_nk^2/omega_nk^2
          - 3 eps_n^2 d sum delta_nk^2/omega_nk
          - eps_n^3 sum_k sum_m delta_nk delta_km delta_mn/(omega_nk omega_nm)]/rho0.

    Eigenfunction corrections come from the same recursion applied to the
    symmetrized inverse problem and are expressed in the uniform-string basis.
    """
    n = validate_index(n)
    order = _check_order(order)
    K = validate_index(K, min_value=n + 1, name="K")
    idx = np.arange(1, K + 1)
    rho0, delta = density_fluctuation_matrix(model, idx, tol)
    eps = _uniform_energies(model.half_length, idx)
    pos = n - 1
    en = eps[pos]
    others = idx != n
    omega = en - eps[others]
    row = delta[pos, others]
    d = delta[pos, pos]
    s1 = math.fsum(row ** 2 / omega)
    s2 = math.fsum(row ** 2 / omega ** 2)
    terms = [en, -en * d, en * d * d + en * en * s1]
    if order >= 3:
        inner = delta[np.ix_(others, others)]
        triple = float(row / omega @ inner @ (row / omega))
        terms.append(-en * d ** 3 + en ** 3 * d * s2 - 3.0 * en * en * d * s1 - en ** 3 * triple)
    corrections = tuple(t / rho0 for t in terms[:order + 1])

    # 1/lambda is an eigenvalue of diag(1/eps) + eps^(-1/2) delta eps^(-1/2)
    root = np.sqrt(eps)
    _, ys = _rs_recursion(1.0 / eps, delta / np.outer(root, root), pos, order)
    coeffs = tuple(math.sqrt(en) * y / root for y in ys)
    trunc_err = abs(en * en * row[-1] ** 2 / omega[-1]) / rho0
    return PerturbationSeries(n, "dpt", corrections, coeffs, idx, K, trunc_err)


def dpt_variational_bound(model: DensityModel) -> float:
    """
    Rayleigh quotient of the uniform-string fundamental used as Phi:
    integral of ((psi_1/sqrt(rho))')^2 with psi_1 = sin(pi(x+L)/2L)/sqrt(L).
    """
    L = model.half_length

    def f(x):
        return np.sin(math.pi * (x + L) / (2.0 * L)) / math.sqrt(L) / np.sqrt(model.rho(x))

    gf = GridFunction.adaptive(f, -L, L, min_degree=_min_degree(model.oscillations),
                               freq_hint=model.oscillations or None)
    return dirichlet_energy(gf)


def trial_function_bound(model: DensityModel) -> float:
    """
    Rayleigh quotient of Psi = (sqrt(2)/3) sqrt(rho/L) sin(pi(x+L)/2L) taken
    as Phi, i.e. the string displacement sin(pi(x+L)/2L):
    (pi/2L)^2 L / integral of rho sin^2(pi(x+L)/2L).
    """
    L = model.half_length
    gf = GridFunction.adaptive(
        lambda x: model.rho(x) * np.sin(math.pi * (x + L) / (2.0 * L)) ** 2, -L, L,
        min_degree=_min_degree(model.oscillations), freq_hint=model.oscillations or None)
    return (math.pi / (2.0 * L)) ** 2 * L / gf.integral()


def dpt_direct_resummed(model: DensityModel, n: int) -> Tuple[float, float]:
    """(eps_n/<n|rho|n>, eps_n/rho0): the resummed direct terms and their large-n form."""
    n = validate_index(n)
    rho0, delta = density_fluctuation_matrix(model, [n])
    en = float(_uniform_energies(model.half_length, np.array([n]))[0])
    return en / (rho0 * (1.0 + delta[0, 0])), en / rho0


def weyl_estimate(model: DensityModel, n: int) -> float:
    """n^2 pi^2 / sigma(L)^2."""
    n = validate_index(n)
    return (n * math.pi / model.sigma_total) ** 2


def ratio_first_order(model: DensityModel, engine: str = "wkbpt") -> float:
    """
    First-order estimate of E_2/E_1.

    dpt: 4 [1 - <2|delta rho|2> + <1|delta rho|1>]
    wkbpt: 4 + (sigma(L)^2/pi^2) (<2|V|2> - 4 <1|V|1>)
    """
    if engine == "dpt":
        _, delta = density_fluctuation_matrix(model, [1, 2])
        return 4.0 * (1.0 - delta[1, 1] + delta[0, 0])
    if engine == "wkbpt":
        v = potential_matrix(WkbBasis(model), [1, 2])
        return 4.0 + model.sigma_total ** 2 / math.pi ** 2 * (v[1, 1] - 4.0 * v[0, 0])
    raise ParameterError(f"engine must be 'dpt' or 'wkbpt', got {engine!r}")


def trial_ground_bound(trial: DensityModel, physical: DensityModel,
                       tol: float = DEFAULT_QUAD_TOL) -> float:
    """<1|O|1> in the trial basis, the order 0+1 iWKBPT bound on E_1."""
    return float(operator_matrix(WkbBasis(trial, physical), [1], tol)[0, 0])
