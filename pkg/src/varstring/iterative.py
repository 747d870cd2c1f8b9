"""
Iteration theorems, effective densities and trial-density optimization.

All three iterations apply the inverse of O through a double
antiderivative: with H'' = sqrt(rho) xi and H(-L) = H'(-L) = 0,

    xi_new(x) = sqrt(rho(x)) [kappa (x + L) - H(x)].

Theorem 1 picks kappa = H(L)/2L so that xi_new vanishes at both ends.
Theorem 3 picks kappa = H(L')/(L + L') and then tunes L' until the
iterate vanishes at L, which lands on an excited mode.

Integrals run on Chebyshev grid functions whose degree follows the
number of density oscillations.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .collocation import LsfGrid, fourier_coefficients, lsf_solve
from .config import (
    CHEB_MAX_DEGREE,
    DEFAULT_STEPS,
    POINTS_PER_OSCILLATION,
    THEOREM3_SCAN_SAMPLES,
    THEOREM3_SCAN_SAMPLES_OSCILLATING,
)
from .density import (
    DensityModel,
    epsilon_oscillating,
    from_grid_function,
    gottlieb_transform,
    polynomial_trial,
    power_density,
)
from .errors import (
    ConvergenceError,
    DensityError,
    ParameterError,
    QuadratureError,
    RootNotFoundError,
)
from .logging_config import get_logger
from .modes import ModeResult
from .numerics import (
    GridFunction,
    SimplexResult,
    bracket_root,
    dirichlet_energy,
    gauss_legendre_edges,
    minimize_simplex,
    scan_sign_changes,
)
from .perturbation import asymptotic_factor, trial_ground_bound
from .specfun import elliptic_E_complete, elliptic_K_complete
from .utils import validate_index, validate_number

logger = get_logger(__name__)

MIN_ITERATION_DEGREE = 1024
DEPENDENCE_TOL = 1e-10
TRIAL_QUAD_TOL = 1e-14
TRIAL_FORMS = ("polynomial", "power", "custom")
EPSILON_MAX = 0.1
EPSILON_THEOREM1_STEPS = 12
EPSILON_LSF_POINTS_PER_PERIOD = 60
CELL_POINTS = 8
END_TOL = 1e-8
NODE_SIN_FLOOR = 1e-4

Seed = Union[GridFunction, Callable[[np.ndarray], np.ndarray]]


@dataclass(eq=False)
class IterationState:
    """
    The current iterate and its bound history.

    Attributes:
        iterate: Normalized xi_n as a grid function on [-L, L]
        steps: Number of applications of the inverse operator
        bounds: Energy estimate after each step; entry 0 is the seed's
            Rayleigh quotient
        kappas: Integration constant used at each step
    """
    iterate: GridFunction
    steps: int = 0
    bounds: List[float] = field(default_factory=list)
    kappas: List[float] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.bounds[-1]

    def as_mode(self, n: int, engine: str) -> ModeResult:
        return ModeResult(n, self.energy, engine, self.steps, grid_function=self.iterate,
                          extra={"bounds": list(self.bounds)})


def iteration_degree(model: DensityModel, extra_oscillations: int = 0) -> int:
    """
    Chebyshev degree that resolves the density and a mode with
    `extra_oscillations` half-waves.

    Raises:
        ParameterError: If the required degree exceeds the grid limit
    """
    need = POINTS_PER_OSCILLATION * (model.oscillations + extra_oscillations + 2.0)
    degree = max(MIN_ITERATION_DEGREE, 1 << int(math.ceil(math.log2(need))))
    if degree > CHEB_MAX_DEGREE:
        raise ParameterError(
            f"resolution infeasible: {model.key} needs degree {degree} > {CHEB_MAX_DEGREE}")
    return degree


def _sqrt_rho(model: DensityModel, degree: int) -> GridFunction:
    L = model.half_length
    return GridFunction.from_function(lambda x: np.sqrt(model.rho(x)), -L, L, degree,
                                      freq_hint=model.oscillations or None)


def _same_grid(like: GridFunction, values: np.ndarray) -> GridFunction:
    return GridFunction(like.a, like.b, values, like.freq_hint)


def _on_grid(seed: Seed, like: GridFunction) -> GridFunction:
    if isinstance(seed, GridFunction) and seed.degree == like.degree \
            and (seed.a, seed.b) == (like.a, like.b):
        return seed
    return GridFunction.from_function(seed, like.a, like.b, like.degree, like.freq_hint)


def _normalized(gf: GridFunction) -> GridFunction:
    norm = gf.norm()
    if not math.isfinite(norm) or norm < 1e-150:
        raise ConvergenceError("iterate collapsed: norm underflow (seed has no overlap?)")
    return gf * (1.0 / norm)


def _inverse_step(sqrt_rho: GridFunction, xi: GridFunction,
                  lprime: Optional[float] = None) -> Tuple[GridFunction, float]:
    L = sqrt_rho.b
    H = (sqrt_rho * xi).antiderivative().antiderivative()
    if lprime is None:
        kappa = H.values[-1] / (2.0 * L)
    else:
        kappa = float(H(lprime)) / (L + lprime)
    x = sqrt_rho.nodes
    return _same_grid(sqrt_rho, sqrt_rho.values * (kappa * (x + L) - H.values)), kappa


def default_seed(model: DensityModel) -> Callable[[np.ndarray], np.ndarray]:
    """xi_0 = sqrt(rho) sin(pi (x+L)/2L), i.e. the uniform-string fundamental as Psi."""
    L = model.half_length
    return lambda x: np.sqrt(model.rho(x)) * np.sin(math.pi * (x + L) / (2.0 * L))


def rayleigh_quotient(model: DensityModel, gf: GridFunction) -> float:
    """Integral of ((xi/sqrt(rho))')^2 over integral of xi^2, for xi vanishing at both ends."""
    L = model.half_length
    root = GridFunction.from_function(lambda x: np.sqrt(model.rho(x)), -L, L, gf.degree,
                                      gf.freq_hint)
    return dirichlet_energy(gf / root) / gf.inner(gf)


def theorem1_iterate(model: DensityModel, xi0: Optional[Seed] = None,
                     steps: int = DEFAULT_STEPS, degree: Optional[int] = None) -> IterationState:
    """
    Inverse iteration toward the fundamental mode.

    The bound recorded after step n is the integral of xi_n xi_{n-1} over
    the integral of xi_n^2, an upper bound on E_1 that does not increase
    with n.

    Args:
        model: Physical density
        xi0: Seed in Phi form; defaults to default_seed(model)
        steps: Number of iterations
        degree: Chebyshev degree; defaults to iteration_degree(model)

    Raises:
        ConvergenceError: If an iterate collapses
    """
    steps = validate_index(steps, min_value=0, name="steps")
    degree = degree or iteration_degree(model)
    sqrt_rho = _sqrt_rho(model, degree)
    xi = _normalized(_on_grid(xi0 if xi0 is not None else default_seed(model), sqrt_rho))
    state = IterationState(xi, 0, [rayleigh_quotient(model, xi)], [])
    for step in range(1, steps + 1):
        new, kappa = _inverse_step(sqrt_rho, xi)
        bound = new.inner(xi) / new.inner(new)
        if bound > state.bounds[-1] * (1.0 + 1e-12):
            logger.warning("theorem 1 bound rose at step %d: %.17g > %.17g", step, bound,
                           state.bounds[-1])
        xi = _normalized(new)
        state.iterate, state.steps = xi, step
        state.bounds.append(bound)
        state.kappas.append(kappa)
        logger.debug("theorem 1 step %d: bound %.17g", step, bound)
    return state


def _orthonormalize(functions: List[GridFunction]) -> List[GridFunction]:
    out: List[GridFunction] = []
    for f in functions:
        g = f
        # Gram-Schmidt, applied twice
        for _ in range(2):
            for q in out:
                g = g - q * g.inner(q)
        if g.norm() < DEPENDENCE_TOL * f.norm():
            raise ConvergenceError(
                f"seed {len(out) + 1} is linearly dependent on the previous ones")
        out.append(_normalized(g))
    return out


def block_seeds(model: DensityModel, count: int) -> List[Callable[[np.ndarray], np.ndarray]]:
    """sqrt(rho) sin(j pi (x+L)/2L) for j = 1..count."""
    count = validate_index(count, name="count")
    L = model.half_length
    return [lambda x, j=j: np.sqrt(model.rho(x)) * np.sin(j * math.pi * (x + L) / (2.0 * L))
            for j in range(1, count + 1)]


def theorem2_block(model: DensityModel, seeds: Sequence[Seed], steps: int = DEFAULT_STEPS,
                   degree: Optional[int] = None) -> List[IterationState]:
    """
    Block inverse iteration with deflation toward the lowest len(seeds) modes.

    Seeds are sorted by Rayleigh quotient. Each sweep applies the inverse
    operator to every member and re-orthonormalizes in that order, so the
    j-th function is deflated against the j-1 before it.

    Raises:
        ParameterError: If no seed is given
        ConvergenceError: If the seeds are linearly dependent
    """
    if not seeds:
        raise ParameterError("theorem 2 needs at least one seed")
    steps = validate_index(steps, min_value=0, name="steps")
    degree = degree or iteration_degree(model, len(seeds))
    sqrt_rho = _sqrt_rho(model, degree)
    block = [_normalized(_on_grid(s, sqrt_rho)) for s in seeds]
    block.sort(key=lambda gf: rayleigh_quotient(model, gf))
    block = _orthonormalize(block)
    states = [IterationState(gf, 0, [rayleigh_quotient(model, gf)], []) for gf in block]
    for sweep in range(1, steps + 1):
        applied = [_inverse_step(sqrt_rho, st.iterate) for st in states]
        block = _orthonormalize([gf for gf, _ in applied])
        for st, gf, (_, kappa) in zip(states, block, applied):
            st.iterate, st.steps = gf, sweep
            st.bounds.append(rayleigh_quotient(model, gf))
            st.kappas.append(kappa)
        logger.debug("theorem 2 sweep %d: %s", sweep,
                     ", ".join(f"{st.energy:.12g}" for st in states))
    return states


# ---------------------------------------------------------------------------
# Theorem 3
# ---------------------------------------------------------------------------

def _theorem3_chain(sqrt_rho: GridFunction, lprime: float, steps: int) -> List[GridFunction]:
    L = sqrt_rho.b
    x = sqrt_rho.nodes
    eta = _same_grid(sqrt_rho, sqrt_rho.values * np.sin(math.pi * (x + L) / (L + lprime)))
    chain = [eta]
    for _ in range(steps):
        eta, _ = _inverse_step(sqrt_rho, eta, lprime)
        chain.append(eta)
    return chain


def _scan_samples(model: DensityModel, samples: Optional[int]) -> int:
    if samples is not None:
        return validate_index(samples, min_value=10, name="samples")
    if model.oscillations > 0:
        return THEOREM3_SCAN_SAMPLES_OSCILLATING
    return THEOREM3_SCAN_SAMPLES


def theorem3_roots(model: DensityModel, n_max: int, steps: int = 1,
                   samples: Optional[int] = None, degree: Optional[int] = None) -> List[float]:
    """
    L' for modes 1..n_max.

    Mode 1 is L' = L, where the iterate vanishes at L for any density.
    Below it, the zeros of eta_steps(L) as L' decreases label modes 2, 3, ...
    The scan stops at -L + 2L/(n_max + 1.5), past the n_max-th root of
    the uniform string.

    Raises:
        RootNotFoundError: If the scan finds fewer roots than requested
    """
    n_max = validate_index(n_max, name="n_max")
    steps = validate_index(steps, name="steps")
    L = model.half_length
    if n_max == 1:
        return [L]
    samples = _scan_samples(model, samples)
    sqrt_rho = _sqrt_rho(model, degree or iteration_degree(model, n_max))

    def end_value(lprime: float) -> float:
        return float(_theorem3_chain(sqrt_rho, lprime, steps)[-1].values[-1])

    lowest = -L + 2.0 * L / (n_max + 1.5)
    grid = L - (L - lowest) * np.arange(1, samples + 1) / samples
    values = np.array([end_value(lp) for lp in grid])
    crossings = scan_sign_changes(values)
    if len(crossings) < n_max - 1:
        raise RootNotFoundError(
            f"found {len(crossings) + 1} of {n_max} theorem 3 roots scanning L' down to "
            f"{lowest:.6g} in steps of {(L - lowest) / samples:.3g}",
            endpoints=(lowest, L))
    roots = [L] + [bracket_root(end_value, float(grid[i + 1]), float(grid[i]))
                   for i in crossings[:n_max - 1]]
    logger.info("theorem 3 roots for %s: %d modes, lowest L'=%.9f", model.key, n_max, roots[-1])
    return roots


def _theorem3_mode(model: DensityModel, sqrt_rho: GridFunction, n: int, lprime: float,
                   steps: int) -> ModeResult:
    chain = _theorem3_chain(sqrt_rho, lprime, steps)
    eta, prev = chain[-1], chain[-2]
    energy = eta.inner(prev) / eta.inner(eta)
    return ModeResult(n, energy, "theorem3", steps, grid_function=_normalized(eta),
                      extra={"Lprime": lprime})


def theorem3_excited(model: DensityModel, n_target: int, steps: int = 1,
                     samples: Optional[int] = None,
                     roots: Optional[Sequence[float]] = None) -> Tuple[float, ModeResult]:
    """
    Excited mode n_target from the theorem 3 iteration.

    The energy is the quotient of consecutive iterates over the whole
    string; for n_target > 1 it is an estimate, not a bound.
    """
    n_target = validate_index(n_target, name="n_target")
    steps = validate_index(steps, name="steps")
    degree = iteration_degree(model, n_target)
    if roots is None:
        roots = theorem3_roots(model, n_target, steps, samples, degree)
    if len(roots) < n_target:
        raise ParameterError(f"need {n_target} roots, got {len(roots)}")
    lprime = float(roots[n_target - 1])
    mode = _theorem3_mode(model, _sqrt_rho(model, degree), n_target, lprime, steps)
    return lprime, mode


def theorem3_spectrum(model: DensityModel, n_max: int, steps: int = 1,
                      samples: Optional[int] = None) -> List[ModeResult]:
    """Modes 1..n_max from one shared root scan."""
    degree = iteration_degree(model, n_max)
    roots = theorem3_roots(model, n_max, steps, samples, degree)
    sqrt_rho = _sqrt_rho(model, degree)
    return [_theorem3_mode(model, sqrt_rho, n, lp, steps) for n, lp in enumerate(roots, 1)]


# ---------------------------------------------------------------------------
# Effective densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EffectiveDensity:
    """
    The density whose Q-eigenfunction reproduces a given mode.

    Attributes:
        n: Mode index of the source
        harmonic: Index h of the Q-eigenfunction matched to the mode
        fraction: sigma~(x)/sigma~(L) on the grid
        sigma_total: sigma~(L), fixed to the physical sigma(L)
        root: sqrt(rho~) = sigma~' on the grid
    """
    n: int
    harmonic: int
    fraction: GridFunction
    sigma_total: float
    root: GridFunction

    @property
    def density(self) -> GridFunction:
        """rho~ on the grid."""
        return self.root * self.root

    def zeros(self, tol: float = 1e-8) -> int:
        """Number of interior local minima of rho~ below tol times its maximum."""
        r = self.density.values
        inner = r[1:-1]
        minima = (inner <= r[:-2]) & (inner <= r[2:]) & (inner < tol * np.max(r))
        return int(np.count_nonzero(minima))

    def ratio(self, model: DensityModel, power: float = 2.0) -> np.ndarray:
        """rho~ / rho^power at the grid nodes."""
        return self.density.values / model.rho(self.root.nodes) ** power

    def to_model(self) -> DensityModel:
        """
        The effective density as a DensityModel.

        Built from sqrt(rho~), so the density cannot dip below zero between
        the grid nodes.

        Raises:
            DensityError: If rho~ touches zero (excited modes with h = 1)
        """
        s = self.root
        if self.zeros() or np.min(s.values) <= 0.0:
            raise DensityError(
                f"effective density of mode {self.n} (h={self.harmonic}) vanishes "
                "inside the string")
        model = from_grid_function(s, name=f"effective{self.n}", root=True)
        model.parameters = {"n": self.n, "harmonic": self.harmonic}
        return model


def _mode_profile(mode: Union[ModeResult, Seed], model: DensityModel
                  ) -> Callable[[np.ndarray], np.ndarray]:
    if not isinstance(mode, ModeResult):
        return mode
    if mode.grid_function is not None:
        return mode.grid_function
    if mode.node_values is not None:
        L = model.half_length
        grid = LsfGrid(L, len(mode.node_values) + 1)
        c = fourier_coefficients(mode, grid).coefficients
        k = np.arange(1, grid.points) * math.pi / (2.0 * L)
        return lambda x: np.sin(np.outer(np.asarray(x) + L, k)) @ c / math.sqrt(L)
    raise ParameterError(f"mode {mode.n} carries no eigenfunction")


def _cumulative_weight(phi: GridFunction) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrals of phi^2 from -L to each node and from each node to L.

    Both sums run over cells between neighbouring nodes, so the small
    values next to either end keep their relative accuracy.
    """
    x, w = gauss_legendre_edges(phi.nodes, CELL_POINTS)
    cells = (w * phi(x) ** 2).reshape(-1, CELL_POINTS).sum(axis=1)
    left = np.concatenate(([0.0], np.cumsum(cells)))
    right = np.concatenate((np.cumsum(cells[::-1])[::-1], [0.0]))
    return left, right


def _chord(z: float) -> float:
    """z - sin(z) without cancellation at small z."""
    if abs(z) > 0.5:
        return z - math.sin(z)
    term, total, k = z ** 3 / 6.0, 0.0, 3
    for _ in range(8):
        total += term
        term *= -z * z / ((k + 1) * (k + 2))
        k += 2
    return total


def _lower_fraction(t: float, w: float) -> float:
    """Root v in [0, 1/2] of v - sin(w v)/w = t for 0 <= t <= 1/2."""
    if t <= 0.0:
        return 0.0
    if t >= _chord(0.5 * w) / w:
        return 0.5
    guess = (6.0 * t / (w * w)) ** (1.0 / 3.0)
    return bracket_root(lambda v: _chord(w * v) / w - t, 0.0, 0.5,
                        tol=1e-15 * min(1.0, guess))


def effective_density(model: DensityModel, mode: Union[ModeResult, Seed], n: int,
                      harmonic: int = 1, degree: Optional[int] = None) -> EffectiveDensity:
    """
    Solve u - sin(2 h pi u)/(2 h pi) = P(x) for u = sigma~/sigma~(L), where P
    is the normalized cumulative integral of Phi^2, and set
    sqrt(rho~) = sigma(L) u'.

    The left side is nondecreasing in u and maps 1 - u to 1 - P, so nodes
    in the right half are solved from the integral to L. Away from the
    nodes of the Q-eigenfunction, u' = Phi^2 / (2 T sin^2(h pi u)) with
    T the total weight; at the ends u' tends to (2 Phi'^2 / (T w^2))^(1/3).
    With h = 1 the zeros of an excited mode become zeros of rho~.

    Raises:
        DensityError: If the mode does not vanish at the ends or the
            fraction is not monotone
    """
    n = validate_index(n)
    harmonic = validate_index(harmonic, name="harmonic")
    L = model.half_length
    profile = _mode_profile(mode, model)
    if degree is None:
        gf = getattr(profile, "degree", None)
        degree = gf if gf is not None else iteration_degree(model, n)
    phi = GridFunction.from_function(profile, -L, L, degree, model.oscillations or None)
    scale = phi.scale()
    if not scale > 0.0:
        raise DensityError(f"mode {n} has zero norm")
    if max(abs(phi.values[0]), abs(phi.values[-1])) > END_TOL * scale:
        raise DensityError(f"mode {n} does not vanish at the ends of the string")
    left, right = _cumulative_weight(phi)
    total = left[-1]
    w = 2.0 * math.pi * harmonic

    u = np.empty(degree + 1)
    for j, (lo, hi) in enumerate(zip(left / total, right / total)):
        u[j] = _lower_fraction(lo, w) if lo <= hi else 1.0 - _lower_fraction(hi, w)
    drops = np.nonzero(np.diff(u) < -1e-12)[0]
    if len(drops):
        raise DensityError(
            f"effective fraction decreases at node {int(drops[0]) + 1} "
            f"(x = {phi.nodes[drops[0] + 1]:.6g})")
    fraction = _same_grid(phi, u)

    half_sin = np.sin(0.5 * w * u)
    slope = np.empty_like(u)
    inner = slice(1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope[inner] = phi.values[inner] ** 2 / (2.0 * total * half_sin[inner] ** 2)
    # interior nodes of sin(h pi u) for h > 1
    flat = (np.abs(half_sin) < NODE_SIN_FLOOR) & (u > 0.5 / harmonic) \
        & (u < 1.0 - 0.5 / harmonic)
    if np.any(flat):
        slope[flat] = fraction.derivative().values[flat]
    edge = phi.derivative()
    for j in (0, -1):
        slope[j] = (2.0 * edge.values[j] ** 2 / (total * w * w)) ** (1.0 / 3.0)
    sigma_total = model.sigma_total
    root = _same_grid(phi, sigma_total * slope)
    logger.debug("effective density for mode %d (h=%d) on degree %d", n, harmonic, degree)
    return EffectiveDensity(n, harmonic, fraction, sigma_total, root)


# ---------------------------------------------------------------------------
# Trial-density optimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialDensitySpec:
    """
    A family of trial densities.

    Attributes:
        form: "polynomial" for rho (1 + a_1 x + ... + a_N x^N)^2 with a_0 = 1,
            "power" for rho^p, "custom" for builder(base, params)
        order: N for the polynomial form
        start: Starting parameters; zeros (polynomial) or p = 1 (power)
        builder: Density factory for the custom form
        base: Density the multiplier acts on; defaults to the physical one
    """
    form: str = "polynomial"
    order: int = 0
    start: Optional[Tuple[float, ...]] = None
    builder: Optional[Callable[[DensityModel, np.ndarray], DensityModel]] = None
    base: Optional[DensityModel] = None

    def __post_init__(self):
        if self.form not in TRIAL_FORMS:
            raise ParameterError(f"trial form must be one of {TRIAL_FORMS}, got {self.form!r}")
        validate_index(self.order, min_value=0, name="order")
        if self.form == "custom" and (self.builder is None or self.start is None):
            raise ParameterError("custom trial densities need a builder and a start")

    def initial(self) -> np.ndarray:
        if self.start is not None:
            return np.asarray(self.start, dtype=float)
        if self.form == "polynomial":
            return np.zeros(self.order)
        return np.ones(1)

    def build(self, base: DensityModel, params: np.ndarray) -> DensityModel:
        if self.form == "polynomial":
            return polynomial_trial(base, np.concatenate(([1.0], params)))
        if self.form == "power":
            return power_density(base, float(params[0]), check=False)
        return self.builder(base, params)


@dataclass(frozen=True, eq=False)
class TrialOptimum:
    """
    Result of a trial-density optimization.

    Attributes:
        density: Optimal trial density
        bound: Upper bound on the physical E_1
        asym_factor: Asymptotic ratio E~_n/E_n against the physical density
        parameters: Optimal trial parameters (a_1..a_N, p, or custom)
        alpha: Optimal Gottlieb parameter, or None
        converged: False when the simplex budget ran out
        evaluations: Number of objective evaluations
    """
    density: DensityModel
    bound: float
    asym_factor: float
    parameters: np.ndarray
    alpha: Optional[float] = None
    converged: bool = True
    evaluations: int = 1

    def as_dict(self) -> dict:
        out = {"bound": self.bound, "asym_factor": self.asym_factor,
               "parameters": [float(p) for p in self.parameters],
               "converged": self.converged, "evaluations": self.evaluations}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


def optimize_trial_density(physical: DensityModel, spec: TrialDensitySpec = TrialDensitySpec(),
                           use_gottlieb: bool = False, seed: int = 0, restarts: int = 0,
                           start: Optional[Sequence[float]] = None,
                           tol: float = TRIAL_QUAD_TOL) -> TrialOptimum:
    """
    Minimize the iWKBPT bound <1|O|1> over a trial-density family.

    With use_gottlieb the operator is that of the isospectral density
    gottlieb_transform(physical, alpha) and alpha joins the search as the
    last parameter. Densities that fail to build count as +inf.

    Args:
        physical: Physical density
        spec: Trial family
        use_gottlieb: Also search over the Gottlieb parameter
        seed: Seed of the restart jitter
        restarts: Extra simplex runs from jittered copies of the best point
        start: Full starting vector, overriding spec.start (and alpha = 0)
        tol: Matrix-element tolerance
    """
    base = spec.base or physical
    x0 = spec.initial()
    if use_gottlieb:
        x0 = np.concatenate((x0, [0.0]))
    if start is not None:
        x0 = np.asarray(start, dtype=float)
    count = len(spec.initial())

    def split(params: np.ndarray) -> Tuple[np.ndarray, Optional[float]]:
        return params[:count], (float(params[count]) if use_gottlieb else None)

    def objective(params: np.ndarray) -> float:
        trial_params, alpha = split(np.asarray(params, dtype=float))
        try:
            trial = spec.build(base, trial_params)
            target = gottlieb_transform(physical, alpha, check=False) if use_gottlieb \
                else physical
            value = trial_ground_bound(trial, target, tol)
        except (DensityError, ParameterError, QuadratureError, ConvergenceError):
            return math.inf
        return value if math.isfinite(value) else math.inf

    if len(x0) == 0:
        best = SimplexResult(x0, objective(x0), True, 1)
    else:
        best = minimize_simplex(objective, x0)
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            jitter = best.x + rng.normal(0.0, 0.01, size=len(best.x)) * np.maximum(
                np.abs(best.x), 1.0)
            if not math.isfinite(objective(jitter)):
                continue
            trial_run = minimize_simplex(objective, jitter)
            evaluations = best.evaluations + trial_run.evaluations
            if trial_run.value < best.value:
                best = SimplexResult(trial_run.x, trial_run.value, trial_run.converged,
                                     evaluations)
            else:
                best = SimplexResult(best.x, best.value, best.converged, evaluations)
    if not math.isfinite(best.value):
        raise DensityError("no admissible trial density found from the starting point")
    trial_params, alpha = split(best.x)
    trial = spec.build(base, trial_params)
    factor = asymptotic_factor(trial, physical)
    logger.info("trial optimum for %s (%s, N=%d%s): bound %.17g, factor %.6f",
                physical.key, spec.form, count, ", gottlieb" if use_gottlieb else "",
                best.value, factor)
    return TrialOptimum(trial, best.value, factor, np.array(trial_params), alpha,
                        best.converged, best.evaluations)


# ---------------------------------------------------------------------------
# Rapidly oscillating string, rho = 2 + sin(2 pi (x + 1/2)/eps)
# ---------------------------------------------------------------------------

def epsilon_limits() -> Tuple[float, float]:
    """Small-eps limits of sigma(L) and of eps^2 <V> on [-1/2, 1/2]."""
    e, k = elliptic_E_complete(2.0 / 3.0), elliptic_K_complete(2.0 / 3.0)
    return 2.0 * math.sqrt(3.0) / math.pi * e, math.pi ** 2 / 18.0 * (2.0 - k / e)


def _check_epsilon(epsilon: float) -> float:
    epsilon = validate_number(epsilon, name="epsilon")
    if not 0.0 < epsilon <= EPSILON_MAX:
        raise ParameterError(f"epsilon must lie in (0, {EPSILON_MAX}], got {epsilon}")
    return epsilon


def epsilon_series(epsilon: float, n: int = 1) -> float:
    """
    Small-eps expansion of E_n on [-1/2, 1/2]: through eps^5 for the
    fundamental, through eps^3 for excited modes.
    """
    epsilon = _check_epsilon(epsilon)
    n = validate_index(n)
    pi, e = math.pi, epsilon
    if n == 1:
        return (pi ** 2 / 2 - pi ** 2 * e ** 2 / 64 + pi / 4 * math.sin(pi / e) ** 2 * e ** 3
                - 15 * pi ** 2 * e ** 4 / 1024
                + pi * (5 * math.sin(4 * pi / e) - 116 * math.cos(2 * pi / e) + 116)
                * e ** 5 / 1024)
    return (pi ** 2 * n ** 2 / 2 - pi ** 2 * e ** 2 * n ** 4 / 64
            + e ** 3 / 4 * pi * n ** 4 * math.sin(pi / e) ** 2)


def delta_lbar_prediction(epsilon: float, n: int) -> float:
    """Leading eps^3 shift of the theorem 3 root from the uniform value -1/2 + 1/n."""
    epsilon = _check_epsilon(epsilon)
    n = validate_index(n, min_value=2)
    sign = (-1) ** n
    return (epsilon ** 3 * sign * n
            * (n * math.cos(2 * math.pi / (epsilon * n)) + sign * math.cos(2 * math.pi / epsilon)
               + n - 1) / (8 * math.pi))


@dataclass(frozen=True)
class EpsilonCheck:
    """Numerical E_n of the eps-oscillating string against its small-eps series."""
    epsilon: float
    n: int
    numeric: float
    series: float
    sigma_total: float
    engine: str
    lbar_predicted: Optional[float] = None
    lbar_root: Optional[float] = None

    @property
    def residual(self) -> float:
        return self.numeric - self.series

    def as_dict(self) -> dict:
        out = {"epsilon": self.epsilon, "n": self.n, "numeric": self.numeric,
               "series": self.series, "residual": self.residual,
               "sigma_total": self.sigma_total, "engine": self.engine}
        if self.lbar_predicted is not None:
            out["lbar_predicted"] = self.lbar_predicted
            out["lbar_root"] = self.lbar_root
        return out


def epsilon_asymptotics_check(epsilon: float, n: int = 1, roots: bool = True) -> EpsilonCheck:
    """
    E_n for rho = 2 + sin(2 pi (x + 1/2)/eps) compared with epsilon_series.

    The fundamental comes from theorem 1 run to convergence; excited modes
    from LSF with a grid scaled to 1/eps. For n >= 2 the theorem 3 root is
    compared with -1/2 + 1/n + delta_lbar_prediction when roots is set.

    Raises:
        ParameterError: If eps is out of range or the grid would be too fine
    """
    epsilon = _check_epsilon(epsilon)
    n = validate_index(n)
    model = epsilon_oscillating(epsilon, 0.5)
    iteration_degree(model, n)
    if n == 1:
        state = theorem1_iterate(model, steps=EPSILON_THEOREM1_STEPS)
        numeric, engine = state.energy, "theorem1"
    else:
        points = 2 * int(math.ceil(EPSILON_LSF_POINTS_PER_PERIOD / (2.0 * epsilon)))
        points = max(points, 40 * n)
        numeric, engine = lsf_solve(model, points, n)[n - 1].energy, "lsf"
    lbar_predicted = lbar_root = None
    if n >= 2 and roots:
        lbar_predicted = -0.5 + 1.0 / n + delta_lbar_prediction(epsilon, n)
        lbar_root = theorem3_roots(model, n)[n - 1]
    check = EpsilonCheck(epsilon, n, numeric, epsilon_series(epsilon, n), model.sigma_total,
                         engine, lbar_predicted, lbar_root)
    logger.info("eps=%g n=%d: numeric %.15g, series %.15g, residual %.3e", epsilon, n,
                check.numeric, check.series, check.residual)
    return check
