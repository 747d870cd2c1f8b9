"""
Little-Sinc-Function collocation on a uniform grid.

The grid points x_k = 2Lk/N, k = -N/2+1 .. N/2-1, carry the truncated
uniform-string basis psi_n(x) = sin(n pi (x+L)/2L)/sqrt(L), n = 1..N-1.
In that basis -d^2/dx^2 is diagonal, so the collocation matrix
K = S diag((n pi/2L)^2) S is exact within the truncation, S being the
orthogonal sine matrix sqrt(2/N) sin(pi n j/N).
"""

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy import fft

from .config import GAP_FACTOR, LOCALIZATION_THRESHOLD, LSF_DEFAULT_POINTS
from .density import DensityModel
from .errors import DensityError, ParameterError
from .logging_config import get_logger
from .modes import ModeResult
from .numerics import SymmetricMatrix, eigen_symmetric
from .utils import validate_even, validate_index, validate_positive

logger = get_logger(__name__)


@dataclass(frozen=True)
class LsfGrid:
    """
    Uniform collocation grid on [-L, L].

    Attributes:
        half_length: L
        points: N (even); the grid spacing is 2L/N
    """
    half_length: float
    points: int = LSF_DEFAULT_POINTS

    def __post_init__(self):
        validate_positive(self.half_length, name="half_length")
        validate_even(self.points, min_value=8, name="N")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points

    @property
    def size(self) -> int:
        return self.points - 1

    @property
    def nodes(self) -> np.ndarray:
        k = np.arange(-self.points // 2 + 1, self.points // 2)
        return 2.0 * self.half_length * k / self.points

    def sine_matrix(self) -> np.ndarray:
        j = np.arange(1, self.points)
        return math.sqrt(2.0 / self.points) * np.sin(math.pi * np.outer(j, j) / self.points)

    def wavenumbers_squared(self) -> np.ndarray:
        return (np.arange(1, self.points) * math.pi / (2.0 * self.half_length)) ** 2


@dataclass(frozen=True, eq=False)
class FourierDecomposition:
    """Coefficients c_n of a mode against the uniform-string basis, n = 1..N-1."""
    n: int
    coefficients: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(np.sum(self.coefficients ** 2))

    def top_fraction(self, count: int) -> float:
        """Share of the squared norm carried by the `count` largest coefficients."""
        c2 = np.sort(self.coefficients ** 2)[::-1]
        return float(np.sum(c2[:count]) / np.sum(c2))


def lsf_operator_matrix(model: DensityModel, grid: LsfGrid,
                        inverse: bool = False) -> SymmetricMatrix:
    """
    D = R^(-1/2) K R^(-1/2) with R = diag(rho(x_k)), or with inverse=True
    its inverse R^(1/2) K^(-1) R^(1/2), where K^(-1) is exact in the sine basis.

    Raises:
        ParameterError: If the grid and the density have different lengths
        DensityError: If rho is not positive and finite at every node
    """
    if abs(grid.half_length - model.half_length) > 1e-12 * model.half_length:
        raise ParameterError(
            f"grid half-length {grid.half_length} differs from density {model.half_length}")
    r = np.asarray(model.rho(grid.nodes), dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r <= 0.0):
        raise DensityError(f"{model.key}: rho is not positive at every collocation node")
    s = grid.sine_matrix()
    q = grid.wavenumbers_squared()
    if inverse:
        scale = np.sqrt(r)
        core = (s / q[None, :]) @ s
    else:
        scale = 1.0 / np.sqrt(r)
        core = (s * q[None, :]) @ s
    return SymmetricMatrix(scale[:, None] * core * scale[None, :], inverse=inverse)


def lsf_eigenpairs(matrix: SymmetricMatrix, grid: LsfGrid, count: int) -> List[ModeResult]:
    """
    Lowest `count` eigenpairs; node values are scaled by sqrt(N/2L) so they
    approximate Phi = sqrt(rho) Psi with unit L2 norm.
    """
    count = validate_index(count, name="count")
    dim = matrix.dimension
    if count > dim:
        raise ParameterError(f"count must be at most {dim}, got {count}")
    if matrix.inverse:
        vals, vecs = eigen_symmetric(matrix, subset=(dim - count, dim - 1))
        vals, vecs = 1.0 / vals[::-1], vecs[:, ::-1]
    else:
        vals, vecs = eigen_symmetric(matrix, subset=(0, count - 1))
    scale = math.sqrt(grid.points / (2.0 * grid.half_length))
    return [ModeResult(j + 1, float(vals[j]), "lsf", grid.points,
                       node_values=scale * vecs[:, j], extra={"points": grid.points})
            for j in range(count)]


def lsf_solve(model: DensityModel, points: int = LSF_DEFAULT_POINTS,
              count: int = 10) -> List[ModeResult]:
    """Lowest `count` LSF modes of a density, through the inverse operator."""
    grid = LsfGrid(model.half_length, points)
    modes = lsf_eigenpairs(lsf_operator_matrix(model, grid, inverse=True), grid, count)
    logger.info("LSF solve for %s: N=%d, E1=%.17g", model.key, points, modes[0].energy)
    return modes


def fourier_coefficients(mode: ModeResult, grid: LsfGrid) -> FourierDecomposition:
    """
    c_n = (2L/N) sum_k f(x_k) psi_n(x_k), evaluated for all n by one sine transform.

    Raises:
        ParameterError: If the mode was not computed on this grid
    """
    f = mode.node_values
    if f is None or len(f) != grid.size:
        raise ParameterError(f"mode {mode.n} does not live on a grid of {grid.points} points")
    c = math.sqrt(grid.spacing) * fft.dst(np.asarray(f, dtype=float), type=1, norm="ortho")
    return FourierDecomposition(mode.n, c)


def participation_ratio(decomposition: FourierDecomposition) -> float:
    """(sum c^2)^2 / sum c^4: about 1 for a single uniform mode, large when localized."""
    c2 = decomposition.coefficients ** 2
    return float(np.sum(c2) ** 2 / np.sum(c2 * c2))


def localized_modes(modes: Sequence[ModeResult], grid: LsfGrid,
                    threshold: float = LOCALIZATION_THRESHOLD) -> List[int]:
    """Indices of the modes whose participation ratio exceeds the threshold."""
    flagged = []
    for mode in modes:
        ratio = participation_ratio(fourier_coefficients(mode, grid))
        if ratio > threshold:
            logger.debug("mode %d localized: participation ratio %.2f", mode.n, ratio)
            flagged.append(mode.n)
    return flagged


def spectral_gaps(energies: Sequence[float], factor: float = GAP_FACTOR) -> List[int]:
    """
    Mode indices n after which sqrt(E_{n+1}) - sqrt(E_n) exceeds `factor`
    times the median wavenumber spacing.
    """
    k = np.sqrt(np.asarray(energies, dtype=float))
    if len(k) < 3:
        raise ParameterError("need at least three energies to look for gaps")
    spacing = np.diff(k)
    median = float(np.median(spacing))
    return [int(i) + 1 for i in np.nonzero(spacing > factor * median)[0]]
