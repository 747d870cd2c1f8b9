"""
Galerkin eigensolvers in the WKB basis.

solve_dense diagonalizes the N x N matrix of O over phi_1..phi_N;
solve_windowed diagonalizes a (2 nbar + 1)-state block centred on a high
mode. horgan_exact solves the Horgan-Chan density exactly from the zeros of
a Bessel cross product.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_BASIS_SIZE, DEFAULT_HALF_WIDTH, DEFAULT_QUAD_TOL
from .density import DensityModel
from .errors import ParameterError, RootNotFoundError
from .logging_config import get_logger
from .modes import ModeResult
from .numerics import SymmetricMatrix, bracket_root, eigen_symmetric, scan_sign_changes
from .specfun import bessel_j1_y1
from .utils import validate_index, validate_number
from .wkb_basis import WkbBasis, build_table

logger = get_logger(__name__)

# Starting point of the Bessel-zero scan; the cross product has no root below it
HORGAN_SCAN_START = 1e-3
HORGAN_SCAN_GROWTH = 4


@dataclass(frozen=True)
class SpectralConfig:
    """
    Settings of the Galerkin engines.

    Attributes:
        size: Basis size N for the dense engine
        center: Window centre c for the windowed engine
        half_width: Window half-width nbar
        tol: Matrix-element tolerance
        cache_dir: Optional matrix-element cache directory
    """
    size: int = DEFAULT_BASIS_SIZE
    center: Optional[int] = None
    half_width: int = DEFAULT_HALF_WIDTH
    tol: float = DEFAULT_QUAD_TOL
    cache_dir: Optional[str] = None

    def __post_init__(self):
        validate_index(self.size, min_value=2, name="size")
        validate_index(self.half_width, min_value=1, name="half_width")
        if self.center is not None:
            validate_index(self.center, min_value=self.half_width + 1, name="center")


def _polish(operator: np.ndarray, vec: np.ndarray) -> float:
    v = vec / np.linalg.norm(vec)
    return float(v @ operator @ v)


def solve_dense(model: DensityModel, cfg: SpectralConfig = SpectralConfig()) -> List[ModeResult]:
    """
    Lowest N//2 modes of O from the dense N x N matrix.

    Raises:
        ConvergenceError: If the eigensolver fails
        QuadratureError: If matrix elements do not converge
    """
    basis = WkbBasis(model, size=cfg.size)
    table = build_table(basis, cfg.size, 1, cfg.tol, cfg.cache_dir)
    vals, vecs = eigen_symmetric(SymmetricMatrix(table.operator))
    count = cfg.size // 2
    modes = []
    for j in range(count):
        energy = _polish(table.operator, vecs[:, j])
        modes.append(ModeResult(j + 1, energy, "spectral", cfg.size,
                                coefficients=vecs[:, j].copy(),
                                extra={"first": 1, "eigenvalue": float(vals[j])}))
    logger.info("dense spectral solve for %s: N=%d, E1=%.17g", model.key, cfg.size,
                modes[0].energy)
    return modes


def solve_windowed(model: DensityModel, cfg: SpectralConfig) -> List[ModeResult]:
    """
    Modes near the window centre from the block over c - nbar .. c + nbar.

    Each eigenvector is labelled by its largest basis component, which keeps
    the labelling right when near-degenerate levels reorder. Only modes
    whose label lies within nbar//2 of the centre are returned, since the
    edges of the block feel the truncation.
    """
    if cfg.center is None:
        raise ParameterError("windowed solve needs a centre")
    c, nbar = int(cfg.center), int(cfg.half_width)
    first = c - nbar
    basis = WkbBasis(model, size=2 * nbar + 1)
    table = build_table(basis, 2 * nbar + 1, first, cfg.tol, cfg.cache_dir)
    _, vecs = eigen_symmetric(SymmetricMatrix(table.operator))
    best: Dict[int, Tuple[float, np.ndarray]] = {}
    for j in range(vecs.shape[1]):
        vec = vecs[:, j]
        peak = int(np.argmax(np.abs(vec)))
        label = first + peak
        overlap = float(abs(vec[peak]))
        if label in best:
            logger.warning("two window eigenvectors peak at index %d; keeping the larger overlap",
                           label)
            if overlap <= best[label][0]:
                continue
        best[label] = (overlap, vec)
    modes = []
    for label in sorted(best):
        if abs(label - c) > nbar // 2:
            continue
        overlap, vec = best[label]
        modes.append(ModeResult(label, _polish(table.operator, vec), "spectral-window",
                                2 * nbar + 1, coefficients=vec.copy(),
                                extra={"first": first, "center": c, "half_width": nbar,
                                       "overlap": overlap}))
    return modes


def windowed_energies(model: DensityModel, centers: Sequence[int], half_width: int,
                      keep: int, tol: float = DEFAULT_QUAD_TOL) -> List[Tuple[int, float]]:
    """(n, E_n) pairs from windows at each centre, keeping |n - c| <= keep."""
    keep = validate_index(keep, min_value=0, name="keep")
    rows: Dict[int, float] = {}
    for c in centers:
        for mode in solve_windowed(model, SpectralConfig(center=c, half_width=half_width, tol=tol)):
            if abs(mode.n - c) <= keep:
                rows[mode.n] = mode.energy
    return sorted(rows.items())


# ---------------------------------------------------------------------------
# Horgan-Chan exact spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExactSpectrum:
    """
    Roots lambda_m of J1(l) Y1((a+1) l) - Y1(l) J1((a+1) l) = 0 and E = (a lambda)^2.

    Attributes:
        a: Horgan-Chan parameter
        roots: Increasing roots
    """
    a: float
    roots: np.ndarray

    @property
    def energies(self) -> np.ndarray:
        return (self.a * self.roots) ** 2

    def pairs(self) -> List[Tuple[int, float]]:
        return [(m + 1, float(e)) for m, e in enumerate(self.energies)]

    def as_modes(self) -> List[ModeResult]:
        return [ModeResult(m + 1, float(e), "horgan-exact", len(self.roots))
                for m, e in enumerate(self.energies)]


def _cross_product(a: float):
    def f(lam):
        j_l, y_l = bessel_j1_y1(lam)
        j_al, y_al = bessel_j1_y1((a + 1.0) * lam)
        return j_l * y_al - y_l * j_al
    return f


def horgan_exact(a: float, count: int) -> ExactSpectrum:
    """
    First `count` eigenvalues of the Horgan-Chan density.

    Sign changes are scanned with a step finer than the root spacing pi/|a|
    and each bracket is refined with Brent's method.

    Raises:
        ParameterError: If a <= -1 or a == 0
        RootNotFoundError: If the scan finds fewer roots than requested
    """
    a = validate_number(a, min_value=-1.0, name="a")
    if a <= -1.0 or a == 0.0:
        raise ParameterError(f"a must satisfy a > -1 and a != 0, got {a}")
    count = validate_index(count, name="count")
    f = _cross_product(a)
    step = min(math.pi / (2.0 * (a + 1.0)), math.pi / (4.0 * abs(a)))
    span = (count + 2) * math.pi / abs(a)
    for attempt in range(HORGAN_SCAN_GROWTH):
        grid = np.arange(HORGAN_SCAN_START, span + step, step)
        values = f(grid)
        crossings = scan_sign_changes(values)
        if len(crossings) >= count:
            break
        span *= 2.0
    else:
        raise RootNotFoundError(
            f"found {len(crossings)} of {count} Horgan-Chan roots below lambda = {grid[-1]:.6g}",
            endpoints=(float(grid[0]), float(grid[-1])))
    roots = np.array([bracket_root(lambda x: float(f(x)), float(grid[i]), float(grid[i + 1]))
                      for i in crossings[:count]])
    logger.info("Horgan-Chan a=%g: %d roots up to lambda=%.6g", a, count, roots[-1])
    return ExactSpectrum(a, roots)
