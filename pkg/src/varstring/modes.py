"""
Result records shared by the engines.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .numerics import GridFunction


@dataclass(frozen=True, eq=False)
class ModeResult:
    """
    One eigenpair produced by an engine.

    Attributes:
        n: Mode index (1 = fundamental)
        energy: Eigenvalue E_n
        engine: Engine tag, e.g. "spectral", "lsf", "theorem1"
        truncation: Basis size, grid size or iteration count used
        coefficients: Basis coefficients of Phi = sqrt(rho) Psi, if any
        node_values: Phi at collocation nodes, if any
        grid_function: Phi as a GridFunction, if any
        extra: Engine-specific details (window centre, L', overlap, ...)
    """
    n: int
    energy: float
    engine: str
    truncation: int
    coefficients: Optional[np.ndarray] = None
    node_values: Optional[np.ndarray] = None
    grid_function: Optional[GridFunction] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def as_row(self) -> Dict[str, Any]:
        return {"n": self.n, "energy": self.energy, "engine": self.engine,
                "truncation": self.truncation}
