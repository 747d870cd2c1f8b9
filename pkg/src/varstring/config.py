"""
Engine defaults and run configuration for varstring.

Defaults are plain module constants. A RunConfig gathers everything a CLI
invocation needs; it can be read from a JSON file and then overridden by
explicit command-line flags.
"""

import json
import os
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, Optional

from .errors import ConfigError

# Quadrature
DEFAULT_QUAD_TOL = 1e-13
QUAD_MAX_SUBDIVISIONS = 200
GAUSS_POINTS_PER_PANEL = 16

# Chebyshev grid functions
CHEB_TAIL_TOL = 1e-13
CHEB_MAX_DEGREE = 16384
POINTS_PER_OSCILLATION = 40

# Density construction checks
POSITIVITY_SAMPLES = 1001
SIGMA_CONSISTENCY_TOL = 1e-10
FD_CHECK_TOL = 1e-6

# Perturbation theory
DEFAULT_WINDOW = 20
DEFAULT_ORDER = 2

# Spectral and collocation engines
DEFAULT_BASIS_SIZE = 200
DEFAULT_HALF_WIDTH = 100
LSF_DEFAULT_POINTS = 2500
LOCALIZATION_THRESHOLD = 10.0
GAP_FACTOR = 1.5

# Iteration theorems
THEOREM3_SCAN_SAMPLES = 4000
THEOREM3_SCAN_SAMPLES_OSCILLATING = 8000
DEFAULT_STEPS = 4

# Asymptotics
DEFAULT_GAMMA_TERMS = 5000
BOREL_T_MAX = 40.0
FIT_CENTERS = (150, 250, 350)
FIT_HALF_WIDTH = 100
FIT_KEEP = 20
FIT_COEFFICIENTS = 5

# Optimizer
SIMPLEX_TOL = 1e-12
SIMPLEX_MAX_EVALUATIONS = 20000

OUTPUT_FORMATS = ("csv", "json")
COMMANDS = ("spectrum", "collocate", "iterate", "bound", "asymptotics",
            "reproduce", "compare")


@dataclass
class RunConfig:
    """Everything one CLI invocation needs."""
    command: str = "spectrum"
    density: str = "quartic"
    density_params: Dict[str, float] = field(default_factory=dict)
    density_csv: Optional[str] = None
    n: Optional[int] = None
    size: Optional[int] = None
    order: int = DEFAULT_ORDER
    window: int = DEFAULT_WINDOW
    center: Optional[int] = None
    half_width: int = DEFAULT_HALF_WIDTH
    steps: int = DEFAULT_STEPS
    count: Optional[int] = None
    tol: float = DEFAULT_QUAD_TOL
    theorem: int = 1
    engine: str = "wkbpt"
    terms: int = DEFAULT_GAMMA_TERMS
    accelerate: bool = False
    table: Optional[str] = None
    output: Optional[str] = None
    format: str = "csv"
    seed: int = 0

    def validate(self) -> "RunConfig":
        """
        Check field values that argparse cannot check on its own.

        Raises:
            ConfigError: On an unknown command or output format, or an
                unwritable output path
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command: {self.command!r}")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"Unknown output format: {self.format!r}")
        if self.output:
            parent = os.path.dirname(os.path.abspath(self.output))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError(f"Output path is not writable: {self.output}")
        return self

    def echo(self) -> Dict[str, Any]:
        """The configuration as a JSON-ready dict, embedded in outputs."""
        return asdict(self)


def _known_keys():
    return {f.name for f in fields(RunConfig)}


def load_config(path: str) -> Dict[str, Any]:
    """
    Read a JSON configuration file.

    Args:
        path: Path to a JSON object whose keys are RunConfig field names

    Returns:
        The decoded mapping

    Raises:
        ConfigError: If the file is missing, malformed or has unknown keys
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Malformed JSON in {path}: {exc}")
    if not isinstance(values, dict):
        raise ConfigError(f"Config file {path} must contain a JSON object")
    unknown = set(values) - _known_keys()
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    return values


def merge_config(file_values: Optional[Dict[str, Any]],
                 flag_values: Dict[str, Any]) -> RunConfig:
    """
    Build a RunConfig from file values overridden by explicit flags.

    Flags whose value is None count as not given.
    """
    merged: Dict[str, Any] = {}
    known = _known_keys()
    for source in (file_values or {}, flag_values):
        for key, value in source.items():
            if key not in known:
                raise ConfigError(f"Unknown config key: {key}")
            if value is None:
                continue
            if key == "density_params" and isinstance(value, dict):
                params = dict(merged.get("density_params", {}))
                params.update(value)
                merged[key] = params
            else:
                merged[key] = value
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc))
    return cfg.validate()
