"""
Published reference values used by the reproduction commands and the tests.

Values live in data/reference_values.json, one section per table plus a
"constants" section; every section carries a provenance tag.
"""

import json
import math
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional

from .errors import ConfigError

DATA_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data",
                         "reference_values.json")

TABLE_IDS = ("fit", "t1", "t2", "t4", "t5", "t6", "t7")


@lru_cache(maxsize=4)
def load_reference(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Read the reference data file.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    path = path or DATA_FILE
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"Cannot read reference data {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Malformed reference data {path}: {exc}")


def reference_table(table_id: str) -> Dict[str, Any]:
    """One table section; raises ConfigError for unknown ids."""
    if table_id not in TABLE_IDS:
        raise ConfigError(f"Unknown table {table_id!r}; choose from {', '.join(TABLE_IDS)}")
    return load_reference()[table_id]


def reference_rows(table_id: str) -> List[Dict[str, float]]:
    """Table rows as dicts keyed by the section's column names."""
    table = reference_table(table_id)
    columns = table.get("columns") or ["n", "value"]
    return [dict(zip(columns, row)) for row in table["rows"]]


def reference_constant(name: str) -> Any:
    try:
        return load_reference()["constants"][name]["value"]
    except KeyError:
        raise ConfigError(f"Unknown reference constant {name!r}")


# Closed forms that the data file records as text
EXACT = {
    "horgan_A1": math.pi ** 2,
    "horgan_A2": 3.0 / 8.0,
    "horgan_A3": -165.0 / (512.0 * math.pi ** 2),
    "horgan_A4": 73179.0 / (81920.0 * math.pi ** 4),
    "horgan_A5": -81997443.0 / (14680064.0 * math.pi ** 6),
    "horgan_tail": 711.0 / (512.0 * math.pi ** 6),
    "horgan_tail_sum": 79.0 / (5120.0 * math.pi ** 2),
    "quartic_tail": 631561441.0 / (294912.0 * math.pi ** 12),
    "quartic_tail_sum": 631561441.0 / (26542080.0 * math.pi ** 8),
    "quartic_a3_first": 3577.0 / (512.0 * math.pi ** 8),
    "oscillating_trial_bound": 2.0 * math.pi ** 2 / 9.0,
}


def relative_deviation(value: float, reference: float) -> float:
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def agrees_to_digits(value: float, reference: float, digits: int,
                     units: float = 0.5) -> bool:
    """
    True when value matches reference to `digits` significant digits.

    `units` is the allowed deviation in units of the last digit: 0.5 is
    plain rounding and 1.0 tolerates one unit of disagreement in the
    last printed digit.
    """
    if reference == 0.0:
        return abs(value) < 10.0 ** (-digits)
    scale = 10.0 ** (math.floor(math.log10(abs(reference))) - digits + 1)
    return abs(value - reference) <= units * scale * (1.0 + 1e-9)
