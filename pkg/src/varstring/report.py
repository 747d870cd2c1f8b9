"""
Output records and writers.

CSV files start with '#' comment lines carrying the library version and
the configuration echo; numbers are written with 17 significant digits so
a value read back is the value written. JSON documents carry the same
metadata under "version" and "config".
"""

import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

from . import __version__
from .errors import ConfigError
from .modes import ModeResult

FLOAT_FORMAT = ".17g"


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


def _json_ready(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if hasattr(value, "tolist"):
        return _json_ready(value.tolist())
    return value


@dataclass
class EngineReport:
    """
    Energies of the same modes from several engines.

    Attributes:
        energies: engine -> {n: E_n}
        metadata: version, config echo and, on request, timings
    """
    energies: Dict[str, Dict[int, float]] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, engine: str, modes: Iterable[ModeResult]) -> None:
        column = self.energies.setdefault(engine, {})
        for mode in modes:
            column[mode.n] = mode.energy

    def add_pairs(self, engine: str, pairs: Iterable[Sequence[float]]) -> None:
        column = self.energies.setdefault(engine, {})
        for n, energy in pairs:
            column[int(n)] = float(energy)

    @property
    def engines(self) -> List[str]:
        return list(self.energies)

    def modes(self) -> List[int]:
        return sorted(set(itertools.chain.from_iterable(self.energies.values())))

    def deviation(self, first: str, second: str, n: int) -> Optional[float]:
        """|E_a - E_b| / |E_b|, or None unless both engines produced mode n."""
        a, b = self.energies[first].get(n), self.energies[second].get(n)
        if a is None or b is None:
            return None
        return abs(a - b) / abs(b) if b != 0.0 else abs(a - b)

    def columns(self) -> List[str]:
        pairs = [f"dev_{a}_{b}" for a, b in itertools.combinations(self.engines, 2)]
        return ["n"] + self.engines + pairs

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for n in self.modes():
            row: Dict[str, Any] = {"n": n}
            for engine in self.engines:
                row[engine] = self.energies[engine].get(n)
            for a, b in itertools.combinations(self.engines, 2):
                row[f"dev_{a}_{b}"] = self.deviation(a, b, n)
            out.append(row)
        return out

    def max_deviation(self, first: str, second: str) -> float:
        devs = [d for d in (self.deviation(first, second, n) for n in self.modes())
                if d is not None]
        return max(devs) if devs else 0.0


def build_metadata(config: Optional[Dict[str, Any]] = None,
                   timings: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    meta: Dict[str, Any] = {"version": __version__, "config": config or {}}
    if timings:
        meta["timings"] = timings
    return meta


def write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str],
              stream: TextIO, metadata: Optional[Dict[str, Any]] = None) -> None:
    meta = metadata or {}
    for key in sorted(meta):
        stream.write(f"# {key}: {json.dumps(_json_ready(meta[key]), sort_keys=True)}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])


def write_json(document: Dict[str, Any], stream: TextIO,
               metadata: Optional[Dict[str, Any]] = None) -> None:
    payload = dict(metadata or {})
    payload.update(document)
    json.dump(_json_ready(payload), stream, indent=2, sort_keys=True)
    stream.write("\n")


def emit(document: Dict[str, Any], path: Optional[str], fmt: str,
         metadata: Optional[Dict[str, Any]] = None) -> str:
    """
    Write a document to `path` (or stdout) and return the text written.

    The document is {"rows": [...], "columns": [...], ...}; CSV output holds
    the rows only, JSON output the whole document.

    Raises:
        ConfigError: If the path cannot be written
    """
    buffer = io.StringIO()
    if fmt == "csv":
        rows = document.get("rows", [])
        columns = document.get("columns") or (list(rows[0]) if rows else [])
        scalars = {k: v for k, v in document.items() if k not in ("rows", "columns")}
        meta = dict(metadata or {})
        if scalars:
            meta["summary"] = scalars
        write_csv(rows, columns, buffer, meta)
    else:
        write_json(document, buffer, metadata)
    text = buffer.getvalue()
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"Cannot write {path}: {exc}")
    else:
        sys.stdout.write(text)
    return text


def modes_document(modes: Sequence[ModeResult]) -> Dict[str, Any]:
    return {"columns": ["n", "energy", "engine", "truncation"],
            "rows": [m.as_row() for m in modes]}


def report_document(report: EngineReport) -> Dict[str, Any]:
    return {"columns": report.columns(), "rows": report.rows()}
