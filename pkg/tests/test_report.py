"""
Tests for the output records and writers.
"""
import io
import json
import math

import pytest

from varstring import __version__
from varstring.errors import ConfigError
from varstring.modes import ModeResult
from varstring.report import (
    EngineReport,
    build_metadata,
    emit,
    format_value,
    modes_document,
    report_document,
    write_csv,
    write_json,
)

def _modes(engine, energies):
    return [ModeResult(n, e, engine, 10) for n, e in enumerate(energies, 1)]

def test_format_value():
    assert format_value(True) == "true"
    assert format_value(None) == ""
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(math.pi)) == math.pi
    assert format_value(7) == "7"

def test_engine_report():
    report = EngineReport()
    report.add("spectral", _modes("spectral", [1.0, 4.0, 9.0]))
    report.add_pairs("lsf", [(1, 1.1), (2, 4.0)])
    assert report.engines == ["spectral", "lsf"]
    assert report.modes() == [1, 2, 3]
    assert report.columns() == ["n", "spectral", "lsf", "dev_spectral_lsf"]
    assert report.deviation("spectral", "lsf", 1) == pytest.approx(0.1 / 1.1)
    assert report.deviation("spectral", "lsf", 3) is None
    assert report.max_deviation("spectral", "lsf") == pytest.approx(0.1 / 1.1)
    rows = report.rows()
    assert rows[2] == {"n": 3, "spectral": 9.0, "lsf": None, "dev_spectral_lsf": None}
    assert report_document(report)["columns"] == report.columns()

def test_metadata():
    meta = build_metadata({"density": "quartic"})
    assert meta == {"version": __version__, "config": {"density": "quartic"}}
    assert build_metadata(None, {"spectrum": 0.5})["timings"] == {"spectrum": 0.5}

def test_write_csv_with_metadata():
    stream = io.StringIO()
    document = modes_document(_modes("lsf", [1.5]))
    write_csv(document["rows"], document["columns"], stream, build_metadata({"n": 8}))
    lines = stream.getvalue().splitlines()
    assert lines[0] == '# config: {"n": 8}'
    assert lines[1] == f'# version: "{__version__}"'
    assert lines[2] == "n,energy,engine,truncation"
    assert lines[3] == "1,1.5,lsf,10"

def test_write_json_handles_non_finite():
    stream = io.StringIO()
    write_json({"bound": math.inf, "values": (1.0, 2.0)}, stream, {"version": "x"})
    payload = json.loads(stream.getvalue())
    assert payload == {"bound": "inf", "values": [1.0, 2.0], "version": "x"}

def test_emit_to_file(tmp_path):
    path = tmp_path / "out.csv"
    document = dict(modes_document(_modes("lsf", [1.0, 4.0])), localized=[2])
    text = emit(document, str(path), "csv", build_metadata())
    assert path.read_text() == text
    assert "# summary: {\"localized\": [2]}" in text

    json_path = tmp_path / "out.json"
    emit(document, str(json_path), "json")
    assert json.loads(json_path.read_text())["localized"] == [2]

def test_emit_to_stdout(capsys):
    emit({"bound": 1.0}, None, "json")
    assert json.loads(capsys.readouterr().out) == {"bound": 1.0}

def test_emit_unwritable(tmp_path):
    with pytest.raises(ConfigError):
        emit({"rows": []}, str(tmp_path / "missing" / "out.csv"), "csv")
