"""
Tests for the command line: argument handling, exit codes and outputs.
"""
import json
import math

import pytest

from varstring import cli
from varstring.cli import (
    EXIT_CONFIG,
    EXIT_ENGINE,
    EXIT_OK,
    EXIT_REPRODUCTION,
    config_from_args,
    main,
    parse_args,
)
from varstring.reproduce import ReproductionReport

def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])

def test_missing_or_unknown_command(capsys):
    assert main([]) == EXIT_CONFIG
    assert _error(capsys)["error"] == "ConfigError"
    assert main(["frobnicate"]) == EXIT_CONFIG

def test_malformed_param(capsys):
    assert main(["spectrum", "--param", "a"]) == EXIT_CONFIG
    assert "KEY=VALUE" in _error(capsys)["message"]
    assert main(["spectrum", "--param", "a=big"]) == EXIT_CONFIG

def test_missing_config_file(tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert _error(capsys)["error"] == "ConfigError"

def test_reproduce_needs_table(capsys):
    assert main(["reproduce"]) == EXIT_CONFIG
    assert "--table" in _error(capsys)["message"]

def test_unknown_density_is_an_engine_error(capsys):
    assert main(["spectrum", "--density", "drum"]) == EXIT_ENGINE
    assert _error(capsys)["error"] == "ParameterError"

def test_config_from_args(tmp_path):
    args = parse_args(["bound", "--a", "2"])
    assert args.param_a == 2.0
    cfg = config_from_args(args)
    assert cfg.format == "json"
    assert cfg.density_params == {"a": 2.0}

    path = tmp_path / "run.json"
    path.write_text(json.dumps({"density": "uniform", "density_params": {"rho0": 2.0},
                                "format": "json"}))
    cfg = config_from_args(parse_args(["spectrum", "--config", str(path), "--param", "L=1",
                                       "--n", "6"]))
    assert cfg.density == "uniform"
    assert cfg.density_params == {"rho0": 2.0, "L": 1.0}
    assert cfg.format == "json"
    assert cfg.n == 6

def test_spectrum_csv(capsys):
    assert main(["spectrum", "--density", "uniform", "--n", "8"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1].startswith("# version: ")
    assert lines[2] == "n,energy,engine,truncation"
    rows = [line.split(",") for line in lines[3:]]
    assert len(rows) == 4
    for n, energy, engine, truncation in rows:
        assert engine == "spectral" and truncation == "8"
        assert float(energy) == pytest.approx((int(n) * math.pi) ** 2, rel=1e-12)

def test_spectrum_dump_vectors(tmp_path, capsys):
    dump = tmp_path / "vectors.csv"
    assert main(["spectrum", "--density", "uniform", "--n", "4",
                 "--dump-vectors", str(dump)]) == EXIT_OK
    data = [line for line in dump.read_text().splitlines() if not line.startswith("#")]
    assert data[0] == "index,mode_1,mode_2"
    assert len(data) == 5

def test_collocate_with_fourier_table(tmp_path, capsys):
    out = tmp_path / "modes.json"
    fourier = tmp_path / "fourier.csv"
    assert main(["collocate", "--density", "uniform", "--n", "32", "--count", "4",
                 "--format", "json", "-o", str(out), "--fourier", str(fourier)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["localized"] == []
    assert payload["gaps"] == []
    assert [row["n"] for row in payload["rows"]] == [1, 2, 3, 4]
    header = [line for line in fourier.read_text().splitlines() if not line.startswith("#")][0]
    assert header == "k,mode_1,mode_2,mode_3,mode_4"

def test_iterate_theorem1(capsys):
    assert main(["iterate", "--density", "uniform", "--theorem", "1", "--steps", "2",
                 "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert [row["step"] for row in payload["rows"]] == [0, 1, 2]
    for row in payload["rows"]:
        assert row["bound"] == pytest.approx(math.pi ** 2, rel=1e-10)

def test_bound_defaults_to_json(capsys):
    assert main(["bound", "--density", "uniform", "--engine", "dpt", "--timings"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["bound"] == pytest.approx(math.pi ** 2, rel=1e-12)
    assert "bound-dpt" in payload["timings"]
    assert payload["version"] == cli.build_metadata()["version"]

def test_asymptotics(capsys):
    assert main(["asymptotics", "--density", "horgan", "--a", "1", "--terms", "5000",
                 "--accelerate"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["A1"] == pytest.approx(math.pi ** 2, rel=1e-14)
    assert payload["A2"] == pytest.approx(0.375, rel=1e-12)
    assert payload["A3"] == pytest.approx(-165.0 / (512.0 * math.pi ** 2), rel=1e-6)
    assert payload["provenance"]["A3"] == "formula"

def test_compare_engines(capsys):
    assert main(["compare", "--density", "uniform", "--count", "2", "--size", "4",
                 "--n", "16", "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["columns"][:5] == ["n", "spectral", "lsf", "wkbpt2", "dpt2"]
    for row in payload["rows"]:
        for column in payload["columns"]:
            if column.startswith("dev_"):
                assert row[column] < 1e-10

def test_failing_reproduction_exit_code(monkeypatch, capsys):
    report = ReproductionReport("t1")
    report.check(2, "bound", 2.0, 1.0, False, "10 digits")
    monkeypatch.setattr(cli, "reproduce", lambda table, count: report)
    assert main(["reproduce", "--table", "t1", "--format", "json"]) == EXIT_REPRODUCTION
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "FAIL"
    assert payload["rows"][0]["status"] == "FAIL"
