"""
Tests for the configuration layer, the error hierarchy and logging setup.
"""
import json
import logging

import pytest

from varstring.config import RunConfig, load_config, merge_config
from varstring.errors import (
    ConfigError,
    DomainError,
    ParameterError,
    QuadratureError,
    RootNotFoundError,
    VarStringError,
)
from varstring.logging_config import ROOT_LOGGER_NAME, configure_logging, get_logger

def test_run_config_defaults():
    """A default RunConfig validates and echoes every field."""
    cfg = RunConfig().validate()
    echo = cfg.echo()
    assert echo["command"] == "spectrum"
    assert echo["density"] == "quartic"
    assert echo["format"] == "csv"
    assert set(echo) >= {"density_params", "tol", "steps", "output"}

def test_run_config_rejects_bad_values(tmp_path):
    """Unknown commands, formats and unwritable paths are configuration errors."""
    with pytest.raises(ConfigError):
        RunConfig(command="plot").validate()
    with pytest.raises(ConfigError):
        RunConfig(format="xml").validate()
    with pytest.raises(ConfigError):
        RunConfig(output=str(tmp_path / "missing" / "out.csv")).validate()

def test_load_config(tmp_path):
    """A JSON object with known keys loads unchanged."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"density": "horgan", "density_params": {"a": 2.0}}))
    assert load_config(str(path)) == {"density": "horgan", "density_params": {"a": 2.0}}

def test_load_config_errors(tmp_path):
    """Missing files, malformed JSON, non-objects and unknown keys all fail."""
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.json"))

    bad = tmp_path / "bad.json"
    bad.write_text("{density: quartic")
    with pytest.raises(ConfigError):
        load_config(str(bad))

    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(str(listing))

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"density": "quartic", "colour": "red"}))
    with pytest.raises(ConfigError):
        load_config(str(unknown))

def test_merge_config_flags_override_file():
    """Explicit flags win, None flags are ignored and density parameters merge."""
    file_values = {"density": "horgan", "steps": 9, "density_params": {"a": 1.0, "L": 0.5}}
    flags = {"command": "iterate", "steps": None, "density_params": {"a": 3.0}, "format": "json"}
    cfg = merge_config(file_values, flags)
    assert cfg.command == "iterate"
    assert cfg.density == "horgan"
    assert cfg.steps == 9
    assert cfg.density_params == {"a": 3.0, "L": 0.5}
    assert cfg.format == "json"

def test_merge_config_unknown_key():
    with pytest.raises(ConfigError):
        merge_config({}, {"command": "spectrum", "colour": "red"})

def test_error_hierarchy():
    """Every library error is a VarStringError; argument errors are also ValueErrors."""
    for cls in (DomainError, ParameterError, ConfigError, QuadratureError, RootNotFoundError):
        assert issubclass(cls, VarStringError)
    assert issubclass(DomainError, ValueError)
    assert issubclass(ParameterError, ValueError)

    err = QuadratureError("slow", best_estimate=1.5, achieved_tolerance=1e-6)
    assert err.best_estimate == 1.5
    assert err.achieved_tolerance == 1e-6

    root = RootNotFoundError("none", endpoints=[1.0, 2.0])
    assert root.endpoints == (1.0, 2.0)
    assert RootNotFoundError("none").endpoints == ()

def test_logging_hierarchy():
    """Module loggers hang under the package logger."""
    assert get_logger("numerics").name == f"{ROOT_LOGGER_NAME}.numerics"
    assert get_logger("varstring.density").name == "varstring.density"
    assert get_logger().name == ROOT_LOGGER_NAME

    root = configure_logging("DEBUG")
    assert root.level == logging.DEBUG
    root = configure_logging("not-a-level")
    assert root.level == logging.WARNING
    assert len(root.handlers) == 1
