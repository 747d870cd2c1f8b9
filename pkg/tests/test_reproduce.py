"""
Tests for the table reproductions. Full reproductions are marked slow.
"""
import math

import pytest

from varstring import reproduce as reproduce_module
from varstring.errors import ConfigError, RootNotFoundError
from varstring.reproduce import (
    FAIL,
    FAILED,
    PASS,
    Cell,
    ReproductionReport,
    reproduce,
    reproduce_fit,
)

def test_unknown_table():
    with pytest.raises(ConfigError):
        reproduce("bogus")

def test_report_bookkeeping():
    report = ReproductionReport("t1")
    report.check(2, "bound", 1.0, 1.0, True, "exact")
    assert report.passed
    report.check(3, "bound", 1.5, 1.0, False, "exact")
    assert not report.passed
    summary = report.summary()
    assert summary["status"] == FAIL
    assert (summary["cells"], summary["pass"], summary["fail"], summary["failed"]) == (2, 1, 1, 0)
    row = report.rows()[1]
    assert row["table"] == "t1" and row["row"] == "3"
    assert row["deviation"] == 0.5
    assert Cell("1", "bound", None, 1.0, "exact", FAILED).as_row("t1")["deviation"] is None

def test_fit_with_a_short_spectrum():
    """The fit runner produces one cell per coefficient."""
    report = reproduce_fit(count=200)
    assert report.table_id == "fit"
    assert [c.row for c in report.cells] == ["A1", "A2", "A3"]
    assert report.cells[0].value == pytest.approx(math.pi ** 2, rel=1e-9)
    assert report.cells[1].value == pytest.approx(0.375, rel=1e-6)
    assert all(c.status in (PASS, FAIL) for c in report.cells)

def test_engine_failure_marks_cells(monkeypatch):
    """A failing engine marks its cells FAILED and the run still completes."""
    def broken(a, count):
        raise RootNotFoundError("no roots", endpoints=(0.0, 1.0))

    monkeypatch.setattr(reproduce_module, "horgan_exact", broken)
    report = reproduce("fit", 10)
    assert not report.passed
    assert [c.status for c in report.cells] == [FAILED] * 3
    assert report.errors and "no roots" in report.errors[0]
    assert report.summary()["failed"] == 3

@pytest.mark.slow
def test_reproduce_first_order_bounds():
    report = reproduce("t1")
    assert report.passed, report.summary()

@pytest.mark.slow
def test_reproduce_oscillating_iteration():
    report = reproduce("t6")
    assert report.passed, report.summary()

def test_trial_table_zero_order():
    """N = 0 is the physical WKB basis, so its bound matches the first row."""
    report = reproduce("t4", 0)
    assert [(c.row, c.column) for c in report.cells] == [("0", "bound"), ("0", "factor")]
    assert report.passed, report.summary()

@pytest.mark.slow
def test_reproduce_quartic_energies():
    """Every WKBPT, asymptotic and LSF cell of the quartic table, 6 digits."""
    report = reproduce("t2")
    summary = report.summary()
    assert summary["cells"] == 70
    assert report.passed, [c.as_row("t2") for c in report.cells if c.status != PASS]

@pytest.mark.slow
def test_reproduce_polynomial_trial_densities():
    report = reproduce("t4")
    assert report.summary()["cells"] == 7
    assert report.passed, report.summary()

@pytest.mark.slow
def test_reproduce_gottlieb_trial_densities():
    report = reproduce("t5")
    assert {c.column for c in report.cells} == {"bound", "factor", "alpha"}
    assert report.passed, report.summary()

@pytest.mark.slow
def test_reproduce_epsilon_roots():
    report = reproduce("t7")
    assert report.summary()["cells"] == 40
    assert report.passed, report.summary()
