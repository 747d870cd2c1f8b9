"""
Tests for the reference data file and the agreement helpers.
"""
import math

import pytest

from varstring.errors import ConfigError
from varstring.reference import (
    EXACT,
    TABLE_IDS,
    agrees_to_digits,
    load_reference,
    reference_constant,
    reference_rows,
    reference_table,
    relative_deviation,
)

def test_every_table_is_present():
    data = load_reference()
    assert data["version"] == 1
    for table_id in TABLE_IDS:
        assert "provenance" in reference_table(table_id)

def test_rows_follow_columns():
    rows = reference_rows("t2")
    assert set(rows[0]) == {"n", "wkbpt1", "asym2", "wkbpt2", "asym3", "lsf"}
    assert rows[0]["n"] == 1
    # sections without a column list read as (n, value)
    assert set(reference_rows("t1")[0]) == {"n", "value"}

def test_text_constants_match_closed_forms():
    fit = reference_table("fit")
    for name in ("A1", "A2", "A3", "A4", "A5"):
        assert fit[name] == pytest.approx(EXACT[f"horgan_{name}"], rel=1e-13)
    assert reference_constant("horgan_a3_accelerated") == pytest.approx(EXACT["horgan_A3"],
                                                                        rel=1e-12)
    assert reference_constant("horgan_tail") == "711/(512 pi**6)"

def test_unknown_entries():
    with pytest.raises(ConfigError):
        reference_table("t3")
    with pytest.raises(ConfigError):
        reference_constant("planck")

def test_unreadable_data(tmp_path):
    with pytest.raises(ConfigError):
        load_reference(str(tmp_path / "absent.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_reference(str(broken))

def test_agreement_helpers():
    assert agrees_to_digits(1.23456, 1.23459, 5)
    assert not agrees_to_digits(1.23456, 1.23459, 6)
    assert agrees_to_digits(0.0017440146306353234, 0.0017440146306, 10)
    assert agrees_to_digits(1e-12, 0.0, 10)

    assert agrees_to_digits(4.71371169589, 4.71371167, 6, units=1.0)
    assert not agrees_to_digits(0.0073486547149, 0.00734866, 6)
    assert agrees_to_digits(0.0073486547149, 0.00734866, 6, units=1.0)
    assert not agrees_to_digits(0.00734864, 0.00734866, 6, units=1.0)

    assert relative_deviation(1.1, 1.0) == pytest.approx(0.1)
    assert relative_deviation(-0.5, 0.0) == 0.5
    assert math.isfinite(relative_deviation(0.0, 2.0))
