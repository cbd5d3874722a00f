import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgrowth.dataio import (
    AnnualSeries,
    MacroDataset,
    bundled_path,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
)
from ecgrowth.errors import DataError, SchemaError, YearGapError
from ecgrowth.linreg import FittedModel, fit_through_origin

from conftest import COEF_2002_2013, PUBLISHED_BACKTEST, make_design

MANIFEST = {"roles": {"gdp_agr": {"column": "gdp_agr", "unit": "percent"}}}


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_simple_series(tmp_path):
    ds = load_dataset(write(tmp_path, "year,gdp_agr\n2014,7.3\n2015,6.9\n"), MANIFEST)
    assert ds["gdp_agr"] == AnnualSeries("gdp_agr", 2014, (7.3, 6.9), "percent")


def test_year_gap_names_missing_year(tmp_path):
    with pytest.raises(YearGapError, match="2015"):
        load_dataset(write(tmp_path, "year,gdp_agr\n2014,7.3\n2016,6.7\n"), MANIFEST)


def test_blank_cell_inside_series_is_a_gap(tmp_path):
    with pytest.raises(YearGapError, match="2015"):
        load_dataset(write(tmp_path, "year,gdp_agr\n2014,7.3\n2015,\n2016,6.7\n"), MANIFEST)


def test_non_numeric_cell_reports_location(tmp_path):
    with pytest.raises(DataError, match=r"data.csv:3: column 'gdp_agr'"):
        load_dataset(write(tmp_path, "year,gdp_agr\n2014,7.3\n2015,abc\n"), MANIFEST)


def test_missing_column_and_file(tmp_path):
    with pytest.raises(DataError, match="missing column 'gdp_agr'"):
        load_dataset(write(tmp_path, "year,gdp\n2014,7.3\n"), MANIFEST)
    with pytest.raises(DataError, match="not found"):
        load_dataset(tmp_path / "nope.csv", MANIFEST)


def test_unit_tag_required(tmp_path):
    with pytest.raises(DataError, match="unit"):
        load_dataset(write(tmp_path, "year,gdp_agr\n2014,7.3\n"), {"roles": {"gdp_agr": {"column": "gdp_agr"}}})


def test_years_must_increase(tmp_path):
    with pytest.raises(DataError, match="increase"):
        load_dataset(write(tmp_path, "year,gdp_agr\n2015,7.3\n2014,6.9\n"), MANIFEST)


def test_fraction_unit_converted(tmp_path):
    manifest = {"roles": {"fai_agr": {"column": "fai", "unit": "fraction"}}}
    ds = load_dataset(write(tmp_path, "year,fai\n2010,-0.103\n2011,0.062\n"), manifest)
    assert ds["fai_agr"].unit == "percent"
    assert ds["fai_agr"].values == pytest.approx((-10.3, 6.2))


def test_one_file_per_role(tmp_path):
    write(tmp_path, "year,level\n2015,5.550\n", "ec.csv")
    main = write(tmp_path, "year,gdp_agr\n2015,6.9\n")
    manifest = {
        "roles": {
            "gdp_agr": {"column": "gdp_agr", "unit": "percent"},
            "ec_level": {"column": "level", "unit": "level", "file": "ec.csv"},
        }
    }
    ds = load_dataset(main, manifest)
    assert ds["ec_level"][2015] == 5.550


def test_bundled_dataset_carries_published_values(dataset):
    ec = dataset["ec_agr"]
    assert [ec[y] for y in range(2002, 2014)] == [row[1] for row in PUBLISHED_BACKTEST.values()]
    assert ec[2014] == 3.777
    assert ec[2015] == 0.483
    assert dataset["ec_level"][2015] == 5.550


def test_bundled_csv_flags_value_origin():
    text = bundled_path("china_macro.csv").read_text().splitlines()
    assert text[0].endswith(",source")
    assert all("nbs-approx" in line for line in text[1:])
    assert "ec_agr=published" in text[-1]


def test_dataset_round_trip(tmp_path, dataset):
    manifest = save_dataset(dataset, tmp_path / "copy.csv")
    again = load_dataset(tmp_path / "copy.csv", manifest)
    assert again.series == dataset.series


@settings(max_examples=50, deadline=None)
@given(
    start=st.integers(1950, 2050),
    values=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=15),
)
def test_series_round_trip_property(tmp_path_factory, start, values):
    ds = MacroDataset({"gdp_agr": AnnualSeries("gdp_agr", start, tuple(values))})
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    manifest = save_dataset(ds, path)
    assert load_dataset(path, manifest).series == ds.series


def test_unknown_role_rejected():
    with pytest.raises(DataError):
        MacroDataset({"population": AnnualSeries("p", 2000, (1.0,))})


def test_model_round_trip_published_coefficients(tmp_path):
    m = FittedModel.from_coefficients(("G", "I_lag4", "D"), COEF_2002_2013, fit_years=(2002, 2013))
    save_model(m, tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == m


def test_model_round_trip_fitted(tmp_path, rng):
    X = rng.uniform(0, 10, (12, 3))
    m = fit_through_origin(make_design(X, X @ [1.0, 0.2, 2.5] + rng.normal(0, 1, 12)))
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert back == m
    doc = json.loads((tmp_path / "m.json").read_text())
    assert set(doc) == {
        "schema_version", "fit_start_year", "fit_end_year", "predictors", "coefficients",
        "std_errors", "t_stats", "p_values", "adj_r2", "residuals",
    }
    assert doc["residuals"][0] == {"year": 2000, "value": m.residuals[0]}


def test_model_schema_errors(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"schema_version": 1, "predictors": [], "coefficients": []}))
    with pytest.raises(SchemaError, match="p >= 1"):
        load_model(p)
    p.write_text(json.dumps({"schema_version": 99, "predictors": ["G"], "coefficients": [1.0]}))
    with pytest.raises(SchemaError, match="schema_version"):
        load_model(p)
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        load_model(p)
    p.write_text(json.dumps({"schema_version": 1, "predictors": ["G"]}))
    with pytest.raises(SchemaError):
        load_model(p)


def test_save_refuses_non_finite(tmp_path):
    m = FittedModel(("G",), (1.0,), std_errors=(math.inf,))
    with pytest.raises(DataError, match="non-finite"):
        save_model(m, tmp_path / "m.json")
    assert not (tmp_path / "m.json").exists()


def test_save_to_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    m = FittedModel(("G",), (1.0,))
    with pytest.raises(DataError):
        save_model(m, blocker / "m.json")


def test_bundled_reference_models():
    m = load_model(bundled_path("reference_2002_2013.json"))
    assert m.coefficients == COEF_2002_2013
    assert m.p_values == (5.84e-9, 0.0473, 0.0039)
    m8 = load_model(bundled_path("reference_2004_2015.json"))
    assert m8.coefficients == (1.06443, 0.22177, 2.51926)
    assert m8.fit_years == (2004, 2015)
