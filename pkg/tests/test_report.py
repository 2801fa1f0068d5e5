import csv
import xml.etree.ElementTree as ET

import pytest

from qgafkit.errors import ValidationError
from qgafkit.report import ComparisonReport, build_report, percent_reduction, svg_line_plot

# published 600519.SH columns
TABLE = {"600519.SH": {"gasf": {"mae": 0.195, "mse": 0.032}, "qgasf": {"mae": 0.119, "mse": 0.015}}}


def test_reduction_formula():
    assert percent_reduction(0.195, 0.119) == pytest.approx(38.974, abs=1e-3)
    assert percent_reduction(0.032, 0.015) == pytest.approx(53.125, abs=1e-9)
    with pytest.raises(ValidationError):
        percent_reduction(0.0, 1.0)


def test_table_layout(tmp_path):
    rep = ComparisonReport(["600519.SH", "AAPL"], ["gasf", "qgasf"],
                           {**TABLE, "AAPL": {"gasf": {"mae": 0.2, "mse": 0.04},
                                              "qgasf": {"mae": 0.1, "mse": 0.01}}})
    assert rep.header_rows() == [["", "600519.SH", "", "AAPL", ""], ["", "MAE", "MSE", "MAE", "MSE"]]
    assert [r[0] for r in rep.rows()] == ["GASF", "QGASF"]
    assert rep.rows()[1][1:] == [0.119, 0.015, 0.1, 0.01]
    assert rep.average_reductions()["mse"] == pytest.approx((53.125 + 75.0) / 2)
    rep.write_reductions_csv(tmp_path / "r.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[1] == ["600519.SH", "39.0", "53.1"]
    md = rep.to_markdown()
    assert "| GASF | 0.195 | 0.032 | 0.200 | 0.040 |" in md


def arm(enc, seed=0, folds="f", windows="w"):
    return {"encoder": enc, "train": {"shuffle_seed": seed}, "folds_digest": folds,
            "windows_digest": windows, "fold_mode": "shuffled", "provenance": {},
            "aggregate": {"mae": 0.1, "mse": 0.01}}


def test_build_report_refuses_mismatch():
    ok = build_report({"s": {"gasf": arm("gasf"), "qgasf": arm("qgasf")}}, ["gasf", "qgasf"])
    assert ok.metrics["s"]["gasf"]["mae"] == 0.1
    with pytest.raises(ValidationError, match="seed"):
        build_report({"s": {"gasf": arm("gasf"), "qgasf": arm("qgasf", seed=1)}}, ["gasf", "qgasf"])
    with pytest.raises(ValidationError, match="splits"):
        build_report({"s": {"gasf": arm("gasf"), "qgasf": arm("qgasf", folds="g")}}, ["gasf", "qgasf"])
    with pytest.raises(ValidationError, match="windows"):
        build_report({"s": {"gasf": arm("gasf"), "qgasf": arm("qgasf", windows="v")}}, ["gasf", "qgasf"])
    with pytest.raises(ValidationError):
        build_report({"s": {"gasf": arm("gasf")}}, ["gasf", "qgasf"])


def test_svg_is_well_formed():
    svg = svg_line_plot({"GASF": [3, 2, 1], "QGASF": [2.5, 2, 1.5]}, "s: train <MSE>", comment="h=1")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2
    assert "<!-- h=1 -->" in svg


def test_svg_flat_series():
    ET.fromstring(svg_line_plot({"a": [1.0, 1.0]}, "flat"))
