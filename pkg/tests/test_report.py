from __future__ import annotations

import json

import pytest

from nbrkit import EvalReport, Table, config_digest, emit, load_report
from nbrkit.errors import ValidationError


def _report():
    report = EvalReport(meta={"corpus": "demo", "model": "hash3-64", "config_digest": "abc"})
    report.add(
        Table(
            "task1",
            ["dataset", "model", "MRR", "T100"],
            [["demo", "model-a", 0.596, 90.5], ["demo", "model-b", 0.143, 25.1]],
        )
    )
    report.add(
        Table(
            "nn_ret_by_category",
            ["category", "queries", "nn1_ret", "nn10_ret"],
            [["LL-HS", 100, 71.0, 80.5], ["LO-DS", 100, 12.0, 35.5]],
        )
    )
    return report


class TestEmit:
    def test_csv_shape(self, tmp_path):
        files = emit(_report(), "csv", tmp_path / "csv")
        task_csv = next(p for p in files if p.name == "task1.csv")
        lines = task_csv.read_text().splitlines()
        assert lines[0] == "dataset,model,MRR,T100"
        assert len(lines) == 3  # header + 2 data rows

    def test_emit_twice_byte_identical(self, tmp_path):
        report = _report()
        emit(report, "json", tmp_path / "a.json")
        emit(report, "json", tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        emit(report, "csv", tmp_path / "c1")
        emit(report, "csv", tmp_path / "c2")
        assert (tmp_path / "c1/task1.csv").read_bytes() == (tmp_path / "c2/task1.csv").read_bytes()

    def test_plotdata_stacked_bars(self, tmp_path):
        files = emit(_report(), "plotdata", tmp_path / "plot")
        dat = next(p for p in files if p.name == "nn_ret_by_category.dat")
        lines = dat.read_text().splitlines()
        assert lines[0].startswith("#")
        assert "nn10_minus_nn1" in lines[1]
        cols = lines[2].split()
        assert cols[0] == "LL-HS"
        assert float(cols[1]) == 71.0
        assert float(cols[2]) == pytest.approx(9.5)  # stacked increment

    def test_plotdata_generic_columns(self, tmp_path):
        files = emit(_report(), "plotdata", tmp_path / "plot")
        dat = next(p for p in files if p.name == "task1.dat")
        lines = dat.read_text().splitlines()
        assert lines[1] == "# columns: dataset model MRR T100"
        assert lines[2].split() == ["demo", "model-a", "0.596", "90.5"]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValidationError):
            emit(_report(), "xml", tmp_path)


class TestRoundTrip:
    def test_json_reloads_equal(self, tmp_path):
        report = _report()
        path = tmp_path / "r.json"
        emit(report, "json", path)
        assert load_report(path) == report

    def test_json_is_sorted_and_stable(self, tmp_path):
        path = tmp_path / "r.json"
        emit(_report(), "json", path)
        payload = json.loads(path.read_text())
        assert list(payload) == ["meta", "tables"]
        assert list(payload["tables"]) == sorted(payload["tables"])


class TestTable:
    def test_row_width_checked(self):
        with pytest.raises(ValidationError):
            Table("t", ["a", "b"], [[1]])

    def test_duplicate_table_rejected(self):
        report = _report()
        with pytest.raises(ValidationError):
            report.add(Table("task1", ["a"], []))


class TestConfigDigest:
    def test_changes_iff_parameter_changes(self):
        base = {"seed": 7, "codes": ["T_ARot"], "norm": "l2"}
        same = {"norm": "l2", "seed": 7, "codes": ["T_ARot"]}  # key order irrelevant
        assert config_digest(base) == config_digest(same)
        assert config_digest(base) != config_digest({**base, "seed": 8})
        assert config_digest(base) != config_digest({**base, "codes": ["T_AShuff"]})

    def test_digest_is_process_independent(self):
        # frozen value: the digest must not involve any salted hash
        assert config_digest({"a": 1}) == (
            "015abd7f5cc57a2dd94b7590f04ad8084273905ee33ec5cebeae62276a97f862"
        )
