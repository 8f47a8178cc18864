"""Machine-readable results: a report object plus JSON, CSV, and plot-data emitters.

Reports are value objects: numbers are rounded when the tables are built
(percentages to 2 decimals, MRR to 3), so every emission format agrees and a
JSON round trip reproduces the in-memory report exactly. Timestamps are only
present when the builder was given one; determinism checks compare reports
built without.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ValidationError

Cell = str | int | float | bool | None


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Cell]]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError(
                    f"table {self.name!r}: row width {len(row)} != {len(self.columns)} columns"
                )


@dataclass
class EvalReport:
    meta: dict[str, Any]
    tables: dict[str, Table] = field(default_factory=dict)

    def add(self, table: Table) -> None:
        if table.name in self.tables:
            raise ValidationError(f"duplicate table {table.name!r}")
        self.tables[table.name] = table

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "meta": self.meta,
            "tables": {
                name: {"columns": t.columns, "rows": t.rows}
                for name, t in sorted(self.tables.items())
            },
        }

    @classmethod
    def from_json_dict(cls, payload: Mapping[str, Any]) -> "EvalReport":
        report = cls(meta=dict(payload["meta"]))
        for name, t in payload["tables"].items():
            report.add(Table(name, list(t["columns"]), [list(r) for r in t["rows"]]))
        return report

    def __eq__(self, other: object) -> bool:
        return isinstance(other, EvalReport) and self.to_json_dict() == other.to_json_dict()


def round_pct(value: float) -> float:
    return round(float(value), 2)


def round_mrr(value: float) -> float:
    return round(float(value), 3)


def config_digest(config: Mapping[str, Any]) -> str:
    """Hex digest over the canonical JSON form of the run parameters."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_report(path: str | Path) -> EvalReport:
    with open(path, encoding="utf-8") as fh:
        return EvalReport.from_json_dict(json.load(fh))


def emit(report: EvalReport, fmt: str, path: str | Path) -> list[Path]:
    """Write the report as json (one file), csv, or plotdata (one file per table).

    For csv and plotdata, ``path`` is a directory. Returns the written paths.
    """
    path = Path(path)
    if fmt == "json":
        return [_emit_json(report, path)]
    if fmt == "csv":
        return _emit_csv(report, path)
    if fmt == "plotdata":
        return _emit_plotdata(report, path)
    raise ValidationError(f"unknown report format {fmt!r} (expected json, csv, plotdata)")


def _emit_json(report: EvalReport, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path


def _emit_csv(report: EvalReport, directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in sorted(report.tables.items()):
        out = directory / f"{name}.csv"
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            writer.writerows([_csv_cell(c) for c in row] for row in table.rows)
        written.append(out)
    return written


def _csv_cell(cell: Cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool):
        return "true" if cell else "false"
    return str(cell)


def _emit_plotdata(report: EvalReport, directory: Path) -> list[Path]:
    """Whitespace-delimited columns with a '#' header naming the series.

    Stacked-bar tables (NN1/NN10) get two value columns per row: the bottom
    bar and the increment on top of it.
    """
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in sorted(report.tables.items()):
        out = directory / f"{name}.dat"
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {name}\n")
            if _is_stacked_nn_table(table):
                label_col = "code" if "code" in table.columns else "category"
                li = table.columns.index(label_col)
                n1 = table.columns.index("nn1_ret")
                n10 = table.columns.index("nn10_ret")
                fh.write(f"# columns: {label_col} nn1_ret nn10_minus_nn1\n")
                for row in table.rows:
                    bottom = float(row[n1])  # bottom bar; the stacked bar is the top-10 gain
                    top = round(float(row[n10]) - bottom, 2)
                    fh.write(f"{_plot_label(row[li])} {bottom} {top}\n")
            else:
                fh.write(f"# columns: {' '.join(table.columns)}\n")
                for row in table.rows:
                    fh.write(" ".join(_plot_label(c) for c in row) + "\n")
        written.append(out)
    return written


def _is_stacked_nn_table(table: Table) -> bool:
    return "nn1_ret" in table.columns and "nn10_ret" in table.columns


def _plot_label(cell: Cell) -> str:
    text = _csv_cell(cell)
    return text.replace(" ", "_") if text else "-"
