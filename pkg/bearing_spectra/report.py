"""
Classification-rate reports: CSV and aligned-text emission, re-parsing,
confusion matrices and the PCA/2DPCA time comparison.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from bearing_spectra.constants import REPORT_COLUMNS
from bearing_spectra.enums import FaultType, FeatureKind, LoadCondition, ReportFormat
from bearing_spectra.exceptions import DataError
from bearing_spectra.utils import DEFAULT_ENCODING

LOGGER = logging.getLogger(__name__)

SWEEP_COLUMNS = ["parameter", "value"]
RATE_FORMAT = "%.2f"


@dataclass(frozen=True, eq=False)
class ReportEntry:
    """
    Averaged result of one (test, feature kind, n, testing load) cell.
    ``seconds`` is the extraction-plus-classification time summed over
    repetitions; the fit time of a repetition is split evenly over its
    testing loads.
    """

    test_id: int
    feature_kind: FeatureKind
    n: int
    testing_load: LoadCondition
    mean_rate_pct: float
    stddev_pct: float
    seconds: Optional[float] = None
    training_load: Optional[LoadCondition] = None
    fault_size: Optional[float] = None
    rates: Tuple[float, ...] = ()
    confusion: Optional[np.ndarray] = None
    classes: Tuple[FaultType, ...] = ()
    sweep_parameter: Optional[str] = None
    sweep_value: Optional[float] = None


@dataclass
class Report:
    """
    Ordered collection of report entries.
    """

    entries: List[ReportEntry] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def add(self, entry: ReportEntry):
        self.entries.append(entry)

    def extend(self, other: "Report"):
        self.entries.extend(other.entries)

    def to_frame(self) -> pd.DataFrame:
        """One row per entry with the CSV columns (plus sweep columns if any entry has them)."""
        rows = [
            {
                "test_id": entry.test_id,
                "feature_kind": entry.feature_kind.value,
                "n": entry.n,
                "testing_load": entry.testing_load.index,
                "mean_rate_pct": entry.mean_rate_pct,
                "stddev_pct": entry.stddev_pct,
                "seconds": np.nan if entry.seconds is None else entry.seconds,
                "parameter": entry.sweep_parameter,
                "value": entry.sweep_value,
            }
            for entry in self.entries
        ]
        columns = list(REPORT_COLUMNS)
        if any(entry.sweep_parameter for entry in self.entries):
            columns += SWEEP_COLUMNS
        return pd.DataFrame(rows, columns=columns)


def _row_label(entry: ReportEntry) -> str:
    if entry.sweep_parameter:
        return f"{entry.sweep_parameter}={entry.sweep_value:g}"
    return str(entry.n)


def format_table(report: Report) -> str:
    """
    Aligned text: one block per feature kind, one line per (test, n) with a
    ``LoadX(rate)`` cell per testing load and the summed time.
    """
    lines: List[str] = []
    kinds = list(dict.fromkeys(entry.feature_kind for entry in report.entries))
    for kind in kinds:
        entries = [entry for entry in report.entries if entry.feature_kind is kind]
        groups = {}
        for entry in entries:
            groups.setdefault((entry.test_id, _row_label(entry)), []).append(entry)
        width = max(len(cells) for cells in groups.values())
        header = ["# of test", "n"] + [f"Test{i + 1}(%)" for i in range(width)] + ["T(s)"]
        rows = []
        previous_test = None
        for (test_id, label), cells in groups.items():
            cells = sorted(cells, key=lambda entry: entry.testing_load.index)
            timed = [entry.seconds for entry in cells if entry.seconds is not None]
            rows.append(
                [str(test_id) if test_id != previous_test else "", label]
                + [f"{entry.testing_load}({entry.mean_rate_pct:.2f})" for entry in cells]
                + [""] * (width - len(cells))
                + [f"{sum(timed):.2f}" if timed else "-"]
            )
            previous_test = test_id
        widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
        lines.append(f"Feature: {kind.value}")
        for row in [header] + rows:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        lines.append("")
    return "\n".join(lines)


def format_confusion(entry: ReportEntry) -> str:
    """
    Confusion matrix summed over repetitions: true class per row, predicted
    class per column.
    """
    if entry.confusion is None:
        raise DataError("Report entry carries no confusion matrix")
    names = [fault_type.value for fault_type in entry.classes]
    frame = pd.DataFrame(entry.confusion, index=names, columns=names)
    frame.index.name = "true\\predicted"
    return (
        f"Test {entry.test_id} {entry.feature_kind.value} n={entry.n} {entry.testing_load}: "
        f"{entry.mean_rate_pct:.2f}%\n{frame.to_string()}"
    )


def timing_comparison(report: Report) -> pd.DataFrame:
    """
    T_pca, T_2dpca and their difference per (test, testing load, n).
    """
    frame = report.to_frame()
    frame = frame[frame["feature_kind"].isin([FeatureKind.PCA_VECTOR.value, FeatureKind.EIGEN_IMAGE.value])]
    if frame.empty:
        return pd.DataFrame(columns=["test_id", "testing_load", "n", "t_pca", "t_2dpca", "delta_t"])
    table = frame.pivot_table(
        index=["test_id", "testing_load", "n"], columns="feature_kind", values="seconds", aggfunc="sum"
    ).reset_index()
    table = table.rename(columns={FeatureKind.PCA_VECTOR.value: "t_pca", FeatureKind.EIGEN_IMAGE.value: "t_2dpca"})
    for column in ("t_pca", "t_2dpca"):
        if column not in table:
            table[column] = np.nan
    table["delta_t"] = table["t_pca"] - table["t_2dpca"]
    table.columns.name = None
    return table[["test_id", "testing_load", "n", "t_pca", "t_2dpca", "delta_t"]]


def emit_report(report: Report, path: Union[str, Path], fmt: ReportFormat = ReportFormat.CSV) -> Path:
    """
    Write the report as CSV (rates and seconds with two decimals, missing
    times left empty) or as aligned text.
    """
    path = Path(path)
    try:
        if fmt is ReportFormat.CSV:
            report.to_frame().to_csv(path, index=False, float_format=RATE_FORMAT, na_rep="", lineterminator="\n")
        else:
            path.write_text(format_table(report), encoding=DEFAULT_ENCODING)
    except OSError as error:
        raise DataError(f"Cannot write report {path}: {error}") from error
    LOGGER.info("Wrote %d report entries to %s", len(report), path)
    return path


def read_report(path: Union[str, Path]) -> Report:
    """
    Parse a CSV written by :func:`emit_report`. Per-repetition rates and
    confusion matrices are not part of the CSV and come back empty.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Report not found: {path}")
    try:
        frame = pd.read_csv(path, keep_default_na=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise DataError(f"Cannot parse report {path}: {error}") from error
    missing = [column for column in REPORT_COLUMNS if column not in frame.columns]
    if missing:
        raise DataError(f"Report {path} lacks columns {missing}")
    report = Report()
    for row in frame.itertuples(index=False):
        sweep = "parameter" in frame.columns and isinstance(row.parameter, str)
        report.add(
            ReportEntry(
                test_id=int(row.test_id),
                feature_kind=FeatureKind(str(row.feature_kind)),
                n=int(row.n),
                testing_load=LoadCondition(int(row.testing_load)),
                mean_rate_pct=float(row.mean_rate_pct),
                stddev_pct=float(row.stddev_pct),
                seconds=None if pd.isna(row.seconds) else float(row.seconds),
                sweep_parameter=row.parameter if sweep else None,
                sweep_value=float(row.value) if sweep else None,
            )
        )
    return report
