"""Report files: JSON summary, coverage CSV, heatmap data and trace archives."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .metrics import CoverageMatrix, MetricsReport, compute_metrics

REPORT_JSON = "report.json"
COVERAGE_CSV = "coverage.csv"
HEATMAP_DAT = "heatmap.dat"
TRACES_JSONL = "traces.jsonl"


class ReportIOError(OSError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror or exc}") from None


def coverage_rows(matrix: CoverageMatrix) -> list[list[str]]:
    """Header plus one row per adversary; cells are 1 (YES), 0 (NO) or blank (not run)."""
    rows = [["adversary"] + list(matrix.principals)]
    for a in matrix.principals:
        row = [a]
        for v in matrix.principals:
            cell = matrix[(a, v)]
            row.append("" if cell is None else str(int(cell.success)))
        rows.append(row)
    return rows


def heatmap_lines(matrix: CoverageMatrix) -> list[str]:
    lines = ["# adversary_index victim_index success confidence"]
    for i, a in enumerate(matrix.principals):
        for j, v in enumerate(matrix.principals):
            cell = matrix[(a, v)]
            if cell is None:
                continue
            conf = "NA" if cell.internal_confidence is None else f"{cell.internal_confidence:.6f}"
            lines.append(f"{i} {j} {int(cell.success)} {conf}")
        lines.append("")  # blank line between scan rows for gnuplot pm3d
    return lines


def export_report(matrix: CoverageMatrix, metrics: MetricsReport, path, extra: dict | None = None,
                  traces: list | None = None) -> dict[str, Path]:
    """Write the report files into directory ``path``; returns what was written."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportIOError(f"cannot create {out}: {exc.strerror or exc}") from None
    doc = dict(extra or {})
    doc["metrics"] = metrics.to_json()
    doc["matrix"] = matrix.to_json()
    files = {
        "json": out / REPORT_JSON,
        "csv": out / COVERAGE_CSV,
        "heatmap": out / HEATMAP_DAT,
    }
    _write(files["json"], _dumps(doc))
    try:
        with open(files["csv"], "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(coverage_rows(matrix))
    except OSError as exc:
        raise ReportIOError(f"cannot write {files['csv']}: {exc.strerror or exc}") from None
    _write(files["heatmap"], "\n".join(heatmap_lines(matrix)) + "\n")
    if traces is not None:
        files["traces"] = out / TRACES_JSONL
        _write(files["traces"], "".join(json.dumps(t, sort_keys=True) + "\n" for t in traces))
    return files


def load_report(path) -> tuple[CoverageMatrix, MetricsReport, dict]:
    """Inverse of :func:`export_report`; ``path`` is the directory or the JSON file."""
    p = Path(path)
    if p.is_dir():
        p = p / REPORT_JSON
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ReportIOError(f"cannot read {p}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise ReportIOError(f"{p} is not a valid report: {exc}") from None
    matrix = CoverageMatrix.from_json(doc["matrix"])
    metrics = MetricsReport(**doc["metrics"])
    return matrix, metrics, doc


def recompute_metrics(path) -> tuple[MetricsReport, MetricsReport]:
    """Stored and recomputed metrics for an exported report."""
    matrix, stored, _ = load_report(path)
    return stored, compute_metrics(matrix, matrix.principals)


def summary_text(metrics: MetricsReport, matrix: CoverageMatrix) -> str:
    q = ("n/a" if metrics.mean_queries is None
         else f"{metrics.mean_queries:.2f} +/- {metrics.std_queries:.2f}")
    diag = matrix.diagonal()
    self_ok = sum(c.success for c in diag.values())
    return "\n".join([
        f"participating principals : {len(matrix.principals)}",
        f"self-authentication      : {self_ok}/{len(diag)}",
        f"P(M)                     : {metrics.p_of_m:.4f}",
        f"victims hit              : {metrics.distinct_victims_hit}",
        f"successful pairs         : {metrics.successful_pairs}/{metrics.attempted_pairs}",
        f"queries to success       : {q}",
        f"queries spent (total)    : {metrics.queries_spent_total}",
    ])
