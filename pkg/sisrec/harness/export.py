"""CSV and JSON export of Monte Carlo reports"""

import csv
from pathlib import Path

from pydantic import ValidationError as PydanticValidationError

from sisrec.exceptions import ExportError
from sisrec.observability.logging import get_logger
from sisrec.schemas import RiskReport

logger = get_logger(__name__)

CSV_COLUMNS = ("trial", "n", "s", "sigma", "mode", "mse", "converged")


def export_csv(report: RiskReport, path: str | Path) -> None:
    """
    Write one row per trial record.

    Failed trials leave the mse column empty. The wall-clock time is not
    written, so identical configurations produce identical files.

    Raises:
        ExportError: If the file cannot be written
    """
    target = Path(path)
    try:
        with target.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in report.records:
                mse = "" if r.mse is None else repr(r.mse)
                writer.writerow(
                    [r.trial, r.n, r.s, repr(r.sigma), r.mode, mse, str(r.converged).lower()]
                )
    except OSError as e:
        raise ExportError(str(target), e.strerror or str(e)) from e
    logger.info("Report exported", path=str(target), rows=len(report.records), format="csv")


def export_json(report: RiskReport, path: str | Path) -> None:
    """
    Write the full report as JSON.

    Raises:
        ExportError: If the file cannot be written
    """
    target = Path(path)
    try:
        target.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ExportError(str(target), e.strerror or str(e)) from e
    logger.info("Report exported", path=str(target), format="json")


def load_report(path: str | Path) -> RiskReport:
    """
    Read a report written by ``export_json``.

    Raises:
        ExportError: If the file is missing, unreadable or not a valid report
    """
    target = Path(path)
    try:
        text = target.read_text(encoding="utf-8")
    except OSError as e:
        raise ExportError(str(target), e.strerror or str(e)) from e
    try:
        return RiskReport.model_validate_json(text)
    except PydanticValidationError as e:
        raise ExportError(str(target), f"not a valid report: {e.error_count()} errors") from e
