import logging
from abc import ABC, abstractmethod
from pathlib import Path

import pandas as pd

from app.federation.types import REPORT_COLUMNS, ReportFormat, RoundReport

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "axis",
    "value",
    "final_ma",
    "final_ba",
    "mean_tpr",
    "mean_tnr",
    "informational",
]


class ReportWriter(ABC):
    """Writes round reports as they arrive; the file is valid after every round."""

    suffix = ""

    def __init__(self, out_dir, stem="rounds"):
        self.path = Path(out_dir) / f"{stem}.{self.suffix}"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.reports = []
        self.start()

    def start(self):
        pass

    def __call__(self, report: RoundReport):
        self.reports.append(report)
        self.write(report)

    @abstractmethod
    def write(self, report: RoundReport):
        pass


class CsvReportWriter(ReportWriter):
    suffix = "csv"

    def start(self):
        pd.DataFrame(columns=REPORT_COLUMNS).to_csv(self.path, index=False)

    def write(self, report):
        frame = pd.DataFrame([report.as_row()], columns=REPORT_COLUMNS)
        frame.to_csv(self.path, mode="a", header=False, index=False)


class JsonReportWriter(ReportWriter):
    suffix = "json"

    def start(self):
        self.path.write_text("[]")

    def write(self, report):
        frame = pd.DataFrame([r.as_dict() for r in self.reports])
        frame.to_json(self.path, orient="records", indent=2)


REPORT_WRITERS = {
    ReportFormat.CSV: CsvReportWriter,
    ReportFormat.JSON: JsonReportWriter,
}


def report_writer(fmt, out_dir, stem="rounds") -> ReportWriter:
    writer = REPORT_WRITERS[ReportFormat(fmt)](out_dir, stem)
    logger.info(f"writing round reports to {writer.path}")
    return writer


def write_sweep_table(table: pd.DataFrame, fmt, out_dir, axis) -> Path:
    path = Path(out_dir) / f"sweep_{axis}.{ReportFormat(fmt).value}"
    path.parent.mkdir(parents=True, exist_ok=True)
    table = table[SWEEP_COLUMNS]
    if fmt == ReportFormat.JSON:
        table.to_json(path, orient="records", indent=2)
    else:
        table.to_csv(path, index=False)
    logger.info(f"wrote {len(table)} sweep rows to {path}")
    return path
