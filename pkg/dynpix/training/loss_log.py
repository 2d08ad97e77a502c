import csv
from pathlib import Path

from core.models.utility_models import LOSS_CSV_COLUMNS
from core.models.utility_models import LossRecord


class LossCsvWriter:
    """Appends one row per iteration and flushes so a crashed run keeps its trajectory."""

    def __init__(self, path: Path | str, history: list[LossRecord] | None = None):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._file)
        self._writer.writerow(LOSS_CSV_COLUMNS)
        for record in history or []:
            self._writer.writerow(record.csv_row())
        self._file.flush()

    def write(self, record: LossRecord) -> None:
        self._writer.writerow(record.csv_row())
        self._file.flush()

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "LossCsvWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_loss_csv(path: Path | str) -> list[LossRecord]:
    with open(path, newline="", encoding="utf-8") as f:
        return [LossRecord.from_csv_row(row) for row in csv.DictReader(f)]
