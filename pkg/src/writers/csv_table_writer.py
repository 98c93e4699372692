"""
CSV Table Writer
Writes a Table as CSV with optional ``#`` header comment lines.
"""

import csv
import io
import logging
from pathlib import Path

from src.core.base_classes import BaseOutputWriter
from src.core.results import Table
from src.utils.helpers import Formatter

logger = logging.getLogger(__name__)


class CSVTableWriter(BaseOutputWriter):
    """
    CSV writer with a stable column order and shortest round-trip floats.
    """

    def __init__(self, output_path: str):
        super().__init__(output_path)
        self._format_name = "CSV"
        self.__rows_written = 0

    @property
    def rows_written(self) -> int:
        return self.__rows_written

    @property
    def format_name(self) -> str:
        return self._format_name

    # ---------- Public API ----------

    def write(self, data: Table) -> bool:
        """
        Write one table.

        Args:
            data: Table to write

        Returns:
            True if successful
        """
        try:
            text = self.render(data)
            self.__ensure_directory()
            with open(self.output_path, "w", encoding=self._encoding, newline="") as f:
                f.write(text)

            self.__rows_written = len(data.rows)
            self._lines_written = text.count("\n")
            self._bytes_written = len(text.encode(self._encoding))
            return True

        except Exception as exc:
            message = f"Write error: {exc}"
            self._record_error(message)
            logger.error("%s (%s)", message, self.output_path)
            return False

    @staticmethod
    def render(table: Table) -> str:
        buffer = io.StringIO()
        for line in table.header_lines:
            buffer.write(f"# {line}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([Formatter.format_cell(cell) for cell in row])
        return buffer.getvalue()

    # ---------- Private Helpers ----------

    def __ensure_directory(self) -> None:
        Path(self.output_path).parent.mkdir(parents=True, exist_ok=True)

    def __str__(self) -> str:
        return (
            f"CSVTableWriter("
            f"path='{self.output_path}', "
            f"rows={self.__rows_written})"
        )
