"""
Structured Text Writer
Writes documents (segmentations, summaries, point lists) as indented JSON.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

from src.core.base_classes import BaseOutputWriter
from src.core.results import Document
from src.utils.helpers import to_builtin

logger = logging.getLogger(__name__)


class StructuredTextWriter(BaseOutputWriter):
    """
    JSON writer. Keys keep insertion order; non-finite floats are written
    as the strings ``inf`` / ``-inf`` / ``nan``.
    """

    def __init__(self, output_path: str):
        super().__init__(output_path)
        self._format_name = "JSON"
        self._indent = 2
        self._ensure_ascii = False

    @property
    def format_name(self) -> str:
        return self._format_name

    def write(self, data: Any) -> bool:
        """
        Write a Document (or a plain mapping).

        Returns:
            True if successful
        """
        try:
            content = data.content if isinstance(data, Document) else data
            text = self.render(content, self._indent, self._ensure_ascii)
            self.__ensure_directory()
            with open(self.output_path, "w", encoding=self._encoding) as f:
                f.write(text)

            self._lines_written = text.count("\n")
            self._bytes_written = len(text.encode(self._encoding))
            return True

        except Exception as exc:
            message = f"Write error: {exc}"
            self._record_error(message)
            logger.error("%s (%s)", message, self.output_path)
            return False

    @staticmethod
    def render(content: Dict[str, Any], indent: int = 2, ensure_ascii: bool = False) -> str:
        return json.dumps(
            to_builtin(content),
            indent=indent,
            ensure_ascii=ensure_ascii,
            allow_nan=False,
        ) + "\n"

    def __ensure_directory(self) -> None:
        Path(self.output_path).parent.mkdir(parents=True, exist_ok=True)
