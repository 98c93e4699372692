"""
Manifest Writer
Writes the run manifest: resolved config, tool version, timings,
validation reports and a checksum for every output file.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

from src import __version__
from src.core.base_classes import BaseOutputWriter
from src.utils.helpers import FileManager, to_builtin

logger = logging.getLogger(__name__)


class ManifestWriter(BaseOutputWriter):
    """
    Run manifest writer (JSON).

    Must be used after every other output is on disk; the listed files are
    hashed at write time.
    """

    def __init__(self, output_path: str):
        super().__init__(output_path)
        self.__manifest: Dict[str, Any] = {}
        self._format_name = "JSON"
        self._indent = 2

    # -------------------- PROPERTIES --------------------

    @property
    def manifest(self) -> Dict[str, Any]:
        return dict(self.__manifest)

    # -------------------- PUBLIC API --------------------

    def write(self, data: Dict[str, Any]) -> bool:
        """
        Write the manifest.

        Args:
            data: Must contain ``outputs`` (paths relative to the manifest
                directory); other keys (config, validation, wall_clock_s,
                scenario) are copied through.

        Returns:
            True if successful, False otherwise
        """
        try:
            enhanced = self.__enhance_report(data)
            text = json.dumps(to_builtin(enhanced), indent=self._indent, allow_nan=False) + "\n"
            Path(self.output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(self.output_path, "w", encoding=self._encoding) as f:
                f.write(text)

            self.__manifest = enhanced
            self._lines_written = text.count("\n")
            self._bytes_written = len(text.encode(self._encoding))
            return True

        except Exception as exc:
            message = f"Error writing manifest: {exc}"
            self._record_error(message)
            logger.error(message)
            return False

    # -------------------- PRIVATE HELPERS --------------------

    def __enhance_report(self, data: Dict[str, Any]) -> Dict[str, Any]:
        enhanced = {key: value for key, value in data.items() if key != "outputs"}
        enhanced["tool_version"] = __version__
        enhanced["generated_at"] = datetime.now().isoformat()
        enhanced["outputs"] = self.__describe_outputs(data.get("outputs", []))
        return enhanced

    def __describe_outputs(self, names: List[str]) -> List[Dict[str, Any]]:
        root = Path(self.output_path).parent
        described = []
        for name in sorted(names):
            path = root / name
            described.append({
                "file": name,
                "sha256": FileManager.sha256(str(path)),
                "bytes": FileManager.file_size(str(path)),
            })
        return described
