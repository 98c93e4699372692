"""
Utility Helpers Module
Small static helpers shared by the writers, the orchestrator and the CLI.
"""
import hashlib
import math
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
import yaml


class FileManager:
    """
    File operations used around output emission and config loading.
    """

    @staticmethod
    def sha256(filepath: str) -> str:
        """
        Hex SHA-256 digest of a file.

        Args:
            filepath: File to hash

        Returns:
            Lower-case hex digest
        """
        digest = hashlib.sha256()
        with open(filepath, 'rb') as f:
            for chunk in iter(lambda: f.read(1 << 16), b''):
                digest.update(chunk)
        return digest.hexdigest()

    @staticmethod
    def file_size(filepath: str) -> int:
        return Path(filepath).stat().st_size

    @staticmethod
    def load_yaml(filepath: str) -> Dict[str, Any]:
        """
        Load a YAML (or JSON) mapping.

        Args:
            filepath: Path to the file

        Returns:
            Parsed mapping; an empty file gives an empty dict

        Raises:
            OSError: File cannot be read
            yaml.YAMLError: File is not valid YAML
            TypeError: Top level is not a mapping
        """
        with open(filepath, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise TypeError(f"{filepath}: top level must be a mapping")
        return data


class StatisticsCalculator:
    """
    Summary statistics over numeric traces.
    """

    @staticmethod
    def rms(values: Sequence[float]) -> float:
        """Root mean square; 0.0 for an empty sequence."""
        array = np.asarray(values, dtype=float)
        if array.size == 0:
            return 0.0
        return float(np.sqrt(np.mean(array * array)))

    @staticmethod
    def rms_difference(first: Sequence[float], second: Sequence[float]) -> float:
        return StatisticsCalculator.rms(np.asarray(first, dtype=float) - np.asarray(second, dtype=float))

    @staticmethod
    def max_abs_difference(first: Sequence[float], second: Sequence[float]) -> float:
        diff = np.abs(np.asarray(first, dtype=float) - np.asarray(second, dtype=float))
        return float(np.max(diff)) if diff.size else 0.0


class Formatter:
    """
    Output formatting utilities.
    """

    @staticmethod
    def format_float(value: Any) -> str:
        """
        Shortest round-trip text of a number.

        Integers stay integers; non-finite values are written as
        ``inf``, ``-inf`` and ``nan``.
        """
        if isinstance(value, (bool, np.bool_)):
            return str(int(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        number = float(value)
        if math.isnan(number):
            return 'nan'
        if math.isinf(number):
            return 'inf' if number > 0 else '-inf'
        return repr(number)

    @staticmethod
    def format_cell(value: Any) -> str:
        if isinstance(value, str):
            return value
        return Formatter.format_float(value)

    @staticmethod
    def format_number(number: int) -> str:
        """
        Format number with thousand separators.

        Args:
            number: Number to format

        Returns:
            Formatted string
        """
        return f"{number:,}"

    @staticmethod
    def format_file_size(bytes_count: float) -> str:
        """
        Format file size in human-readable format.

        Args:
            bytes_count: Size in bytes

        Returns:
            Formatted size string
        """
        for unit in ['B', 'KB', 'MB', 'GB']:
            if bytes_count < 1024.0:
                return f"{bytes_count:.2f} {unit}"
            bytes_count /= 1024.0
        return f"{bytes_count:.2f} TB"

    @staticmethod
    def format_duration(seconds: float) -> str:
        """
        Format duration in human-readable format.

        Args:
            seconds: Duration in seconds

        Returns:
            Formatted duration string
        """
        if seconds < 60:
            return f"{seconds:.2f}s"
        elif seconds < 3600:
            minutes = seconds / 60
            return f"{minutes:.2f}m"
        else:
            hours = seconds / 3600
            return f"{hours:.2f}h"


def to_builtin(value: Any) -> Any:
    """
    Convert numpy scalars and arrays (also nested in dicts, lists and
    tuples) into plain Python values; non-finite floats become strings.
    """
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else Formatter.format_float(number)
    return value
