"""
Mode Partition Validation Strategy
Checks a0^2 + |a_CP|^2 = 1 along a mode trace.
"""

import numpy as np

from src.core.base_classes import BaseValidator


class ModePartitionValidationStrategy(BaseValidator):
    """
    Strategy for mode traces; static traces use 1e-9, dynamic ones 1e-6.
    """

    _STATIC_TOLERANCE = 1e-9
    _DYNAMIC_TOLERANCE = 1e-6

    def __init__(self, tolerance: float = _DYNAMIC_TOLERANCE):
        super().__init__("Mode Partition Validator")
        self.__tolerance = tolerance

    # ---------- Public API ----------

    def validate(self, data) -> bool:
        self._reset()

        rules = [
            self._check_not_empty,
            self._check_amplitudes,
            self._check_partition,
        ]

        for rule in rules:
            if not rule(data):
                return False

        self._mark_valid()
        return True

    # ---------- Validation Rules ----------

    def _check_not_empty(self, data) -> bool:
        if len(data) == 0:
            self._add_error("Mode trace is empty")
            return False
        return True

    def _check_amplitudes(self, data) -> bool:
        a0 = np.asarray(data.a0)
        cp = np.asarray(data.cp_magnitude)
        if not (np.all(np.isfinite(a0)) and np.all(np.isfinite(cp))):
            self._add_error("Mode amplitudes contain non-finite values")
            return False
        if np.any(cp < 0.0):
            self._add_error("CP magnitude is negative")
            return False
        return True

    def _check_partition(self, data) -> bool:
        residual = data.norm_residual()
        if residual > self.__tolerance:
            self._add_error(
                f"a0^2 + |a_CP|^2 deviates from 1 by {residual:.3e} "
                f"(tolerance {self.__tolerance:.0e})"
            )
            return False
        return True

    def __str__(self) -> str:
        status = "Valid" if self.is_valid else "Invalid"
        return f"ModePartitionValidationStrategy({status})"
