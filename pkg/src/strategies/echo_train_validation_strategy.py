"""
Echo Train Validation Strategy
Checks shape, finiteness and norm conservation of a simulated echo train.
"""

import numpy as np

from src.core.base_classes import BaseValidator


class EchoTrainValidationStrategy(BaseValidator):
    """
    Strategy Pattern implementation for echo-train validation.
    """

    _NORM_TOLERANCE = 1e-9

    def __init__(self, tolerance: float = _NORM_TOLERANCE, expected_norm: float = 1.0):
        super().__init__("Echo Train Validator")
        self.__tolerance = tolerance
        self.__expected_norm = expected_norm

    # ---------- Public API ----------

    def validate(self, data) -> bool:
        """
        Validate an EchoTrain using independent rules.
        """
        self._reset()

        rules = [
            self._check_shape,
            self._check_finite,
            self._check_norm,
        ]

        for rule in rules:
            if not rule(data):
                return False

        self._mark_valid()
        return True

    # ---------- Validation Rules ----------

    def _check_shape(self, data) -> bool:
        m = np.asarray(data.magnetization)
        if m.ndim != 2 or m.shape[1] != 3 or m.shape[0] != len(data.tau):
            self._add_error(f"Magnetization has shape {m.shape} for {len(data.tau)} echoes")
            return False
        if m.shape[0] < 2:
            self._add_error("Echo train holds no echo after excitation")
            return False
        return True

    def _check_finite(self, data) -> bool:
        if not np.all(np.isfinite(data.magnetization)):
            self._add_error("Magnetization contains non-finite values")
            return False
        return True

    def _check_norm(self, data) -> bool:
        drift = float(np.max(np.abs(data.norms() - self.__expected_norm)))
        if drift > self.__tolerance:
            self._add_error(
                f"|M| drifts by {drift:.3e} (tolerance {self.__tolerance:.0e})"
            )
            return False
        return True

    def __str__(self) -> str:
        status = "Valid" if self.is_valid else "Invalid"
        return f"EchoTrainValidationStrategy({status})"
