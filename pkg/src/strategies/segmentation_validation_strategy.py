"""
Segmentation Validation Strategy
Checks that adiabatic / non-adiabatic regions partition their domain.
"""

from src.core.base_classes import BaseValidator
from src.theory.segmentation import ADIABATIC, NON_ADIABATIC


class SegmentationValidationStrategy(BaseValidator):
    """
    Strategy for RegionSegmentation results.
    """

    _LABELS = (ADIABATIC, NON_ADIABATIC)

    def __init__(self):
        super().__init__("Segmentation Validator")

    # ---------- Public API ----------

    def validate(self, data) -> bool:
        self._reset()

        rules = [
            self._check_not_empty,
            self._check_labels,
            self._check_contiguous,
            self._check_alternating,
        ]

        for rule in rules:
            if not rule(data):
                return False

        self._mark_valid()
        return True

    # ---------- Validation Rules ----------

    def _check_not_empty(self, data) -> bool:
        if len(data.regions) == 0:
            self._add_error("Segmentation has no regions")
            return False
        return True

    def _check_labels(self, data) -> bool:
        for region in data.regions:
            if region.label not in self._LABELS:
                self._add_error(f"Unknown region label '{region.label}'")
                return False
            if region.stop < region.start:
                self._add_error(f"Region [{region.start}, {region.stop}] is reversed")
                return False
        return True

    def _check_contiguous(self, data) -> bool:
        for left, right in zip(data.regions, data.regions[1:]):
            if left.stop != right.start:
                self._add_error(
                    f"Gap or overlap between {left.stop} and {right.start}"
                )
                return False
        return True

    def _check_alternating(self, data) -> bool:
        for left, right in zip(data.regions, data.regions[1:]):
            if left.label == right.label:
                self._add_error(f"Neighbouring regions share label '{left.label}'")
                return False
        return True

    def __str__(self) -> str:
        status = "Valid" if self.is_valid else "Invalid"
        return f"SegmentationValidationStrategy({status})"
