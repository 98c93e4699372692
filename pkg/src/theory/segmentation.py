"""
Region Segmentation
Partition of a tau or omega0 domain into adiabatic and non-adiabatic
intervals by thresholding A.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import InvalidInputError
from src.physics.adiabaticity import (
    ADIABATICITY_CAP,
    DEFAULT_THRESHOLD,
    adiabaticity,
    adiabaticity_trace,
)
from src.physics.cycle import CycleParams

logger = logging.getLogger(__name__)

ADIABATIC = "adiabatic"
NON_ADIABATIC = "non-adiabatic"
DEFAULT_POINTS = 2001


@dataclass(frozen=True)
class Region:
    start: float
    stop: float
    label: str
    min_adiabaticity: float

    @property
    def is_adiabatic(self) -> bool:
        return self.label == ADIABATIC

    def contains(self, value: float) -> bool:
        return self.start <= value <= self.stop


@dataclass(frozen=True)
class RegionSegmentation:
    """
    Ordered intervals covering ``[regions[0].start, regions[-1].stop]``.

    Neighbouring regions share their boundary and always carry
    different labels.
    """

    variable: str
    threshold: float
    regions: Tuple[Region, ...]

    def __len__(self) -> int:
        return len(self.regions)

    def __iter__(self):
        return iter(self.regions)

    @property
    def domain(self) -> Tuple[float, float]:
        return self.regions[0].start, self.regions[-1].stop

    def non_adiabatic(self) -> List[Region]:
        return [region for region in self.regions if not region.is_adiabatic]

    def label_at(self, value: float) -> str:
        """Label of the region holding ``value``; boundaries belong to the left region."""
        for region in self.regions:
            if region.contains(value):
                return region.label
        raise InvalidInputError(f"{self.variable}={value} lies outside {self.domain}")

    def covers(self, first: Any, second: Any) -> np.ndarray:
        """
        Elementwise: does one adiabatic region hold all of [min, max] of the pair?

        A sweep between ``first`` and ``second`` stays above the threshold
        when this holds.
        """
        low = np.minimum(np.asarray(first, dtype=float), np.asarray(second, dtype=float))
        high = np.maximum(np.asarray(first, dtype=float), np.asarray(second, dtype=float))
        inside = np.zeros(low.shape, dtype=bool)
        for region in self.regions:
            if region.is_adiabatic:
                inside |= (low >= region.start) & (high <= region.stop)
        return inside

    def to_document(self) -> Dict[str, Any]:
        return {
            "variable": self.variable,
            "threshold": self.threshold,
            "adiabaticity_cap": ADIABATICITY_CAP,
            "regions": [
                {
                    "start": region.start,
                    "stop": region.stop,
                    "label": region.label,
                    "min_adiabaticity": min(region.min_adiabaticity, ADIABATICITY_CAP),
                }
                for region in self.regions
            ],
        }


def segment_samples(
    points: Sequence[float],
    values: Sequence[float],
    threshold: float = DEFAULT_THRESHOLD,
    variable: str = "omega0",
    domain: Optional[Tuple[float, float]] = None,
) -> RegionSegmentation:
    """
    Segment sampled A values.

    A sample is adiabatic when A > threshold. Region boundaries sit halfway
    between neighbouring samples of different label; the outer regions
    extend to ``domain`` (default: the first and last sample).
    """
    x = np.asarray(points, dtype=float)
    a = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != a.shape or len(x) == 0:
        raise InvalidInputError("points and values must be matching non-empty 1-D arrays")
    if np.any(np.diff(x) <= 0.0):
        raise InvalidInputError("points must be strictly increasing")
    if math.isnan(threshold) or threshold < 0.0:
        raise InvalidInputError(f"threshold must be non-negative, got {threshold}")

    lower, upper = domain if domain is not None else (float(x[0]), float(x[-1]))
    above = np.nan_to_num(a, nan=0.0) > threshold
    edges = np.flatnonzero(above[1:] != above[:-1])

    starts = np.concatenate([[0], edges + 1])
    stops = np.concatenate([edges + 1, [len(x)]])
    regions = []
    for first, last in zip(starts, stops):
        start = lower if first == 0 else 0.5 * (x[first - 1] + x[first])
        stop = upper if last == len(x) else 0.5 * (x[last - 1] + x[last])
        regions.append(Region(
            start=float(start),
            stop=float(stop),
            label=ADIABATIC if above[first] else NON_ADIABATIC,
            min_adiabaticity=float(np.min(a[first:last])),
        ))

    logger.debug("Segmented %d samples into %d regions at A=%g", len(x), len(regions), threshold)
    return RegionSegmentation(variable, float(threshold), tuple(regions))


def segment_regions(
    profile=None,
    timing=None,
    omega0_range: Optional[Tuple[float, float]] = None,
    ramp: float = 0.0,
    te_ratio: Optional[float] = None,
    omega1: float = 1.0,
    threshold: float = DEFAULT_THRESHOLD,
    points: int = DEFAULT_POINTS,
) -> RegionSegmentation:
    """
    Thresholded partition by A, either along a profile or over an omega0 range.

    Args:
        profile: FieldProfile; segments in tau at the cycle centres.
        timing: SequenceTiming for the profile mode.
        omega0_range: (low, high) offset range for the static-ramp mode.
        ramp: Constant ramp rate d(omega0)/d(tau) of the range mode.
        te_ratio: t_E / t_180 of the range mode.
        omega1: Nutation frequency of the range mode.
        threshold: A above which a sample counts as adiabatic.
        points: Samples across the omega0 range.

    Returns:
        RegionSegmentation over tau (profile mode) or omega0.

    Raises:
        InvalidInputError: Neither mode is fully specified.
    """
    if profile is not None:
        if timing is None:
            raise InvalidInputError("timing is required to segment a profile")
        trace = adiabaticity_trace(profile, timing)
        return segment_samples(
            trace.tau, trace.adiabaticity, threshold, "tau",
            domain=(0.0, float(timing.echo_count)),
        )

    if omega0_range is None or te_ratio is None:
        raise InvalidInputError("Either a profile with timing or omega0_range with te_ratio is required")
    if points < 2:
        raise InvalidInputError("points must be at least 2")
    low, high = float(omega0_range[0]), float(omega0_range[1])
    if not high > low:
        raise InvalidInputError(f"omega0 range must be increasing, got ({low}, {high})")

    omega0 = np.linspace(low, high, int(points))
    values = np.asarray(adiabaticity(CycleParams(omega0, omega1, te_ratio, ramp0=ramp)), dtype=float)
    return segment_samples(omega0, np.broadcast_to(values, omega0.shape), threshold, "omega0")


__all__ = [
    "ADIABATIC",
    "NON_ADIABATIC",
    "Region",
    "RegionSegmentation",
    "segment_samples",
    "segment_regions",
]
