"""
Field Profiles
Time-parametrised offset and nutation waveforms w~0(tau), w~1(tau).

tau is measured in echo spacings t_E. Every waveform exposes an exact
integral so free-precession angles need no quadrature. Parameters may be
numpy arrays; a waveform then describes a batch of independent profiles
evaluated at a common tau.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.core.exceptions import InvalidInputError, ProfileRangeError
from src.core.interfaces import IWaveform
from src.physics.cycle import CycleParams

logger = logging.getLogger(__name__)


def _describe_param(value: Any) -> Any:
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value.tolist()


class Constant(IWaveform):
    """w(tau) = level."""

    def __init__(self, level: Any = 1.0) -> None:
        self.__level = np.asarray(level, dtype=float)

    @property
    def level(self) -> np.ndarray:
        return self.__level

    def value(self, tau: Any) -> np.ndarray:
        return self.__level + np.zeros_like(np.asarray(tau, dtype=float))

    def derivative(self, tau: Any) -> np.ndarray:
        return np.zeros(np.broadcast(self.__level, np.asarray(tau)).shape)

    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        return self.__level * (np.asarray(tau_stop) - np.asarray(tau_start))

    def describe(self) -> Dict[str, Any]:
        return {"kind": "constant", "level": _describe_param(self.__level)}


class Linear(IWaveform):
    """w(tau) = start + rate * tau."""

    def __init__(self, rate: Any, start: Any = 0.0) -> None:
        self.__rate = np.asarray(rate, dtype=float)
        self.__start = np.asarray(start, dtype=float)

    @property
    def rate(self) -> np.ndarray:
        return self.__rate

    def value(self, tau: Any) -> np.ndarray:
        return self.__start + self.__rate * np.asarray(tau, dtype=float)

    def derivative(self, tau: Any) -> np.ndarray:
        return self.__rate + np.zeros_like(np.asarray(tau, dtype=float))

    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        a = np.asarray(tau_start, dtype=float)
        b = np.asarray(tau_stop, dtype=float)
        return (b - a) * (self.__start + 0.5 * self.__rate * (a + b))

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "linear",
            "rate": _describe_param(self.__rate),
            "start": _describe_param(self.__start),
        }


class Harmonic(IWaveform):
    """w(tau) = offset + amplitude * sin(2 pi tau / period + phase)."""

    def __init__(
        self,
        amplitude: Any,
        period: Any,
        offset: Any = 0.0,
        phase: Any = 0.0,
    ) -> None:
        self.__amplitude = np.asarray(amplitude, dtype=float)
        self.__period = np.asarray(period, dtype=float)
        if np.any(self.__period <= 0.0):
            raise InvalidInputError("Harmonic period must be positive")
        self.__offset = np.asarray(offset, dtype=float)
        self.__phase = np.asarray(phase, dtype=float)

    @property
    def period(self) -> np.ndarray:
        return self.__period

    def __argument(self, tau: Any) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(tau, dtype=float) / self.__period + self.__phase

    def value(self, tau: Any) -> np.ndarray:
        return self.__offset + self.__amplitude * np.sin(self.__argument(tau))

    def derivative(self, tau: Any) -> np.ndarray:
        k = 2.0 * np.pi / self.__period
        return self.__amplitude * k * np.cos(self.__argument(tau))

    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        a = np.asarray(tau_start, dtype=float)
        b = np.asarray(tau_stop, dtype=float)
        theta_a = self.__argument(a)
        theta_b = self.__argument(b)
        # product form avoids cancellation for long periods
        oscillating = (
            self.__amplitude * self.__period / np.pi
            * np.sin(0.5 * (theta_a + theta_b)) * np.sin(0.5 * (theta_b - theta_a))
        )
        return self.__offset * (b - a) + oscillating

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "harmonic",
            "amplitude": _describe_param(self.__amplitude),
            "period": _describe_param(self.__period),
            "offset": _describe_param(self.__offset),
            "phase": _describe_param(self.__phase),
        }


class BiLinear(IWaveform):
    """
    Excursion from ``start`` to ``peak`` and back at a fixed |rate|.

    The waveform sits at ``start`` before tau = 0 and after the excursion,
    which lasts 2 |peak - start| / rate echo spacings.
    """

    def __init__(self, start: Any, peak: Any, rate: Any) -> None:
        self.__start = np.asarray(start, dtype=float)
        self.__peak = np.asarray(peak, dtype=float)
        self.__rate = np.asarray(rate, dtype=float)
        if np.any(self.__rate <= 0.0):
            raise InvalidInputError("BiLinear rate magnitude must be positive")
        self.__sign = np.sign(self.__peak - self.__start)
        self.__half = np.abs(self.__peak - self.__start) / self.__rate

    @property
    def duration(self) -> np.ndarray:
        """Length of the excursion in echo spacings."""
        return 2.0 * self.__half

    def value(self, tau: Any) -> np.ndarray:
        u = np.asarray(tau, dtype=float)
        w = self.__half
        rising = (u > 0.0) & (u <= w)
        falling = (u > w) & (u < 2.0 * w)
        excursion = np.where(rising, u, np.where(falling, 2.0 * w - u, 0.0))
        return self.__start + self.__sign * self.__rate * excursion

    def derivative(self, tau: Any) -> np.ndarray:
        u = np.asarray(tau, dtype=float)
        w = self.__half
        slope = np.where(
            (u >= 0.0) & (u < w), 1.0, np.where((u >= w) & (u < 2.0 * w), -1.0, 0.0)
        )
        return self.__sign * self.__rate * slope

    def __excursion_integral(self, u: np.ndarray) -> np.ndarray:
        w = self.__half
        u = np.clip(u, 0.0, 2.0 * w)
        rising = 0.5 * np.minimum(u, w) ** 2
        v = np.maximum(u - w, 0.0)
        falling = w * v - 0.5 * v * v
        return rising + falling

    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        a = np.asarray(tau_start, dtype=float)
        b = np.asarray(tau_stop, dtype=float)
        excursion = self.__excursion_integral(b) - self.__excursion_integral(a)
        return self.__start * (b - a) + self.__sign * self.__rate * excursion

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "bilinear",
            "start": _describe_param(self.__start),
            "peak": _describe_param(self.__peak),
            "rate": _describe_param(self.__rate),
        }


class Tabulated(IWaveform):
    """Piecewise-linear interpolation of (tau, w) samples."""

    def __init__(self, tau: Any, values: Any) -> None:
        self.__tau = np.asarray(tau, dtype=float)
        self.__values = np.asarray(values, dtype=float)
        if self.__tau.ndim != 1 or self.__tau.shape != self.__values.shape:
            raise InvalidInputError("Tabulated samples must be matching 1-D arrays")
        if len(self.__tau) < 2 or np.any(np.diff(self.__tau) <= 0.0):
            raise InvalidInputError("Tabulated tau must be strictly increasing with >= 2 samples")
        self.__slopes = np.diff(self.__values) / np.diff(self.__tau)
        segment_areas = 0.5 * (self.__values[1:] + self.__values[:-1]) * np.diff(self.__tau)
        self.__cumulative = np.concatenate([[0.0], np.cumsum(segment_areas)])

    @property
    def domain(self) -> Tuple[float, float]:
        return (float(self.__tau[0]), float(self.__tau[-1]))

    def __segment(self, tau: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.__tau, tau, side="right") - 1
        return np.clip(index, 0, len(self.__slopes) - 1)

    def value(self, tau: Any) -> np.ndarray:
        return np.interp(np.asarray(tau, dtype=float), self.__tau, self.__values)

    def derivative(self, tau: Any) -> np.ndarray:
        return self.__slopes[self.__segment(np.asarray(tau, dtype=float))]

    def __antiderivative(self, tau: np.ndarray) -> np.ndarray:
        i = self.__segment(tau)
        dt = tau - self.__tau[i]
        return self.__cumulative[i] + self.__values[i] * dt + 0.5 * self.__slopes[i] * dt * dt

    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        a = np.asarray(tau_start, dtype=float)
        b = np.asarray(tau_stop, dtype=float)
        return self.__antiderivative(b) - self.__antiderivative(a)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "tabulated",
            "tau": self.__tau.tolist(),
            "values": self.__values.tolist(),
        }


class FieldProfile:
    """
    Pair of waveforms driving one CPMG run.

    omega1 defaults to the nominal amplitude (constant 1).
    """

    def __init__(self, omega0: IWaveform, omega1: Optional[IWaveform] = None) -> None:
        self.__omega0 = omega0
        self.__omega1 = omega1 if omega1 is not None else Constant(1.0)

    # ---------- Constructors ----------

    @classmethod
    def constant(cls, omega0: Any, omega1: Any = 1.0) -> "FieldProfile":
        return cls(Constant(omega0), Constant(omega1))

    @classmethod
    def linear(cls, rate: Any, start: Any = 0.0, omega1: Any = 1.0) -> "FieldProfile":
        return cls(Linear(rate, start), Constant(omega1))

    @classmethod
    def harmonic(cls, amplitude: Any, period: Any, omega1: Any = 1.0) -> "FieldProfile":
        return cls(Harmonic(amplitude, period), Constant(omega1))

    @classmethod
    def bilinear(cls, start: Any, peak: Any, rate: Any, omega1: Any = 1.0) -> "FieldProfile":
        return cls(BiLinear(start, peak, rate), Constant(omega1))

    @classmethod
    def tabulated(cls, tau, omega0, omega1=None) -> "FieldProfile":
        w1 = Tabulated(tau, omega1) if omega1 is not None else Constant(1.0)
        return cls(Tabulated(tau, omega0), w1)

    # ---------- Properties ----------

    @property
    def omega0(self) -> IWaveform:
        return self.__omega0

    @property
    def omega1(self) -> IWaveform:
        return self.__omega1

    @property
    def domain(self) -> Tuple[float, float]:
        lo0, hi0 = self.__omega0.domain
        lo1, hi1 = self.__omega1.domain
        return (max(lo0, lo1), min(hi0, hi1))

    # ---------- Evaluation ----------

    def check_range(self, tau_start: float, tau_stop: float) -> None:
        """
        Raises:
            ProfileRangeError: If [tau_start, tau_stop] leaves the domain.
        """
        lo, hi = self.domain
        if tau_start < lo or tau_stop > hi:
            raise ProfileRangeError(
                f"Profile defined on [{lo}, {hi}] but run needs "
                f"[{tau_start}, {tau_stop}]"
            )

    def cycle_params(
        self,
        tau: Any,
        te_ratio: float,
        pulse_phase: float = 0.0,
    ) -> CycleParams:
        """Instantaneous cycle parameters (field and ramps) at ``tau``."""
        omega1 = self.__omega1.value(tau)
        if np.any(omega1 < 0.0):
            raise ProfileRangeError("omega1 profile becomes negative")
        return CycleParams(
            omega0_norm=self.__omega0.value(tau),
            omega1_norm=omega1,
            te_ratio=te_ratio,
            pulse_phase=pulse_phase,
            ramp0=self.__omega0.derivative(tau),
            ramp1=self.__omega1.derivative(tau),
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "omega0": self.__omega0.describe(),
            "omega1": self.__omega1.describe(),
        }

    def __str__(self) -> str:
        return (
            f"FieldProfile(omega0={self.__omega0.describe()['kind']}, "
            f"omega1={self.__omega1.describe()['kind']})"
        )


__all__ = [
    "Constant",
    "Linear",
    "Harmonic",
    "BiLinear",
    "Tabulated",
    "FieldProfile",
]
