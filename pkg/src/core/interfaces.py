"""
Interfaces Module
Abstract interfaces for waveforms and scenarios.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple

import numpy as np


# -------------------------
# ABSTRACT INTERFACES
# -------------------------

class IWaveform(ABC):
    """
    Interface for a time-parametrised normalised frequency w(τ).

    τ is measured in echo spacings. Parameters may be numpy arrays, in which
    case every method broadcasts and describes a batch of waveforms.
    """

    @abstractmethod
    def value(self, tau: Any) -> np.ndarray:
        """Return w(τ)."""
        raise NotImplementedError

    @abstractmethod
    def derivative(self, tau: Any) -> np.ndarray:
        """Return dw/dτ."""
        raise NotImplementedError

    @abstractmethod
    def integral(self, tau_start: Any, tau_stop: Any) -> np.ndarray:
        """Return the exact integral of w over [tau_start, tau_stop]."""
        raise NotImplementedError

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Return a JSON-ready description for run manifests."""
        raise NotImplementedError

    @property
    def domain(self) -> Tuple[float, float]:
        """Closed τ interval on which the waveform is defined."""
        return (-np.inf, np.inf)


class IScenario(ABC):
    """Interface for canned experiments run by the orchestrator."""

    @abstractmethod
    def run(self) -> Any:
        """Execute the experiment and return a ScenarioResult."""
        raise NotImplementedError

    @abstractmethod
    def get_scenario_name(self) -> str:
        """Return the registered scenario name."""
        raise NotImplementedError


__all__ = [
    "IWaveform",
    "IScenario",
]
