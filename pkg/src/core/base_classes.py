"""
Core Base Classes
Defines abstract base classes for solvers, writers, and validators.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, List, Optional

logger = logging.getLogger(__name__)


class BaseSolver(ABC):
    """
    One computation over a field profile and a sequence timing.

    Subclasses implement ``_run``; ``solve`` forwards its arguments, logs
    the run and keeps the last result.
    """

    def __init__(self, profile: Any, timing: Any) -> None:
        self._profile = profile
        self._timing = timing
        self._result: Optional[Any] = None

    @abstractmethod
    def _run(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def solve(self, *args: Any, **kwargs: Any) -> Any:
        logger.debug("%s over %d echoes", self, self._timing.echo_count)
        self._result = self._run(*args, **kwargs)
        return self._result

    @property
    def profile(self) -> Any:
        return self._profile

    @property
    def timing(self) -> Any:
        return self._timing

    @property
    def result(self) -> Optional[Any]:
        """Output of the last ``solve`` call, None before the first."""
        return self._result

    def __str__(self) -> str:
        return f"{self.__class__.__name__}(profile={self._profile}, te_ratio={self._timing.te_ratio:g})"


class BaseOutputWriter(ABC):
    """
    Abstract base class for output writers.
    """

    def __init__(self, output_path: str) -> None:
        self.__output_path = output_path
        self._lines_written = 0
        self._bytes_written = 0
        self._write_errors: List[str] = []
        self._encoding = "utf-8"

    @abstractmethod
    def write(self, data: Any) -> bool:
        """Write data to output."""
        raise NotImplementedError

    def _record_error(self, message: str) -> None:
        self._write_errors.append(message)

    @property
    def output_path(self) -> str:
        return self.__output_path

    @property
    def lines_written(self) -> int:
        return self._lines_written

    @property
    def bytes_written(self) -> int:
        return self._bytes_written

    @property
    def write_errors(self) -> List[str]:
        return self._write_errors.copy()

    def __str__(self) -> str:
        return (
            f"{self.__class__.__name__}"
            f"(path={self.__output_path})"
        )


class BaseValidator(ABC):
    """
    Abstract base class for validators.
    Implements Strategy pattern foundation.
    """

    def __init__(self, name: str) -> None:
        self.__name = name
        self._errors: List[str] = []
        self._is_valid = False

    @abstractmethod
    def validate(self, data: Any) -> bool:
        """Validate data."""
        raise NotImplementedError

    def _add_error(self, message: str) -> None:
        self._errors.append(message)

    def _reset(self) -> None:
        self._errors.clear()
        self._is_valid = False

    def _mark_valid(self) -> None:
        self._is_valid = True

    def get_validation_report(self) -> dict:
        return {
            "validator": self.__name,
            "valid": self._is_valid,
            "errors": self._errors.copy(),
        }

    @property
    def validator_name(self) -> str:
        return self.__name

    @property
    def is_valid(self) -> bool:
        return self._is_valid

    @property
    def error_count(self) -> int:
        return len(self._errors)

    @property
    def validation_errors(self) -> List[str]:
        return self._errors.copy()

    def __str__(self) -> str:
        status = "VALID" if self._is_valid else "INVALID"
        return f"{self.__class__.__name__}({status})"
