"""
Exceptions Module
Error hierarchy shared by the physics, theory and application layers.
"""

from typing import List, Sequence


class SpinDynamicsError(Exception):
    """Root of all errors raised by this package."""


class InvalidInputError(SpinDynamicsError, ValueError):
    """A precondition on an argument was violated."""


class DegenerateAxisError(SpinDynamicsError):
    """
    The rotation axis was requested at a unity propagator.

    The axis of an identity rotation is undefined; callers either supply a
    carried-over axis or handle this error.
    """

    def __init__(self, message: str, point: Sequence[float] = ()) -> None:
        super().__init__(message)
        self.__point = tuple(float(x) for x in point)

    @property
    def point(self) -> tuple:
        return self.__point


class ProfileRangeError(SpinDynamicsError):
    """A field profile is undefined on the time range a run needs."""


class ConfigError(SpinDynamicsError):
    """
    Configuration rejected before any compute.

    Carries one message per offending field, formatted as
    ``path.to.field: reason``.
    """

    def __init__(self, messages: Sequence[str]) -> None:
        self.__messages = list(messages)
        super().__init__("; ".join(self.__messages))

    @property
    def messages(self) -> List[str]:
        return self.__messages.copy()


class OutputError(SpinDynamicsError):
    """An output file could not be written."""


__all__ = [
    "SpinDynamicsError",
    "InvalidInputError",
    "DegenerateAxisError",
    "ProfileRangeError",
    "ConfigError",
    "OutputError",
]
