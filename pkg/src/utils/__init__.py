from .helpers import (
    FileManager,
    StatisticsCalculator,
    Formatter,
    to_builtin
)

__all__ = [
    'FileManager',
    'StatisticsCalculator',
    'Formatter',
    'to_builtin'
]
