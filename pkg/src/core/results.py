"""
Result Objects
Plain value objects passed from scenarios to the writers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple


@dataclass(frozen=True)
class Table:
    """
    Rows for one CSV file.

    ``header_lines`` are written as ``# `` comment lines above the column
    header (axis values, caps, units).
    """

    name: str
    columns: Tuple[str, ...]
    rows: Sequence[Sequence[Any]]
    header_lines: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"Table '{self.name}' row {index} has {len(row)} cells, expected {width}"
                )

    @property
    def filename(self) -> str:
        return f"{self.name}.csv"

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Document:
    """Structured-text (JSON) output."""

    name: str
    content: Dict[str, Any]

    @property
    def filename(self) -> str:
        return f"{self.name}.json"


@dataclass
class ScenarioResult:
    """Everything a scenario produced, ready for emission."""

    scenario: str
    tables: List[Table] = field(default_factory=list)
    documents: List[Document] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    validations: List[Dict[str, Any]] = field(default_factory=list)

    def add_table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence[Any]],
                  header_lines: Sequence[str] = ()) -> Table:
        table = Table(name, tuple(columns), list(rows), tuple(header_lines))
        self.tables.append(table)
        return table

    def add_document(self, name: str, content: Dict[str, Any]) -> Document:
        document = Document(name, content)
        self.documents.append(document)
        return document

    def add_validation(self, report: Dict[str, Any]) -> None:
        self.validations.append(report)

    @property
    def is_valid(self) -> bool:
        return all(report.get("valid", False) for report in self.validations)

    @property
    def output_names(self) -> List[str]:
        return [t.filename for t in self.tables] + [d.filename for d in self.documents]


__all__ = ["Table", "Document", "ScenarioResult"]
