from .csv_table_writer import CSVTableWriter
from .structured_text_writer import StructuredTextWriter
from .manifest_writer import ManifestWriter

__all__ = [
    'CSVTableWriter',
    'StructuredTextWriter',
    'ManifestWriter',
]
