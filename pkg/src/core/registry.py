"""
Central registry loader.
Ensures all waveforms, writers, validators and scenarios are registered.
"""

from .factories import ScenarioFactory, ValidatorFactory, WaveformFactory, WriterFactory

# Waveforms
from src.physics.profiles import BiLinear, Constant, Harmonic, Linear, Tabulated

# Writers
from src.writers.csv_table_writer import CSVTableWriter
from src.writers.structured_text_writer import StructuredTextWriter
from src.writers.manifest_writer import ManifestWriter

# Validators
from src.strategies.echo_train_validation_strategy import EchoTrainValidationStrategy
from src.strategies.mode_partition_validation_strategy import ModePartitionValidationStrategy
from src.strategies.segmentation_validation_strategy import SegmentationValidationStrategy

# Scenarios
from src.app.scenarios import SCENARIOS


WaveformFactory.register_waveform("constant", Constant)
WaveformFactory.register_waveform("linear", Linear)
WaveformFactory.register_waveform("harmonic", Harmonic)
WaveformFactory.register_waveform("bilinear", BiLinear)
WaveformFactory.register_waveform("tabulated", Tabulated)

WriterFactory.register_writer("csv", CSVTableWriter)
WriterFactory.register_writer("structured-text", StructuredTextWriter)
WriterFactory.register_writer("manifest", ManifestWriter)

ValidatorFactory.register_validator("echo_train", EchoTrainValidationStrategy)
ValidatorFactory.register_validator("mode_partition", ModePartitionValidationStrategy)
ValidatorFactory.register_validator("segmentation", SegmentationValidationStrategy)

for _scenario in SCENARIOS:
    ScenarioFactory.register_scenario(_scenario.name, _scenario)
