from .echo_train_validation_strategy import EchoTrainValidationStrategy
from .mode_partition_validation_strategy import ModePartitionValidationStrategy
from .segmentation_validation_strategy import SegmentationValidationStrategy

__all__ = [
    'EchoTrainValidationStrategy',
    'ModePartitionValidationStrategy',
    'SegmentationValidationStrategy',
]
