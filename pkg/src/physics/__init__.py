from .rotation import Rotation, compose, from_axis_angle, to_axis_angle
from .cycle import CycleParams, EffectiveRotation, effective_rotation, cycle_rotation
from .profiles import FieldProfile
from .bloch import SequenceTiming, EchoTrain, simulate_cpmg, static_propagate

__all__ = [
    'Rotation',
    'compose',
    'from_axis_angle',
    'to_axis_angle',
    'CycleParams',
    'EffectiveRotation',
    'effective_rotation',
    'cycle_rotation',
    'FieldProfile',
    'SequenceTiming',
    'EchoTrain',
    'simulate_cpmg',
    'static_propagate',
]
