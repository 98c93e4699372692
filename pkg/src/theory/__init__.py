from .mode_trace import ModeTrace, mode_trace_from_echoes
from .adiabatic import adiabatic_predict
from .first_order import first_order_predict
from .continuous import continuous_mode_evolution
from .segmentation import RegionSegmentation, segment_regions

__all__ = [
    'ModeTrace',
    'mode_trace_from_echoes',
    'adiabatic_predict',
    'first_order_predict',
    'continuous_mode_evolution',
    'RegionSegmentation',
    'segment_regions',
]
