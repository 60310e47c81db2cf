"""Edge-driven superpixel segmentation, file formats and evaluation metrics."""
from .core import (
    DegenerateInputError,
    FlowField,
    GradientField,
    IsecParams,
    LabelMap,
    ParamError,
    RasterImage,
    validate_params,
)
from .pipeline import IterationTrace, segment

__all__ = [
    "DegenerateInputError",
    "FlowField",
    "GradientField",
    "IsecParams",
    "IterationTrace",
    "LabelMap",
    "ParamError",
    "RasterImage",
    "segment",
    "validate_params",
]
__version__ = "0.1.0"
