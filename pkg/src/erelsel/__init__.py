"""Lumen EREL selection for IVUS frames.

Candidate extremal regions are filtered by their correlation with an
approximate lumen region, then ranked by how tightly each one agrees with
its fitted ellipse.
"""

from .errors import DegenerateDataError, EllipseFitError, InputError
from .ellipsefit import Ellipse, fit_ellipse
from .selection import FrameSample, PipelineConfig, SelectionResult, select

__version__ = "0.1.0"

__all__ = [
    "DegenerateDataError",
    "Ellipse",
    "EllipseFitError",
    "FrameSample",
    "InputError",
    "PipelineConfig",
    "SelectionResult",
    "fit_ellipse",
    "select",
]
