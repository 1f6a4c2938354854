"""Loop, cusp and hump solitons of relaxing-medium wave equations."""

from .errors import (AmplitudeMatchError, BlowUpError, ConvergenceError, TailDivergenceError,
                     UnderResolvedError, ValidationError)
from .medium import MediumParams, derive_coefficients
from .soliton import SolitonComplex, SolitonReal, solve_dispersion

__version__ = "0.1.0"

__all__ = [
    "AmplitudeMatchError", "BlowUpError", "ConvergenceError", "TailDivergenceError",
    "UnderResolvedError", "ValidationError", "MediumParams", "derive_coefficients",
    "SolitonComplex", "SolitonReal", "solve_dispersion", "__version__",
]
