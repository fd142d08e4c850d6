"""Fractional Laplacian with Hardy potentials: operators, extension, solvers."""
import os as _os

# FRACHARDY_THREADS caps the BLAS/OpenMP pools; it must be set before numpy loads
if _os.environ.get("FRACHARDY_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["FRACHARDY_THREADS"])

from .constants import (Params, PaperConstants, gamma0, gamma_alpha, gamma_fn, kappa_s,
                        kernel_constants, m_alpha)
from .errors import (CalibrationError, CoercivityError, ConvergenceError, DomainError,
                     ExtrapolationError, FitQualityError, FracHardyError, QuadratureError,
                     TheoryForbidden)
from .fraclap import GridField, RadialProfile, SpectralProfile, frac_lap_fft, frac_lap_radial, frac_lap_singular

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "CoercivityError",
    "ConvergenceError",
    "DomainError",
    "ExtrapolationError",
    "FitQualityError",
    "FracHardyError",
    "GridField",
    "Params",
    "PaperConstants",
    "QuadratureError",
    "RadialProfile",
    "SpectralProfile",
    "TheoryForbidden",
    "frac_lap_fft",
    "frac_lap_radial",
    "frac_lap_singular",
    "gamma0",
    "gamma_alpha",
    "gamma_fn",
    "kappa_s",
    "kernel_constants",
    "m_alpha",
]
