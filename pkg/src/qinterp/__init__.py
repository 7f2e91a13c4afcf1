"""Quaternionic operator models, S-spectra and real interpolation norms."""

from qinterp._jit import USE_NUMBA
from qinterp.quaternion import E1, E2, E3, ONE, ImaginaryUnit, Quaternion, ray_point, same_sphere
from qinterp.report import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "E1",
    "E2",
    "E3",
    "ONE",
    "USE_NUMBA",
    "ImaginaryUnit",
    "Quaternion",
    "VerificationReport",
    "ray_point",
    "same_sphere",
]
