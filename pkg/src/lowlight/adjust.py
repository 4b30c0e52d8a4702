"""Illumination adjustment: a single calibrated gamma curve.

I -> I^gamma is monotone, maps the unit interval onto itself, and
brightens for gamma < 1. When a reference illumination is available the
exponent can be solved in closed form so the adjusted mean matches the
reference mean.
"""

import math

import numpy as np

from .errors import CalibrationError, ParameterError
from .validation import check_plane, check_unit_range


def adjust_illumination(illumination, gamma: float) -> np.ndarray:
    """Pointwise power curve; gamma=1 is the exact identity."""
    illum = check_plane(illumination, "illumination")
    check_unit_range(illum, "illumination")
    if not np.isfinite(gamma) or gamma <= 0:
        raise ParameterError(f"gamma must be positive and finite, got {gamma!r}")
    if gamma == 1.0:
        return illum.copy()
    return np.power(illum.astype(np.float64), gamma).astype(np.float32)


def auto_gamma(illum_low, illum_ref) -> float:
    """Exponent making mean(I_low^gamma) track mean(I_ref).

    gamma = ln(mean(I_ref)) / ln(mean(I_low)); exact for constant maps.
    Means at 0 or 1 make the logs degenerate and raise.
    """
    low = check_plane(illum_low, "illum_low")
    ref = check_plane(illum_ref, "illum_ref")
    check_unit_range(low, "illum_low")
    check_unit_range(ref, "illum_ref")
    mean_low = float(low.mean())
    mean_ref = float(ref.mean())
    for name, value in (("illum_low", mean_low), ("illum_ref", mean_ref)):
        if not 0.0 < value < 1.0:
            raise CalibrationError(
                f"mean of {name} is {value:g}; need a mean strictly inside (0, 1)"
            )
    return math.log(mean_ref) / math.log(mean_low)
