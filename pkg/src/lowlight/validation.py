"""Input validation helpers shared across the package.

Images are numpy arrays: a color image is float32 with shape (H, W, 3),
a single-channel plane is float32 with shape (H, W). Values live in the
unit interval; enforcement happens at encode/decode boundaries, shape
checks happen everywhere.
"""

import numpy as np

from .errors import ParameterError, RangeError, ShapeError


def check_color(img, name="image"):
    """Validate a 3-channel image and return it as float32 (H, W, 3)."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"{name}: expected a (H, W, 3) color image, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float32)


def check_plane(img, name="plane"):
    """Validate a single-channel plane and return it as float32 (H, W)."""
    arr = np.asarray(img)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ShapeError(f"{name}: expected a (H, W) plane, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float32)


def check_image(img, name="image"):
    """Accept either a plane or a color image; return float32 array."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        return check_plane(arr, name)
    return check_color(arr, name)


def check_same_shape(a, b, name_a="first", name_b="second"):
    if a.shape != b.shape:
        raise ShapeError(
            f"shape mismatch: {name_a} is {a.shape}, {name_b} is {b.shape}"
        )


def check_same_size(a, b, name_a="first", name_b="second"):
    """Require equal spatial dimensions, ignoring channel count."""
    if a.shape[:2] != b.shape[:2]:
        raise ShapeError(
            f"size mismatch: {name_a} is {a.shape[:2]}, {name_b} is {b.shape[:2]}"
        )


def check_unit_range(arr, name="values"):
    lo = float(arr.min()) if arr.size else 0.0
    hi = float(arr.max()) if arr.size else 0.0
    if lo < 0.0 or hi > 1.0:
        raise RangeError(f"{name} must lie in [0, 1], got range [{lo:g}, {hi:g}]")


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")


def check_nonnegative(value, name):
    if not np.isfinite(value) or value < 0:
        raise ParameterError(f"{name} must be nonnegative and finite, got {value!r}")
