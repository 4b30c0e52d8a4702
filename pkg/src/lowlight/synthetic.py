"""Deterministic synthetic data: smooth scenes and dimmed low/high pairs.

Used by the test-suite and by the evaluation examples; everything is a
pure function of the seed.
"""

import os

import numpy as np
from scipy.ndimage import gaussian_filter

from .codec import write_image


def make_smooth_image(height, width, seed, low=0.25, high=0.75, smoothness=8.0):
    """Heavily blurred uniform noise, rescaled exactly into [low, high]."""
    rng = np.random.default_rng(seed)
    noise = rng.random((height, width, 3))
    smooth = gaussian_filter(noise, sigma=(smoothness, smoothness, 0), mode="reflect")
    lo = smooth.min()
    hi = smooth.max()
    if hi - lo < 1e-12:
        return np.full((height, width, 3), (low + high) / 2.0, dtype=np.float32)
    out = (smooth - lo) / (hi - lo) * (high - low) + low
    return out.astype(np.float32)


def dim_pair(height, width, seed, factor=0.25):
    """(low, high) pair where low = high * factor, a constant dimming."""
    high = make_smooth_image(height, width, seed)
    low = (high * np.float32(factor)).astype(np.float32)
    return low, high


def write_pair_dataset(low_dir, high_dir, count, height=128, width=128,
                       seed=0, factor=0.25):
    """Write ``count`` dimmed PNG pairs with matching filenames."""
    os.makedirs(low_dir, exist_ok=True)
    os.makedirs(high_dir, exist_ok=True)
    names = []
    for i in range(count):
        low, high = dim_pair(height, width, seed + i, factor)
        name = f"{i:03d}.png"
        write_image(os.path.join(low_dir, name), low)
        write_image(os.path.join(high_dir, name), high)
        names.append(name)
    return names
