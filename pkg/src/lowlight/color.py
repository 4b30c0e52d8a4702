"""Polynomial color correction on a 10-term binomial feature basis.

A pixel (r, g, b) expands to the upper triangle of the outer product of
[1, r, g, b], giving constant, linear and quadratic terms. A 3x10 matrix
on that basis covers every affine map and adds curvature that a plain
3x4 matrix cannot express. Correction is applied progressively: a coarse
pass on max-pooled colors plus a fine residual between each pixel and its
pooled neighborhood.
"""

import numpy as np

from .errors import ParameterError, RankDeficiencyError, ShapeError, SizeError
from .validation import check_color, check_same_shape

FEATURE_NAMES = ("1", "r", "g", "b", "r*r", "r*g", "r*b", "g*g", "g*b", "b*b")
N_FEATURES = len(FEATURE_NAMES)


def binomial_expand(r, g, b) -> np.ndarray:
    """[1, r, g, b, r^2, rg, rb, g^2, gb, b^2] for a single pixel."""
    r, g, b = float(r), float(g), float(b)
    return np.array(
        [1.0, r, g, b, r * r, r * g, r * b, g * g, g * b, b * b], dtype=np.float64
    )


def _features(img) -> np.ndarray:
    """Binomial features of every pixel, shape (H, W, 10), float64."""
    a = img.astype(np.float64)
    r, g, b = a[:, :, 0], a[:, :, 1], a[:, :, 2]
    ones = np.ones_like(r)
    return np.stack(
        [ones, r, g, b, r * r, r * g, r * b, g * g, g * b, b * b], axis=2
    )


def identity_color_matrix() -> np.ndarray:
    """The embedding that selects the linear r, g, b features unchanged."""
    m = np.zeros((3, N_FEATURES), dtype=np.float64)
    m[0, 1] = 1.0
    m[1, 2] = 1.0
    m[2, 3] = 1.0
    return m


def check_color_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (3, N_FEATURES):
        raise ShapeError(f"color matrix must be 3x{N_FEATURES}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError("color matrix contains non-finite entries")
    return m


def fit_color_matrix(src, ref, ridge: float = 1e-6) -> np.ndarray:
    """Least-squares 3x10 matrix mapping src pixels onto ref pixels.

    Solves the 10x10 normal equations of
    ``min sum ||M phi(src_p) - ref_p||^2 + ridge ||M||_F^2``. With
    ridge=0 a singular normal matrix raises, naming the feature that
    dominates the null direction.
    """
    src = check_color(src, "src")
    ref = check_color(ref, "ref")
    check_same_shape(src, ref, "src", "ref")
    if ridge < 0 or not np.isfinite(ridge):
        raise ParameterError(f"ridge must be >= 0, got {ridge!r}")

    feats = _features(src).reshape(-1, N_FEATURES)
    targets = ref.astype(np.float64).reshape(-1, 3)
    normal = feats.T @ feats
    rhs = feats.T @ targets

    if ridge == 0.0:
        eigvals, eigvecs = np.linalg.eigh(normal)
        scale = max(float(eigvals[-1]), 1.0)
        if eigvals[0] <= scale * 1e-12:
            null = eigvecs[:, 0]
            feature = FEATURE_NAMES[int(np.argmax(np.abs(null)))]
            raise RankDeficiencyError(
                "normal matrix is rank deficient with ridge=0 "
                f"(null direction dominated by feature {feature!r})",
                feature=feature,
            )
    system = normal + ridge * np.eye(N_FEATURES)
    return np.linalg.solve(system, rhs).T


def apply_color_matrix(img, matrix) -> np.ndarray:
    """Per-pixel M * phi(pixel), clamped to the unit interval."""
    arr = check_color(img, "img")
    m = check_color_matrix(matrix)
    out = _features(arr) @ m.T
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def _max_pool_nearest(arr, pool):
    """Per-channel pool x pool max, replicated back to full resolution."""
    h, w = arr.shape[:2]
    rows = np.arange(0, h, pool)
    cols = np.arange(0, w, pool)
    pooled = np.maximum.reduceat(arr, rows, axis=0)
    pooled = np.maximum.reduceat(pooled, cols, axis=1)
    up = np.repeat(np.repeat(pooled, pool, axis=0), pool, axis=1)
    return up[:h, :w]


def progressive_correct(img, coarse_matrix, fine_matrix, pool: int = 4) -> np.ndarray:
    """Coarse correction of pooled colors plus a fine per-pixel residual.

    The coarse pass runs on a pool x pool max-pooled (then nearest-
    neighbor restored) image; the fine pass adds the feature-space
    residual between each pixel and its pooled value. Identity matrices
    make the whole operation the identity map, and pool=1 collapses it to
    :func:`apply_color_matrix`.
    """
    arr = check_color(img, "img")
    mc = check_color_matrix(coarse_matrix)
    mf = check_color_matrix(fine_matrix)
    if pool < 1:
        raise ParameterError(f"pool must be >= 1, got {pool}")
    if pool > arr.shape[0] or pool > arr.shape[1]:
        raise SizeError(
            f"pool window {pool} exceeds image dimensions {arr.shape[:2]}"
        )
    fine = _features(arr)
    pooled = _max_pool_nearest(arr.astype(np.float64), pool)
    coarse = _features(pooled)
    out = coarse @ mc.T + fine @ mf.T - coarse @ mf.T
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def matrix_to_text(matrix) -> str:
    """3 lines of 10 whitespace-separated decimals; round-trips exactly."""
    m = check_color_matrix(matrix)
    lines = [" ".join(repr(float(v)) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def matrix_from_text(text) -> np.ndarray:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if len(rows) != 3 or any(len(r) != N_FEATURES for r in rows):
        raise ShapeError(
            f"color matrix text must have 3 rows of {N_FEATURES} numbers"
        )
    try:
        m = np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ShapeError(f"bad number in color matrix text: {exc}") from None
    return check_color_matrix(m)
