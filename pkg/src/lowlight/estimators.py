"""Scikit-learn style estimators wrapping the enhancement pipeline.

``RetinexEnhancer`` is the front door: set parameters in the constructor,
``fit`` on paired low/reference images to calibrate the gamma curve and
the color matrix, then ``transform`` new low-light images. Parameters
follow the sklearn convention (stored verbatim, ``get_params`` /
``set_params`` work), so the enhancer drops into pipelines and grid
searches. Inputs are float32 (H, W, 3) arrays or lists of them.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import color as _color
from .adjust import auto_gamma
from .bilateral import denoise_channels
from .errors import CalibrationError
from .pipeline import PipelineConfig, enhance, reference_parts
from .validation import check_color


def _as_image_list(X):
    """Normalize input to (list of images, was_single flag)."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [check_color(X)], True
    return [check_color(img) for img in X], False


class RetinexEnhancer(BaseEstimator, TransformerMixin):
    """Low-light image enhancer with an optional paired calibration step.

    With a numeric ``gamma`` and ``color_matrix="identity"`` (or an
    explicit 3x10 array) the enhancer is stateless and ``fit`` only
    validates. With ``gamma="auto"`` or ``color_matrix="fit"`` the
    calibration is solved from the reference images passed as ``y``.
    """

    def __init__(self, epsilon=1e-4, smooth_lambda=0.15, smooth_iters=30,
                 grid_depth=8, grid_rows=8, grid_cols=8, detail_gain=0.8,
                 max_offset=2.0, levels=3, pool=4, color_ridge=1e-6,
                 color_matrix="identity", gamma=1.0):
        self.epsilon = epsilon
        self.smooth_lambda = smooth_lambda
        self.smooth_iters = smooth_iters
        self.grid_depth = grid_depth
        self.grid_rows = grid_rows
        self.grid_cols = grid_cols
        self.detail_gain = detail_gain
        self.max_offset = max_offset
        self.levels = levels
        self.pool = pool
        self.color_ridge = color_ridge
        self.color_matrix = color_matrix
        self.gamma = gamma

    def _config(self, **overrides) -> PipelineConfig:
        settings = dict(
            epsilon=self.epsilon,
            smooth_lambda=self.smooth_lambda,
            smooth_iters=self.smooth_iters,
            grid_depth=self.grid_depth,
            grid_rows=self.grid_rows,
            grid_cols=self.grid_cols,
            detail_gain=self.detail_gain,
            max_offset=self.max_offset,
            levels=self.levels,
            pool=self.pool,
            color_ridge=self.color_ridge,
        )
        settings.update(overrides)
        return PipelineConfig(**settings)

    def fit(self, X, y=None):
        """Calibrate gamma and/or the color matrix from paired references.

        X: low-light image(s); y: reference image(s) aligned with X.
        Returns self.
        """
        self._config(gamma=self.gamma)  # validates the numeric parameters
        lows, _ = _as_image_list(X)
        refs = None
        if y is not None:
            refs, _ = _as_image_list(y)
            if len(refs) != len(lows):
                raise CalibrationError(
                    f"got {len(lows)} low images but {len(refs)} references"
                )

        if self.gamma == "auto":
            if refs is None:
                raise CalibrationError("gamma='auto' needs reference images in y")
            self.gamma_ = self._solve_gamma(lows, refs)
        else:
            self.gamma_ = float(self.gamma)

        if isinstance(self.color_matrix, np.ndarray):
            self.color_matrix_ = _color.check_color_matrix(self.color_matrix)
        elif self.color_matrix == "identity":
            self.color_matrix_ = _color.identity_color_matrix()
        elif self.color_matrix == "fit":
            if refs is None:
                raise CalibrationError("color_matrix='fit' needs reference images in y")
            self.color_matrix_ = self._solve_matrix(lows, refs)
        else:
            with open(self.color_matrix, "r", encoding="utf-8") as fh:
                self.color_matrix_ = _color.matrix_from_text(fh.read())
        return self

    def transform(self, X):
        """Enhance image(s) with the calibrated parameters."""
        if not hasattr(self, "gamma_"):
            raise NotFittedError("RetinexEnhancer must be fitted before transform")
        cfg = self._config(gamma=self.gamma_)
        images, single = _as_image_list(X)
        out = [
            enhance(img, cfg, color_matrix=self.color_matrix_)[0] for img in images
        ]
        return out[0] if single else out

    def _stage_config(self) -> PipelineConfig:
        """The pipeline stopped before color correction and adjustment."""
        return self._config(skip_correct=True, skip_adjust=True)

    def _solve_gamma(self, lows, refs) -> float:
        cfg = self._stage_config()
        low_illums = [enhance(img, cfg)[1].illumination for img in lows]
        ref_illums = [reference_parts(ref, cfg)[1] for ref in refs]
        low_all = np.concatenate([i.ravel() for i in low_illums])[None, :]
        ref_all = np.concatenate([i.ravel() for i in ref_illums])[None, :]
        return auto_gamma(low_all, ref_all)

    def _solve_matrix(self, lows, refs) -> np.ndarray:
        cfg = self._stage_config()
        src_rows = []
        ref_rows = []
        for img, ref in zip(lows, refs):
            _, _, diag = enhance(img, cfg)
            src_rows.append(diag["reflectance"].reshape(-1, 3))
            ref_refl, _ = reference_parts(ref, cfg)
            ref_rows.append(ref_refl.reshape(-1, 3))
        src = np.concatenate(src_rows)[:, None, :]
        ref = np.concatenate(ref_rows)[:, None, :]
        return _color.fit_color_matrix(src, ref, self.color_ridge)


class BilateralChannelDenoiser(BaseEstimator, TransformerMixin):
    """Stateless transformer applying per-channel bilateral-grid denoising."""

    def __init__(self, grid_depth=8, grid_rows=8, grid_cols=8):
        self.grid_depth = grid_depth
        self.grid_rows = grid_rows
        self.grid_cols = grid_cols

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        images, single = _as_image_list(X)
        shape = (self.grid_depth, self.grid_rows, self.grid_cols)
        out = [denoise_channels(img, shape) for img in images]
        return out[0] if single else out
