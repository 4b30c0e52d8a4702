"""End-to-end enhancement pipeline and paired-dataset evaluation.

The pipeline runs decompose -> denoise -> restore -> color-correct ->
adjust -> recompose; every stage can be bypassed from the config, and any
stage failure is re-raised with the stage's name attached. Evaluation
walks a low/ + high/ directory pair with matching filenames, records
per-image metrics and emits deterministic CSV and JSON reports.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import bilateral as _bilateral
from . import color as _color
from . import metrics as _metrics
from . import pyramid as _pyramid
from .adjust import adjust_illumination, auto_gamma
from .codec import read_image
from .decompose import (
    RetinexDecomposition,
    compute_reflectance,
    init_illumination,
    recompose,
    refine_illumination,
)
from .errors import (
    CalibrationError,
    DatasetError,
    LowlightError,
    ParameterError,
    PipelineStageError,
)
from .validation import check_color

_IMAGE_EXTENSIONS = (".png", ".ppm", ".pgm")

CSV_HEADER = ("id,psnr_before,psnr_after,ssim_before,ssim_after,"
              "loss_decom,loss_restore,loss_illum,ms")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the enhancement pipeline; defaults run on any >=32x32 RGB image."""

    epsilon: float = 1e-4
    smooth_lambda: float = 0.15
    smooth_iters: int = 30
    grid_depth: int = 8
    grid_rows: int = 8
    grid_cols: int = 8
    detail_gain: float = 0.8
    max_offset: float = 2.0
    levels: int = 3
    pool: int = 4
    color_ridge: float = 1e-6
    color_matrix: str = "identity"  # identity | fit | <path to matrix file>
    gamma: float | str = 1.0        # positive float | "auto"
    seed: int = 0
    skip_denoise: bool = False
    skip_restore: bool = False
    skip_correct: bool = False
    skip_adjust: bool = False
    timing: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.smooth_lambda < 0:
            raise ParameterError("smooth_lambda must be >= 0")
        if self.smooth_iters < 0:
            raise ParameterError("smooth_iters must be >= 0")
        for name in ("grid_depth", "grid_rows", "grid_cols", "levels", "pool"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if self.detail_gain < 0 or self.max_offset < 0:
            raise ParameterError("detail_gain and max_offset must be >= 0")
        if self.color_ridge < 0:
            raise ParameterError("color_ridge must be >= 0")
        if isinstance(self.gamma, str):
            if self.gamma != "auto":
                raise ParameterError(f"gamma must be a positive number or 'auto', got {self.gamma!r}")
        elif not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterError(f"gamma must be positive, got {self.gamma!r}")

    @property
    def grid_shape(self):
        return (self.grid_depth, self.grid_rows, self.grid_cols)


_BOOL_WORDS = {"true": True, "1": True, "yes": True,
               "false": False, "0": False, "no": False}


def config_from_items(items, base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a config from (key, value-string) pairs, e.g. a parsed file."""
    base = base or PipelineConfig()
    types = {f.name: f.type for f in fields(PipelineConfig)}
    updates = {}
    for key, raw in items:
        if key not in types:
            raise ParameterError(f"unknown config key {key!r}")
        current = getattr(base, key)
        if key == "gamma":
            updates[key] = raw if raw == "auto" else float(raw)
        elif key == "color_matrix":
            updates[key] = raw
        elif isinstance(current, bool):
            word = raw.strip().lower()
            if word not in _BOOL_WORDS:
                raise ParameterError(f"config key {key!r}: expected a boolean, got {raw!r}")
            updates[key] = _BOOL_WORDS[word]
        elif isinstance(current, int):
            updates[key] = int(raw)
        else:
            updates[key] = float(raw)
    return replace(base, **updates)


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse a flat key=value config file; '#' starts a comment."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, value = text.split("=", 1)
            items.append((key.strip(), value.strip()))
    return config_from_items(items, base)


@dataclass
class EvalRecord:
    """Per-pair evaluation outcome; after-metrics exist iff enhancement ran."""

    id: str
    psnr_before: float | None = None
    psnr_after: float | None = None
    ssim_before: float | None = None
    ssim_after: float | None = None
    loss_decom: float | None = None
    loss_restore: float | None = None
    loss_illum: float | None = None
    ms: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


def _decompose_image(image, cfg: PipelineConfig):
    illum = refine_illumination(
        init_illumination(image), cfg.smooth_lambda, cfg.smooth_iters
    )
    refl = compute_reflectance(image, illum, cfg.epsilon)
    return refl, illum


def reference_parts(reference, cfg: PipelineConfig):
    """Reflectance (denoised unless bypassed) and illumination of a reference."""
    refl, illum = _stage("decompose", _decompose_image, check_color(reference), cfg)
    if not cfg.skip_denoise:
        refl = _stage("denoise", _bilateral.denoise_channels, refl, cfg.grid_shape)
    return refl, illum


def _resolve_color_matrices(cfg, current_reflectance, ref_reflectance, override):
    if override is not None:
        return _color.check_color_matrix(override), "explicit"
    if cfg.color_matrix == "identity":
        return _color.identity_color_matrix(), "identity"
    if cfg.color_matrix == "fit":
        if ref_reflectance is None:
            raise CalibrationError(
                "color_matrix='fit' needs a reference image to fit against"
            )
        fitted = _color.fit_color_matrix(
            current_reflectance, ref_reflectance, cfg.color_ridge
        )
        return fitted, "fit"
    with open(cfg.color_matrix, "r", encoding="utf-8") as fh:
        return _color.matrix_from_text(fh.read()), cfg.color_matrix


def enhance(low, cfg: PipelineConfig | None = None, reference=None,
            color_matrix=None):
    """Run the full pipeline on one image.

    Returns (enhanced, decomposition, diagnostics). The decomposition holds
    the post-denoise reflectance, the pre-adjust illumination, and the
    residual the product fails to explain. Diagnostics carry the resolved
    gamma / color matrix and the intermediate maps the evaluator needs.
    ``color_matrix`` overrides the config's matrix source with an explicit
    3x10 array.
    """
    cfg = cfg or PipelineConfig()
    low = check_color(low, "low")

    refl, illum = _stage("decompose", _decompose_image, low, cfg)

    ref_refl = ref_illum = None
    needs_reference = (
        cfg.color_matrix == "fit" and color_matrix is None and not cfg.skip_correct
    ) or (cfg.gamma == "auto" and not cfg.skip_adjust)
    if reference is not None and needs_reference:
        ref_refl, ref_illum = reference_parts(reference, cfg)

    stages = ["decompose"]
    if not cfg.skip_denoise:
        refl = _stage("denoise", _bilateral.denoise_channels, refl, cfg.grid_shape)
        stages.append("denoise")
    decomposition = RetinexDecomposition(
        refl,
        illum,
        (low.astype(np.float64)
         - refl.astype(np.float64) * illum.astype(np.float64)[:, :, None]
         ).astype(np.float32),
    )

    if not cfg.skip_restore:
        refl = _stage("restore", _pyramid.restore_details, refl, illum,
                      cfg.detail_gain, cfg.max_offset, cfg.levels)
        stages.append("restore")

    matrix = None
    matrix_source = None
    if not cfg.skip_correct:
        matrix, matrix_source = _stage(
            "correct", _resolve_color_matrices, cfg, refl, ref_refl, color_matrix
        )
        refl = _stage("correct", _color.progressive_correct, refl, matrix,
                      matrix, cfg.pool)
        stages.append("correct")

    gamma_used = None
    adjusted = illum
    if not cfg.skip_adjust:
        if cfg.gamma == "auto":
            if ref_illum is None:
                raise PipelineStageError(
                    "adjust",
                    CalibrationError("gamma='auto' needs a reference image"),
                )
            gamma_used = _stage("adjust", auto_gamma, illum, ref_illum)
        else:
            gamma_used = float(cfg.gamma)
        adjusted = _stage("adjust", adjust_illumination, illum, gamma_used)
        stages.append("adjust")

    out = recompose(refl, adjusted)
    diagnostics = {
        "stages": stages,
        "gamma": gamma_used,
        "color_matrix": matrix,
        "color_matrix_source": matrix_source,
        "reflectance": refl,
        "adjusted_illumination": adjusted,
        "reference_reflectance": ref_refl,
        "reference_illumination": ref_illum,
    }
    return out, decomposition, diagnostics


def _eval_one(name, low_path, high_path, cfg: PipelineConfig) -> EvalRecord:
    rec = EvalRecord(id=name)
    try:
        low = read_image(low_path)
        high = read_image(high_path)
        if low.ndim != 3 or high.ndim != 3:
            raise DatasetError(f"{name}: evaluation needs 3-channel images")
        rec.psnr_before = _metrics.psnr(low, high)
        rec.ssim_before = _metrics.ssim(low, high)

        start = time.perf_counter()
        out, decomposition, diag = enhance(low, cfg, reference=high)
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        ref_refl = diag["reference_reflectance"]
        ref_illum = diag["reference_illumination"]
        if ref_refl is None:
            ref_refl, ref_illum = reference_parts(high, cfg)

        rec.psnr_after = _metrics.psnr(out, high)
        rec.ssim_after = _metrics.ssim(out, high)
        rec.loss_decom = _metrics.loss_decom(
            decomposition.reflectance, ref_refl,
            decomposition.illumination, ref_illum, low, high,
        )
        rec.loss_restore = _metrics.loss_restore(diag["reflectance"], ref_refl)
        rec.loss_illum = _metrics.loss_illum(diag["adjusted_illumination"], ref_illum)
        rec.ms = elapsed_ms if cfg.timing else 0.0
    except (LowlightError, OSError) as exc:
        rec.error = str(exc)
    return rec


def _list_images(directory):
    try:
        names = os.listdir(directory)
    except OSError as exc:
        raise DatasetError(f"cannot list {directory}: {exc}") from exc
    return {n for n in names if n.lower().endswith(_IMAGE_EXTENSIONS)}


def eval_dataset(low_dir, high_dir, cfg: PipelineConfig | None = None):
    """Evaluate every matching low/high pair; returns (records, summary).

    Pairs run concurrently (capped by the THREADS env var) but records come
    back in sorted filename order, so reports are schedule-independent.
    Files missing their counterpart become failed records; an empty
    intersection is a dataset error.
    """
    cfg = cfg or PipelineConfig()
    low_names = _list_images(low_dir)
    high_names = _list_images(high_dir)
    if not (low_names & high_names):
        raise DatasetError(
            f"no matching filenames between {low_dir} and {high_dir}"
        )

    all_names = sorted(low_names | high_names)
    records = [None] * len(all_names)
    jobs = []
    for idx, name in enumerate(all_names):
        if name not in low_names:
            records[idx] = EvalRecord(id=name, error="missing low-light counterpart")
        elif name not in high_names:
            records[idx] = EvalRecord(id=name, error="missing reference counterpart")
        else:
            jobs.append((idx, name))

    workers = _thread_count()
    if workers <= 1 or len(jobs) <= 1:
        for idx, name in jobs:
            records[idx] = _eval_one(
                name, os.path.join(low_dir, name), os.path.join(high_dir, name), cfg
            )
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [
                (idx, executor.submit(
                    _eval_one, name,
                    os.path.join(low_dir, name), os.path.join(high_dir, name), cfg,
                ))
                for idx, name in jobs
            ]
            for idx, fut in futures:
                records[idx] = fut.result()

    return records, summarize(records)


def _thread_count() -> int:
    raw = os.environ.get("THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise ParameterError(f"THREADS must be an integer, got {raw!r}") from None
    return max(1, os.cpu_count() or 1)


def summarize(records) -> dict:
    """Mean/median PSNR and SSIM before/after over the successful records."""
    good = [r for r in records if r.ok]
    summary = {
        "pairs": len(records),
        "failures": len(records) - len(good),
    }
    for name in ("psnr_before", "psnr_after", "ssim_before", "ssim_after"):
        values = [getattr(r, name) for r in good]
        if values:
            summary[name] = {
                "mean": _json_number(float(np.mean(values))),
                "median": _json_number(float(np.median(values))),
            }
        else:
            summary[name] = {"mean": None, "median": None}
    return summary


def _json_number(value):
    if value is None or np.isfinite(value):
        return value
    return "inf" if value > 0 else "-inf"


def _csv_cell(value, spec="{:.6f}"):
    if value is None:
        return ""
    if isinstance(value, float) and not np.isfinite(value):
        return "inf" if value > 0 else "-inf"
    return spec.format(value)


def records_to_csv(records) -> str:
    """Fixed-header CSV, one row per record, deterministic formatting."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            r.id,
            _csv_cell(r.psnr_before),
            _csv_cell(r.psnr_after),
            _csv_cell(r.ssim_before),
            _csv_cell(r.ssim_after),
            _csv_cell(r.loss_decom),
            _csv_cell(r.loss_restore),
            _csv_cell(r.loss_illum),
            _csv_cell(r.ms, "{:.3f}"),
        ]))
    return "\n".join(lines) + "\n"


def summary_to_json(summary) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
