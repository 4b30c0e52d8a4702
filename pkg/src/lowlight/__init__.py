"""Deterministic Retinex low-light image enhancement.

Decompose an image into reflectance and illumination, denoise each color
channel on its own bilateral grid, restore detail through an
illumination-guided Laplacian pyramid, correct colors with a quadratic
binomial basis, brighten the illumination with a calibrated gamma, and
recompose. Includes PSNR/SSIM metrics, decomposition/restoration/
illumination objectives, and a paired-dataset evaluation harness.
"""

from .adjust import adjust_illumination, auto_gamma
from .bilateral import (
    BilateralGrid,
    bilateral_brute,
    denoise_channels,
    grid_build,
    grid_slice,
)
from .codec import (
    decode_image,
    encode_image,
    merge_channels,
    read_image,
    split_channels,
    write_image,
)
from .color import (
    apply_color_matrix,
    binomial_expand,
    fit_color_matrix,
    identity_color_matrix,
    matrix_from_text,
    matrix_to_text,
    progressive_correct,
)
from .decompose import (
    RetinexDecomposition,
    compute_reflectance,
    decompose,
    init_illumination,
    recompose,
    refine_illumination,
)
from .errors import (
    CalibrationError,
    DatasetError,
    DecodeError,
    LowlightError,
    ParameterError,
    PipelineStageError,
    PyramidStructureError,
    RangeError,
    RankDeficiencyError,
    ShapeError,
    SizeError,
    UnsupportedFormatError,
)
from .estimators import BilateralChannelDenoiser, RetinexEnhancer
from .metrics import (
    SsimParams,
    gradient,
    loss_decom,
    loss_illum,
    loss_restore,
    mse,
    psnr,
    ssim,
)
from .pipeline import (
    EvalRecord,
    PipelineConfig,
    enhance,
    eval_dataset,
    load_config,
    records_to_csv,
    summary_to_json,
)
from .pyramid import (
    IllumPyramid,
    LaplacianPyramid,
    OffsetField,
    build_illum_pyramid,
    build_laplacian,
    invert_illum,
    nonrigid_sample,
    offsets_from_illum,
    reconstruct,
    restore_details,
)

__version__ = "0.1.0"

__all__ = [
    "BilateralChannelDenoiser",
    "BilateralGrid",
    "CalibrationError",
    "DatasetError",
    "DecodeError",
    "EvalRecord",
    "IllumPyramid",
    "LaplacianPyramid",
    "LowlightError",
    "OffsetField",
    "ParameterError",
    "PipelineConfig",
    "PipelineStageError",
    "PyramidStructureError",
    "RangeError",
    "RankDeficiencyError",
    "RetinexDecomposition",
    "RetinexEnhancer",
    "ShapeError",
    "SizeError",
    "SsimParams",
    "UnsupportedFormatError",
    "adjust_illumination",
    "apply_color_matrix",
    "auto_gamma",
    "bilateral_brute",
    "binomial_expand",
    "build_illum_pyramid",
    "build_laplacian",
    "compute_reflectance",
    "decode_image",
    "decompose",
    "denoise_channels",
    "encode_image",
    "enhance",
    "eval_dataset",
    "fit_color_matrix",
    "gradient",
    "grid_build",
    "grid_slice",
    "identity_color_matrix",
    "init_illumination",
    "invert_illum",
    "load_config",
    "loss_decom",
    "loss_illum",
    "loss_restore",
    "matrix_from_text",
    "matrix_to_text",
    "merge_channels",
    "mse",
    "nonrigid_sample",
    "offsets_from_illum",
    "progressive_correct",
    "psnr",
    "read_image",
    "recompose",
    "reconstruct",
    "records_to_csv",
    "refine_illumination",
    "restore_details",
    "split_channels",
    "ssim",
    "summary_to_json",
    "write_image",
]
