"""Command line interface: enhance, decompose, eval, fit-color.

Exit status 0 on success, 1 on I/O or processing failures (with a
stage-labeled message on stderr), 2 on usage errors.
"""

import argparse
import os
import sys
from dataclasses import replace

from .codec import read_image, write_image
from .color import fit_color_matrix, matrix_to_text
from .decompose import decompose
from .errors import LowlightError, ShapeError
from .pipeline import (
    PipelineConfig,
    enhance,
    eval_dataset,
    load_config,
    records_to_csv,
    summary_to_json,
)


def _add_config_arguments(parser):
    g = parser.add_argument_group("pipeline configuration")
    g.add_argument("--config", metavar="FILE",
                   help="flat key=value config file; flags override its values")
    g.add_argument("--epsilon", type=float, help="illumination division guard")
    g.add_argument("--smooth-lambda", type=float, dest="smooth_lambda",
                   help="illumination smoothing weight")
    g.add_argument("--smooth-iters", type=int, dest="smooth_iters",
                   help="illumination smoothing iterations")
    g.add_argument("--grid-depth", type=int, dest="grid_depth",
                   help="bilateral grid guide bins")
    g.add_argument("--grid-rows", type=int, dest="grid_rows")
    g.add_argument("--grid-cols", type=int, dest="grid_cols")
    g.add_argument("--detail-gain", type=float, dest="detail_gain",
                   help="dark-region detail amplification")
    g.add_argument("--max-offset", type=float, dest="max_offset",
                   help="max non-rigid sampling displacement in px")
    g.add_argument("--levels", type=int, help="pyramid levels")
    g.add_argument("--pool", type=int, help="color correction pooling window")
    g.add_argument("--color-ridge", type=float, dest="color_ridge")
    g.add_argument("--color-matrix", dest="color_matrix", metavar="SRC",
                   help="'identity', 'fit' (needs reference) or a matrix file")
    g.add_argument("--gamma", help="illumination gamma, a number or 'auto'")
    g.add_argument("--auto-gamma", action="store_true", default=None,
                   help="shorthand for --gamma auto (needs a reference)")
    g.add_argument("--seed", type=int, help="seed for synthetic-data helpers")
    for stage in ("denoise", "restore", "correct", "adjust"):
        g.add_argument(f"--skip-{stage}", action="store_true", default=None,
                       dest=f"skip_{stage}", help=f"bypass the {stage} stage")
    g.add_argument("--no-timing", action="store_true", default=None,
                   dest="no_timing", help="write 0 for the ms column (reproducible reports)")


def _config_from_args(args, base=None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    updates = {}
    for name in ("epsilon", "smooth_lambda", "smooth_iters", "grid_depth",
                 "grid_rows", "grid_cols", "detail_gain", "max_offset",
                 "levels", "pool", "color_ridge", "color_matrix", "seed",
                 "skip_denoise", "skip_restore", "skip_correct", "skip_adjust"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if args.auto_gamma:
        updates["gamma"] = "auto"
    elif args.gamma is not None:
        updates["gamma"] = "auto" if args.gamma == "auto" else float(args.gamma)
    if args.no_timing:
        updates["timing"] = False
    return replace(cfg, **updates)


def _read_color(path):
    img = read_image(path)
    if img.ndim != 3:
        raise ShapeError(f"{path}: expected a color image, got grayscale")
    return img


def _cmd_enhance(args) -> int:
    cfg = _config_from_args(args)
    low = _read_color(args.infile)
    reference = _read_color(args.ref) if args.ref else None
    out, _decomp, diag = enhance(low, cfg, reference=reference)
    write_image(args.out, out)
    if args.save_reflectance:
        write_image(args.save_reflectance, diag["reflectance"])
    if args.save_illumination:
        write_image(args.save_illumination, diag["adjusted_illumination"])
    return 0


def _cmd_decompose(args) -> int:
    cfg = _config_from_args(args)
    img = _read_color(args.infile)
    parts = decompose(img, cfg.smooth_lambda, cfg.smooth_iters, cfg.epsilon)
    write_image(args.out_reflectance, parts.reflectance)
    write_image(args.out_illumination, parts.illumination)
    return 0


def _cmd_eval(args) -> int:
    # evaluation has references by construction, so calibration defaults on
    base = PipelineConfig(gamma="auto", color_matrix="fit")
    cfg = _config_from_args(args, base)
    records, summary = eval_dataset(args.low, args.high, cfg)
    with open(args.report, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))
    summary_path = args.summary or os.path.splitext(args.report)[0] + ".json"
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(summary_to_json(summary))
    done = summary["pairs"] - summary["failures"]
    print(f"evaluated {done}/{summary['pairs']} pairs; "
          f"psnr {summary['psnr_before']['mean']} -> {summary['psnr_after']['mean']}; "
          f"reports: {args.report}, {summary_path}")
    return 0


def _cmd_fit_color(args) -> int:
    cfg = _config_from_args(args)
    src = _read_color(args.src)
    ref = _read_color(args.ref)
    matrix = fit_color_matrix(src, ref, cfg.color_ridge)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(matrix_to_text(matrix))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowlight",
        description="Deterministic Retinex low-light image enhancement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance one low-light image")
    p.add_argument("--in", dest="infile", required=True, metavar="PNG")
    p.add_argument("--out", required=True, metavar="PNG")
    p.add_argument("--ref", metavar="PNG",
                   help="normal-light reference for auto-gamma / fitted color")
    p.add_argument("--save-reflectance", metavar="PNG",
                   help="also write the final reflectance map")
    p.add_argument("--save-illumination", metavar="PGM",
                   help="also write the adjusted illumination map")
    _add_config_arguments(p)
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("decompose", help="write reflectance and illumination maps")
    p.add_argument("--in", dest="infile", required=True, metavar="PNG")
    p.add_argument("--out-reflectance", dest="out_reflectance", required=True,
                   metavar="PNG")
    p.add_argument("--out-illumination", dest="out_illumination", required=True,
                   metavar="PGM")
    _add_config_arguments(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("eval", help="evaluate a paired low/ + high/ dataset")
    p.add_argument("--low", required=True, metavar="DIR")
    p.add_argument("--high", required=True, metavar="DIR")
    p.add_argument("--report", required=True, metavar="CSV")
    p.add_argument("--summary", metavar="JSON",
                   help="summary path (default: report with .json extension)")
    _add_config_arguments(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("fit-color", help="fit a 3x10 color matrix src -> ref")
    p.add_argument("--src", required=True, metavar="PNG")
    p.add_argument("--ref", required=True, metavar="PNG")
    p.add_argument("--out", required=True, metavar="TXT")
    _add_config_arguments(p)
    p.set_defaults(func=_cmd_fit_color)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (LowlightError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
