"""Command-line entry point: ``quickshift-scale <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, theory
from .density import Hyperparams, kernel_width, parse_dm
from .pixels import (Region, cielab_to_rgb, load_image_lab, load_ppm, rgb_to_cielab,
                     save_lab_csv, save_labels, write_ppm)
from .synthetic import BicolorModel, FlatModel, bicolor_image, flat_image

log = logging.getLogger("quickshift_scale")


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _color(text: str) -> tuple[float, float, float]:
    vals = _float_list(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("colour needs three comma-separated values")
    return tuple(vals)


def _dm(text: str) -> float:
    try:
        return parse_dm(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_hp(p: argparse.ArgumentParser, ks=5.0, dm="10") -> None:
    p.add_argument("--ks", type=float, default=ks, help="kernel size k_s")
    p.add_argument("--dm", type=_dm, default=_dm(dm), help='max distance, number or "inf"')
    p.add_argument("--ratio", type=float, default=1.0, help="colour weight")
    p.add_argument("--sigma0", type=float, default=1e-5, help="tie-break noise on P")
    p.add_argument("--seed", type=int, default=0)


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", type=Path, default=Path("out"))
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _hp(args) -> Hyperparams:
    return Hyperparams(k_s=args.ks, d_m=args.dm, ratio=args.ratio, sigma0=args.sigma0,
                       seed=args.seed)


def _finish(rep: harness.ExperimentReport, args) -> int:
    for path in rep.write(args.out_dir, args.format):
        print(f"wrote {path}")
    for line in rep.summary_lines():
        print(line)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0 if rep.passed else 1


# ---------------------------------------------------------------------------
# commands

def cmd_segment(args) -> int:
    image = load_image_lab(args.image)
    labels, summary = harness.segment(image, _hp(args), args.variant,
                                      squared_dm=args.compat_squared_dm,
                                      cut_after_argmin=args.cut_after_argmin)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    ext = "csv" if args.labels == "csv" else "pgm"
    save_labels(labels, args.out_dir / f"{stem}_labels.{ext}", args.labels)
    (args.out_dir / f"{stem}_summary.json").write_text(
        json.dumps(harness._json_num(summary), indent=2) + "\n")
    print(json.dumps(harness._json_num(summary)))
    return 0


def cmd_predict(args) -> int:
    k_w = args.kw if args.kw is not None else kernel_width(args.ks)
    if args.method == "exact":
        shape = (args.height, args.width)
        region = (Region.centered(shape, args.margin) if args.margin is not None
                  else Region.whole(shape))
        pred = theory.predict_exact(region, shape, k_w, args.dm)
    else:
        pred = theory.expected_local_maxima_asymptotic(args.height, args.width, k_w, args.dm)
    print(pred.to_json())
    return 0


def cmd_rescale(args) -> int:
    k_s, d_m = harness.rescale_hyperparams(args.ks, args.dm, args.rho)
    print(json.dumps(harness._json_num({"k_s": k_s, "d_m": d_m})))
    return 0


def cmd_evolution(args) -> int:
    rep = harness.evolution(args.sigma, args.ks, args.dm, args.sizes, args.trials, args.seed,
                            variant=args.variant, sigma0=args.sigma0)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    table = harness.evolution_table(rep)
    harness.write_records_csv({k: [r[k] for r in table] for k in table[0]},
                              args.out_dir / "evolution_table.csv")
    return _finish(rep, args)


def _images(args):
    if args.image_dir is not None:
        paths = sorted(p for p in Path(args.image_dir).iterdir()
                       if p.suffix.lower() in (".ppm", ".csv"))
        return [(p.name, load_image_lab(p)) for p in paths], None
    imgs = list(harness.synthetic_flat_images(args.images, args.size, args.sigma, args.seed))
    return imgs, "synthetic"


def cmd_scale_size(args) -> int:
    images, kind = _images(args)
    hp = _hp(args)
    brackets = harness.SIZE_BRACKETS if (kind and args.size == 256 and hp.k_s == 5
                                         and math.isinf(hp.d_m)) else None
    rep = harness.scale_size(images, hp, args.rho, args.variant, brackets)
    return _finish(rep, args)


def cmd_scale_params(args) -> int:
    images, kind = _images(args)
    hp = _hp(args)
    brackets = harness.PARAM_BRACKETS if (kind and args.size == 256 and hp.k_s == 5
                                          and math.isinf(hp.d_m)) else None
    rep = harness.scale_params(images, hp, args.kappa, args.variant, brackets)
    return _finish(rep, args)


def cmd_bicolor_check(args) -> int:
    rep = harness.bicolor_check(args.ks, args.sigma, args.gap, args.trials, args.seed,
                                sigma0=args.sigma0)
    return _finish(rep, args)


def cmd_pq_check(args) -> int:
    rep = harness.pq_check(args.ks, args.sigma, args.eps, args.trials, args.seed,
                           sigma0=args.sigma0)
    return _finish(rep, args)


def cmd_moments_check(args) -> int:
    rep = harness.moments_check(args.ks, args.sigma, args.trials, args.seed,
                                sigma0=args.sigma0)
    return _finish(rep, args)


def _write_generated(image: np.ndarray, out: Path) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".csv":
        save_lab_csv(image, out)
    else:
        write_ppm(out, cielab_to_rgb(image))
    print(f"wrote {out}")


def cmd_gen_flat(args) -> int:
    img = flat_image(FlatModel(args.height, args.width, args.color, args.sigma, args.seed))
    _write_generated(img, args.out)
    return 0


def cmd_gen_bicolor(args) -> int:
    j0 = args.j0 if args.j0 is not None else args.width // 2
    img = bicolor_image(BicolorModel(args.height, args.width, j0, args.c1, args.c2,
                                     args.sigma, args.seed))
    _write_generated(img, args.out)
    return 0


def cmd_to_lab(args) -> int:
    _write_generated(rgb_to_cielab(load_ppm(args.image)), args.out)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quickshift-scale",
        description="Quickshift segmentation, superpixel-count predictions and scaling checks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a PPM or i,j,L,a,b CSV image")
    p.add_argument("image")
    _add_hp(p)
    p.add_argument("--variant", choices=harness.VARIANTS, default="original")
    p.add_argument("--compat-squared-dm", action="store_true",
                   help="compare squared distances against d_m")
    p.add_argument("--cut-after-argmin", action="store_true",
                   help="pick the nearest higher pixel first, then drop long links")
    p.add_argument("--labels", choices=("csv", "pgm16"), default="csv")
    p.add_argument("--out-dir", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("predict", help="expected number of local maxima")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--ks", type=float, default=5.0)
    p.add_argument("--kw", type=int, default=None, help="override k_w = ceil(3 k_s)")
    p.add_argument("--dm", type=_dm, default=_dm("10"))
    p.add_argument("--method", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--margin", type=int, default=None,
                   help="exact method: count over the region at this distance from borders")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("rescale", help="hyperparameters for an image resized by rho")
    p.add_argument("--ks", type=float, default=5.0)
    p.add_argument("--dm", type=_dm, default=_dm("10"))
    p.add_argument("--rho", type=float, required=True)
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("evolution", help="local maxima and superpixels versus image size")
    _add_hp(p)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--sizes", type=_int_list, default=[100, 150, 200])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--variant", choices=harness.VARIANTS, default="original")
    _add_out(p)
    p.set_defaults(func=cmd_evolution)

    for name, func, flag, default, helptext in (
            ("scale-size", cmd_scale_size, "--rho", [2.0, 3.0], "downsampling factors"),
            ("scale-params", cmd_scale_params, "--kappa", [0.5, 2.0], "hyperparameter factors")):
        p = sub.add_parser(name, help=f"superpixel ratio under {helptext}")
        _add_hp(p, dm="inf")
        p.add_argument(flag, type=_float_list, default=default, help=helptext)
        p.add_argument("--image-dir", type=Path, default=None,
                       help="PPM / CSV images; default is the synthetic flat set")
        p.add_argument("--images", type=int, default=20, help="number of synthetic images")
        p.add_argument("--size", type=int, default=256, help="synthetic image side")
        p.add_argument("--sigma", type=float, default=harness.SYNTHETIC_SIGMA,
                       help="synthetic noise level")
        p.add_argument("--variant", choices=harness.VARIANTS, default="original")
        _add_out(p)
        p.set_defaults(func=func)

    p = sub.add_parser("bicolor-check", help="density increase away from a colour boundary")
    p.add_argument("--ks", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--gap", type=float, default=15.0, help="||c1 - c2||")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--sigma0", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)
    p.set_defaults(func=cmd_bicolor_check)

    p = sub.add_parser("pq-check", help="tail of |P - Q| on a flat image")
    p.add_argument("--ks", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--eps", type=_float_list, default=[0.5, 1.0])
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--sigma0", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)
    p.set_defaults(func=cmd_pq_check)

    p = sub.add_parser("moments-check", help="mean and variance of P on a flat image")
    p.add_argument("--ks", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--sigma0", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)
    p.set_defaults(func=cmd_moments_check)

    p = sub.add_parser("gen-flat", help="write a flat synthetic image (.ppm or .csv)")
    p.add_argument("out", type=Path)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--color", type=_color, default=(50.0, 0.0, 0.0), help="L,a,b")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_flat)

    p = sub.add_parser("gen-bicolor", help="write a bicolor synthetic image (.ppm or .csv)")
    p.add_argument("out", type=Path)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--j0", type=int, default=None,
                   help="number of left-patch columns (default width/2)")
    p.add_argument("--c1", type=_color, default=(50.0, 0.0, 0.0))
    p.add_argument("--c2", type=_color, default=(65.0, 0.0, 0.0))
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_bicolor)

    p = sub.add_parser("to-lab", help="convert a PPM to an i,j,L,a,b CSV")
    p.add_argument("image")
    p.add_argument("out", type=Path)
    p.set_defaults(func=cmd_to_lab)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
