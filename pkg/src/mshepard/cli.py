"""Command-line entry point: ``mshepard <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from . import accuracy, convergence, raster_io
from .errors import MShepardError
from .shepard import ThresholdWarning, build_model, order_threshold

log = logging.getLogger("mshepard")


def _read(path, flag):
    try:
        return raster_io.read_asc(path)
    except MShepardError as exc:
        raise MShepardError(f"{flag} {path}: {exc}") from exc
    except OSError as exc:
        raise MShepardError(f"{flag} {path}: {exc.strerror or exc}") from exc


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def cmd_resample(args) -> int:
    src = raster_io.crop_nodata_collar(_read(args.input, "input"))
    if args.cellsize is not None:
        target = args.cellsize
    else:
        target = src.cellsize / args.factor
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        model = build_model(src.to_grid(), args.r, args.s, args.u)
    cv = model.covering
    thr = order_threshold(args.r, args.s)
    print(f"blocks K={cv.K} L={cv.L} t={cv.t} l_max={model.l_max:.6g}")
    print(f"order threshold (3+r+s)/t = {thr:.4f}, u = {args.u:g}")
    if args.u <= thr:
        log.warning("--u %g is not above the order threshold %.4f", args.u, thr)
    out = raster_io.resample(src, target, args.r, args.s, args.u, fast=args.fast)
    raster_io.write_asc(out, args.output)
    print(f"wrote {args.output}: {out.nrows}x{out.ncols} cells of {out.cellsize:g}")
    return 0


def cmd_decimate(args) -> int:
    src = _read(args.input, "input")
    out = raster_io.decimate(src, args.factor)
    raster_io.write_asc(out, args.output)
    print(f"wrote {args.output}: {out.nrows}x{out.ncols} cells of {out.cellsize:g}")
    return 0


def cmd_vaccuracy(args) -> int:
    ref = _read(args.ref, "ref")
    test = _read(args.test, "test")
    rep = accuracy.vertical_accuracy(ref, test, args.threshold)
    rep.to_csv(args.report)
    if args.mask:
        values = np.where(ref.nodata_mask | test.nodata_mask, ref.nodata,
                          rep.exceed_mask.astype(float))
        mask = raster_io.Raster(ref.xll, ref.yll, ref.cellsize, values, ref.nodata)
        raster_io.write_asc(mask, args.mask)
    sys.stdout.write(rep.summary())
    return 0


def cmd_haccuracy(args) -> int:
    ref = _read(args.ref, "ref")
    test = _read(args.test, "test")
    levels = args.levels
    if levels is None:
        levels = accuracy.default_levels(ref, args.nlevels)
    rep = accuracy.horizontal_discrepancy(ref, test, levels)
    rep.to_csv(args.report)
    sys.stdout.write(rep.summary())
    return 0


def cmd_convergence(args) -> int:
    f = convergence.TEST_FUNCTIONS[args.function]
    thr = order_threshold(args.r, args.s)
    if args.u <= thr:
        log.warning("--u %g is not above the order threshold %.4f", args.u, thr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ThresholdWarning)
        rows = convergence.run_convergence(f, args.r, args.s, args.u, args.sizes,
                                           args.samples)
    convergence.write_table(rows, args.table)
    for row in rows:
        order = "" if row.observed_order is None else f"{row.observed_order:.3f}"
        print(f"{row.grid_size[0]:>5} {row.l_max:.6g} {row.max_err:.3e} {order}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mshepard",
        description="Multinode Shepard interpolation for gridded elevation data.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def degrees(sp):
        sp.add_argument("--r", type=_positive_int, default=2, help="x degree (default 2)")
        sp.add_argument("--s", type=_positive_int, default=2, help="y degree (default 2)")
        sp.add_argument("--u", type=_positive_float, default=4.0,
                        help="weight exponent (default 4)")

    sp = sub.add_parser("resample", help="re-grid a raster through the interpolant")
    sp.add_argument("input")
    sp.add_argument("output")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--cellsize", type=_positive_float, help="target cell size")
    g.add_argument("--factor", type=_positive_int,
                   help="refinement factor: target cell size = source / factor")
    degrees(sp)
    sp.add_argument("--fast", action="store_true",
                    help="skip blocks with weight below 1e-16 of the largest")
    sp.set_defaults(func=cmd_resample)

    sp = sub.add_parser("decimate", help="subsample a raster by an integer factor")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--factor", type=_positive_int, required=True)
    sp.set_defaults(func=cmd_decimate)

    sp = sub.add_parser("vaccuracy", help="vertical accuracy of TEST against REF")
    sp.add_argument("ref")
    sp.add_argument("test")
    sp.add_argument("report", help="CSV report path")
    sp.add_argument("mask", nargs="?", help="optional .asc exceedance mask path")
    sp.add_argument("--threshold", type=float, default=3.0,
                    help="exceedance threshold in map units (default 3)")
    sp.set_defaults(func=cmd_vaccuracy)

    sp = sub.add_parser("haccuracy", help="horizontal discrepancy of TEST against REF")
    sp.add_argument("ref")
    sp.add_argument("test")
    sp.add_argument("report", help="CSV report path")
    sp.add_argument("--levels", type=_float_list,
                    help="comma-separated contour levels (default: equispaced)")
    sp.add_argument("--nlevels", type=_positive_int, default=10,
                    help="number of default levels (default 10)")
    sp.set_defaults(func=cmd_haccuracy)

    sp = sub.add_parser("convergence", help="empirical convergence order study")
    sp.add_argument("table", help="CSV output path")
    sp.add_argument("--function", choices=sorted(convergence.TEST_FUNCTIONS), default="franke")
    degrees(sp)
    sp.add_argument("--sizes", type=_int_list, required=True,
                    help="comma-separated node counts per axis, e.g. 7,13,25,49")
    sp.add_argument("--samples", type=_positive_int, default=convergence.SAMPLE_DENSITY,
                    help="error sample points per axis (default 201)")
    sp.set_defaults(func=cmd_convergence)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MShepardError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
