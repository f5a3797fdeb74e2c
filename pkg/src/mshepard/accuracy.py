"""Vertical and horizontal accuracy of a test raster against a reference.

Horizontal discrepancy ``H_d`` is the total area enclosed between
corresponding contours divided by the mean total contour length. The area
between the contours of level ``c`` is measured as the area of the
symmetric difference of the superlevel sets ``{z_ref >= c}`` and
``{z_test >= c}``, sampled 4 x 4 times per grid cell on the bilinear surface.
When contours pair up one to one this is exactly the area between them.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .errors import EmptyLevels, GridMismatch
from .raster_io import Raster

__all__ = [
    "VerticalReport",
    "HorizontalReport",
    "vertical_accuracy",
    "contour_segments",
    "contour_length",
    "default_levels",
    "horizontal_discrepancy",
]

SUBSAMPLES = 4


def _num(v: float) -> str:
    return repr(float(v))


def _write_rows(rows, sink) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    text = buf.getvalue()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sink.write(text)


@dataclass(frozen=True, eq=False)
class VerticalReport:
    mean_abs: float
    sd_abs: float
    max_abs: float
    count: int
    threshold: float
    exceed_mask: np.ndarray  # same shape as the rasters, row 0 = north

    @property
    def exceed_count(self) -> int:
        return int(self.exceed_mask.sum())

    def to_csv(self, sink) -> None:
        _write_rows(
            [
                ["metric", "value"],
                ["mean_abs", _num(self.mean_abs)],
                ["sd_abs", _num(self.sd_abs)],
                ["max_abs", _num(self.max_abs)],
                ["count", str(self.count)],
                ["threshold", _num(self.threshold)],
                ["exceed_count", str(self.exceed_count)],
            ],
            sink,
        )

    def summary(self) -> str:
        return (
            f"cells compared: {self.count}\n"
            f"mean |error|: {self.mean_abs:.3f}\n"
            f"sd |error|: {self.sd_abs:.3f}\n"
            f"max |error|: {self.max_abs:.3f}\n"
            f"cells with |error| > {self.threshold:g}: {self.exceed_count}\n"
        )


@dataclass(frozen=True, eq=False)
class HorizontalReport:
    levels: np.ndarray
    areas: np.ndarray
    lengths_ref: np.ndarray
    lengths_test: np.ndarray

    @property
    def area_sum(self) -> float:
        return float(self.areas.sum())

    @property
    def len_ref(self) -> float:
        return float(self.lengths_ref.sum())

    @property
    def len_test(self) -> float:
        return float(self.lengths_test.sum())

    @property
    def h_d(self) -> float:
        return _ratio(self.area_sum, self.len_ref, self.len_test)

    def to_csv(self, sink) -> None:
        rows = [["level", "area", "len_ref", "len_test", "h_d"]]
        for c, a, lr, lt in zip(self.levels, self.areas, self.lengths_ref, self.lengths_test):
            rows.append([_num(c), _num(a), _num(lr), _num(lt), _num(_ratio(a, lr, lt))])
        rows.append(["total", _num(self.area_sum), _num(self.len_ref),
                     _num(self.len_test), _num(self.h_d)])
        _write_rows(rows, sink)

    def summary(self) -> str:
        return (
            f"levels: {len(self.levels)}\n"
            f"area between contours: {self.area_sum:.3f}\n"
            f"contour length ref/test: {self.len_ref:.3f} / {self.len_test:.3f}\n"
            f"H_d: {self.h_d:.3f}\n"
        )


def _ratio(area, len_ref, len_test) -> float:
    mean_len = 0.5 * (len_ref + len_test)
    if mean_len > 0:
        return float(area / mean_len)
    return 0.0 if area == 0 else float("inf")


def _check_pair(ref: Raster, test: Raster) -> None:
    if not ref.same_geometry(test):
        raise GridMismatch(
            f"raster geometry differs: {ref.nrows}x{ref.ncols} at ({ref.xll}, {ref.yll}) "
            f"cell {ref.cellsize} vs {test.nrows}x{test.ncols} at ({test.xll}, {test.yll}) "
            f"cell {test.cellsize}"
        )


def vertical_accuracy(ref: Raster, test: Raster, threshold: float = 3.0) -> VerticalReport:
    """Statistics of ``|ref - test|`` over cells valid in both rasters.

    The standard deviation is the population one.
    """
    _check_pair(ref, test)
    valid = ~(ref.nodata_mask | test.nodata_mask)
    if not valid.any():
        raise GridMismatch("no cell is valid in both rasters")
    err = np.abs(ref.values - test.values)
    e = err[valid]
    mask = np.zeros(err.shape, dtype=bool)
    mask[valid] = e > threshold
    return VerticalReport(float(e.mean()), float(e.std()), float(e.max()), int(e.size),
                          float(threshold), mask)


def contour_segments(raster: Raster, level: float) -> np.ndarray:
    """Marching-squares segments of the ``level`` iso-line, shape ``(N, 2, 2)``.

    Nodes are cell centres; a node is inside when ``z >= level``. Crossings
    are linearly interpolated along cell edges and saddle cells are resolved
    by the average of the four corners. Cells touching nodata are skipped.
    """
    z = raster.values[::-1].astype(float)
    bad = raster.nodata_mask[::-1]
    a, b, c, d = z[:-1, :-1], z[:-1, 1:], z[1:, 1:], z[1:, :-1]  # bl, br, tr, tl
    skip = bad[:-1, :-1] | bad[:-1, 1:] | bad[1:, 1:] | bad[1:, :-1]
    ia, ib, ic, id_ = (v >= level for v in (a, b, c, d))

    def frac(p, q):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (level - p) / (q - p)

    jj, ii = np.meshgrid(np.arange(a.shape[0]), np.arange(a.shape[1]), indexing="ij")
    # edge order: bottom (a-b), right (b-c), top (d-c), left (a-d)
    cross = np.stack([ia != ib, ib != ic, id_ != ic, ia != id_], axis=-1) & ~skip[..., None]
    px = np.stack([ii + frac(a, b), ii + 1.0, ii + frac(d, c), ii + 0.0], axis=-1)
    py = np.stack([jj + 0.0, jj + frac(b, c), jj + 1.0, jj + frac(a, d)], axis=-1)

    ncross = cross.sum(axis=-1)
    pairs = []
    two = ncross == 2
    if two.any():
        order = np.argsort(~cross[two], axis=-1, kind="stable")[:, :2]
        pairs.append((two, order[:, 0], order[:, 1]))
    four = ncross == 4
    if four.any():
        center_in = (a + b + c + d)[four] / 4 >= level
        # cut off the corners whose side differs from the centre's
        cut_bl = ia[four] != center_in
        e1 = np.zeros(cut_bl.size, dtype=int)  # bl: bottom-left, br: bottom-right
        e2 = np.where(cut_bl, 3, 1)
        e3 = np.where(cut_bl, 1, 2)            # tr: right-top, tl: top-left
        e4 = np.where(cut_bl, 2, 3)
        pairs.append((four, e1, e2))
        pairs.append((four, e3, e4))

    segs = []
    for sel, e_from, e_to in pairs:
        x, y = px[sel], py[sel]
        rows = np.arange(x.shape[0])
        p0 = np.stack([x[rows, e_from], y[rows, e_from]], axis=-1)
        p1 = np.stack([x[rows, e_to], y[rows, e_to]], axis=-1)
        segs.append(np.stack([p0, p1], axis=1))
    if not segs:
        return np.empty((0, 2, 2))
    out = np.concatenate(segs) * raster.cellsize
    out[..., 0] += raster.x_centers[0]
    out[..., 1] += raster.y_centers[0]
    return out


def contour_length(raster: Raster, level: float) -> float:
    """Total length of the ``level`` iso-contour, in map units."""
    seg = contour_segments(raster, level)
    if seg.size == 0:
        return 0.0
    return float(np.hypot(*(seg[:, 1] - seg[:, 0]).T).sum())


def default_levels(raster: Raster, count: int = 10) -> np.ndarray:
    """`count` equispaced levels strictly between the raster's min and max."""
    v = raster.values[~raster.nodata_mask]
    return np.linspace(v.min(), v.max(), count + 2)[1:-1]


def _subsampled(raster: Raster):
    """Bilinear surface sampled at the 4 x 4 sub-cell centres of each cell."""
    z = raster.values[::-1]
    bad = raster.nodata_mask[::-1]
    t = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES
    a, b = t[None, None, None, :], t[None, :, None, None]  # x offset, y offset
    z00 = z[:-1, :-1][:, None, :, None]
    z10 = z[:-1, 1:][:, None, :, None]
    z01 = z[1:, :-1][:, None, :, None]
    z11 = z[1:, 1:][:, None, :, None]
    f = (1 - b) * ((1 - a) * z00 + a * z10) + b * ((1 - a) * z01 + a * z11)
    skip = bad[:-1, :-1] | bad[:-1, 1:] | bad[1:, :-1] | bad[1:, 1:]
    skip = np.broadcast_to(skip[:, None, :, None], f.shape)
    return f.reshape(-1), skip.reshape(-1)


def horizontal_discrepancy(ref: Raster, test: Raster, levels=None) -> HorizontalReport:
    """Per-level areas between contours and contour lengths, summarised as
    ``H_d = sum(area) / ((sum(len_ref) + sum(len_test)) / 2)``."""
    _check_pair(ref, test)
    levels = default_levels(ref) if levels is None else np.atleast_1d(np.asarray(levels, float))
    if levels.size == 0:
        raise EmptyLevels("at least one contour level is required")
    fr, skip_r = _subsampled(ref)
    ft, skip_t = _subsampled(test)
    valid = ~(skip_r | skip_t)
    fr, ft = fr[valid], ft[valid]
    sample_area = ref.cellsize ** 2 / SUBSAMPLES ** 2
    areas = np.array([np.count_nonzero((fr >= c) != (ft >= c)) * sample_area for c in levels])
    len_ref = np.array([contour_length(ref, c) for c in levels])
    len_test = np.array([contour_length(test, c) for c in levels])
    return HorizontalReport(levels, areas, len_ref, len_test)
