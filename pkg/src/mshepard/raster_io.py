"""ESRI ASCII grid rasters: reading, writing, decimation and resampling.

Values are cell-centred. Column ``c`` (0-based, west to east) and row ``r``
(0-based, north to south) hold the elevation at::

    x = xll + (c + 0.5) * cellsize
    y = yll + (nrows - r - 0.5) * cellsize

where ``(xll, yll)`` is the lower-left corner of the raster.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass

import numpy as np

from .errors import EmptyResult, NodataPresent, ParseError
from .grid import CartesianGrid
from .shepard import build_model, eval_grid

__all__ = [
    "Raster",
    "read_asc",
    "write_asc",
    "decimate",
    "resample",
    "bilinear_resample",
    "crop_nodata_collar",
]

log = logging.getLogger(__name__)

DEFAULT_NODATA = -9999.0
_HEADER_KEYS = {
    "ncols", "nrows", "xllcorner", "xllcenter", "yllcorner", "yllcenter",
    "cellsize", "nodata_value",
}


@dataclass(frozen=True, eq=False)
class Raster:
    xll: float
    yll: float
    cellsize: float
    values: np.ndarray  # (nrows, ncols), row 0 = north
    nodata: float = DEFAULT_NODATA

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("raster values must be a non-empty 2-D array")
        if not self.cellsize > 0:
            raise ValueError(f"cellsize must be positive, got {self.cellsize}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        for name in ("xll", "yll", "cellsize", "nodata"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def nrows(self) -> int:
        return self.values.shape[0]

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def x_centers(self) -> np.ndarray:
        return self.xll + (np.arange(self.ncols) + 0.5) * self.cellsize

    @property
    def y_centers(self) -> np.ndarray:
        """Cell-centre y coordinates, ascending (south to north)."""
        return self.yll + (np.arange(self.nrows) + 0.5) * self.cellsize

    @property
    def nodata_mask(self) -> np.ndarray:
        return (self.values == self.nodata) | ~np.isfinite(self.values)

    def same_geometry(self, other: "Raster") -> bool:
        return (
            self.values.shape == other.values.shape
            and self.xll == other.xll
            and self.yll == other.yll
            and self.cellsize == other.cellsize
        )

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return (
            self.same_geometry(other)
            and self.nodata == other.nodata
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    def to_grid(self) -> CartesianGrid:
        """Node grid of the cell centres with ascending axes.

        Raises :class:`NodataPresent` if any cell holds nodata.
        """
        if self.nodata_mask.any():
            raise NodataPresent(
                f"{int(self.nodata_mask.sum())} nodata cells inside the raster; "
                "crop the collar or fill them first"
            )
        return CartesianGrid(self.x_centers, self.y_centers, self.values[::-1])

    @classmethod
    def from_grid(cls, grid: CartesianGrid, nodata: float = DEFAULT_NODATA) -> "Raster":
        """Raster whose cell centres are the nodes of a uniform square grid."""
        dx, dy = np.diff(grid.x), np.diff(grid.y)
        cs = dx[0]
        if not (np.allclose(dx, cs, rtol=1e-9, atol=0) and np.allclose(dy, cs, rtol=1e-9, atol=0)):
            raise ValueError("grid spacing must be uniform and equal in x and y")
        return cls(grid.x[0] - cs / 2, grid.y[0] - cs / 2, cs, grid.z[::-1], nodata)


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="ascii") as fh:
            return fh.read()
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    return data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data


def read_asc(source) -> Raster:
    """Parse an ESRI ASCII grid from a path, bytes, or a text/binary stream.

    Header keys are case-insensitive; ``xllcenter``/``yllcenter`` origins are
    converted to the corner convention.
    """
    lines = _read_text(source).splitlines()

    header = {}
    lineno = 0
    while lineno < len(lines):
        parts = lines[lineno].split()
        if not parts:
            lineno += 1
            continue
        key = parts[0].lower()
        if key not in _HEADER_KEYS:
            break
        if len(parts) != 2:
            raise ParseError(f"malformed header entry {lines[lineno]!r}", lineno + 1)
        if key in header:
            raise ParseError(f"duplicate header key {parts[0]!r}", lineno + 1)
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric value for {parts[0]!r}", lineno + 1) from None
        lineno += 1

    for key in ("ncols", "nrows", "cellsize"):
        if key not in header:
            raise ParseError(f"missing header key {key!r}", lineno + 1)
    ncols, nrows = header["ncols"], header["nrows"]
    if ncols != int(ncols) or nrows != int(nrows) or ncols < 1 or nrows < 1:
        raise ParseError("ncols and nrows must be positive integers", 1)
    ncols, nrows = int(ncols), int(nrows)
    cs = header["cellsize"]
    if not cs > 0:
        raise ParseError(f"cellsize must be positive, got {cs}")
    origin = {}
    for axis in ("x", "y"):
        corner, center = f"{axis}llcorner", f"{axis}llcenter"
        if (corner in header) == (center in header):
            raise ParseError(f"need exactly one of {corner} / {center}")
        origin[axis] = header[corner] if corner in header else header[center] - cs / 2

    rows = []
    for i in range(lineno, len(lines)):
        parts = lines[i].split()
        if not parts:
            continue
        if len(parts) != ncols:
            raise ParseError(f"expected {ncols} values, found {len(parts)}", i + 1)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError("non-numeric raster value", i + 1) from None
    if len(rows) != nrows:
        raise ParseError(f"expected {nrows} data rows, found {len(rows)}", len(lines))
    return Raster(origin["x"], origin["y"], cs, np.array(rows),
                  header.get("nodata_value", DEFAULT_NODATA))


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_asc(raster: Raster, sink) -> None:
    """Write `raster` in corner convention with 17 significant digits."""
    out = io.StringIO()
    out.write(f"ncols {raster.ncols}\n")
    out.write(f"nrows {raster.nrows}\n")
    out.write(f"xllcorner {_fmt(raster.xll)}\n")
    out.write(f"yllcorner {_fmt(raster.yll)}\n")
    out.write(f"cellsize {_fmt(raster.cellsize)}\n")
    out.write(f"NODATA_value {_fmt(raster.nodata)}\n")
    for row in raster.values:
        out.write(" ".join(_fmt(v) for v in row))
        out.write("\n")
    text = out.getvalue()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    elif isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("ascii"))


def crop_nodata_collar(raster: Raster) -> Raster:
    """Drop border rows/columns made entirely of nodata.

    Raises :class:`NodataPresent` if nodata remains after cropping.
    """
    mask = raster.nodata_mask
    if not mask.any():
        return raster
    rows = np.flatnonzero(~mask.all(axis=1))
    cols = np.flatnonzero(~mask.all(axis=0))
    if rows.size == 0:
        raise NodataPresent("raster contains only nodata")
    r0, r1, c0, c1 = rows[0], rows[-1] + 1, cols[0], cols[-1] + 1
    inner = raster.values[r0:r1, c0:c1]
    if ((inner == raster.nodata) | ~np.isfinite(inner)).any():
        raise NodataPresent("nodata cells inside the raster hull")
    log.warning("cropped nodata collar: rows %d:%d, cols %d:%d", r0, r1, c0, c1)
    cs = raster.cellsize
    return Raster(raster.xll + c0 * cs, raster.yll + (raster.nrows - r1) * cs,
                  cs, inner, raster.nodata)


def decimate(raster: Raster, factor: int) -> Raster:
    """Keep every `factor`-th cell, starting from the south-west one.

    Pure subsampling: retained cells carry their original values and the
    cell size grows by `factor`. Trailing cells that do not fit are dropped.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if factor == 1:
        return raster
    nc = (raster.ncols - 1) // factor + 1
    nr = (raster.nrows - 1) // factor + 1
    if nc < 2 or nr < 2:
        raise EmptyResult(f"decimation by {factor} leaves a {nr}x{nc} raster")
    south_up = raster.values[::-1]
    kept = south_up[: (nr - 1) * factor + 1 : factor, : (nc - 1) * factor + 1 : factor]
    cs = raster.cellsize
    shift = 0.5 * cs * (1 - factor)  # new corner so old first centre stays a centre
    return Raster(raster.xll + shift, raster.yll + shift, cs * factor, kept[::-1], raster.nodata)


def _target_axis(first: float, last: float, step: float) -> np.ndarray:
    # tolerate round-off when the step divides the span exactly
    count = int(np.floor((last - first) / step + 1e-9)) + 1
    return first + np.arange(count) * step


def _target_raster(raster: Raster, target_cellsize: float, values_fn) -> Raster:
    target_cellsize = float(target_cellsize)
    if not target_cellsize > 0:
        raise ValueError(f"target cellsize must be positive, got {target_cellsize}")
    xc, yc = raster.x_centers, raster.y_centers
    tx = _target_axis(xc[0], xc[-1], target_cellsize)
    ty = _target_axis(yc[0], yc[-1], target_cellsize)
    z = values_fn(tx, ty)
    half = target_cellsize / 2
    return Raster(xc[0] - half, yc[0] - half, target_cellsize, z[::-1], raster.nodata)


def resample(raster: Raster, target_cellsize: float, r: int = 2, s: int = 2,
             u: float = 4.0, fast: bool = False) -> Raster:
    """Re-grid `raster` to `target_cellsize` through the Shepard interpolant.

    The target grid starts at the source's south-west cell centre and covers
    the source hull, so target cells that coincide with source cells get the
    source values exactly.
    """
    raster = crop_nodata_collar(raster)
    model = build_model(raster.to_grid(), r, s, u, fast=fast)
    return _target_raster(raster, target_cellsize, lambda tx, ty: eval_grid(model, tx, ty))


def bilinear_resample(raster: Raster, target_cellsize: float) -> Raster:
    """Cell-wise bilinear re-gridding, the degree-(1,1) single-cell baseline."""
    raster = crop_nodata_collar(raster)
    grid = raster.to_grid()

    def values(tx, ty):
        def locate(axis, q):
            i = np.clip(np.searchsorted(axis, q, side="right") - 1, 0, axis.size - 2)
            return i, (q - axis[i]) / (axis[i + 1] - axis[i])

        i, a = locate(grid.x, tx)
        j, b = locate(grid.y, ty)
        z = grid.z
        z00 = z[np.ix_(j, i)]
        z10 = z[np.ix_(j, i + 1)]
        z01 = z[np.ix_(j + 1, i)]
        z11 = z[np.ix_(j + 1, i + 1)]
        a = a[None, :]
        b = b[:, None]
        return (1 - b) * ((1 - a) * z00 + a * z10) + b * ((1 - a) * z01 + a * z11)

    return _target_raster(raster, target_cellsize, values)
