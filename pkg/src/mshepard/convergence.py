"""Empirical approximation order of the Shepard interpolant on uniform grids."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import IncompatibleSize
from .grid import CartesianGrid
from .shepard import ThresholdWarning, build_model, eval_grid, order_threshold

__all__ = ["ConvergenceRow", "franke", "run_convergence", "write_table", "TEST_FUNCTIONS"]

SAMPLE_DENSITY = 201


def franke(x, y):
    """Franke's bivariate test function on the unit square."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t1 = 0.75 * np.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
    t2 = 0.75 * np.exp(-((9 * x + 1) ** 2) / 49 - (9 * y + 1) / 10)
    t3 = 0.5 * np.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
    t4 = -0.2 * np.exp(-((9 * x - 4) ** 2) - (9 * y - 7) ** 2)
    out = t1 + t2 + t3 + t4
    return float(out) if out.ndim == 0 else out


TEST_FUNCTIONS = {"franke": franke}


@dataclass(frozen=True)
class ConvergenceRow:
    grid_size: Tuple[int, int]
    l_max: float
    max_err: float
    observed_order: Optional[float] = None


def _size(entry) -> Tuple[int, int]:
    if isinstance(entry, (tuple, list)):
        m, n = entry
    else:
        m = n = entry
    return int(m), int(n)


def run_convergence(
    f: Callable,
    r: int,
    s: int,
    u: float,
    sizes: Sequence,
    sample_density: int = SAMPLE_DENSITY,
) -> List[ConvergenceRow]:
    """Fit the interpolant of `f` on uniform grids of [0, 1]^2 and measure the
    max error on a fixed ``sample_density^2`` uniform sample.

    `sizes` holds node counts per axis (an int for square grids, or an
    ``(m, n)`` pair). Observed orders ``log2(e_prev / e_curr)`` are reported
    only where ``l_max`` halves between consecutive sizes.
    """
    dims = [_size(e) for e in sizes]
    if not dims:
        raise IncompatibleSize("no grid sizes given")
    for (m, n) in dims:
        if m < r + 1 or n < s + 1 or (m - 1) % r or (n - 1) % s:
            raise IncompatibleSize(
                f"grid {m}x{n} is not compatible with degrees r={r}, s={s}: "
                "need (m-1) % r == 0 and (n-1) % s == 0"
            )
    for a, b in zip(dims, dims[1:]):
        if not (b[0] > a[0] and b[1] > a[1]):
            raise IncompatibleSize(f"sizes must be strictly increasing, got {a} then {b}")
    if u <= order_threshold(r, s):
        warnings.warn(
            f"u={u:g} is not above (3+r+s)/t = {order_threshold(r, s):.4g}",
            ThresholdWarning,
            stacklevel=2,
        )

    xs = np.linspace(0.0, 1.0, sample_density)
    exact = f(*np.meshgrid(xs, xs))
    rows: List[ConvergenceRow] = []
    for m, n in dims:
        grid = CartesianGrid.from_function(f, np.linspace(0, 1, m), np.linspace(0, 1, n))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ThresholdWarning)
            model = build_model(grid, r, s, u)
        err = float(np.abs(eval_grid(model, xs, xs) - exact).max())
        order = None
        if rows:
            prev = rows[-1]
            if math.isclose(prev.l_max / model.l_max, 2.0, rel_tol=1e-9) and err > 0 and prev.max_err > 0:
                order = math.log2(prev.max_err / err)
        rows.append(ConvergenceRow((m, n), model.l_max, err, order))
    return rows


def write_table(rows: Sequence[ConvergenceRow], sink) -> None:
    """CSV with columns ``m, n, l_max, max_err, observed_order``."""
    lines = ["m,n,l_max,max_err,observed_order"]
    for row in rows:
        order = "" if row.observed_order is None else repr(row.observed_order)
        lines.append(f"{row.grid_size[0]},{row.grid_size[1]},{row.l_max!r},{row.max_err!r},{order}")
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sink.write(text)
