"""Multinode Shepard interpolation on rectangular grids.

The interpolant blends the local block polynomials ``p_j`` with weights

    W_j(x) = prod_i |x - x_{j_i}|^-u / sum_l prod_i |x - x_{l_i}|^-u

where the products run over the ``t`` nodes of each block. Weights are
evaluated in the log domain: with ``S_j = sum_i log |x - x_{j_i}|``,
``W_j = exp(-u (S_j - S_min)) / sum_l exp(-u (S_l - S_min))``, which is the
same quantity without overflow or underflow for large ``t * u``.

Points closer than ``1e-12 * l_max`` to a grid node take the stored node
value, the limit of the blend at that node.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NodeCoincidence
from .grid import BlockCovering, CartesianGrid, build_covering, flatten_index
from .tensor_poly import LocalPolynomial, fit

__all__ = [
    "ShepardModel",
    "ThresholdWarning",
    "build_model",
    "order_threshold",
    "weights",
    "evaluate",
    "eval_grid",
    "nearest_node",
    "worker_count",
]

NODE_EPS = 1e-12
PRUNE_RATIO = 1e-16
WORKERS_ENV = "MSHEPARD_WORKERS"
_CHUNK_ELEMS = 1 << 21


class ThresholdWarning(UserWarning):
    """Exponent ``u`` is at or below ``(3 + r + s) / t``, outside the range
    where the approximation order ``min(r, s) + 1`` is guaranteed."""


def order_threshold(r: int, s: int) -> float:
    return (3 + r + s) / ((r + 1) * (s + 1))


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class ShepardModel:
    grid: CartesianGrid
    covering: BlockCovering
    u: float
    # coeffs[k, l] are the scaled-basis coefficients of block (k+1, l+1)
    coeffs: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    l_max: float
    fast: bool = False

    @property
    def r(self) -> int:
        return self.covering.r

    @property
    def s(self) -> int:
        return self.covering.s

    @property
    def eps_node(self) -> float:
        return NODE_EPS * self.l_max

    @property
    def polys(self) -> Tuple[LocalPolynomial, ...]:
        """Local polynomials in linear block order ``j = (k-1) L + l``."""
        cv = self.covering
        return tuple(
            LocalPolynomial(
                cv.r, cv.s, (float(cv.x_centers[k]), float(cv.y_centers[l])),
                float(self.hx[k]), float(self.hy[l]), self.coeffs[k, l],
            )
            for k in range(cv.K)
            for l in range(cv.L)
        )

    def __call__(self, x, y):
        return evaluate(self, x, y)


def build_model(grid: CartesianGrid, r: int = 2, s: int = 2, u: float = 4.0,
                fast: bool = False) -> ShepardModel:
    """Cover `grid` with blocks and fit one local polynomial per block.

    With ``fast=True`` evaluation skips blocks whose weight is provably below
    ``1e-16`` times the largest weight; the default sums over every block.
    """
    u = float(u)
    if not u > 0:
        raise ValueError(f"exponent u must be positive, got {u}")
    cv = build_covering(grid, r, s)
    if u <= order_threshold(cv.r, cv.s):
        warnings.warn(
            f"u={u:g} is not above (3+r+s)/t = {order_threshold(cv.r, cv.s):.4g}; "
            "the approximation order is not guaranteed",
            ThresholdWarning,
            stacklevel=2,
        )
    coeffs = np.empty((cv.K, cv.L, cv.r + 1, cv.s + 1))
    hx = np.empty(cv.K)
    hy = np.empty(cv.L)
    for k, i0 in enumerate(cv.x_starts):
        bx = grid.x[i0:i0 + cv.r + 1]
        for l, j0 in enumerate(cv.y_starts):
            by = grid.y[j0:j0 + cv.s + 1]
            p = fit(bx, by, grid.z[j0:j0 + cv.s + 1, i0:i0 + cv.r + 1])
            coeffs[k, l] = p.coeffs
            hx[k], hy[l] = p.hx, p.hy
    x_ext = grid.x[cv.x_starts + cv.r] - grid.x[cv.x_starts]
    y_ext = grid.y[cv.y_starts + cv.s] - grid.y[cv.y_starts]
    l_max = float(max(x_ext.max(), y_ext.max()))
    for a in (coeffs, hx, hy):
        a.flags.writeable = False
    return ShepardModel(grid, cv, u, coeffs, hx, hy, l_max, bool(fast))


def _nearest_axis(axis: np.ndarray, q: np.ndarray) -> np.ndarray:
    i = np.clip(np.searchsorted(axis, q), 1, axis.size - 1)
    # ties go to the lower index
    left_closer = (q - axis[i - 1]) <= (axis[i] - q)
    return np.where(left_closer, i - 1, i)


def _nearest(model: ShepardModel, x: np.ndarray, y: np.ndarray):
    g = model.grid
    mu = _nearest_axis(g.x, x)
    nu = _nearest_axis(g.y, y)
    return mu, nu, np.hypot(x - g.x[mu], y - g.y[nu])


def nearest_node(model: ShepardModel, x: float, y: float) -> Tuple[int, float]:
    """Grid node closest to ``(x, y)`` as ``(flattened index, distance)``.

    The nearest x and y coordinates are found independently by binary
    search; ties resolve to the lowest flattened index.
    """
    mu, nu, d = _nearest(model, np.atleast_1d(float(x)), np.atleast_1d(float(y)))
    g = model.grid
    return flatten_index(int(nu[0]) + 1, int(mu[0]) + 1, g.n, g.m), float(d[0])


def _log_sums(model, x, y, kw=None, lw=None):
    """``S[p, k, l] = sum of log distances`` from point p to the nodes of each
    block in the window ``kw x lw`` (index ranges into the block lattice)."""
    cv, g = model.covering, model.grid
    kw = range(cv.K) if kw is None else kw
    lw = range(cv.L) if lw is None else lw
    xs = cv.x_starts[kw.start:kw.stop]
    ys = cv.y_starts[lw.start:lw.stop]
    x0, x1 = xs[0], xs[-1] + cv.r + 1
    y0, y1 = ys[0], ys[-1] + cv.s + 1
    dx2 = np.square(x[:, None] - g.x[None, x0:x1])
    dy2 = np.square(y[:, None] - g.y[None, y0:y1])
    lg = dy2[:, :, None] + dx2[:, None, :]  # (P, ny, mx)
    with np.errstate(divide="ignore"):
        np.log(lg, out=lg)
    xs, ys = xs - x0, ys - y0
    # sliding-window sums over r+1 columns, then pick the block starts
    w = x1 - x0 - cv.r
    acc = lg[:, :, 0:w]
    for i in range(1, cv.r + 1):
        acc = acc + lg[:, :, i:i + w]
    acc = acc[:, :, xs]
    h = y1 - y0 - cv.s
    S = acc[:, 0:h, :]
    for j in range(1, cv.s + 1):
        S = S + acc[:, j:j + h, :]
    # halve at the end: log |d| = 0.5 log |d|^2
    return 0.5 * S[:, ys, :].transpose(0, 2, 1)  # (P, K', L')


def _poly_values(model, x, y, kw, lw):
    cv = model.covering
    X = (x[:, None] - cv.x_centers[None, kw.start:kw.stop]) / model.hx[kw.start:kw.stop]
    Y = (y[:, None] - cv.y_centers[None, lw.start:lw.stop]) / model.hy[lw.start:lw.stop]
    X = X[:, :, None]
    Y = Y[:, None, :]
    c = model.coeffs[kw.start:kw.stop, lw.start:lw.stop]
    out = 0.0
    for i in range(cv.r, -1, -1):
        row = 0.0
        for j in range(cv.s, -1, -1):
            row = row * Y + c[:, :, i, j]
        out = out * X + row
    return out  # (P, K', L')


def _normalized(S, u):
    S = S.reshape(S.shape[0], -1)
    e = np.exp(-u * (S - S.min(axis=1, keepdims=True)))
    return e / e.sum(axis=1, keepdims=True)


def _blend(model, x, y, kw, lw):
    w = _normalized(_log_sums(model, x, y, kw, lw), model.u)
    p = _poly_values(model, x, y, kw, lw).reshape(w.shape)
    return (w * p).sum(axis=1)


def _prune_window(model, x, y):
    """Smallest block window holding every block whose weight may exceed
    ``PRUNE_RATIO`` times the largest weight, for all points in (x, y)."""
    cv, g = model.covering, model.grid
    tx0, tx1, ty0, ty1 = x.min(), x.max(), y.min(), y.max()
    bx0, bx1 = g.x[cv.x_starts], g.x[cv.x_starts + cv.r]
    by0, by1 = g.y[cv.y_starts], g.y[cv.y_starts + cv.s]
    gx = np.maximum(0.0, np.maximum(bx0 - tx1, tx0 - bx1))
    gy = np.maximum(0.0, np.maximum(by0 - ty1, ty0 - by1))
    with np.errstate(divide="ignore"):
        lower = cv.t * 0.5 * np.log(gx[:, None] ** 2 + gy[None, :] ** 2)
    # reference block: the one nearest the tile centre
    cx, cy = 0.5 * (tx0 + tx1), 0.5 * (ty0 + ty1)
    dcx = np.maximum(0.0, np.maximum(bx0 - cx, cx - bx1))
    dcy = np.maximum(0.0, np.maximum(by0 - cy, cy - by1))
    kc, lc = int(np.argmin(dcx)), int(np.argmin(dcy))
    s_ref = _log_sums(model, x, y, range(kc, kc + 1), range(lc, lc + 1)).max()
    keep = lower - s_ref <= -np.log(PRUNE_RATIO) / model.u
    ks = np.flatnonzero(keep.any(axis=1))
    ls = np.flatnonzero(keep.any(axis=0))
    return range(ks[0], ks[-1] + 1), range(ls[0], ls[-1] + 1)


def _eval_chunk(model, x, y):
    out = np.empty(x.size)
    mu, nu, d = _nearest(model, x, y)
    hit = d < model.eps_node
    out[hit] = model.grid.z[nu[hit], mu[hit]]
    miss = ~hit
    if not miss.any():
        return out
    xm, ym = x[miss], y[miss]
    cv = model.covering
    if not model.fast:
        out[miss] = _blend(model, xm, ym, range(cv.K), range(cv.L))
        return out
    # bin points into tiles of about two blocks a side
    side = 2.0 * model.l_max
    bins = np.floor((xm - model.grid.x[0]) / side) * 1e9 + np.floor((ym - model.grid.y[0]) / side)
    _, inverse = np.unique(bins, return_inverse=True)
    vals = np.empty(xm.size)
    for b in range(inverse.max() + 1):
        sel = inverse == b
        kw, lw = _prune_window(model, xm[sel], ym[sel])
        vals[sel] = _blend(model, xm[sel], ym[sel], kw, lw)
    out[miss] = vals
    return out


def _chunk_size(model) -> int:
    g = model.grid
    return max(1, _CHUNK_ELEMS // (g.m * g.n + model.covering.K * model.covering.L))


def evaluate(model: ShepardModel, x, y):
    """Evaluate the interpolant at points ``(x, y)`` (scalars or arrays)."""
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = xa.shape
    xf, yf = xa.ravel(), ya.ravel()
    step = _chunk_size(model)
    starts = range(0, xf.size, step)
    if len(starts) <= 1:
        res = _eval_chunk(model, xf, yf)
    else:
        res = np.empty(xf.size)

        def job(i):
            res[i:i + step] = _eval_chunk(model, xf[i:i + step], yf[i:i + step])

        workers = min(worker_count(), len(starts))
        if workers == 1:
            for i in starts:
                job(i)
        else:
            with ThreadPoolExecutor(workers) as ex:
                list(ex.map(job, starts))
    if shape == ():
        return float(res[0])
    return res.reshape(shape)


def eval_grid(model: ShepardModel, xs, ys) -> np.ndarray:
    """Matrix ``M[nu, mu] = evaluate(model, xs[mu], ys[nu])``."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    xx, yy = np.meshgrid(xs, ys)
    return evaluate(model, xx, yy)


def weights(model: ShepardModel, x, y) -> np.ndarray:
    """Shepard weights at ``(x, y)`` in linear block order, shape ``(..., K*L)``.

    Raises :class:`NodeCoincidence` if a point lies within the node-hit
    tolerance of a grid node, where the weights are undefined (0/0).
    """
    xa, ya = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    xf, yf = xa.ravel(), ya.ravel()
    _, _, d = _nearest(model, xf, yf)
    if np.any(d < model.eps_node):
        raise NodeCoincidence("weights are undefined at grid nodes; use evaluate()")
    w = _normalized(_log_sums(model, xf, yf), model.u)
    return w.reshape(xa.shape + (w.shape[1],))
