"""Local tensor-product interpolating polynomials on one node block.

A block polynomial is stored in a scaled monomial basis centred at the block
barycenter ``(xb, yb)``::

    p(x, y) = sum_{i<=r, j<=s} a[i, j] * ((x - xb) / hx)**i * ((y - yb) / hy)**j

with ``hx = max |x_i - xb|`` (same for y). The coefficients come from the
``t x t`` Vandermonde system, ``t = (r+1)(s+1)``, solved by Gaussian
elimination with partial pivoting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import SingularSystem

__all__ = [
    "LocalPolynomial",
    "DerivativeBounds",
    "gauss_solve",
    "vandermonde",
    "fit",
    "evaluate",
    "node_polynomials",
    "stancu_bound",
]

PIVOT_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class LocalPolynomial:
    r: int
    s: int
    center: Tuple[float, float]
    hx: float
    hy: float
    coeffs: np.ndarray  # shape (r + 1, s + 1), coeffs[i, j] multiplies X**i Y**j

    def __post_init__(self):
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("scale factors must be positive")
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.r + 1, self.s + 1):
            raise ValueError(f"coeffs must have shape {(self.r + 1, self.s + 1)}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x, y):
        return evaluate(self, x, y)


@dataclass(frozen=True)
class DerivativeBounds:
    """Sup-norm bounds of ``f^(r+1,0)``, ``f^(0,s+1)`` and ``f^(r+1,s+1)``."""

    M_x: float
    M_y: float
    M_xy: float

    def __post_init__(self):
        for v in (self.M_x, self.M_y, self.M_xy):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("derivative bounds must be finite and >= 0")


def gauss_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    Rows are equilibrated (divided by their largest magnitude entry) before
    elimination. Raises :class:`SingularSystem` when a pivot falls below
    ``PIVOT_TOL``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    N = A.shape[0]
    if A.shape != (N, N) or b.shape[0] != N:
        raise ValueError("A must be square and match b")
    scale = np.abs(A).max(axis=1)
    if np.any(scale == 0):
        raise SingularSystem("matrix has a zero row")
    A /= scale[:, None]
    b = b / (scale if b.ndim == 1 else scale[:, None])

    for c in range(N):
        p = c + int(np.argmax(np.abs(A[c:, c])))
        if abs(A[p, c]) < PIVOT_TOL:
            raise SingularSystem(f"pivot {A[p, c]:.3e} below {PIVOT_TOL} in column {c}")
        if p != c:
            A[[c, p]] = A[[p, c]]
            b[[c, p]] = b[[p, c]]
        f = A[c + 1:, c] / A[c, c]
        A[c + 1:, c:] -= np.outer(f, A[c, c:])
        b[c + 1:] -= np.multiply.outer(f, b[c])

    x = np.empty_like(b)
    for c in range(N - 1, -1, -1):
        x[c] = (b[c] - A[c, c + 1:] @ x[c + 1:]) / A[c, c]
    return x


def _scale(nodes):
    nodes = np.asarray(nodes, dtype=float)
    center = nodes.mean()
    h = np.abs(nodes - center).max()
    return nodes, float(center), float(h)


def vandermonde(block_x, block_y) -> np.ndarray:
    """Vandermonde matrix of the scaled tensor basis.

    Rows follow the node order ``(x_0,y_0), ..., (x_r,y_0), (x_0,y_1), ...``;
    columns follow ``a_00, ..., a_r0, a_01, ..., a_rs``.
    """
    bx, xb, hx = _scale(block_x)
    by, yb, hy = _scale(block_y)
    r, s = bx.size - 1, by.size - 1
    X = np.power.outer((bx - xb) / hx, np.arange(r + 1))  # [alpha, lam]
    Y = np.power.outer((by - yb) / hy, np.arange(s + 1))  # [beta, mu]
    # V[(beta, alpha), (mu, lam)] = X[alpha, lam] * Y[beta, mu]
    return np.einsum("al,bm->baml", X, Y).reshape((r + 1) * (s + 1), -1)


def fit(block_x, block_y, values) -> LocalPolynomial:
    """Interpolate ``values[beta, alpha]`` at ``(block_x[alpha], block_y[beta])``."""
    bx, xb, hx = _scale(block_x)
    by, yb, hy = _scale(block_y)
    if np.any(np.diff(bx) <= 0) or np.any(np.diff(by) <= 0):
        raise ValueError("block coordinates must be strictly increasing")
    r, s = bx.size - 1, by.size - 1
    values = np.asarray(values, dtype=float)
    if values.shape != (s + 1, r + 1):
        raise ValueError(f"values must have shape {(s + 1, r + 1)}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    a = gauss_solve(vandermonde(bx, by), values.ravel())
    return LocalPolynomial(r, s, (xb, yb), hx, hy, a.reshape(s + 1, r + 1).T)


def evaluate(p: LocalPolynomial, x, y):
    """Evaluate `p` with nested Horner schemes (y inside, x outside).

    Accepts scalars or broadcastable arrays.
    """
    X = (np.asarray(x, dtype=float) - p.center[0]) / p.hx
    Y = (np.asarray(y, dtype=float) - p.center[1]) / p.hy
    c = p.coeffs
    out = 0.0
    for i in range(p.r, -1, -1):
        row = 0.0
        for j in range(p.s, -1, -1):
            row = row * Y + c[i, j]
        out = out * X + row
    if np.ndim(out) == 0:
        return float(out)
    return out


def node_polynomials(block_x, block_y, x, y):
    """Return ``(prod (x - x_i), prod (y - y_j))`` over the block nodes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ur = np.prod(np.subtract.outer(x, np.asarray(block_x, dtype=float)), axis=-1)
    vs = np.prod(np.subtract.outer(y, np.asarray(block_y, dtype=float)), axis=-1)
    if ur.ndim == 0 and vs.ndim == 0:
        return float(ur), float(vs)
    return ur, vs


def stancu_bound(block_x, block_y, x, y, bounds: DerivativeBounds):
    """Upper bound on ``|f - p|`` from the tensor-product remainder formula,
    with the intermediate derivative values replaced by their sup bounds."""
    rf = math.factorial(len(block_x))
    sf = math.factorial(len(block_y))
    ur, vs = node_polynomials(block_x, block_y, x, y)
    ur, vs = np.abs(ur), np.abs(vs)
    return ur * bounds.M_x / rf + vs * bounds.M_y / sf + ur * vs * bounds.M_xy / (rf * sf)
