"""Cartesian node grids and their covering by rectangular node blocks.

All public indices are 1-based: node ``(nu, mu)`` is row ``nu`` (y direction)
and column ``mu`` (x direction), and its flattened index is
``(mu - 1) * n + nu``. Internally arrays are 0-based numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import GridTooSmall, IndexOutOfRange

__all__ = [
    "CartesianGrid",
    "Block",
    "BlockCovering",
    "check_axis",
    "build_covering",
    "block_index_map",
    "block_linear_index",
    "flatten_index",
    "unflatten_index",
    "block_anchor_index",
]


def check_axis(coords, name: str = "axis") -> np.ndarray:
    """Return `coords` as a read-only float array, validating it as a grid axis.

    Raises ``ValueError`` unless the axis has at least two finite, strictly
    increasing entries.
    """
    a = np.array(coords, dtype=float).ravel()
    if a.size < 2:
        raise ValueError(f"{name} needs at least 2 coordinates, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite coordinates")
    if not np.all(np.diff(a) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CartesianGrid:
    """Node grid ``x (m) x y (n)`` carrying elevations ``z`` of shape ``(n, m)``.

    ``z[nu - 1, mu - 1]`` is the value at ``(x[mu - 1], y[nu - 1])``, so row
    index runs along y and column index along x (both ascending).
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = check_axis(self.x, "x axis")
        y = check_axis(self.y, "y axis")
        z = np.array(self.z, dtype=float)
        if z.shape != (y.size, x.size):
            raise ValueError(
                f"z must have shape (n, m) = ({y.size}, {x.size}), got {z.shape}"
            )
        if not np.all(np.isfinite(z)):
            raise ValueError("z contains non-finite values; resolve nodata first")
        z.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @property
    def m(self) -> int:
        return self.x.size

    @property
    def n(self) -> int:
        return self.y.size

    @classmethod
    def from_function(cls, f, x, y) -> "CartesianGrid":
        """Sample ``f(x, y)`` (vectorised) on the tensor grid of `x` and `y`."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        xx, yy = np.meshgrid(x, y)
        return cls(x, y, f(xx, yy))

    @classmethod
    def uniform(cls, f, m: int, n: int | None = None, a=0.0, b=1.0) -> "CartesianGrid":
        """Uniform ``m x n`` grid of ``f`` samples on the square ``[a, b]^2``."""
        n = m if n is None else n
        return cls.from_function(f, np.linspace(a, b, m), np.linspace(a, b, n))

    def flat(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Column-major flattening ``(x, y, z)`` so that entry
        ``flatten_index(nu, mu, n) - 1`` holds node ``(nu, mu)``."""
        xx, yy = np.meshgrid(self.x, self.y)
        return xx.ravel(order="F"), yy.ravel(order="F"), self.z.ravel(order="F")


@dataclass(frozen=True)
class Block:
    """One ``(r+1) x (s+1)`` node block; indices are 1-based."""

    k: int
    l: int
    x_start: int
    y_start: int
    barycenter: Tuple[float, float]


@dataclass(frozen=True, eq=False)
class BlockCovering:
    r: int
    s: int
    K: int
    L: int
    m: int
    n: int
    blocks: Tuple[Block, ...]
    # 0-based first node index of each column / row of blocks
    x_starts: np.ndarray
    y_starts: np.ndarray
    # barycenter coordinate per block column / row
    x_centers: np.ndarray
    y_centers: np.ndarray

    @property
    def t(self) -> int:
        return (self.r + 1) * (self.s + 1)

    def block(self, k: int, l: int) -> Block:
        if not (1 <= k <= self.K and 1 <= l <= self.L):
            raise IndexOutOfRange(f"block ({k}, {l}) outside 1..{self.K} x 1..{self.L}")
        return self.blocks[block_linear_index(k, l, self.K, self.L) - 1]

    def node_sets(self):
        """Yield ``(block, set of 1-based flattened node indices)``."""
        for b in self.blocks:
            idx = {
                flatten_index(b.y_start + j, b.x_start + i, self.n, self.m)
                for i in range(self.r + 1)
                for j in range(self.s + 1)
            }
            yield b, idx


def _starts(count: int, degree: int) -> np.ndarray:
    nblocks = -(-(count - 1) // degree)
    starts = np.arange(nblocks) * degree
    # shift the trailing block back so it ends on the last node
    starts[-1] = min(starts[-1], count - 1 - degree)
    return starts


def build_covering(grid: CartesianGrid, r: int, s: int) -> BlockCovering:
    """Cover the grid with ``(r+1) x (s+1)`` blocks.

    Adjacent blocks share one boundary column (row). When ``r`` does not
    divide ``m - 1`` the last block column is moved left to end at ``x_m``,
    giving ``K = ceil((m-1)/r)``; likewise in y.
    """
    r, s = int(r), int(s)
    if r < 1 or s < 1:
        raise ValueError(f"degrees must be >= 1, got r={r}, s={s}")
    m, n = grid.m, grid.n
    if m < r + 1 or n < s + 1:
        raise GridTooSmall(
            f"grid {m}x{n} is too small for blocks of {r + 1}x{s + 1} nodes"
        )
    xs = _starts(m, r)
    ys = _starts(n, s)
    xc = np.array([grid.x[i:i + r + 1].mean() for i in xs])
    yc = np.array([grid.y[j:j + s + 1].mean() for j in ys])
    K, L = xs.size, ys.size
    blocks = tuple(
        Block(k + 1, l + 1, int(xs[k]) + 1, int(ys[l]) + 1, (float(xc[k]), float(yc[l])))
        for k in range(K)
        for l in range(L)
    )
    for a in (xs, ys, xc, yc):
        a.flags.writeable = False
    return BlockCovering(r, s, K, L, m, n, blocks, xs, ys, xc, yc)


def block_index_map(j: int, K: int, L: int) -> Tuple[int, int]:
    """Linear block index ``j`` (1-based) to ``(k, l)``."""
    if not 1 <= j <= K * L:
        raise IndexOutOfRange(f"block index {j} outside 1..{K * L}")
    return (j - 1) // L + 1, (j - 1) % L + 1


def block_linear_index(k: int, l: int, K: int, L: int) -> int:
    """Inverse of :func:`block_index_map`."""
    if not (1 <= k <= K and 1 <= l <= L):
        raise IndexOutOfRange(f"block ({k}, {l}) outside 1..{K} x 1..{L}")
    return (k - 1) * L + l


def flatten_index(nu: int, mu: int, n: int, m: int | None = None) -> int:
    """Column-major linear index ``(mu - 1) * n + nu`` of node ``(nu, mu)``."""
    if not 1 <= nu <= n or mu < 1 or (m is not None and mu > m):
        raise IndexOutOfRange(f"node ({nu}, {mu}) outside the grid")
    return (mu - 1) * n + nu


def unflatten_index(i: int, n: int, m: int | None = None) -> Tuple[int, int]:
    """Inverse of :func:`flatten_index`: returns ``(nu, mu)``."""
    if i < 1 or (m is not None and i > m * n):
        raise IndexOutOfRange(f"linear index {i} outside the grid")
    return (i - 1) % n + 1, (i - 1) // n + 1


def block_anchor_index(k: int, l: int, r: int, s: int, n: int, m: int | None = None) -> int:
    """Flattened index of the bottom-left node of block ``(k, l)``.

    Without `m` this is the divisible-case formula
    ``(k-1) r n + (l-1) s + 1``. Passing `m` enables the shifted trailing
    blocks used for grids where ``r`` does not divide ``m - 1`` (or ``s``
    does not divide ``n - 1``).
    """
    if k < 1 or l < 1:
        raise IndexOutOfRange(f"block ({k}, {l}) has a non-positive index")
    L = -(-(n - 1) // s)
    if l > L:
        raise IndexOutOfRange(f"block row {l} outside 1..{L}")
    y0 = min((l - 1) * s, n - 1 - s)
    if m is None:
        x0 = (k - 1) * r
    else:
        K = -(-(m - 1) // r)
        if k > K:
            raise IndexOutOfRange(f"block column {k} outside 1..{K}")
        x0 = min((k - 1) * r, m - 1 - r)
    return x0 * n + y0 + 1
