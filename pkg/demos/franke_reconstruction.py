"""
Reconstructing the Franke surface
=================================

Sample the Franke test function on a coarse grid, build the multinode
Shepard interpolant and compare it with the true surface on a fine sample.
"""

import numpy as np

from mshepard import CartesianGrid, build_model, eval_grid, franke, weights

###############################################################################
# A 13 x 13 grid on the unit square, with 3 x 3 node blocks (r = s = 2).
grid = CartesianGrid.uniform(franke, 13)
model = build_model(grid, r=2, s=2, u=4.0)
print(f"{model.covering.K} x {model.covering.L} blocks, l_max = {model.l_max:.4f}")

###############################################################################
# The interpolant reproduces every stored value.
X, Y = np.meshgrid(grid.x, grid.y)
print("max error at nodes:", np.abs(eval_grid(model, grid.x, grid.y) - grid.z).max())

###############################################################################
# Off the nodes the error is governed by the block size.
xs = np.linspace(0, 1, 201)
M = eval_grid(model, xs, xs)
F = franke(*np.meshgrid(xs, xs))
print(f"max error on a 201 x 201 sample: {np.abs(M - F).max():.3e}")

###############################################################################
# The blending weights are non-negative and sum to one.
w = weights(model, 0.37, 0.61)
print(f"weights: min {w.min():.2e}, sum {w.sum():.15f}, largest block {w.argmax() + 1}")
