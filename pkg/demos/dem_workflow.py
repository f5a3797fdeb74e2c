"""
Downscaling a terrain model
===========================

Take a 2 m synthetic terrain, keep every eighth sample (16 m), rebuild the
2 m raster with the Shepard interpolant and with bilinear interpolation, and
score both against the original.
"""

import tempfile
from pathlib import Path

import numpy as np

from mshepard import (
    Raster,
    bilinear_resample,
    decimate,
    horizontal_discrepancy,
    read_asc,
    resample,
    vertical_accuracy,
    write_asc,
)

###############################################################################
# A sum of Gaussian hills on a 257 x 257, 2 m raster.
rng = np.random.default_rng(3)
coords = np.arange(257) * 2.0
X, Y = np.meshgrid(coords, coords)
z = np.full_like(X, 800.0)
for _ in range(12):
    cx, cy = rng.uniform(0, coords[-1], 2)
    z += rng.uniform(-80, 200) * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2)
                                        / (2 * rng.uniform(25, 80) ** 2))
reference = Raster(-1.0, -1.0, 2.0, z[::-1])

###############################################################################
# Rasters travel as ESRI ASCII grids.
workdir = Path(tempfile.mkdtemp())
write_asc(reference, workdir / "ref_2m.asc")
reference = read_asc(workdir / "ref_2m.asc")

coarse = decimate(reference, 8)
print(f"decimated to {coarse.cellsize:g} m: {coarse.nrows} x {coarse.ncols} cells")

###############################################################################
# Back to 2 m with both methods.
shepard = resample(coarse, 2.0, r=2, s=2, u=4.0)
bilinear = bilinear_resample(coarse, 2.0)

for name, result in (("shepard", shepard), ("bilinear", bilinear)):
    v = vertical_accuracy(reference, result)
    h = horizontal_discrepancy(reference, result)
    print(f"--- {name}")
    print(v.summary())
    print(f"H_d (10 levels): {h.h_d:.4f} m")
