"""Multinode Shepard interpolation on rectangular grids, with DEM tooling."""

from .accuracy import contour_length, horizontal_discrepancy, vertical_accuracy
from .convergence import franke, run_convergence, write_table
from .errors import MShepardError
from .grid import CartesianGrid, build_covering
from .raster_io import Raster, bilinear_resample, decimate, read_asc, resample, write_asc
from .shepard import ShepardModel, build_model, eval_grid, evaluate, weights
from .tensor_poly import LocalPolynomial, fit

__version__ = "0.1.0"

__all__ = [
    "CartesianGrid",
    "LocalPolynomial",
    "MShepardError",
    "Raster",
    "ShepardModel",
    "bilinear_resample",
    "build_covering",
    "build_model",
    "contour_length",
    "decimate",
    "eval_grid",
    "evaluate",
    "fit",
    "franke",
    "horizontal_discrepancy",
    "read_asc",
    "resample",
    "run_convergence",
    "vertical_accuracy",
    "weights",
    "write_asc",
    "write_table",
]
