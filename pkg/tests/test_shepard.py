import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mshepard.convergence import franke
from mshepard.errors import NodeCoincidence
from mshepard.grid import CartesianGrid, flatten_index
from mshepard.shepard import (
    ThresholdWarning,
    build_model,
    eval_grid,
    evaluate,
    nearest_node,
    order_threshold,
    weights,
)
from mshepard.tensor_poly import evaluate as poly_eval

import oracles


def random_model(rng, m=None, n=None, r=None, s=None, u=None):
    m = m or int(rng.integers(5, 16))
    n = n or int(rng.integers(5, 16))
    r = r or int(rng.integers(1, 4))
    s = s or int(rng.integers(1, 4))
    u = u or float(rng.choice([1.0, 2.0, 4.0]))
    x = oracles.random_axis(rng, m, -3.0, 5.0)
    y = oracles.random_axis(rng, n, 10.0, 14.0)
    return build_model(CartesianGrid(x, y, rng.normal(size=(n, m))), r, s, u)


def off_node_points(model, rng, count):
    g = model.grid
    x = rng.uniform(g.x[0], g.x[-1], count)
    y = rng.uniform(g.y[0], g.y[-1], count)
    return x, y


def test_franke_7x7_configuration():
    model = build_model(CartesianGrid.uniform(franke, 7), 2, 2, 2)
    assert (model.covering.K, model.covering.L, len(model.polys)) == (3, 3, 9)
    assert model.l_max == pytest.approx(1 / 3)


def test_single_block_model(rng):
    g = CartesianGrid(np.array([0, 0.3, 1.0]), np.array([0, 0.5, 2.0]), rng.normal(size=(3, 3)))
    model = build_model(g, 2, 2, 4)
    (p,) = model.polys
    x, y = rng.uniform(0, 1, (2, 30))
    assert np.array_equal(weights(model, x, y), np.ones((30, 1)))
    assert np.allclose(evaluate(model, x, y), poly_eval(p, x, y), rtol=1e-14, atol=1e-14)


def test_dem_configuration_builds():
    model = build_model(CartesianGrid.uniform(franke, 9), 2, 2, 4)
    assert model.u == 4.0 and model.covering.t == 9


def test_threshold_warning():
    g = CartesianGrid.uniform(franke, 5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        build_model(g, 1, 1, 1.0)
        build_model(g, 1, 1, 2.0)
    assert [w.category for w in caught] == [ThresholdWarning]
    assert order_threshold(2, 2) == pytest.approx(7 / 9)


def test_invalid_exponent():
    with pytest.raises(ValueError):
        build_model(CartesianGrid.uniform(franke, 5), 2, 2, 0.0)


def test_weights_at_shared_corner_are_equal():
    # centre node of a 5x5 grid is the common corner of all four blocks
    model = build_model(CartesianGrid.uniform(franke, 5), 2, 2, 2)
    for dx, dy in [(1e-9, 0.0), (0.0, -1e-9), (7e-10, 7e-10)]:
        w = weights(model, 0.5 + dx, 0.5 + dy)
        assert np.allclose(w, 0.25, atol=1e-6)


def test_weights_rotation_symmetry(rng):
    model = build_model(CartesianGrid.uniform(franke, 7), 2, 2, 2)
    K = model.covering.K
    for x, y in rng.uniform(0, 1, (20, 2)):
        w = weights(model, x, y).reshape(K, K)
        # rotating the point by 90 degrees about the centre permutes the blocks
        wr = weights(model, 1 - y, x).reshape(K, K)
        assert np.allclose(np.rot90(w), wr, rtol=1e-10, atol=1e-15)


def test_weights_vanish_near_foreign_nodes():
    model = build_model(CartesianGrid.uniform(franke, 7), 2, 2, 2)
    g, cv = model.grid, model.covering
    for mu in range(7):
        for nu in range(7):
            w = weights(model, g.x[mu] + 1e-6 * model.l_max, g.y[nu])
            node = flatten_index(nu + 1, mu + 1, 7)
            for wj, (_, nodes) in zip(w, cv.node_sets()):
                if node not in nodes:
                    assert wj < 1e-3


def test_weights_raise_at_nodes():
    model = build_model(CartesianGrid.uniform(franke, 7), 2, 2, 2)
    with pytest.raises(NodeCoincidence):
        weights(model, 0.5, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partition_of_unity(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    w = weights(model, *off_node_points(model, rng, 200))
    assert w.min() >= 0
    assert np.abs(w.sum(axis=1) - 1).max() <= 1e-12


def test_weights_match_literal_formula(rng):
    x_axis = np.linspace(0, 1, 13)
    model = build_model(CartesianGrid.uniform(franke, 13), 2, 2, 2)
    for x, y in rng.uniform(0, 1, (100, 2)):
        ref = np.array([float(v) for v in oracles.literal_weights(x_axis, x_axis, 2, 2, 2, x, y)])
        assert np.allclose(weights(model, x, y), ref, rtol=1e-12, atol=0)


def test_weights_robust_where_literal_underflows(rng):
    axis = np.linspace(0.0, 12000.0, 61)  # metres, DEM-like extent
    model = build_model(CartesianGrid(axis, axis, rng.normal(size=(61, 61))), 3, 3, 8.0)
    x, y = off_node_points(model, rng, 50)
    # the plain product for a far block underflows to zero in double precision
    with np.errstate(under="ignore"):
        far = np.prod(np.hypot(1010.0 - axis[-4:, None], 1010.0 - axis[None, -4:]) ** -8.0)
    assert far == 0.0
    x[0] = y[0] = 1010.0
    w = weights(model, x, y)
    assert np.all(np.isfinite(w))
    assert np.abs(w.sum(axis=1) - 1).max() <= 1e-12


def test_interpolates_at_every_node(rng):
    for _ in range(5):
        model = random_model(rng)
        g = model.grid
        xx, yy = np.meshgrid(g.x, g.y)
        assert np.array_equal(evaluate(model, xx, yy), g.z)
        assert evaluate(model, g.x[1], g.y[2]) == g.z[2, 1]


def test_reproduces_biquadratic():
    q = lambda x, y: 2 + x - 3 * y + x ** 2 * y ** 2
    model = build_model(CartesianGrid.uniform(q, 9), 2, 2, 2)
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 1, (2, 100))
    ref = q(x, y)
    assert np.allclose(evaluate(model, x, y), ref, rtol=1e-9, atol=0)


@pytest.mark.parametrize("r, s", [(1, 1), (2, 2), (2, 3), (3, 1)])
def test_reproduces_random_tensor_polys(rng, r, s):
    q, _ = oracles.random_tensor_poly(rng, r, s)
    x_axis = oracles.random_axis(rng, 10, -1, 1)
    y_axis = oracles.random_axis(rng, 11, -1, 1)
    model = build_model(CartesianGrid.from_function(q, x_axis, y_axis), r, s, 3.0)
    x, y = rng.uniform(-1, 1, (2, 400))
    ref = q(x, y)
    assert np.abs(evaluate(model, x, y) - ref).max() <= 1e-9 * (1 + np.abs(ref).max())


def test_franke_matches_literal_blend():
    axis = np.linspace(0, 1, 7)
    grid = CartesianGrid.uniform(franke, 7)
    model = build_model(grid, 2, 2, 2)
    pts = np.linspace(0, 1, 33)
    got = eval_grid(model, pts, pts)
    for i, y in enumerate(pts):
        for j, x in enumerate(pts):
            if np.isclose(x * 6, round(x * 6)) and np.isclose(y * 6, round(y * 6)):
                ref = grid.z[round(y * 6), round(x * 6)]
            else:
                ref = float(oracles.literal_shepard(axis, axis, grid.z, 2, 2, 2, x, y, dps=30))
            assert got[i, j] == pytest.approx(ref, rel=1e-9, abs=1e-15)


def test_eval_grid_on_own_axes_returns_data(rng):
    model = random_model(rng)
    assert np.array_equal(eval_grid(model, model.grid.x, model.grid.y), model.grid.z)


def test_eval_grid_single_point(rng):
    model = random_model(rng)
    out = eval_grid(model, [0.37], [11.1])
    assert out.shape == (1, 1) and out[0, 0] == evaluate(model, 0.37, 11.1)


def test_eval_grid_matches_pointwise(rng):
    model = random_model(rng)
    xs = np.linspace(-3, 5, 17)
    ys = np.linspace(10, 14, 17)
    out = eval_grid(model, xs, ys)
    loop = np.array([[evaluate(model, x, y) for x in xs] for y in ys])
    assert np.array_equal(out, loop)


def test_parallel_workers_are_deterministic(rng, monkeypatch):
    model = build_model(CartesianGrid.uniform(franke, 41), 2, 2, 4)
    xs = np.linspace(0, 1, 90)
    monkeypatch.setenv("MSHEPARD_WORKERS", "1")
    a = eval_grid(model, xs, xs)
    monkeypatch.setenv("MSHEPARD_WORKERS", "3")
    b = eval_grid(model, xs, xs)
    assert np.array_equal(a, b)


def test_fast_mode_matches_exact(rng):
    grid = CartesianGrid.uniform(franke, 41)
    exact = build_model(grid, 2, 2, 4)
    fast = build_model(grid, 2, 2, 4, fast=True)
    xs = np.linspace(0, 1, 77)
    a, b = eval_grid(exact, xs, xs), eval_grid(fast, xs, xs)
    assert np.abs(a - b).max() <= 1e-13 * np.abs(a).max()


def test_nearest_node_examples():
    model = build_model(CartesianGrid.uniform(franke, 5), 1, 1, 2)
    assert nearest_node(model, 0.25, 0.75) == (flatten_index(4, 2, 5), 0.0)
    # cell centre: four equidistant corners, lowest flattened index wins
    idx, d = nearest_node(model, 0.375, 0.625)
    assert idx == flatten_index(3, 2, 5)
    assert d == pytest.approx(np.hypot(0.125, 0.125))


def test_nearest_node_bruteforce(rng):
    model = random_model(rng)
    g = model.grid
    for _ in range(500):
        x = rng.uniform(g.x[0] - 1, g.x[-1] + 1)
        y = rng.uniform(g.y[0] - 1, g.y[-1] + 1)
        idx, d = nearest_node(model, x, y)
        ref_idx, ref_d = oracles.nearest_node_bruteforce(g.x, g.y, x, y)
        assert idx == ref_idx and d == pytest.approx(ref_d, rel=1e-15)


def test_outside_hull_is_defined(rng):
    model = random_model(rng)
    assert np.isfinite(evaluate(model, -100.0, 100.0))


def test_smooth_across_block_boundaries(rng):
    model = build_model(CartesianGrid.uniform(franke, 13), 2, 2, 2)
    g, cv = model.grid, model.covering
    boundaries = g.x[cv.x_starts[1:]]
    h = 1e-3
    for _ in range(50):
        xb = rng.choice(boundaries)
        y = rng.uniform(0.02, 0.98)
        # keep clear of nodes on the boundary line
        y = y if np.min(np.abs(g.y - y)) > 0.02 else y + 0.03
        F = lambda dx: evaluate(model, xb + dx, y)
        central = (F(h) - F(-h)) / (2 * h)
        central_half = (F(h / 2) - F(-h / 2)) / h
        assert abs(central - central_half) < 10 * h
        left = (F(0.0) - F(-h)) / h
        right = (F(h) - F(0.0)) / h
        assert abs(right - left) < 200 * h


def test_translation_equivariance(rng):
    model = random_model(rng, u=2.0)
    g = model.grid
    a, b = 123.5, -40.25
    moved = build_model(CartesianGrid(g.x + a, g.y + b, g.z), model.r, model.s, model.u)
    x, y = off_node_points(model, rng, 100)
    ref = evaluate(model, x, y)
    assert np.allclose(evaluate(moved, x + a, y + b), ref, rtol=1e-10, atol=1e-10 * np.abs(g.z).max())


def test_scale_equivariance(rng):
    model = random_model(rng, u=4.0)
    g = model.grid
    c = 37.0
    scaled = build_model(CartesianGrid(c * g.x, c * g.y, g.z), model.r, model.s, model.u)
    x, y = off_node_points(model, rng, 100)
    ref = evaluate(model, x, y)
    assert np.allclose(evaluate(scaled, c * x, c * y), ref, rtol=1e-10, atol=1e-10 * np.abs(g.z).max())
