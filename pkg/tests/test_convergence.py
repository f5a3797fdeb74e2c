import io
import warnings

import mpmath as mp
import numpy as np
import pytest

from mshepard.convergence import ConvergenceRow, franke, run_convergence, write_table
from mshepard.errors import IncompatibleSize
from mshepard.shepard import ThresholdWarning


def franke_mp(x, y):
    x, y = mp.mpf(x), mp.mpf(y)
    return (mp.mpf("0.75") * mp.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
            + mp.mpf("0.75") * mp.exp(-(9 * x + 1) ** 2 / 49 - (9 * y + 1) / 10)
            + mp.mpf("0.5") * mp.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
            - mp.mpf("0.2") * mp.exp(-(9 * x - 4) ** 2 - (9 * y - 7) ** 2))


def test_franke_origin():
    assert franke(0, 0) == pytest.approx(0.7664205912849231, rel=1e-15)
    with mp.workdps(30):
        assert franke(0, 0) == pytest.approx(float(franke_mp(0, 0)), rel=1e-15)


def test_franke_against_multiprecision(rng):
    with mp.workdps(30):
        for x, y in rng.uniform(0, 1, (50, 2)):
            assert franke(x, y) == pytest.approx(float(franke_mp(x, y)), rel=1e-14)


def test_franke_range():
    xs = np.linspace(0, 1, 101)
    top = franke(*np.meshgrid(xs, xs)).max()
    assert 1.0 < top < 1.3


def test_franke_continuity(rng):
    x, y = rng.uniform(0, 1, (2, 100))
    assert np.all(np.abs(franke(x, y) - franke(x + 1e-8, y)) < 1e-6)


def test_polynomial_is_reproduced():
    q = lambda x, y: 1 - 2 * x + x * y ** 2 + 0.5 * x ** 2 * y
    rows = run_convergence(q, 2, 2, 4.0, [5, 9, 17], sample_density=51)
    assert all(row.max_err <= 1e-9 for row in rows)


def test_rows_and_orders():
    rows = run_convergence(franke, 1, 1, 2.0, [9, 17, 33], sample_density=101)
    assert [row.grid_size for row in rows] == [(9, 9), (17, 17), (33, 33)]
    assert rows[0].observed_order is None
    assert rows[1].l_max == pytest.approx(rows[0].l_max / 2)
    assert rows[2].observed_order == pytest.approx(2.0, abs=0.4)
    assert rows[0].max_err > rows[1].max_err > rows[2].max_err


def test_non_dyadic_sizes_have_no_order():
    rows = run_convergence(franke, 1, 1, 2.0, [5, 7, 11], sample_density=41)
    assert all(row.observed_order is None for row in rows)


def test_low_exponent_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        run_convergence(franke, 1, 1, 1.0, [5, 9], sample_density=21)
    assert any(w.category is ThresholdWarning for w in caught)


@pytest.mark.parametrize("sizes", [[8, 15], [9, 5], [], [(9, 8)]])
def test_incompatible_sizes(sizes):
    with pytest.raises(IncompatibleSize):
        run_convergence(franke, 2, 2, 4.0, sizes)


def test_rectangular_sizes():
    rows = run_convergence(franke, 1, 2, 2.0, [(5, 9), (9, 17)], sample_density=31)
    assert rows[1].grid_size == (9, 17)


def test_table_format():
    rows = [ConvergenceRow((7, 7), 1 / 3, 0.1), ConvergenceRow((13, 13), 1 / 6, 0.0125, 3.0)]
    buf = io.StringIO()
    write_table(rows, buf)
    assert buf.getvalue().split("\n") == [
        "m,n,l_max,max_err,observed_order",
        "7,7,0.3333333333333333,0.1,",
        "13,13,0.16666666666666666,0.0125,3.0",
        "",
    ]
