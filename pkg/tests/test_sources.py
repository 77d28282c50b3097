import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphflame import (NonlinearSource, clamped_linear, linear, linear_plus_power, lipschitz_on_interval,
                        osgood_integral, power, reciprocal_tail_integral, right_derivative_at_zero, table, zero)


def numeric(fn):
    """Same function with no registered closed forms."""
    return NonlinearSource("numeric", fn)


def test_lipschitz_examples():
    assert power(2).lipschitz(1.0) == 2.0
    assert lipschitz_on_interval(numeric(lambda u: u**2), 1.0) == pytest.approx(2.0, rel=1e-7)
    assert lipschitz_on_interval(numeric(lambda u: 0.3 * u), 7.0) == pytest.approx(0.3, rel=1e-12)
    assert lipschitz_on_interval(numeric(lambda u: u + u**3), 0.5) == pytest.approx(1.75, rel=1e-7)
    assert linear(0.7).lipschitz(123.0) == 0.7
    assert clamped_linear(2.0, 1.0).lipschitz(5.0) == 2.0
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        lipschitz_on_interval(numeric(lambda u: 1 / (1 - u)), 2.0)
    with pytest.raises(ValueError):
        power(2).lipschitz(0.0)


@given(st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_lipschitz_monotone_in_delta(d1, d2):
    src = numeric(lambda u: u + np.sin(u) ** 2 + u**2 / 4)
    lo, hi = sorted((d1, d2))
    assert lipschitz_on_interval(src, lo) <= lipschitz_on_interval(src, hi) * (1 + 1e-8)


def test_alpha():
    assert linear_plus_power(0.25).alpha == 0.25
    assert power(3).alpha == 0.0
    assert right_derivative_at_zero(lambda u: 0.4 * u + np.asarray(u) ** 2) == pytest.approx(0.4, abs=1e-9)
    assert right_derivative_at_zero(lambda u: np.sin(u)) == pytest.approx(1.0, abs=1e-9)
    assert clamped_linear(1.0, 1.0).alpha is None


def test_osgood_examples():
    r = osgood_integral(lambda s: np.asarray(s) ** 2)
    assert r.finite and r.value == pytest.approx(1.0, rel=1e-8)
    assert not osgood_integral(lambda s: np.asarray(s, dtype=float)).finite
    h = lambda s: np.asarray(s) * np.log1p(np.asarray(s)) ** 2
    r = osgood_integral(h)
    # substitution v = log s: the tail beyond s is about 1/log(s); quad on [1, 1e6] + bound
    assert r.finite and 1.0 < r.value < 3.0
    with pytest.raises(ValueError):
        osgood_integral(lambda s: np.asarray(s) - 2.0)


def test_reciprocal_tail_integral():
    assert reciprocal_tail_integral(lambda z: np.asarray(z) + np.asarray(z) ** 2, 1.0) == pytest.approx(
        math.log(2), rel=1e-9)
    assert reciprocal_tail_integral(lambda z: np.asarray(z) ** 3, 2.0) == pytest.approx(1 / 8, rel=1e-9)
    assert reciprocal_tail_integral(lambda z: np.asarray(z, dtype=float), 1.0) == math.inf


def test_registry_invariants():
    grid = np.linspace(0, 5, 501)
    for src in (zero(), power(2), power(1.5, 2.0), linear(0.3), linear_plus_power(0.1, 3, 2),
                clamped_linear(0.5, 2.0), table([(0, 0), (1, 2), (2, 3)])):
        f = src(grid)
        assert f[0] == 0 and np.all(np.diff(f) >= -1e-14)
        if src.h is not None:
            assert np.all(src.h(grid) <= f + 1e-14)
        assert src.params["kind"]


def test_table_source():
    src = table([(0, 0), (1, 2), (2, 3)])
    np.testing.assert_allclose(src([0.5, 1.5, 4.0]), [1.0, 2.5, 5.0])
    assert src.lipschitz(3.0) == pytest.approx(2.0, rel=1e-6)
    with pytest.raises(ValueError):
        table([(1, 0), (2, 1)])


def test_constructor_guards():
    for bad in (lambda: power(1.0), lambda: linear(-1), lambda: linear_plus_power(0.1, 0.5),
                lambda: clamped_linear(1.0, 0.0)):
        with pytest.raises(ValueError):
            bad()
    with pytest.raises(ValueError):
        clamped_linear(1.0, 1.0).osgood()
