import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qgrowth.errors import DomainError
from qgrowth.qcore import (Q_ZERO_THRESHOLD, Deformation, qexp, qexp_clamp_boundary,
                           qexp_pole, qln)

EPS = np.finfo(float).eps
qs = st.floats(-3, 3, allow_nan=False)
xs = st.floats(1e-3, 1e3, allow_nan=False)


@pytest.mark.parametrize("q", [-3, -1, -1e-9, 0, 1e-9, 0.5, 1, 2.5])
def test_qln_vanishes_at_one(q):
    assert qln(q, 1.0) == 0.0


@pytest.mark.parametrize("q, x, expected", [
    (1, 2, 1.0),
    (-1, 2, 0.5),
    (0, math.e, 1.0),
    (2, 3, 4.0),
    (0.5, 4, 2.0),
])
def test_qln_examples(q, x, expected):
    assert qln(q, x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("q, x, expected", [
    (1, -2, 0.0),
    (1, 1, 2.0),
    (2, -0.1, math.sqrt(0.8)),
    (0, 1, math.e),
    (0.5, 2, 4.0),
    (-1, 0.5, 2.0),
])
def test_qexp_examples(q, x, expected):
    assert qexp(q, x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("q", [-2, -0.5, 0, 1e-12, 0.3, 1, 4])
def test_qexp_of_zero_is_one(q):
    assert qexp(q, 0.0) == 1.0


def test_qexp_clamps_to_zero_below_support():
    assert qexp(1, -1.0) == 0.0
    assert qexp(2, -3.0) == 0.0
    np.testing.assert_array_equal(qexp(0.5, [-10.0, -2.0, 0.0]), [0.0, 0.0, 1.0])


def test_qexp_negative_q_pole_is_infinite():
    assert qexp(-1, 1.0) == math.inf
    assert qexp(-2, 5.0) == math.inf


def test_strict_mode_raises_on_clamp_and_pole():
    with pytest.raises(DomainError):
        qexp(1, -2.0, strict=True)
    with pytest.raises(DomainError):
        qexp(-1, 2.0, strict=True)
    assert qexp(1, 1.0, strict=True) == 2.0


@pytest.mark.parametrize("q, expected", [(1, -1.0), (2, -0.5), (0.25, -4.0), (0, -math.inf),
                                         (-1, -math.inf)])
def test_clamp_boundary(q, expected):
    assert qexp_clamp_boundary(q) == expected


def test_pole_location():
    assert qexp_pole(-2) == 0.5
    assert qexp_pole(1) == math.inf


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_qln_domain(bad):
    with pytest.raises(DomainError):
        qln(1.0, bad)


def test_qln_rejects_bad_entries_in_arrays():
    with pytest.raises(DomainError):
        qln(0.5, [1.0, 2.0, 0.0])


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_qexp_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        qexp(0.5, bad)


def test_non_finite_deformation_rejected():
    with pytest.raises(DomainError):
        Deformation(math.nan)
    with pytest.raises(DomainError):
        qln(math.inf, 2.0)
    assert Deformation(0.5) == 0.5


def test_scalar_in_scalar_out_array_in_array_out():
    assert isinstance(qln(0.5, 2.0), float)
    assert isinstance(qexp(0.5, 2.0), float)
    out = qln(0.5, np.array([[1.0, 4.0], [9.0, 16.0]]))
    assert out.shape == (2, 2)
    np.testing.assert_allclose(out, [[0.0, 2.0], [4.0, 6.0]], rtol=1e-15)


def _inverse_tolerance(q, x):
    # y = qln(q, x) is itself rounded; that rounding is amplified by
    # d ln x / d y = x**-q, so no double-precision pair can beat
    # eps |y| x**-q in relative terms.  Allow that floor (x8) or 1e-10.
    y = qln(q, x)
    floor = 8 * EPS * (1 + abs(y) * x ** (-q))
    return max(1e-10, floor)


@settings(max_examples=400, deadline=None)
@given(q=qs, x=xs)
def test_inverse_law_qexp_of_qln(q, x):
    err = abs(qexp(q, qln(q, x)) - x) / max(1.0, x)
    assert err <= _inverse_tolerance(q, x) * x / max(1.0, x)


@settings(max_examples=400, deadline=None)
@given(q=qs, x=st.floats(0.05, 20))
def test_inverse_law_qexp_of_qln_well_conditioned_band(q, x):
    # here the conditioning floor is below 1e-10
    assert abs(qexp(q, qln(q, x)) - x) <= 1e-10 * max(1.0, x)


@settings(max_examples=400, deadline=None)
@given(q=qs, y=st.floats(-50, 50))
def test_inverse_law_qln_of_qexp(q, y):
    assume(1 + q * y > 1e-6)
    assert abs(qln(q, qexp(q, y)) - y) <= 1e-10 * max(1.0, abs(y))


@settings(max_examples=300, deadline=None)
@given(q=qs, x=xs)
def test_duality(q, x):
    lhs = qln(-q, x)
    rhs = -qln(q, 1.0 / x)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=300, deadline=None)
@given(q=qs, x=st.floats(1e-6, 1e6))
def test_sign_law(q, x):
    v = qln(q, x)
    if x < 1:
        assert v < 0
    elif x > 1:
        assert v > 0
    else:
        assert v == 0


@pytest.mark.parametrize("q", [1e-6, -1e-6])
@pytest.mark.parametrize("x", [1e-3, 0.2, 0.9, 1.1, 7.0, 1e3])
def test_continuity_in_q(q, x):
    # qln(q, x) = ln x + q ln(x)**2 / 2 + O(q**2): the gap to ln x is first order in q
    lx = math.log(x)
    assert qln(q, x) - lx == pytest.approx(q * lx * lx / 2, rel=1e-5)
    assert abs(qln(q, x) - lx) <= abs(q) * abs(lx) * abs(lx)


@pytest.mark.parametrize("x", [0.5, 2.0, 3.7])
def test_continuity_tightens_as_q_shrinks(x):
    errs = [abs(qln(q, x) - math.log(x)) for q in (1e-3, 1e-5, 1e-7)]
    assert errs[0] > errs[1] > errs[2]


def test_log_branch_below_threshold_is_exact():
    q = 0.5 * Q_ZERO_THRESHOLD
    assert qln(q, 5.0) == math.log(5.0)
    assert qexp(q, 1.5) == math.exp(1.5)


@pytest.mark.parametrize("q", [-1.5, -0.4, 0.3, 1.0, 2.0])
@pytest.mark.parametrize("k", [0.5, 2.0])
def test_derivative_law(q, k):
    # d/dx qexp(q, k x) = k qexp(q, k x)**(1 - q), central differences
    x = np.linspace(-0.2, 0.2, 9)
    h = 1e-5
    fd = (qexp(q, k * (x + h)) - qexp(q, k * (x - h))) / (2 * h)
    exact = k * qexp(q, k * x) ** (1 - q)
    np.testing.assert_allclose(fd, exact, rtol=1e-6)


def test_kernel_qln_matches_public(kernels):
    for q in (-2.0, -1e-9, 0.0, 0.7, 3.0):
        for x in (1e-3, 0.5, 1.0, 2.0, 1e3):
            assert kernels.qln(q, x) == pytest.approx(qln(q, x), rel=1e-15, abs=1e-300)
