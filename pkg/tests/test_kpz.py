import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airyedge import kpz
from airyedge.errors import DomainError, TruncationError
from airyedge.kpz import KpzParams


def test_laplace_product_examples():
    assert kpz.laplace_product([], 2.0, 5.0).value == 1.0
    assert kpz.laplace_product([-1.3], 1.3, 7.0, check_truncation=False).value == 0.5
    e = math.e
    got = kpz.laplace_product([-2.0, -4.0], 3.0, 1.0, check_truncation=False).value
    assert got == pytest.approx(1 / ((1 + e) * (1 + 1 / e)), rel=1e-14)
    assert got == pytest.approx(0.19661, abs=1e-5)


def test_truncation_error_reports_required_points():
    with pytest.raises(TruncationError) as info:
        kpz.laplace_product([-2.0, -3.0], 2.0, 1.0)
    assert info.value.required > 2


def test_truncation_bound_covers_omitted_points():
    # full point list from the Airy-like density; truncating it must stay within the bound
    i = np.arange(1, 4000)
    pts = -(1.5 * math.pi * (i - 0.25)) ** (2 / 3)
    s, T = 1.0, 8.0
    t = T ** (1 / 3)
    level = -s - kpz.TRUNCATION_MARGIN / t
    cut = int(np.argmax(pts < level)) + 1
    head = kpz.laplace_product(pts[:cut], s, T)
    full = kpz.laplace_product(pts, s, T, check_truncation=False)
    assert 0 <= head.log_value - full.log_value <= head.truncation_bound
    assert head.truncation_bound < 1e-13


def test_halfspace_examples():
    assert kpz.laplace_product_halfspace([-1.0, -2.0], 1e-300, 1.0, check_truncation=False).value == 1.0
    a, T = -0.4, 8.0
    u = 3.0 / (4.0 * math.exp(T ** (1 / 3) * a))
    assert kpz.laplace_product_halfspace([a], u, T, check_truncation=False).value == pytest.approx(0.5, rel=1e-14)
    pts, u, T = [0.3, -1.1], 0.2, 2.0
    t = T ** (1 / 3)
    want = ((1 + 4 * u * math.exp(t * pts[0])) * (1 + 4 * u * math.exp(t * pts[1]))) ** -0.5
    assert kpz.laplace_product_halfspace(pts, u, T, check_truncation=False).value == pytest.approx(want, rel=1e-14)


def test_halfspace_truncation_threshold():
    u, T = 0.5, 1.0
    level = math.log(1 / (4 * u)) - 40
    kpz.laplace_product_halfspace([0.0, level], u, T)
    with pytest.raises(TruncationError):
        kpz.laplace_product_halfspace([0.0, level + 0.1], u, T)


@given(st.lists(st.floats(-10, 2), min_size=1, max_size=15), st.floats(0, 5), st.floats(0, 5),
       st.floats(0.1, 100))
@settings(max_examples=200)
def test_product_decreases_in_s(points, s1, s2, T):
    pts = sorted(points, reverse=True)
    s1, s2 = sorted((s1, s2))
    a = kpz.laplace_product(pts, s1, T, check_truncation=False)
    b = kpz.laplace_product(pts, s2, T, check_truncation=False)
    assert a.value >= b.value
    if s2 > s1 + 1e-9:
        assert a.log_value > b.log_value


def test_indicator_limit():
    rng = np.random.default_rng(0)
    for _ in range(500):
        pts = np.sort(rng.uniform(-5, 1, 6))[::-1]
        s = rng.uniform(0, 4)
        if abs(pts[0] + s) < 2e-3:
            continue
        v = kpz.laplace_product(pts, s, 1e12, check_truncation=False).value
        assert abs(v - float(pts[0] <= -s)) <= 1e-6


def test_points_must_descend():
    with pytest.raises(DomainError):
        kpz.laplace_product([-3.0, -1.0], 0.0, 1.0, check_truncation=False)


def test_bounds_at_zero_are_degenerate():
    b = kpz.kpz1_bounds(KpzParams(s=0.0, T=10.0))
    assert b.lower == pytest.approx(2.0) and b.upper == pytest.approx(3.0) and b.below_threshold
    assert kpz.kpz2_bounds(KpzParams(s=0.0, T=10.0)).below_threshold


def test_bounds_order_and_flags():
    b = kpz.kpz1_bounds(KpzParams(s=10.0, T=100.0, epsilon=0.1, C=1.0, K=1 / 24))
    assert b.lower <= b.upper and not b.below_threshold
    assert kpz.kpz1_bounds(KpzParams(s=3.0, T=1.0, S=5.0)).below_threshold


@pytest.mark.parametrize("half", [False, True])
def test_lower_below_upper_on_grid(half):
    fn = kpz.kpz2_bounds if half else kpz.kpz1_bounds
    for s in (0.5, 2.0, 10.0, 100.0, 1000.0):
        for T in (1e-3, 1.0, 1e3, 1e9):
            for eps in (0.01, 0.2, 0.33):
                b = fn(KpzParams(s=s, T=T, epsilon=eps, C=1.0, K=0.1))
                assert np.isfinite(b.log_lower) and np.isfinite(b.log_upper)
                assert b.log_lower <= b.log_upper


def test_large_T_limit_is_the_cubic_term():
    s, eps, C = 3.0, 0.1, 1.0
    target = -(1 - C * eps) * s ** 3 / 12
    gaps = [kpz.kpz1_bounds(KpzParams(s=s, T=T, epsilon=eps, C=C, K=1.0)).log_upper - target
            for T in (1e3, 1e6, 1e9)]
    assert gaps[0] >= gaps[1] >= gaps[2] >= 0 and gaps[0] > 0
    assert gaps[2] < 1e-10


def test_halfspace_terms_halve_the_coefficients():
    p = KpzParams(s=2.5, T=50.0, epsilon=1e-9, C=1.0, K=0.7)
    full = kpz.bound_terms(p, half_space=False)["upper"]
    half = kpz.bound_terms(p, half_space=True)["upper"]
    assert half[0] == pytest.approx(full[0] / 2, rel=1e-14)
    assert half[1] == full[1]
    assert half[2] == pytest.approx(full[2] / 2, rel=1e-14)


def test_parameter_validation():
    for bad in ({"s": -1.0, "T": 1.0}, {"s": 1.0, "T": 0.0}, {"s": 1.0, "T": 1.0, "epsilon": 0.5},
                {"s": 1.0, "T": 1.0, "K": -1.0}):
        with pytest.raises(DomainError):
            KpzParams(**bad)
    with pytest.raises(DomainError):
        kpz.kpz1_bounds(KpzParams(s=1.0, T=1.0, epsilon=0.3, C=4.0))
