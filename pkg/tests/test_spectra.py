import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from airyedge import spectra
from airyedge.errors import DomainError
from airyedge.spectra import AirySpectrumMode as Mode


@pytest.mark.parametrize("x", [-12.0, -7.5, -5.0, -2.3381, -1.0, 0.0, 0.7, 3.0, 5.0, 8.0])
def test_airy_ai_matches_scipy(x):
    assert spectra.airy_ai(x) == pytest.approx(special.airy(x)[0], rel=1e-9, abs=1e-12)


def test_asymptotic_first_eigenvalue_is_closed_form():
    assert spectra.airy_eigenvalue(1) == pytest.approx((9 * math.pi / 8) ** (2 / 3), rel=1e-15)
    assert spectra.airy_eigenvalue(1) == pytest.approx(2.320251, abs=1e-6)


def test_exact_eigenvalues_match_scipy_zeros():
    zeros = -special.ai_zeros(60)[0]
    got = [spectra.airy_eigenvalue(i, Mode.EXACT) for i in range(1, 61)]
    np.testing.assert_allclose(got, zeros, atol=1e-9)
    assert got[1] == pytest.approx(4.087949, abs=1e-6)


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_eigenvalue_index_rejected(bad):
    with pytest.raises(DomainError):
        spectra.airy_eigenvalue(bad)


def test_airy_count_examples():
    assert spectra.airy_count(0.0) == 0
    assert spectra.airy_count(2.34, Mode.EXACT) == 1
    brute = sum((1.5 * math.pi * (i - 0.25)) ** (2 / 3) <= 10 for i in range(1, 100))
    assert spectra.airy_count(10.0) == brute == 6


@given(st.floats(0.0, 60.0))
@settings(max_examples=60, deadline=None)
def test_airy_count_inverts_eigenvalues(lam):
    for mode in Mode:
        n = spectra.airy_count(lam, mode)
        assert n == 0 or spectra.airy_eigenvalue(n, mode) <= lam
        assert spectra.airy_eigenvalue(n + 1, mode) > lam


def test_classical_location_examples():
    assert spectra.classical_location(50, 100) == 0.0
    assert spectra.classical_location(100, 100) == -2.0
    g = spectra.classical_location(1, 100)
    assert 2 - (3 * math.pi / (math.sqrt(2) * 100)) ** (2 / 3) <= g <= 2 - (3 * math.pi / 200) ** (2 / 3)
    mass = integrate.quad(lambda t: math.sqrt(4 - t * t) / (2 * math.pi), g, 2)[0]
    assert mass == pytest.approx(0.01, abs=1e-10)


def test_classical_locations_decrease():
    locs = spectra.classical_locations(257)
    assert np.all(np.diff(locs) < 0)


def test_xi_examples():
    assert spectra.xi(2.0) == 0.0
    assert spectra.xi(1.3) == 0.0
    oracle = integrate.quad(lambda t: math.sqrt(t * t - 4) / 2, 2, 3)[0]
    assert spectra.xi(3.0) == pytest.approx(oracle, abs=1e-12)
    assert spectra.xi(3.0) == pytest.approx(0.714628, abs=1e-6)
    assert 2 / 3 <= spectra.xi(3.0) <= math.sqrt(5) / 3
    assert spectra.xi(-3.0) == spectra.xi(3.0)


def test_xi_tilde_rescaling():
    n, k, x = 400, 3, -2.5
    assert spectra.xi_tilde(x, n, k) == pytest.approx((n / k) * spectra.xi(2 - (k / n) ** (2 / 3) * x))
    assert spectra.xi_tilde(1.0, n, k) == 0.0


def test_ode_blowup_frozen_and_bounds():
    assert spectra.riccati_ode_blowup(16, frozen=True) == pytest.approx(math.pi / 4, abs=1e-6)
    d = spectra.riccati_ode_blowup(16)
    assert math.pi / 4 <= d <= math.pi / math.sqrt(16 - math.pi / 2)


def test_ode_blowup_matches_scipy_solver():
    # oracle: solve q' = x - a - q^2 from q ~ 1/x near 0 until q passes -1e6
    a = 64.0
    x0 = 1e-4
    hit = lambda x, q: q[0] + 1e6
    hit.terminal = True
    sol = integrate.solve_ivp(lambda x, q: [x - a - q[0] ** 2], (x0, 2.0), [1.0 / x0],
                              method="LSODA", rtol=1e-11, atol=1e-11, events=hit)
    assert spectra.riccati_ode_blowup(a) == pytest.approx(sol.t_events[0][0], abs=1e-5)


def test_ode_blowup_rejects_nonpositive():
    with pytest.raises(DomainError):
        spectra.riccati_ode_blowup(0.0)
