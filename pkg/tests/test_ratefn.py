import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from airyedge import ratefn
from airyedge.errors import DomainError
from airyedge.measures import SemicircleRescaled, SignedMeasure, UniformDensity
from airyedge.ratefn import RateParams


def atoms(pos, w, window=(-2.0, 2.0)):
    return SignedMeasure(pos, w, None, window)


def test_rate_of_zero_measure():
    assert ratefn.rate_I(atoms([], []), RateParams()) == 0.0


def test_single_atom_self_interaction():
    assert ratefn.rate_I(atoms([0.0], [1.0]), RateParams(R1=10.0)) == pytest.approx(3 * math.log(10), rel=1e-14)


def test_symmetric_pair_against_double_sum():
    R1 = 50.0
    mu = atoms([-1.0, 1.0], [0.5, 0.5])
    delta = R1 ** -3
    oracle = -sum(wi * wj * math.log(max(abs(xi - xj), delta))
                  for xi, wi in zip(mu.positions, mu.weights) for xj, wj in zip(mu.positions, mu.weights))
    oracle += 4 / 3 * 0.5
    assert ratefn.rate_I(mu, RateParams(R0=1.0, R1=R1)) == pytest.approx(oracle, rel=1e-14)
    assert oracle == pytest.approx(-0.5 * math.log(2) - 0.5 * math.log(delta) + 2 / 3)


def test_interaction_is_reflection_invariant():
    rng = np.random.default_rng(1)
    for _ in range(10):
        pos, w = rng.uniform(-2, 2, 4), rng.normal(size=4)
        lo, hi = sorted(rng.uniform(-2, 2, 2))
        h = abs(float(rng.normal()))
        mu = SignedMeasure(pos, w, UniformDensity(lo, hi, h), (-2, 2))
        ref = SignedMeasure(-pos, w, UniformDensity(-hi, -lo, h), (-2, 2))
        p = RateParams(R0=2.0, R1=1.5)
        assert ratefn.interaction_term(mu, p) == pytest.approx(ratefn.interaction_term(ref, p), abs=1e-8)


def test_truncated_kernel_grows_with_R1_for_positive_atoms():
    rng = np.random.default_rng(2)
    for _ in range(20):
        mu = atoms(rng.uniform(-1, 1, 5), rng.uniform(0.1, 1, 5))
        vals = [ratefn.interaction_term(mu, RateParams(R0=1.0, R1=r)) for r in (1.0, 2.0, 5.0, 20.0)]
        assert np.all(np.diff(vals) >= -1e-14)


def test_window_must_cover_R0():
    with pytest.raises(DomainError):
        ratefn.rate_I(atoms([0.0], [1.0], (-0.5, 0.5)), RateParams(R0=1.0))


def test_psi_examples():
    p = RateParams(R0=2.0)
    zero = ratefn.psi_and_I2(atoms([], []), p)
    assert np.all(zero.psi == 0) and zero.I2 == 0.0
    w = 0.7
    mu = atoms([-2.0], [w])
    assert ratefn.psi_value(-1.0, w, 2.0, 1.0) == pytest.approx(2 / 3 * w)
    tr = ratefn.psi_and_I2(mu, p, grid=4001)
    i = np.argmin(np.abs(tr.x + 1.0))
    assert tr.x[i] == pytest.approx(-1.0) and tr.psi[i] == pytest.approx(2 / 3 * w)
    assert ratefn.psi_value(1.0, 0.1, 1.0, 1.0) == pytest.approx(0.01 / (8 * math.log(10)), rel=1e-12)
    assert ratefn.psi_value(1.0, 0.1, 1.0, 1.0) == pytest.approx(0.000543, abs=5e-7)
    assert ratefn.psi_value(0.5, 0.0, 1.0, 1.0) == 0.0


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(0.01, 2)), min_size=1, max_size=5),
       st.booleans())
@settings(max_examples=40, deadline=None)
def test_I2_positive_for_nonzero_measures(pts, flip):
    sign = -1.0 if flip else 1.0
    mu = atoms([p for p, _ in pts], [sign * w for _, w in pts], (-1.0, 1.0))
    assert ratefn.psi_and_I2(mu, RateParams(R0=1.0), grid=257).I2 > 0


def test_phi_minus_examples():
    assert ratefn.phi_minus(0.0) == 0.0
    mpmath.mp.dps = 40
    pi = mpmath.pi
    z = mpmath.mpf(-1)
    exact = 4 / (15 * pi ** 6) * (1 - pi ** 2 * z) ** 2.5 - 4 / (15 * pi ** 6) + 2 / (3 * pi ** 4) * z - z ** 2 / (2 * pi ** 2)
    assert ratefn.phi_minus(-1.0) == pytest.approx(float(exact), rel=1e-14)
    assert ratefn.phi_minus(-1.0) == pytest.approx(0.05026, abs=5e-6)


def test_phi_minus_small_argument_is_accurate():
    mpmath.mp.dps = 50
    pi = mpmath.pi
    for zf in (-1e-3, -1e-6):
        z = mpmath.mpf(zf)
        exact = 4 / (15 * pi ** 6) * ((1 - pi ** 2 * z) ** 2.5 - 1) + 2 / (3 * pi ** 4) * z - z ** 2 / (2 * pi ** 2)
        assert ratefn.phi_minus(zf) == pytest.approx(float(exact), rel=1e-6)


def test_phi_minus_rejects_positive():
    with pytest.raises(DomainError):
        ratefn.phi_minus(0.5)


def test_log_energy_examples():
    assert ratefn.log_energy_J(atoms([0.0, 1.0], [1.0, 1.0])) == pytest.approx(0.0, abs=1e-15)
    assert ratefn.log_energy_J(atoms([0.0, math.e], [1.0, 1.0], (-1, 3))) == pytest.approx(-2.0)
    unif = SignedMeasure([], [], UniformDensity(0.0, 1.0, 1.0), (0.0, 1.0))
    assert ratefn.log_energy_J(unif) == pytest.approx(1.5, abs=1e-10)


def test_log_energy_rejects_coincident_atoms():
    with pytest.raises(DomainError):
        ratefn.log_energy_J(atoms([0.5, 0.5], [1.0, 1.0]))


def test_cross_J_bilinearity():
    mu = atoms([-0.5, 0.2], [1.0, -0.3])
    nu = SignedMeasure([0.9], [0.4], UniformDensity(-1.0, 0.0, 0.5), (-2, 2))
    both = SignedMeasure([-0.5, 0.2, 0.9], [1.0, -0.3, 0.4], UniformDensity(-1.0, 0.0, 0.5), (-2, 2))
    lhs = ratefn.log_energy_J(both)
    rhs = ratefn.log_energy_J(mu) + ratefn.log_energy_J(nu) + 2 * ratefn.cross_J(mu, nu)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    assert ratefn.cross_J(mu, nu) == pytest.approx(ratefn.cross_J(nu, mu), abs=1e-12)


def test_semicircle_energy_against_quadrature():
    dens = SemicircleRescaled(30, 2, 1)
    mu = SignedMeasure([], [], dens, (0.0, 3.0))
    inner = lambda x: integrate.quad(lambda y: -math.log(abs(x - y)) * dens.pdf(y), 0, 3, points=[x], limit=200)[0]
    oracle = integrate.quad(lambda x: inner(x) * dens.pdf(x), 0, 3, limit=200)[0]
    assert ratefn.log_energy_J(mu) == pytest.approx(oracle, abs=1e-7)


def test_J0_adds_rescaled_potential():
    from airyedge.spectra import xi_tilde

    n, k = 200, 2
    mu = atoms([-1.5, 0.5], [0.5, 0.5])
    extra = 2 * 0.5 * xi_tilde(-1.5, n, k)
    assert ratefn.log_energy_J0(mu, n, k) == pytest.approx(ratefn.log_energy_J(mu) + extra, rel=1e-13)


def test_I1_upper_bound():
    p_atoms = atoms([0.2], [1.0], (-1.0, 1.0))
    ext = SignedMeasure([0.2, 1.5], [1.0, -1.0], None, (-2, 2))
    assert ratefn.rate_I1_upper(p_atoms, ext, 1.0) == math.inf
    mu = SignedMeasure([], [], UniformDensity(-0.5, 0.5, 1.0), (-1, 1))
    ext = SignedMeasure([], [], UniformDensity(-0.5, 0.5, 1.0), (-3, 3))
    with pytest.raises(DomainError):
        ratefn.rate_I1_upper(mu, ext, 1.0)  # total mass 1, not 0
    with pytest.raises(DomainError):
        ratefn.rate_I1_upper(mu, SignedMeasure(window=(-2, 2)), 1.0)


def test_rate_params_validation():
    for bad in ({"R0": 0.5}, {"R1": math.inf}, {"c_prop22": 0.0}):
        with pytest.raises(DomainError):
            RateParams(**bad)
