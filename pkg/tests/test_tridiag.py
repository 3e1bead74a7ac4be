import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from airyedge import tridiag
from airyedge.errors import DomainError
from airyedge.tridiag import LogVector, TridiagonalSym

PAIR = TridiagonalSym([0.0, 0.0], [1.0])


def random_tridiag(rng, n):
    return TridiagonalSym(rng.normal(size=n), rng.normal(size=n - 1))


def test_count_below_pair():
    assert tridiag.count_below(PAIR, 0.0) == 1
    assert tridiag.count_below(PAIR, 1.5) == 2
    assert tridiag.count_below(PAIR, -1.5) == 0


def test_count_below_vs_scipy_tridiagonal_solver():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        T = random_tridiag(rng, 6)
        ev = linalg.eigvalsh_tridiagonal(T.diag, T.offdiag)
        x = rng.uniform(-4, 4, 5)
        got = np.atleast_1d(tridiag.count_below(T, x))
        np.testing.assert_array_equal(got, (ev[None, :] < x[:, None]).sum(axis=1))


def test_count_below_handles_exact_zero_pivot():
    # x = 0 hits a zero pivot in the first step
    T = TridiagonalSym([0.0, 0.0, 0.0], [1.0, 1.0])
    ev = np.linalg.eigvalsh(T.dense())
    assert tridiag.count_below(T, 0.0) in ((ev < 0).sum(), (ev <= 0).sum())


def test_top_k_examples():
    np.testing.assert_allclose(tridiag.top_k_eigenvalues(PAIR, 2).values, [1.0, -1.0], atol=1e-10)
    assert tridiag.top_k_eigenvalues(TridiagonalSym([3.25], []), 1).values[0] == pytest.approx(3.25, abs=1e-10)


def test_top_k_random_8x8():
    rng = np.random.default_rng(2)
    for _ in range(200):
        T = random_tridiag(rng, 8)
        want = np.linalg.eigvalsh(T.dense())[::-1][:4]
        np.testing.assert_allclose(tridiag.top_k_eigenvalues(T, 4, 1e-12).values, want, atol=1e-10)


def test_top_k_handles_large_entries():
    T = TridiagonalSym([1e6, -1e6, 3.0], [1e5, 2.0])
    want = np.linalg.eigvalsh(T.dense())[::-1]
    np.testing.assert_allclose(tridiag.top_k_eigenvalues(T, 3, 1e-6).values, want, atol=1e-6)


def test_rescale_edge():
    n = 64
    assert tridiag.rescale_edge(2 * math.sqrt(n), n) == 0.0
    assert tridiag.rescale_edge(2 * math.sqrt(n) + n ** (-1 / 6), n) == pytest.approx(1.0)


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=20))
def test_rescale_edge_monotone(values):
    v = np.sort(values)
    assert np.all(np.diff(tridiag.rescale_edge(v, 100)) >= 0)


def test_sample_moments():
    rng_seed = 3
    diag, off = tridiag.sample_gbeta_batch(2, 2.0, rng_seed, 0, 100000)
    sq = off[:, 0] ** 2
    assert abs(sq.mean() - 1.0) <= 3 * sq.std(ddof=1) / math.sqrt(sq.size)
    d = diag.ravel()
    assert abs(d.mean()) <= 3 * d.std(ddof=1) / math.sqrt(d.size)


def test_sample_is_reproducible_and_replica_keyed():
    a = tridiag.sample_gbeta(32, 2.0, seed=5, replica=7)
    b = tridiag.sample_gbeta(32, 2.0, seed=5, replica=7)
    c = tridiag.sample_gbeta(32, 2.0, seed=5, replica=8)
    assert np.array_equal(a.diag, b.diag) and np.array_equal(a.offdiag, b.offdiag)
    assert not np.array_equal(a.diag, c.diag)
    diag, off = tridiag.sample_gbeta_batch(32, 2.0, 5, 6, 9)
    assert np.array_equal(diag[1], a.diag) and np.array_equal(off[1], a.offdiag)


@pytest.mark.parametrize("beta", [0.0, -1.0, math.inf])
def test_sample_rejects_bad_beta(beta):
    with pytest.raises(DomainError):
        tridiag.sample_gbeta(4, beta)


def test_invalid_shapes_rejected():
    with pytest.raises(DomainError):
        TridiagonalSym([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        TridiagonalSym([], [])


def test_eigenvector_pair():
    v = tridiag.eigenvector(PAIR, 1.0)
    np.testing.assert_allclose(v, [1 / math.sqrt(2)] * 2, atol=1e-10)


def test_eigenvector_residuals_and_orthogonality():
    rng = np.random.default_rng(4)
    for _ in range(100):
        T = random_tridiag(rng, 6)
        for lam in np.linalg.eigvalsh(T.dense()):
            v = tridiag.eigenvector(T, lam)
            assert np.linalg.norm(T.dense() @ v - lam * v) <= 1e-8 * T.inf_norm()
    for _ in range(100):
        T = random_tridiag(rng, 8)
        top = tridiag.top_k_eigenvalues(T, 2, 1e-13).values
        v1, v2 = (tridiag.eigenvector(T, x) for x in top)
        assert abs(v1 @ v2) <= 1e-6


def test_log_eigenvector_agrees_with_dense():
    rng = np.random.default_rng(5)
    for _ in range(50):
        T = random_tridiag(rng, 10)
        w, V = np.linalg.eigh(T.dense())
        lv = tridiag.eigenvector_log(T, w[-1])
        v = lv.to_dense()
        ref = V[:, -1] * np.sign(V[0, -1])
        np.testing.assert_allclose(v, ref, atol=1e-8)


def test_log_eigenvector_survives_underflow():
    T = tridiag.sample_gbeta(2048, 2.0, seed=1)
    lam = tridiag.top_k_eigenvalues(T, 1, 1e-12).values[0]
    lv = tridiag.eigenvector_log(T, lam)
    assert np.all(np.isfinite(lv.logabs))
    assert lv.logabs[-1] < -745  # far below the smallest double


def test_discrete_riccati_examples():
    n = 27
    np.testing.assert_allclose(tridiag.discrete_riccati(np.full(n, 2.5), n), 0.0)
    r = 0.7
    phi = r ** np.arange(1, n + 1)
    np.testing.assert_allclose(tridiag.discrete_riccati(phi, n), n ** (1 / 3) * (r - 1), rtol=1e-12)
    p = tridiag.discrete_riccati(np.array([1.0, 0.0, 2.0]), 3)
    assert math.isnan(p[1])


def test_decay_diagnostics_sign_change():
    n = 64
    phi = 0.9 ** np.arange(n)
    phi[40] *= -1
    assert not tridiag.decay_diagnostics(phi, n, 10).sign_constant_beyond
    rep = tridiag.decay_diagnostics(0.9 ** np.arange(n), n, 10)
    assert rep.sign_constant_beyond and rep.last_ratio == pytest.approx(0.9)


def test_decay_diagnostics_log_and_dense_agree():
    phi = np.exp(-0.05 * np.arange(1, 65) ** 1.5)
    a = tridiag.decay_diagnostics(phi, 64, 8)
    b = tridiag.decay_diagnostics(LogVector(np.ones(64), np.log(phi)), 64, 8)
    assert a == b


def test_rigidity_matches_explicit_eigenvalues():
    from airyedge.spectra import classical_locations

    rng = np.random.default_rng(6)
    n = 48
    diag, off = tridiag.sample_gbeta_batch(n, 2.0, 6, 0, 20)
    fr = tridiag.rigidity_violations(diag, off, [0.2, 0.5, 1.0])
    k = np.arange(1, n + 1)
    khat = np.minimum(k, n + 1 - k)
    gamma = classical_locations(n)
    for b in range(20):
        lam = linalg.eigvalsh_tridiagonal(diag[b], off[b])[::-1] / math.sqrt(n)
        for col, a in enumerate([0.2, 0.5, 1.0]):
            thr = n ** (a - 2 / 3) * khat ** (-1 / 3)
            assert fr[b, col] == pytest.approx(np.mean(np.abs(lam - gamma) >= thr))
    assert np.all(np.diff(fr, axis=1) <= 0)


def test_matrix_csv_round_trip(tmp_path):
    T = tridiag.sample_gbeta(9, 1.5, seed=2)
    path = tmp_path / "m.csv"
    tridiag.write_matrix_csv(T, path)
    back = tridiag.read_matrix_csv(path)
    assert np.array_equal(back.diag, T.diag) and np.array_equal(back.offdiag, T.offdiag)
