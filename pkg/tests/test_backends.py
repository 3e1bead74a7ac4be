"""The numba kernels and their pure-numpy twins must agree."""

import math

import numpy as np
import pytest
from scipy import stats

from airyedge import _riccati_kernels as RK
from airyedge import _tridiag_kernels as TK
from airyedge import riccati, rng, tridiag
from airyedge._accel import HAVE_NUMBA, use_backend

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def both(fn, *args):
    with use_backend("numba"):
        a = fn(*args)
    with use_backend("numpy"):
        b = fn(*args)
    return a, b


@pytest.fixture(scope="module")
def batch():
    diag, off = tridiag.sample_gbeta_batch(200, 2.0, 1, 0, 16)
    return diag, off


@needs_numba
def test_sturm_counts_identical(batch):
    diag, off = batch
    shifts = np.random.default_rng(0).uniform(-30, 30, (16, 40))
    a, b = both(TK.sturm_counts, diag, off ** 2, shifts)
    assert np.array_equal(a, b)


@needs_numba
def test_bisection_identical(batch):
    diag, off = batch
    a, b = both(tridiag.top_k_batch, diag, off, 3, 1e-12)
    assert np.array_equal(a, b)


@needs_numba
def test_log_eigenvectors_agree(batch):
    diag, off = batch
    lam = tridiag.top_k_batch(diag, off, 1, 1e-12)[:, 0]
    (sa, la), (sb, lb) = both(TK.eigvec_log, diag, off, lam)
    assert np.array_equal(sa, sb)
    np.testing.assert_allclose(la, lb, rtol=1e-12, atol=1e-12)


@needs_numba
def test_diffusion_counts_identical():
    a, b = both(riccati.count_batch, [1.0, 4.0, 9.0], 2.0, 3, 0, 40)
    assert np.array_equal(a, b)
    fa, fb = both(riccati.first_blowup_batch, 30.0, 2.0, 3, 0, 40)
    np.testing.assert_allclose(fa, fb, rtol=1e-12)


@needs_numba
def test_batch_kernel_matches_single_path_kernel():
    keys = rng.replica_keys(5, 0, 8)
    lams = np.full(8, 6.0)
    xm = np.full(8, riccati.auto_horizon(6.0))
    counts = RK.chart_counts_nb(lams, math.sqrt(2.0), 1e-3, 8.0, xm, keys, False)
    for i, k in enumerate(keys):
        times = np.empty(64)
        c, _, _ = RK.chart_path(6.0, math.sqrt(2.0), 1e-3, 8.0, xm[i], k, times)
        assert c == counts[i]


def test_counter_normals_are_standard_normal():
    keys = rng.replica_keys(0, 0, 4)
    z = rng.counter_normal(np.repeat(keys, 50000), np.tile(np.arange(50000, dtype=np.uint64), 4))
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_counter_normal_scalar_matches_vector():
    key = rng.replica_key(9, 2)
    vec = rng.counter_normal(np.full(10, key, dtype=np.uint64), np.arange(10, dtype=np.uint64))
    assert [rng.counter_normal_scalar(key, np.uint64(i)) for i in range(10)] == pytest.approx(vec.tolist(), abs=0)


def test_replica_streams_are_distinct_and_stable():
    keys = rng.replica_keys(123, 0, 1000)
    assert np.unique(keys).size == 1000
    assert rng.replica_key(123, 5) == keys[5]
    assert rng.replica_key(123, 5, substream=1) != keys[5]
    assert rng.replica_rng(7, 3).standard_normal() == rng.replica_rng(7, 3).standard_normal()


def test_pivoted_solve_matches_dense():
    r = np.random.default_rng(2)
    for _ in range(50):
        n = int(r.integers(2, 12))
        sub, dia, sup = r.normal(size=n - 1), r.normal(size=n), r.normal(size=n - 1)
        rhs = r.normal(size=n)
        A = np.diag(dia) + np.diag(sub, -1) + np.diag(sup, 1)
        got = TK.tridiag_solve_pivoted(sub, dia, sup, rhs.copy(), 1e-300)
        np.testing.assert_allclose(A @ got, rhs, atol=1e-8 * np.linalg.cond(A))


def test_environment_flag_selects_numpy(tmp_path):
    import os
    import subprocess
    import sys

    env = dict(os.environ, AIRYEDGE_PURE_NUMPY="1")
    out = subprocess.run([sys.executable, "-c", "import airyedge; print(airyedge.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    res = subprocess.run([sys.executable, "-m", "airyedge", "rate-fn", "--phi-minus", "--z", "-1"],
                         env=env, capture_output=True, text=True)
    assert res.returncode == 0 and "0.0502628" in res.stdout
