import numpy as np
import pytest

from dppfock.dpp_finite import FiniteDPP, expectation_det
from dppfock.errors import NumericalDegeneracy
from dppfock.generators import case_rng, random_kernel
from dppfock.kernels import make_discrete_kernel, spectral_decompose
from dppfock.sampler import (
    _select_points,
    batch_expectation,
    distribution_chi2,
    inclusion_audit,
    mc_expectation,
    pair_audit,
    sample,
    sample_batch,
)


def test_trivial_kernels():
    zero = spectral_decompose(make_discrete_kernel(np.zeros((4, 4))))
    full = spectral_decompose(make_discrete_kernel(np.eye(4)))
    for seed in range(20):
        assert sample(zero, seed) == ()
        assert sample(full, seed) == (0, 1, 2, 3)


def test_half_kernel_frequency():
    b = sample_batch(FiniteDPP.from_matrix([[0.5]]), 100_000, 3)
    freq = np.mean([len(c) for c in b.configurations])
    se = np.sqrt(0.25 / 100_000)
    assert abs(freq - 0.5) <= 4 * se


def test_mc_expectation_zero_symbol():
    est, se = mc_expectation(FiniteDPP(random_kernel(5, case_rng(1, 1))), np.zeros(5), 500, 9)
    assert est == 1 and se == 0


def test_mc_expectation_diagonal():
    d = FiniteDPP.from_matrix(np.diag([0.3, 0.7]))
    est, se = mc_expectation(d, [1, 1], 100_000, 11)
    assert abs(est - 2.21) <= 4 * se


def test_mc_expectation_random_kernel():
    rng = case_rng(7, 7)
    d = FiniteDPP(random_kernel(12, rng))
    a = rng.uniform(-0.5, 0.5, 12)
    est, se = mc_expectation(d, a, 30_000, 12)
    assert abs(est - expectation_det(d, a)) <= 4 * se


def test_mc_expectation_needs_trials():
    with pytest.raises(ValueError):
        mc_expectation(FiniteDPP.from_matrix([[0.5]]), [1], 50, 0)


def test_inclusion_audit_trivial():
    rep = inclusion_audit(FiniteDPP.from_matrix(np.eye(3)), 10_000, 1)
    np.testing.assert_array_equal(rep.frequency, 1)
    assert rep.max_abs_z() == 0
    rep = inclusion_audit(FiniteDPP.from_matrix(np.zeros((3, 3))), 10_000, 1)
    np.testing.assert_array_equal(rep.frequency, 0)


def test_inclusion_and_pair_audit_random():
    d = FiniteDPP(random_kernel(10, case_rng(4, 4)))
    b = sample_batch(d, 50_000, 5)
    assert inclusion_audit(d, 0, 0, batch=b).max_abs_z() <= 4
    assert pair_audit(d, b).max_abs_z() <= 4


def test_reproducible_and_thread_independent():
    d = FiniteDPP(random_kernel(9, case_rng(8, 8)))
    a = sample_batch(d, 10_000, 77, threads=1)
    b = sample_batch(d, 10_000, 77, threads=4)
    c = sample_batch(d, 10_000, 78, threads=1)
    assert a.configurations == b.configurations
    assert a.configurations != c.configurations
    assert a.kernel_fingerprint == b.kernel_fingerprint


def test_batch_matches_scalar_sampler():
    d = FiniteDPP(random_kernel(11, case_rng(3, 3)))
    sd = spectral_decompose(d.kernel)
    batch = sample_batch(d, 500, 21)
    assert batch.configurations == [sample(sd, case_rng(21, i)) for i in range(500)]


def test_real_kernel_sampling():
    d = FiniteDPP(random_kernel(6, case_rng(2, 9), complex_=False))
    b = sample_batch(d, 20_000, 2)
    assert inclusion_audit(d, 0, 0, batch=b).max_abs_z() <= 4


def test_chi_square_small():
    d = FiniteDPP(random_kernel(5, case_rng(6, 6)))
    res = distribution_chi2(d, sample_batch(d, 40_000, 6))
    assert res.pvalue >= 1e-3


def test_degenerate_projection_raises():
    with pytest.raises(NumericalDegeneracy):
        _select_points(np.zeros((3, 1)), [0.5])


def test_batch_expectation_stderr_formula():
    d = FiniteDPP.from_matrix([[0.5]])
    b = sample_batch(d, 1000, 1)
    est, se = batch_expectation(b, [1.0])
    vals = np.array([2.0 if c else 1.0 for c in b.configurations])
    assert est == pytest.approx(vals.mean())
    assert se == pytest.approx(vals.std(ddof=1) / np.sqrt(len(vals)))
