import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dppfock.dpp_finite import (
    FiniteDPP,
    all_point_probabilities,
    correlation,
    count_distribution,
    count_distribution_brute,
    expectation_brute,
    expectation_det,
    gram_brute,
    gram_det,
    indices_to_mask,
    mask_to_indices,
    multiplicative_functional,
    point_probability,
)
from dppfock.errors import GroundSetTooLarge, OverlappingBlocks
from dppfock.generators import case_rng, random_kernel, random_symbol
from conftest import brute_det, subsets


def dpp(m):
    return FiniteDPP.from_matrix(m)


def naive_point_probability(k, config):
    """p[I] by explicit superset enumeration with Leibniz determinants."""
    n = k.shape[0]
    total = 0j
    for j in subsets(n):
        if set(config) <= set(j):
            total += (-1) ** (len(j) - len(config)) * brute_det(k[np.ix_(j, j)])
    return total.real


def test_correlation_examples():
    assert correlation(dpp(np.diag([0.3, 0.7])), []) == 1.0
    assert correlation(dpp(np.diag([0.3, 0.7])), [0, 1]) == pytest.approx(0.21)
    assert correlation(dpp(np.eye(3)), [0, 2]) == 1.0


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 1.0])
def test_point_probability_one_point(p):
    d = dpp([[p]])
    assert point_probability(d, [0]) == pytest.approx(p)
    assert point_probability(d, []) == pytest.approx(1 - p)


def test_point_probability_degenerate_kernels():
    d = dpp(np.zeros((3, 3)))
    assert point_probability(d, []) == 1.0
    for s in subsets(3)[1:]:
        assert point_probability(d, s) == 0.0
    assert point_probability(dpp(np.eye(4)), range(4)) == pytest.approx(1.0)


def test_point_probability_matches_naive(rng):
    k = random_kernel(4, rng)
    d = FiniteDPP(k)
    for s in subsets(4):
        assert point_probability(d, s) == pytest.approx(naive_point_probability(k.matrix, s), abs=1e-13)


def test_moebius_matches_direct(rng):
    d = FiniteDPP(random_kernel(7, rng))
    p = all_point_probabilities(d)
    for m in range(1 << 7):
        assert abs(p[m] - point_probability(d, mask_to_indices(m))) <= 1e-12


def test_mask_roundtrip():
    for m in range(64):
        assert indices_to_mask(mask_to_indices(m)) == m


def test_enumeration_guard():
    with pytest.raises(GroundSetTooLarge):
        point_probability(dpp(np.zeros((21, 21))), [])
    with pytest.raises(GroundSetTooLarge):
        expectation_brute(dpp(np.zeros((21, 21))), np.zeros(21))
    # the determinant route has no size limit
    assert expectation_det(dpp(np.zeros((21, 21))), np.ones(21)) == 1


def test_multiplicative_functional():
    assert multiplicative_functional(np.zeros(4), [0, 2]) == 1
    assert multiplicative_functional([3.0, 1j], []) == 1
    assert multiplicative_functional([1, 2], [0, 1]) == 6


def test_expectation_examples():
    assert expectation_brute(dpp([[0.5]]), [1]) == pytest.approx(1.5)
    assert expectation_det(dpp([[0.5]]), [1]) == pytest.approx(1.5)
    d = random_kernel(5, case_rng(2, 2))
    assert expectation_brute(d, np.zeros(5)) == pytest.approx(1.0, abs=1e-13)
    r, s = 2.0 + 1j, -0.5
    assert expectation_brute(dpp(np.eye(2)), [r - 1, s - 1]) == pytest.approx(r * s)
    assert expectation_det(dpp(np.diag([0.3, 0.7])), [1, 1]) == pytest.approx(1.3 * 1.7)
    assert expectation_det(d, np.zeros(5)) == 1


def test_gram_examples(rng):
    d = FiniteDPP(random_kernel(4, rng))
    a = random_symbol(4, rng)
    assert gram_det(d, a, np.zeros(4)) == pytest.approx(expectation_det(d, a), rel=1e-13)
    assert gram_det(d, np.zeros(4), np.zeros(4)) == 1
    assert gram_brute(d, np.zeros(4), np.zeros(4)) == pytest.approx(1, abs=1e-13)
    assert gram_det(dpp([[0.5]]), [1], [1]) == pytest.approx(2.5)
    assert gram_brute(dpp([[0.5]]), [1], [1]) == pytest.approx(0.5 * 1 + 0.5 * 4)
    z = dpp(np.zeros((3, 3)))
    assert gram_brute(z, a[:3], a[1:]) == pytest.approx(1)


def test_gram_random_small(rng):
    for n in range(1, 11):
        d = FiniteDPP(random_kernel(n, rng))
        a, b = random_symbol(n, rng), random_symbol(n, rng)
        assert abs(gram_brute(d, a, b) - gram_det(d, a, b)) <= 1e-9 * max(1, abs(gram_det(d, a, b)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 12), st.booleans())
def test_probability_axioms(seed, n, complex_):
    d = FiniteDPP(random_kernel(n, case_rng(seed, 0), complex_))
    p = all_point_probabilities(d)
    assert abs(p.sum() - 1) <= 1e-10
    assert p.min() >= -1e-10
    # inclusion probability of each point is the diagonal entry
    masks = np.arange(1 << n)
    for j in range(n):
        assert abs(p[(masks >> j) & 1 == 1].sum() - d.K[j, j].real) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 10))
def test_main_and_gram_identities(seed, n):
    rng = case_rng(seed, 0)
    d = FiniteDPP(random_kernel(n, rng))
    a, b = random_symbol(n, rng), random_symbol(n, rng)
    e = expectation_det(d, a)
    assert abs(expectation_brute(d, a) - e) <= 1e-9 * max(1, abs(e))
    g = gram_det(d, a, b)
    assert abs(gram_brute(d, a, b) - g) <= 1e-9 * max(1, abs(g))
    assert abs(gram_det(d, b, a) - np.conj(g)) <= 1e-10 * max(1, abs(g))


def test_count_distribution_examples(rng):
    p = 0.37
    np.testing.assert_allclose(count_distribution(dpp([[p]]), [[0]]), [1 - p, p], atol=1e-14)
    t = count_distribution(dpp(np.eye(2)), [[0], [1]])
    expected = np.zeros((2, 2))
    expected[1, 1] = 1
    np.testing.assert_allclose(t, expected, atol=1e-14)
    d = FiniteDPP(random_kernel(6, rng))
    np.testing.assert_allclose(count_distribution(d, [[0, 1, 2]]), count_distribution_brute(d, [[0, 1, 2]]), atol=1e-10)


def test_count_distribution_joint(rng):
    d = FiniteDPP(random_kernel(8, rng))
    blocks = [[0, 3], [1, 2, 7], [5]]
    t = count_distribution(d, blocks)
    assert t.shape == (3, 4, 2)
    assert t.min() >= -1e-10
    assert abs(t.sum() - 1) <= 1e-10
    np.testing.assert_allclose(t, count_distribution_brute(d, blocks), atol=1e-10)
    # marginal over the other blocks is the single-block law
    np.testing.assert_allclose(t.sum(axis=(0, 2)), count_distribution(d, [[1, 2, 7]]), atol=1e-10)


def test_count_distribution_overlap():
    with pytest.raises(OverlappingBlocks):
        count_distribution(dpp(np.eye(3) * 0.5), [[0, 1], [1, 2]])
