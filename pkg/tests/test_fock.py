import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dppfock.errors import FormulaMismatch, SingularOperator, SplitMismatch
from dppfock.fock import (
    BlockOperator,
    SplitSpace,
    coherent_inner_det,
    coherent_state,
    fock_inner,
    gl_membership_report,
    representation_residual,
    vacuum,
    wedge_power,
)
from dppfock.generators import case_rng, random_matrix, random_projector, random_symbol, random_unitary
from dppfock.embedding import rotated_multiplier
from conftest import brute_det


def test_vacuum():
    v = vacuum(SplitSpace(3, (1, 2)))
    assert v[(1, 2)] == 1 and v[(0, 1)] == 0
    e = vacuum(SplitSpace(1, ()))
    assert e[()] == 1
    assert v.norm() == 1 and e.norm() == 1


def test_split_validation():
    with pytest.raises(ValueError):
        SplitSpace(3, (0, 3))
    with pytest.raises(ValueError):
        SplitSpace(3, (1, 1))
    s = SplitSpace(5, (4, 1))
    assert s.W == (1, 4) and s.V == (0, 2, 3)


def test_coherent_state_of_identity_is_vacuum():
    split = SplitSpace(4, (0, 2))
    c = coherent_state(BlockOperator(np.eye(4), split))
    np.testing.assert_allclose(c.to_array(), vacuum(split).to_array())


def test_coherent_state_one_row():
    g = np.array([[1.0, 0.0], [3.0, 4.0]])
    c = coherent_state(BlockOperator(g, SplitSpace(2, (1,))))
    assert c[(0,)] == pytest.approx(3) and c[(1,)] == pytest.approx(4)


@pytest.mark.parametrize("n,m", [(4, 2), (6, 3), (5, 0), (5, 5)])
def test_amplitude_count(n, m):
    g = BlockOperator(random_matrix(n, case_rng(1, n)), SplitSpace.last(n, m))
    assert len(coherent_state(g).amplitudes) == comb(n, m)


def test_orthogonality_of_monomials():
    split = SplitSpace(4, (0, 1))
    from dppfock.fock import FockVector

    u = FockVector(split, {(0, 1): 1.0})
    v = FockVector(split, {(2, 3): 1.0})
    assert fock_inner(u, v) == 0
    assert fock_inner(u, u) == 1


def test_cauchy_binet_brute_4x4(rng):
    split = SplitSpace(4, (2, 3))
    g = BlockOperator(random_matrix(4, rng), split)
    h = BlockOperator(random_matrix(4, rng), split)
    # oracle: Leibniz determinants of every 2x2 row-W minor
    total = 0j
    for s in itertools.combinations(range(4), 2):
        total += brute_det(g.matrix[np.ix_((2, 3), s)]) * np.conj(brute_det(h.matrix[np.ix_((2, 3), s)]))
    assert fock_inner(coherent_state(g), coherent_state(h)) == pytest.approx(total, abs=1e-12)
    assert coherent_inner_det(g, h) == pytest.approx(total, abs=1e-10)


def test_coherent_inner_det_examples():
    split = SplitSpace(4, (2, 3))
    eye = BlockOperator(np.eye(4), split)
    assert coherent_inner_det(eye, eye) == pytest.approx(1)
    g = np.eye(4, dtype=complex)
    g[0, 1] = 5.0  # a block, irrelevant
    g[0, 2] = 7.0  # b block, irrelevant
    g[2, 2], g[3, 3] = 2, 3
    assert coherent_inner_det(BlockOperator(g, split), eye) == pytest.approx(6)


def test_formula_mismatch_detected():
    class BadBlocks(BlockOperator):
        @property
        def d(self):
            return 2 * super().d

    split = SplitSpace.last(3, 1)
    g = BadBlocks(np.eye(3), split)
    with pytest.raises(FormulaMismatch):
        coherent_inner_det(g, BlockOperator(np.eye(3), split))


def test_split_mismatch():
    g = BlockOperator(np.eye(3), SplitSpace.last(3, 1))
    h = BlockOperator(np.eye(3), SplitSpace.last(3, 2))
    with pytest.raises(SplitMismatch):
        coherent_inner_det(g, h)
    with pytest.raises(SplitMismatch):
        fock_inner(coherent_state(g), coherent_state(h))


def test_singular_operator_rejected():
    with pytest.raises(SingularOperator):
        BlockOperator(np.diag([1.0, 0.0]), SplitSpace.last(2, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 8), st.data())
def test_cauchy_binet_property(seed, n, data):
    m = data.draw(st.integers(0, n))
    rng = case_rng(seed, 0)
    split = SplitSpace.last(n, m)
    g = BlockOperator(random_matrix(n, rng), split)
    h = BlockOperator(random_matrix(n, rng), split)
    det_value = coherent_inner_det(g, h)
    brute = fock_inner(coherent_state(g), coherent_state(h))
    assert abs(brute - det_value) <= 1e-10 * max(1, abs(det_value))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 7), st.data())
def test_vacuum_orbit_properties(seed, n, data):
    m = data.draw(st.integers(0, n))
    rng = case_rng(seed, 0)
    split = SplitSpace.last(n, m)
    gm = random_matrix(n, rng)
    g = BlockOperator(gm, split)
    # only the W rows matter
    other = gm.copy()
    other[list(split.V), :] = random_matrix(n, rng)[list(split.V), :]
    np.testing.assert_allclose(coherent_state(BlockOperator(other, split)).to_array(), coherent_state(g).to_array(), atol=1e-12)
    # overlap with the vacuum is det d
    expected = np.linalg.det(g.d) if m else 1.0
    assert abs(fock_inner(coherent_state(g), vacuum(split)) - expected) <= 1e-10
    # unitary operators give unit vectors
    u = BlockOperator(random_unitary(n, rng), split)
    assert abs(fock_inner(coherent_state(u), coherent_state(u)) - 1) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6), st.data())
def test_representation_property(seed, n, data):
    m = data.draw(st.integers(0, n))
    rng = case_rng(seed, 0)
    g1, g2 = random_matrix(n, rng), random_matrix(n, rng)
    assert representation_residual(g1, g2, m) <= 1e-9


def test_coherent_state_is_wedge_power_of_transpose(rng):
    split = SplitSpace(6, (1, 3, 4))
    g = random_matrix(6, rng)
    via_dense = wedge_power(g.T, 3) @ vacuum(split).to_array()
    np.testing.assert_allclose(via_dense, coherent_state(BlockOperator(g, split)).to_array(), atol=1e-13)


def test_wedge_power_limits():
    with pytest.raises(ValueError):
        wedge_power(np.eye(9), 2)
    np.testing.assert_allclose(wedge_power(np.eye(5), 2), np.eye(10))


def test_membership_report_trivial_cases(rng):
    r = gl_membership_report(BlockOperator(np.eye(4), SplitSpace.last(4, 2)))
    assert r.hs_norm_b == r.hs_norm_c == r.trace_norm_d_minus_1 == 0
    assert r.condition_number == pytest.approx(1)
    g = np.zeros((4, 4), dtype=complex)
    g[:2, :2] = random_unitary(2, rng)
    g[2:, 2:] = random_unitary(2, rng)
    r = gl_membership_report(BlockOperator(g, SplitSpace.last(4, 2)))
    assert r.hs_norm_b == 0 and r.hs_norm_c == 0


def test_membership_report_matches_compressed_operator(rng):
    k = random_projector(7, 3, rng)
    a = random_symbol(7, rng)
    g = rotated_multiplier(k, a)
    # K (A - 1) K is the multiplier compressed to the range of K
    compressed = k.matrix @ np.diag(a) @ k.matrix
    sv = np.linalg.svd(compressed, compute_uv=False)
    assert gl_membership_report(g).trace_norm_d_minus_1 == pytest.approx(sv.sum(), abs=1e-10)
