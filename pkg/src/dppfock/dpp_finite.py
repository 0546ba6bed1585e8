"""Exact determinantal point processes on a finite ground set.

Configurations are subsets of ``{0, ..., n-1}``. Public functions take them as
iterables of indices; the enumeration routines index all ``2**n`` subsets by
bitmask, bit ``j`` standing for point ``j``.

Two independent routes are kept side by side: brute enumeration of the
inclusion-exclusion measure, and closed-form determinants. The test-suite and
the ``verify-finite`` command check them against each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GroundSetTooLarge, OverlappingBlocks
from .kernels import DiscreteKernel, make_discrete_kernel
from .linalg import batched_principal_minors, det

MAX_ENUMERATION = 20
_CACHE_LIMIT = 16
_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class FiniteDPP:
    kernel: DiscreteKernel

    @classmethod
    def from_matrix(cls, matrix) -> "FiniteDPP":
        return cls(make_discrete_kernel(matrix))

    @property
    def n(self) -> int:
        return self.kernel.dim

    @property
    def K(self) -> np.ndarray:
        return self.kernel.matrix

    @cached_property
    def _minors(self) -> np.ndarray:
        return all_correlations(self)


def _as_dpp(dpp) -> FiniteDPP:
    if isinstance(dpp, FiniteDPP):
        return dpp
    if isinstance(dpp, DiscreteKernel):
        return FiniteDPP(dpp)
    return FiniteDPP.from_matrix(dpp)


def _check_enumerable(n: int) -> None:
    if n > MAX_ENUMERATION:
        raise GroundSetTooLarge(f"enumeration needs n <= {MAX_ENUMERATION}, got {n}")


def indices_to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def mask_to_indices(mask: int) -> tuple[int, ...]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def _config(indices: Iterable[int], n: int) -> tuple[int, ...]:
    idx = tuple(sorted(set(int(i) for i in indices)))
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"configuration {idx} not inside ground set of size {n}")
    return idx


def _symbol(a, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=complex).reshape(-1)
    if a.shape != (n,):
        raise ValueError(f"symbol needs {n} values, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("symbol has non-finite values")
    return a


def popcounts(n: int) -> np.ndarray:
    """Number of set bits for every mask in ``range(2**n)``."""
    counts = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        counts = np.concatenate([counts, counts + 1])
    return counts


def correlation(dpp, indices: Iterable[int]) -> float:
    """``P(indices are all present) = det K_I``; the empty determinant is 1."""
    dpp = _as_dpp(dpp)
    idx = list(_config(indices, dpp.n))
    return float(det(dpp.K[np.ix_(idx, idx)]).real)


def all_correlations(dpp) -> np.ndarray:
    """``det K_J`` for every mask ``J`` in ``range(2**n)``."""
    dpp = _as_dpp(dpp)
    n = dpp.n
    _check_enumerable(n)
    out = np.empty(1 << n, dtype=float)
    weights = np.left_shift(1, np.arange(n, dtype=np.int64))
    k = dpp.K
    out[0] = 1.0
    for size in range(1, n + 1):
        combos = itertools.combinations(range(n), size)
        while True:
            chunk = np.array(list(itertools.islice(combos, _CHUNK)), dtype=np.int64).reshape(-1, size)
            if chunk.shape[0] == 0:
                break
            out[weights[chunk].sum(axis=1)] = batched_principal_minors(k, chunk).real
    return out


def point_probability(dpp, indices: Iterable[int]) -> float:
    """Probability that the configuration is exactly ``indices``.

    Direct inclusion-exclusion over all supersets ``J`` of ``I``:
    ``p[I] = sum_J (-1)^{|J \\ I|} det K_J``.
    """
    dpp = _as_dpp(dpp)
    n = dpp.n
    _check_enumerable(n)
    idx = _config(indices, n)
    rest = [j for j in range(n) if j not in idx]
    total = 0.0
    for extra in range(len(rest) + 1):
        sign = -1.0 if extra % 2 else 1.0
        for add in itertools.combinations(rest, extra):
            total += sign * correlation(dpp, idx + add)
    return total


def all_point_probabilities(dpp) -> np.ndarray:
    """``p[I]`` for every mask, by a superset Moebius transform of the correlations.

    Costs ``O(n 2**n)`` on top of the minors instead of ``O(3**n)`` for
    calling :func:`point_probability` on every subset.
    """
    dpp = _as_dpp(dpp)
    n = dpp.n
    _check_enumerable(n)
    p = (dpp._minors if n <= _CACHE_LIMIT else all_correlations(dpp)).copy()
    for bit in range(n):
        view = p.reshape(-1, 2, 1 << bit)
        view[:, 0, :] -= view[:, 1, :]
    return p


def multiplicative_functional(a, indices: Iterable[int]) -> complex:
    """``prod_{j in I} (1 + a_j)``; 1 on the empty configuration."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    idx = _config(indices, len(a))
    return complex(np.prod(1.0 + a[list(idx)]))


def all_functional_values(a) -> np.ndarray:
    """``Psi_a`` evaluated on every mask in ``range(2**n)``."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    _check_enumerable(len(a))
    psi = np.ones(1, dtype=complex)
    for aj in a:
        psi = np.concatenate([psi, psi * (1.0 + aj)])
    return psi


def expectation_brute(dpp, a) -> complex:
    """Mean of ``Psi_a`` by summing over all ``2**n`` configurations."""
    dpp = _as_dpp(dpp)
    a = _symbol(a, dpp.n)
    return complex(np.dot(all_point_probabilities(dpp), all_functional_values(a)))


def expectation_det(dpp, a) -> complex:
    """Mean of ``Psi_a`` as ``det(I + K diag(a))``."""
    dpp = _as_dpp(dpp)
    a = _symbol(a, dpp.n)
    return det(np.eye(dpp.n) + dpp.K * a[None, :])


def gram_det(dpp, a, b) -> complex:
    """``<Psi_a, Psi_b>`` in L2 of the process, as ``det(I + K(A B* - I))``."""
    dpp = _as_dpp(dpp)
    a = _symbol(a, dpp.n)
    b = _symbol(b, dpp.n)
    c = (1.0 + a) * np.conj(1.0 + b) - 1.0
    return det(np.eye(dpp.n) + dpp.K * c[None, :])


def gram_brute(dpp, a, b) -> complex:
    """``sum_I p[I] Psi_a(I) conj(Psi_b(I))`` over all configurations."""
    dpp = _as_dpp(dpp)
    a = _symbol(a, dpp.n)
    b = _symbol(b, dpp.n)
    p = all_point_probabilities(dpp)
    return complex(np.sum(p * all_functional_values(a) * np.conj(all_functional_values(b))))


def count_distribution(dpp, blocks: Sequence[Iterable[int]]) -> np.ndarray:
    """Joint law of the occupation counts of disjoint blocks ``X_1..X_l``.

    Entry ``[k_1, ..., k_l]`` is ``P(|omega & X_j| = k_j for all j)``. The
    generating function ``E prod r_j^{count_j} = det(I + K diag(sum_j (r_j - 1) 1_{X_j}))``
    is a polynomial of degree ``|X_j|`` in ``r_j``; it is sampled at roots of
    unity of order ``|X_j| + 1`` and its coefficients recovered by an FFT.
    """
    dpp = _as_dpp(dpp)
    n = dpp.n
    _check_enumerable(n)
    sets = [list(_config(b, n)) for b in blocks]
    seen: set[int] = set()
    for s in sets:
        if seen.intersection(s):
            raise OverlappingBlocks("blocks must be pairwise disjoint")
        seen.update(s)
    shape = tuple(len(s) + 1 for s in sets)
    gen = np.empty(shape, dtype=complex)
    eye = np.eye(n)
    for grid in np.ndindex(*shape):
        a = np.zeros(n, dtype=complex)
        for s, k, d in zip(sets, grid, shape):
            a[s] = np.exp(2j * np.pi * k / d) - 1.0
        gen[grid] = det(eye + dpp.K * a[None, :])
    coeffs = np.fft.fftn(gen) / gen.size if gen.ndim else gen
    if np.max(np.abs(coeffs.imag), initial=0.0) > 1e-8:
        raise ArithmeticError("count generating function produced complex probabilities")
    return coeffs.real


def count_distribution_brute(dpp, blocks: Sequence[Iterable[int]]) -> np.ndarray:
    """Same table as :func:`count_distribution`, by summing ``p[I]`` over all subsets."""
    dpp = _as_dpp(dpp)
    n = dpp.n
    sets = [list(_config(b, n)) for b in blocks]
    p = all_point_probabilities(dpp)
    out = np.zeros(tuple(len(s) + 1 for s in sets))
    masks = np.arange(1 << n)
    counts = [((masks[:, None] >> np.asarray(s, dtype=np.int64)[None, :]) & 1).sum(axis=1) for s in sets]
    np.add.at(out, tuple(counts), p)
    return out
