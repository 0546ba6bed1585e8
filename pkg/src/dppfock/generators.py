"""Seeded random kernels, projectors, symbols and per-case generators."""

from __future__ import annotations

import numpy as np

from .kernels import DiscreteKernel, make_discrete_kernel


def case_rng(master_seed: int, case: int) -> np.random.Generator:
    """Independent generator for case ``case`` of a run seeded by ``master_seed``.

    Uses a counter-based bit generator (Philox): the master seed is the key and
    the case index occupies the top word of the counter, so each case owns a
    disjoint stream regardless of evaluation order or thread count.
    """
    key = int(master_seed) & ((1 << 64) - 1)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(case)]))


def random_unitary(n: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    z = rng.standard_normal((n, n))
    if complex_:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    # fix column phases so q is Haar distributed
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_kernel(n: int, rng: np.random.Generator, complex_: bool = True) -> DiscreteKernel:
    """Hermitian kernel with eigenvalues uniform on [0, 1] in a Haar-random basis."""
    u = random_unitary(n, rng, complex_)
    lam = rng.uniform(0.0, 1.0, n)
    return make_discrete_kernel((u * lam) @ u.conj().T)


def random_projector(n: int, rank: int, rng: np.random.Generator, complex_: bool = True) -> DiscreteKernel:
    """Projection kernel ``Q Q*`` with ``Q`` an n x rank isometry."""
    q = random_unitary(n, rng, complex_)[:, :rank]
    return make_discrete_kernel(q @ q.conj().T)


def random_symbol(n: int, rng: np.random.Generator, max_abs: float = 2.0, complex_: bool = True) -> np.ndarray:
    """Symbol values with modulus at most ``max_abs`` (uniform on the disc when complex)."""
    r = max_abs * np.sqrt(rng.uniform(0.0, 1.0, n))
    if not complex_:
        return r * rng.choice([-1.0, 1.0], n)
    return r * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))


def random_matrix(n: int, rng: np.random.Generator, complex_: bool = True) -> np.ndarray:
    z = rng.standard_normal((n, n))
    if complex_:
        z = z + 1j * rng.standard_normal((n, n))
    return z / np.sqrt(n)
