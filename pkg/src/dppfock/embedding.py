"""Isometric embedding of L2 over a DPP into the wedge space, as determinant checks.

A projection kernel ``K`` is handled directly: in the eigenbasis of ``K`` the
range of ``K`` is spanned by basis vectors and becomes the ``W`` of a
:class:`~dppfock.fock.SplitSpace`. A general kernel ``0 <= K <= 1`` is first
doubled into the projector ``L = [[I - K, R], [R, K]]`` with ``R = sqrt(K - K^2)``
acting on two copies of the ground set.

Each check returns an :class:`EmbeddingCheck` whose ``residual`` is the
largest relative disagreement among the routes it computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dpp_finite
from .errors import NotAProjector, SpectrumOutOfRange
from .fock import BlockOperator, SplitSpace, coherent_inner_det, coherent_state, fock_inner
from .kernels import DiscreteKernel, make_discrete_kernel, spectral_decompose
from .linalg import det, max_abs, rel_diff

PROJECTOR_TOL = 1e-9
DEFECT_CLAMP = 1e-12
BRUTE_LIMIT_PROJECTOR = 8
BRUTE_LIMIT_GENERAL = 10
FOCK_LIMIT_GENERAL = 5


def _kernel(k) -> DiscreteKernel:
    if isinstance(k, DiscreteKernel):
        return k
    if isinstance(k, dpp_finite.FiniteDPP):
        return k.kernel
    return make_discrete_kernel(k)


@dataclass(frozen=True)
class DoubledProjector:
    matrix: np.ndarray
    defect_root: np.ndarray  # sqrt(K - K^2)

    @property
    def n(self) -> int:
        return self.defect_root.shape[0]

    def idempotency_residual(self) -> float:
        return max_abs(self.matrix @ self.matrix - self.matrix)


def defect_root(kernel) -> np.ndarray:
    """``sqrt(K - K^2)`` through the eigenbasis of ``K``."""
    kernel = _kernel(kernel)
    sd = spectral_decompose(kernel)
    lam = sd.eigenvalues
    defect = lam - lam * lam
    if np.any(defect < -DEFECT_CLAMP):
        raise SpectrumOutOfRange("K - K^2 has a negative eigenvalue beyond round-off")
    u = sd.eigenvectors
    root = (u * np.sqrt(np.maximum(defect, 0.0))) @ u.conj().T
    return 0.5 * (root + root.conj().T)


def doubling_projector(kernel) -> DoubledProjector:
    """The 2n x 2n projector ``[[I - K, R], [R, K]]``."""
    kernel = _kernel(kernel)
    k = kernel.matrix
    n = kernel.dim
    r = defect_root(kernel)
    top = np.hstack([np.eye(n) - k, r])
    bottom = np.hstack([r, k])
    return DoubledProjector(np.vstack([top, bottom]), r)


def doubled_symbol(a) -> BlockOperator:
    """``g_a = diag(I, I + diag(a))`` on two copies of the ground set.

    The nominal split puts ``W`` on the second copy; the general check uses
    the doubling projector in place of that split's coordinate projector.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    n = len(a)
    g = np.diag(np.concatenate([np.ones(n), 1.0 + a]))
    return BlockOperator(g, SplitSpace.last(2 * n, n))


def block_conjugation_residual(kernel, a) -> float:
    """``|(g* - 1) L (g - 1) - diag(0, (A* - 1) K (A - 1))|_max``."""
    kernel = _kernel(kernel)
    a = np.asarray(a, dtype=complex).reshape(-1)
    n = kernel.dim
    lmat = doubling_projector(kernel).matrix
    gm1 = doubled_symbol(a).matrix - np.eye(2 * n)
    lhs = gm1.conj().T @ lmat @ gm1
    rhs = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs[n:, n:] = np.conj(a)[:, None] * kernel.matrix * a[None, :]
    return max_abs(lhs - rhs)


@dataclass(frozen=True)
class EmbeddingCheck:
    values: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        vals = list(self.values.values())
        ref = vals[0]
        return max((rel_diff(v, ref) for v in vals[1:]), default=0.0)


def _check_projector(kernel: DiscreteKernel) -> None:
    k = kernel.matrix
    err = max_abs(k @ k - k)
    if err > PROJECTOR_TOL:
        raise NotAProjector(f"|K^2 - K|_max = {err:.3e}")


def rotated_multiplier(kernel: DiscreteKernel, a) -> BlockOperator:
    """``U* (I + diag(a)) U`` in the eigenbasis of a projection kernel, ``W`` = range of ``K``."""
    sd = spectral_decompose(kernel)
    u = sd.eigenvectors
    m = int(np.sum(sd.eigenvalues > 0.5))
    a = np.asarray(a, dtype=complex).reshape(-1)
    g = u.conj().T @ ((1.0 + a)[:, None] * u)
    return BlockOperator(g, SplitSpace(kernel.dim, tuple(range(m))))


def projector_embedding_check(kernel, a, b, brute: bool | None = None) -> EmbeddingCheck:
    """Compare the wedge-space and L2(process) inner products for a projection kernel.

    Always computes ``gram_det`` and ``coherent_inner_det`` of the rotated
    multipliers; for ``n <= 8`` (or ``brute=True``) also the explicit
    coherent-state inner product and the enumerated ``gram_brute``.
    """
    kernel = _kernel(kernel)
    _check_projector(kernel)
    ga = rotated_multiplier(kernel, a)
    gb = rotated_multiplier(kernel, b)
    values = {
        "gram_det": dpp_finite.gram_det(kernel, a, b),
        "coherent_det": coherent_inner_det(ga, gb),
    }
    if brute if brute is not None else kernel.dim <= BRUTE_LIMIT_PROJECTOR:
        values["fock_inner"] = fock_inner(coherent_state(ga), coherent_state(gb))
        values["gram_brute"] = dpp_finite.gram_brute(kernel, a, b)
    return EmbeddingCheck(values)


def doubled_inner(lproj: DoubledProjector, a, b) -> complex:
    """``det(I + L (g_a g_b* - I))``."""
    n2 = lproj.matrix.shape[0]
    ga = doubled_symbol(a).matrix
    gb = doubled_symbol(b).matrix
    return det(np.eye(n2) + lproj.matrix @ (ga @ gb.conj().T - np.eye(n2)))


def general_embedding_check(kernel, a, b, brute: bool | None = None) -> EmbeddingCheck:
    """Doubled-space inner product against ``gram_det``, plus ``gram_brute`` for n <= 10.

    For n <= 5 the doubled projector is also rotated to coordinate form and the
    coherent states are built explicitly, adding the Plucker-sum route.
    """
    kernel = _kernel(kernel)
    lproj = doubling_projector(kernel)
    values = {
        "gram_det": dpp_finite.gram_det(kernel, a, b),
        "doubled_det": doubled_inner(lproj, a, b),
    }
    n = kernel.dim
    if brute if brute is not None else n <= BRUTE_LIMIT_GENERAL:
        values["gram_brute"] = dpp_finite.gram_brute(kernel, a, b)
    if n <= FOCK_LIMIT_GENERAL:
        lk = make_discrete_kernel(lproj.matrix, spectrum_tol=1e-8)
        pad = np.concatenate([np.zeros(n), np.asarray(a, dtype=complex).reshape(-1)])
        padb = np.concatenate([np.zeros(n), np.asarray(b, dtype=complex).reshape(-1)])
        ga = rotated_multiplier(lk, pad)
        gb = rotated_multiplier(lk, padb)
        values["fock_inner"] = fock_inner(coherent_state(ga), coherent_state(gb))
    return EmbeddingCheck(values)


def gram_matrix_brute(kernel, symbols) -> np.ndarray:
    kernel = _kernel(kernel)
    k = len(symbols)
    return np.array([[dpp_finite.gram_brute(kernel, symbols[i], symbols[j]) for j in range(k)] for i in range(k)])


def gram_matrix_fock(kernel, symbols) -> np.ndarray:
    """Gram matrix of explicit coherent states (projection kernel required)."""
    kernel = _kernel(kernel)
    _check_projector(kernel)
    states = [coherent_state(rotated_multiplier(kernel, s)) for s in symbols]
    return np.array([[fock_inner(u, v) for v in states] for u in states])


def gram_matrix_doubled(kernel, symbols) -> np.ndarray:
    kernel = _kernel(kernel)
    lproj = doubling_projector(kernel)
    return np.array([[doubled_inner(lproj, x, y) for y in symbols] for x in symbols])
