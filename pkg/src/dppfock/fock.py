"""Finite truncation of the space of semi-infinite wedge forms.

The ambient space ``C^n`` splits as ``V + W`` with ``W`` spanned by the basis
vectors listed in a :class:`SplitSpace`. Wedge monomials of degree
``m = dim W`` form the orthonormal basis; the vacuum is the wedge of the
``W`` basis vectors. Indices are 0-based.

Two conventions meet here. :func:`coherent_state` follows the explicit
formula ``wedge_{j in W} (sum_k g_{jk} e_k)``, so its amplitudes are minors of
the W *rows* of ``g``. :func:`wedge_power` is the change of variables
``e_j -> g e_j`` (columns), which is the one that composes as
``lambda(g1) lambda(g2) = lambda(g1 g2)``. They are related by
``coherent_state(g) == wedge_power(g.T) @ vacuum``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import FormulaMismatch, SingularOperator, SplitMismatch
from .linalg import det, max_abs

CONDITION_LIMIT = 1e12
FORMULA_TOL = 1e-10
DENSE_LIMIT = 8


@dataclass(frozen=True)
class SplitSpace:
    n: int
    W: tuple[int, ...]

    def __post_init__(self):
        w = tuple(sorted(int(i) for i in self.W))
        if len(set(w)) != len(w) or (w and (w[0] < 0 or w[-1] >= self.n)):
            raise ValueError(f"W={self.W} is not a subset of range({self.n})")
        object.__setattr__(self, "W", w)

    @classmethod
    def last(cls, n: int, m: int) -> "SplitSpace":
        """``W`` = the last ``m`` coordinates."""
        return cls(n, tuple(range(n - m, n)))

    @property
    def m(self) -> int:
        return len(self.W)

    @property
    def V(self) -> tuple[int, ...]:
        w = set(self.W)
        return tuple(i for i in range(self.n) if i not in w)

    @property
    def projector(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        p[list(self.W), list(self.W)] = 1.0
        return p

    def monomials(self) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(self.n), self.m))


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Invertible operator on ``V + W`` with blocks ``[[a, b], [c, d]]``.

    ``a: V->V``, ``b: W->V``, ``c: V->W``, ``d: W->W``. Construction fails
    with :class:`SingularOperator` when the condition number exceeds 1e12.
    """

    matrix: np.ndarray
    split: SplitSpace

    def __post_init__(self):
        g = np.asarray(self.matrix, dtype=complex)
        if g.shape != (self.split.n, self.split.n):
            raise ValueError(f"matrix shape {g.shape} does not match split of size {self.split.n}")
        if g.size and np.linalg.cond(g) > CONDITION_LIMIT:
            raise SingularOperator("operator is singular to working precision")
        object.__setattr__(self, "matrix", g)

    def _blk(self, rows, cols) -> np.ndarray:
        return self.matrix[np.ix_(rows, cols)]

    @property
    def a(self) -> np.ndarray:
        return self._blk(self.split.V, self.split.V)

    @property
    def b(self) -> np.ndarray:
        return self._blk(self.split.V, self.split.W)

    @property
    def c(self) -> np.ndarray:
        return self._blk(self.split.W, self.split.V)

    @property
    def d(self) -> np.ndarray:
        return self._blk(self.split.W, self.split.W)


@dataclass(frozen=True, eq=False)
class FockVector:
    """Amplitudes on the degree-``m`` wedge monomials (keys are ascending index tuples)."""

    split: SplitSpace
    amplitudes: dict

    def __getitem__(self, key: Iterable[int]) -> complex:
        return self.amplitudes.get(tuple(sorted(key)), 0.0j)

    def to_array(self) -> np.ndarray:
        return np.array([self[s] for s in self.split.monomials()], dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(fock_inner(self, self).real))


def vacuum(split: SplitSpace) -> FockVector:
    return FockVector(split, {split.W: 1.0 + 0.0j})


def coherent_state(g: BlockOperator) -> FockVector:
    """Plucker coordinates of the W rows of ``g``: amplitude on ``S`` is ``det g[W, S]``."""
    split = g.split
    keys = split.monomials()
    rows = g.matrix[list(split.W), :]
    if split.m == 0:
        return FockVector(split, {(): 1.0 + 0.0j})
    cols = np.array(keys, dtype=np.int64)
    sub = rows[:, cols].transpose(1, 0, 2)
    minors = np.linalg.det(sub)
    return FockVector(split, dict(zip(keys, minors.astype(complex))))


def fock_inner(u: FockVector, v: FockVector) -> complex:
    """``sum_S u(S) conj(v(S))``; linear in the first argument."""
    if u.split != v.split:
        raise SplitMismatch("vectors live on different splits")
    total = 0.0j
    for key, val in u.amplitudes.items():
        other = v.amplitudes.get(key)
        if other is not None:
            total += val * np.conj(other)
    return complex(total)


def coherent_inner_det(g: BlockOperator, h: BlockOperator) -> complex:
    """``<lambda(g) vac, lambda(h) vac>`` by the two closed forms.

    Evaluates ``det(c_g c_h* + d_g d_h*)`` and ``det(1 + P_W (g h* - 1))``,
    raising :class:`FormulaMismatch` if they differ by more than
    ``1e-10 * max(1, |value|)``, and returns the first.
    """
    if g.split != h.split:
        raise SplitMismatch("operators live on different splits")
    blocks = det(g.c @ h.c.conj().T + g.d @ h.d.conj().T)
    n = g.split.n
    proj = g.split.projector
    full = det(np.eye(n) + proj @ (g.matrix @ h.matrix.conj().T - np.eye(n)))
    if abs(blocks - full) > FORMULA_TOL * max(1.0, abs(blocks)):
        raise FormulaMismatch(f"block formula {blocks} vs projector formula {full}")
    return blocks


def wedge_power(g, m: int) -> np.ndarray:
    """Dense ``lambda(g)`` on degree-``m`` monomials for ``e_j -> g e_j``.

    Entry ``[T, S]`` is ``det g[T, S]`` with monomials in
    ``itertools.combinations`` order. Limited to n <= 8.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    if n > DENSE_LIMIT:
        raise ValueError(f"dense wedge powers are limited to n <= {DENSE_LIMIT}")
    if m == 0:
        return np.ones((1, 1), dtype=complex)
    keys = np.array(list(itertools.combinations(range(n), m)), dtype=np.int64)
    sub = g[keys[:, None, :, None], keys[None, :, None, :]]
    return np.linalg.det(sub)


def representation_residual(g1, g2, m: int) -> float:
    """``|lambda(g1) lambda(g2) - lambda(g1 g2)|_max``."""
    return max_abs(wedge_power(g1, m) @ wedge_power(g2, m) - wedge_power(np.asarray(g1) @ np.asarray(g2), m))


@dataclass(frozen=True)
class MembershipReport:
    """Finite-dimensional stand-ins for the conditions defining GL(H; P)."""

    hs_norm_b: float
    hs_norm_c: float
    trace_norm_d_minus_1: float
    condition_number: float


def gl_membership_report(g: BlockOperator) -> MembershipReport:
    d = g.d
    dm1 = d - np.eye(d.shape[0])
    return MembershipReport(
        hs_norm_b=float(np.linalg.norm(g.b)) if g.b.size else 0.0,
        hs_norm_c=float(np.linalg.norm(g.c)) if g.c.size else 0.0,
        trace_norm_d_minus_1=float(np.linalg.svd(dm1, compute_uv=False).sum()) if dm1.size else 0.0,
        condition_number=float(np.linalg.cond(g.matrix)) if g.matrix.size else 1.0,
    )
