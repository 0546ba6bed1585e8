"""Fredholm determinants ``det(1 + K(A - 1))`` of continuous kernels by quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadInterval, UnboundedSupport
from .kernels import KernelFunction, QuadratureRule, composite_gauss_legendre, evaluate_kernel
from .linalg import det

DEFAULT_N_PER_PIECE = 40


@dataclass(frozen=True)
class PiecewiseSymbol:
    """Piecewise-constant symbol: ``values[k]`` on ``[breakpoints[k], breakpoints[k+1])``, 0 outside."""

    breakpoints: tuple[float, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        if not np.all(np.isfinite(b)):
            raise UnboundedSupport("symbol support must be a bounded interval")
        if len(self.values) != max(len(b) - 1, 0):
            raise ValueError("need exactly one value per piece")
        if np.any(np.diff(b) < 0):
            raise BadInterval("breakpoints must be ascending")
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in b))
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))

    @classmethod
    def constant(cls, lo: float, hi: float, value: complex) -> "PiecewiseSymbol":
        return cls((lo, hi), (value,))

    @property
    def support(self) -> tuple[float, float]:
        if not self.breakpoints:
            return (0.0, 0.0)
        return (self.breakpoints[0], self.breakpoints[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        b = self.breakpoints
        for lo, hi, v in zip(b[:-1], b[1:], self.values):
            out[(x >= lo) & (x < hi)] = v
        return out

    def conj(self) -> "PiecewiseSymbol":
        return PiecewiseSymbol(self.breakpoints, tuple(np.conj(self.values)))

    def quadrature(self, n_per_piece: int) -> tuple[QuadratureRule, np.ndarray]:
        """Panels aligned with the breakpoints, plus the symbol value at each node.

        Values are assigned per panel rather than evaluated at the nodes, so
        the jump points never need a one-sided convention.
        """
        if len(self.breakpoints) < 2:
            return QuadratureRule(np.zeros(0), np.zeros(0), self.support), np.zeros(0, dtype=complex)
        rule = composite_gauss_legendre(self.breakpoints, n_per_piece)
        b = self.breakpoints
        vals = [np.full(n_per_piece, v) for lo, hi, v in zip(b[:-1], b[1:], self.values) if hi > lo]
        return rule, (np.concatenate(vals) if vals else np.zeros(0, dtype=complex))


def nystrom_matrix(f: KernelFunction, a: PiecewiseSymbol, n_per_piece: int) -> np.ndarray:
    """One-sided Nystrom matrix ``w_i f(x_i, x_j) a(x_j)`` on the support of ``a``."""
    rule, vals = a.quadrature(n_per_piece)
    if len(rule) == 0:
        return np.zeros((0, 0), dtype=complex)
    return rule.weights[:, None] * evaluate_kernel(f, rule.nodes) * vals[None, :]


def fredholm_det(f: KernelFunction, a: PiecewiseSymbol, n_per_piece: int = DEFAULT_N_PER_PIECE) -> complex:
    """``det(1 + K(A - 1))`` with ``A`` multiplication by ``1 + a``.

    ``K(A - 1)`` has kernel ``f(x, y) a(y)``, which vanishes off the support of
    ``a``; the quadrature therefore only covers that support.
    """
    m = nystrom_matrix(f, a, n_per_piece)
    return det(np.eye(m.shape[0]) + m)


def fredholm_det_with_delta(
    f: KernelFunction, a: PiecewiseSymbol, n_per_piece: int = DEFAULT_N_PER_PIECE
) -> tuple[complex, float]:
    """Value at ``n_per_piece`` and ``|value(n) - value(2n)|`` as a discretization error estimate."""
    v = fredholm_det(f, a, n_per_piece)
    return v, abs(v - fredholm_det(f, a, 2 * n_per_piece))


def gap_probability(f: KernelFunction, interval: tuple[float, float], n: int = DEFAULT_N_PER_PIECE) -> float:
    """Probability that no point falls in ``interval``: the functional with ``a = -1`` there."""
    lo, hi = interval
    if hi < lo:
        raise BadInterval(f"need lo <= hi, got ({lo}, {hi})")
    if hi == lo:
        return 1.0
    v = fredholm_det(f, PiecewiseSymbol.constant(lo, hi, -1.0), n)
    if abs(v.imag) > 1e-8:
        raise ArithmeticError(f"gap determinant has imaginary part {v.imag:.3e}")
    return float(v.real)


@dataclass(frozen=True)
class TraceClassReport:
    """Singular values (descending) and tail sums ``sum_{k > m} sigma_k``."""

    sandwich_singular_values: np.ndarray  # of conj(a(x)) K(x,y) a(y)
    sandwich_tails: np.ndarray
    product_singular_values: np.ndarray  # of K(x,y) a(y)
    product_tails: np.ndarray

    def ratio(self, k: int = 10) -> float:
        """``sigma_k / sigma_1`` of the sandwiched operator (1-based ``k``)."""
        s = self.sandwich_singular_values
        if len(s) < k or s[0] == 0:
            return 0.0
        return float(s[k - 1] / s[0])


def _tails(s: np.ndarray) -> np.ndarray:
    # tails[m] = sum of s[m:], i.e. singular values beyond the first m
    return np.concatenate([np.cumsum(s[::-1])[::-1], [0.0]])


def trace_class_report(f: KernelFunction, a: PiecewiseSymbol, n: int = DEFAULT_N_PER_PIECE) -> TraceClassReport:
    """Singular-value decay of the discretized ``conj(a) K a`` and ``K a``.

    Both are discretized with ``sqrt(w)`` on each side so that the matrix
    singular values approximate those of the integral operators.
    """
    rule, vals = a.quadrature(n)
    if len(rule) == 0:
        z = np.zeros(0)
        return TraceClassReport(z, np.zeros(1), z, np.zeros(1))
    s = np.sqrt(rule.weights)
    k = s[:, None] * evaluate_kernel(f, rule.nodes) * s[None, :]
    prod = k * vals[None, :]
    sandwich = np.conj(vals)[:, None] * prod
    sv_s = np.linalg.svd(sandwich, compute_uv=False)
    sv_p = np.linalg.svd(prod, compute_uv=False)
    return TraceClassReport(sv_s, _tails(sv_s), sv_p, _tails(sv_p))


def symbol_from_values(breakpoints: Sequence[float], values: Sequence[complex]) -> PiecewiseSymbol:
    return PiecewiseSymbol(tuple(breakpoints), tuple(values))
