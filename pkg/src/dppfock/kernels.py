"""DPP kernels: validation, spectra, the sine kernel and Nystrom discretization.

A kernel on a finite ground set is a Hermitian matrix with spectrum in
[0, 1]. Continuous kernels are plain callables ``f(x, y)`` that broadcast
over numpy arrays; :func:`discretize` turns one into a matrix on quadrature
nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadInterval, NotHermitian, SpectrumOutOfRange
from .linalg import hermitian_part, max_abs

KernelFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

HERMITIAN_TOL = 1e-10
SPECTRUM_TOL = 1e-10
DISCRETIZED_SPECTRUM_TOL = 1e-8


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of a kernel, eigenvalues descending in [0, 1]."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Validated DPP kernel on the ground set {0, ..., dim-1}.

    Build through :func:`make_discrete_kernel` (or :func:`discretize`), which
    enforce Hermitian symmetry and the spectral bounds. ``labels`` carries the
    quadrature nodes when the kernel came from a continuous one.
    """

    matrix: np.ndarray
    labels: Optional[np.ndarray] = None
    _spectrum: SpectralData = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix)

    def fingerprint(self) -> str:
        import hashlib

        return hashlib.sha256(np.ascontiguousarray(self.matrix).tobytes()).hexdigest()[:16]


def _sorted_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam, u = np.linalg.eigh(m)
    # stable sort keeps the solver's order among ties
    order = np.argsort(-lam, kind="stable")
    return lam[order], u[:, order]


def make_discrete_kernel(
    matrix,
    labels: Optional[Sequence[float]] = None,
    spectrum_tol: float = SPECTRUM_TOL,
) -> DiscreteKernel:
    """Validate ``matrix`` as a DPP kernel.

    Raises :class:`NotHermitian` when ``|K - K*|_max`` exceeds
    ``1e-10 * (1 + |K|_max)`` and :class:`SpectrumOutOfRange` when an
    eigenvalue leaves ``[-spectrum_tol, 1 + spectrum_tol]``. Eigenvalues within
    tolerance of the bounds are clamped and the matrix rebuilt from the clamped
    spectrum; a matrix already inside [0, 1] is kept bit-for-bit (after
    Hermitian symmetrization).
    """
    m = np.array(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"kernel matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("kernel matrix has non-finite entries")
    if np.iscomplexobj(m):
        if not np.any(m.imag):
            m = m.real
        m = m.astype(np.complex128) if np.iscomplexobj(m) else m.astype(np.float64)
    else:
        m = m.astype(np.float64)

    scale = 1.0 + max_abs(m)
    asym = max_abs(m - m.conj().T)
    if asym > HERMITIAN_TOL * scale:
        raise NotHermitian(f"|K - K*|_max = {asym:.3e} exceeds {HERMITIAN_TOL * scale:.3e}")
    m = hermitian_part(m)

    n = m.shape[0]
    if n == 0:
        spec = SpectralData(np.zeros(0), np.zeros((0, 0), dtype=m.dtype))
        return DiscreteKernel(m, None, spec)

    lam, u = _sorted_eigh(m)
    if lam[-1] < -spectrum_tol or lam[0] > 1.0 + spectrum_tol:
        raise SpectrumOutOfRange(
            f"eigenvalues span [{lam[-1]:.12g}, {lam[0]:.12g}], outside [0, 1]"
        )
    clamped = np.clip(lam, 0.0, 1.0)
    if np.any(clamped != lam):
        m = hermitian_part((u * clamped) @ u.conj().T)
    lab = None if labels is None else np.asarray(labels, dtype=float)
    if lab is not None and lab.shape != (n,):
        raise ValueError("labels must have one entry per ground-set point")
    return DiscreteKernel(m, lab, SpectralData(clamped, u))


def spectral_decompose(kernel: DiscreteKernel) -> SpectralData:
    """Eigenvalues (descending, clamped to [0, 1]) and orthonormal eigenvectors."""
    if kernel._spectrum is not None:
        return kernel._spectrum
    lam, u = _sorted_eigh(kernel.matrix)
    return SpectralData(np.clip(lam, 0.0, 1.0), u)


def sine_kernel(x, y):
    """Dyson sine kernel ``sin(x - y) / (pi (x - y))``, equal to 1/pi on the diagonal."""
    d = np.subtract(x, y, dtype=float)
    # np.sinc(t) = sin(pi t)/(pi t) with the removable singularity filled in
    out = np.sinc(d / np.pi) / np.pi
    return float(out) if np.ndim(out) == 0 else out


def rank_one_uniform(lo: float = 0.0, hi: float = 1.0) -> KernelFunction:
    """Projection kernel onto the normalized indicator of ``[lo, hi]``."""
    if not hi > lo:
        raise BadInterval(f"need lo < hi, got ({lo}, {hi})")
    height = 1.0 / (hi - lo)

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (x >= lo) & (x <= hi) & (y >= lo) & (y <= hi)
        return np.where(inside, height, 0.0)

    return f


def zero_kernel(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def evaluate_kernel(f: KernelFunction, xs: np.ndarray, ys: Optional[np.ndarray] = None) -> np.ndarray:
    """Matrix ``f(xs[i], ys[j])``; falls back to elementwise calls for scalar-only ``f``."""
    ys = xs if ys is None else ys
    xx, yy = xs[:, None], ys[None, :]
    try:
        out = np.asarray(f(xx, yy))
        if out.shape == (len(xs), len(ys)):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([[f(float(a), float(b)) for b in ys] for a in xs])


def check_hermitian_function(f: KernelFunction, points: np.ndarray, tol: float = 1e-12) -> float:
    """Largest ``|f(x, y) - conj(f(y, x))|`` over all pairs drawn from ``points``."""
    m = evaluate_kernel(f, np.asarray(points, dtype=float))
    err = max_abs(m - m.conj().T)
    if err > tol:
        raise NotHermitian(f"kernel function asymmetric by {err:.3e}")
    return err


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values))


def gauss_legendre(n: int, lo: float, hi: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [lo, hi], exact for degree <= 2n - 1."""
    if n < 1:
        raise ValueError("need at least one node")
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise BadInterval(f"need finite lo < hi, got ({lo}, {hi})")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return QuadratureRule(half * x + 0.5 * (hi + lo), half * w, (float(lo), float(hi)))


def composite_gauss_legendre(breakpoints: Sequence[float], n_per_piece: int) -> QuadratureRule:
    """Gauss-Legendre panels between consecutive breakpoints (zero-width panels skipped)."""
    b = np.asarray(breakpoints, dtype=float)
    if b.ndim != 1 or len(b) < 2:
        raise BadInterval("need at least two breakpoints")
    if np.any(np.diff(b) < 0):
        raise BadInterval("breakpoints must be ascending")
    nodes, weights = [], []
    for lo, hi in zip(b[:-1], b[1:]):
        if hi > lo:
            rule = gauss_legendre(n_per_piece, lo, hi)
            nodes.append(rule.nodes)
            weights.append(rule.weights)
    if not nodes:
        return QuadratureRule(np.zeros(0), np.zeros(0), (float(b[0]), float(b[-1])))
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), (float(b[0]), float(b[-1])))


def discretize(
    f: KernelFunction,
    rule: QuadratureRule,
    spectrum_tol: float = DISCRETIZED_SPECTRUM_TOL,
) -> DiscreteKernel:
    """Symmetrized Nystrom matrix ``sqrt(w_i) f(x_i, x_j) sqrt(w_j)``.

    Similar to the one-sided ``w_i f(x_i, x_j)`` matrix through ``diag(sqrt w)``,
    so all determinants agree, but stays Hermitian. A spectrum leaving
    [0, 1] by more than ``spectrum_tol`` means the grid is too coarse.
    """
    s = np.sqrt(rule.weights)
    m = s[:, None] * evaluate_kernel(f, rule.nodes) * s[None, :]
    return make_discrete_kernel(m, labels=rule.nodes, spectrum_tol=spectrum_tol)
