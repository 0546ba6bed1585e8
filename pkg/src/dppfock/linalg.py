"""Small dense linear-algebra helpers used across modules."""

from __future__ import annotations

import numpy as np


def det(m: np.ndarray) -> complex:
    """Determinant via LU with partial pivoting, accumulated in log space.

    ``np.linalg.slogdet`` keeps the phase separate from ``log|det|`` so
    products of many small pivots do not underflow before the final exp.
    Empty matrices have determinant 1.
    """
    m = np.asarray(m)
    if m.shape[-1] == 0:
        return 1.0 + 0.0j
    sign, logabs = np.linalg.slogdet(m)
    if np.isneginf(logabs):
        return 0.0 + 0.0j
    return complex(sign * np.exp(logabs))


def batched_principal_minors(k: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Determinants of ``k[s][:, s]`` for each row ``s`` of ``subsets``.

    ``subsets`` has shape (count, size). Size-zero subsets give ones.
    """
    count, size = subsets.shape
    if size == 0:
        return np.ones(count, dtype=k.dtype)
    sub = k[subsets[:, :, None], subsets[:, None, :]]
    return np.linalg.det(sub)


def max_abs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def rel_diff(x: complex, y: complex) -> float:
    """``|x - y| / max(1, |y|)``: absolute near zero, relative for large values."""
    return abs(x - y) / max(1.0, abs(y))
