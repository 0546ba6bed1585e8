"""Exact spectral sampling of finite DPPs and Monte Carlo cross-checks."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dpp_finite import _as_dpp, all_point_probabilities, indices_to_mask
from .errors import NumericalDegeneracy
from .generators import case_rng
from .kernels import SpectralData, spectral_decompose

DEGENERACY_FLOOR = 1e-14
_MAX_RETRIES = 8


def _select_points(vecs: np.ndarray, uniforms) -> list[int]:
    """Sequential point selection for the projection DPP onto the columns of ``vecs``.

    With ``c_1..c_t`` the Cholesky-style columns of the points chosen so far,
    point ``i`` is drawn with probability proportional to
    ``K_ii - sum_l |c_l[i]|^2``, the residual diagonal after projecting out the
    span of the chosen points. Step ``t`` consumes ``uniforms[t]``.
    """
    n, k = vecs.shape
    resid = np.sum(np.abs(vecs) ** 2, axis=1)
    chosen: list[int] = []
    cols = np.zeros((n, k), dtype=vecs.dtype)
    for t in range(k):
        p = np.maximum(resid, 0.0)
        cum = np.cumsum(p)
        total = cum[-1]
        if total < DEGENERACY_FLOOR:
            raise NumericalDegeneracy(f"residual mass {total:.3e} below floor")
        i = min(int(np.searchsorted(cum, uniforms[t] * total, side="right")), n - 1)
        if p[i] < DEGENERACY_FLOOR:
            raise NumericalDegeneracy(f"projection norm {p[i]:.3e} at point {i}")
        col = vecs @ vecs[i].conj() - cols[:, :t] @ cols[i, :t].conj()
        col = col / np.sqrt(p[i])
        cols[:, t] = col
        resid = resid - np.abs(col) ** 2
        resid[i] = 0.0
        chosen.append(i)
    return sorted(chosen)


def _draw(sd: SpectralData, rng: np.random.Generator) -> tuple[int, ...]:
    n = len(sd.eigenvalues)
    u = rng.random(2 * n)
    keep = u[:n] < sd.eigenvalues
    vecs = sd.eigenvectors[:, keep]
    k = vecs.shape[1]
    if k == 0:
        return ()
    if k == n:
        return tuple(range(n))
    uniforms = u[n:]
    for _ in range(_MAX_RETRIES):
        try:
            return tuple(_select_points(vecs, uniforms))
        except NumericalDegeneracy:
            uniforms = rng.random(n)
    raise NumericalDegeneracy("repeated projection underflow while sampling")


def sample(sd: SpectralData, rng_seed) -> tuple[int, ...]:
    """One exact draw from the DPP with spectral data ``sd``.

    Each eigenvector is kept independently with probability equal to its
    eigenvalue; the resulting projection DPP is then sampled point by point.
    ``rng_seed`` is an integer seed or a ``numpy.random.Generator``. A draw
    consumes ``2n`` uniforms: ``n`` for the eigenvector coins, then one per
    selected point.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return _draw(sd, rng)


def _draw_chunk(sd: SpectralData, master_seed: int, lo: int, hi: int) -> list:
    """Draws ``lo..hi-1`` vectorized over trials; same uniforms as :func:`sample`.

    Trials whose selection hits the degeneracy floor are redone one at a time.
    """
    lam = sd.eigenvalues
    vecs = sd.eigenvectors
    n = len(lam)
    rngs = [case_rng(master_seed, i) for i in range(lo, hi)]
    u = np.array([r.random(2 * n) for r in rngs]).reshape(hi - lo, 2 * n)
    keep = u[:, :n] < lam[None, :]
    ksize = keep.sum(axis=1)
    b = hi - lo
    # row-wise diagonal of the selected projection kernel
    resid = keep.astype(float) @ (np.abs(vecs) ** 2).T
    cols = np.zeros((b, max(int(ksize.max(initial=0)), 1), n), dtype=vecs.dtype)
    chosen = np.full((b, n), -1, dtype=np.int64)
    bad = np.zeros(b, dtype=bool)
    rows = np.arange(b)
    for t in range(int(ksize.max(initial=0))):
        act = rows[(ksize > t) & ~bad]
        if len(act) == 0:
            break
        p = np.maximum(resid[act], 0.0)
        cum = np.cumsum(p, axis=1)
        total = cum[:, -1]
        target = u[act, n + t] * total
        idx = np.minimum((cum <= target[:, None]).sum(axis=1), n - 1)
        pi = p[np.arange(len(act)), idx]
        degenerate = (total < DEGENERACY_FLOOR) | (pi < DEGENERACY_FLOOR)
        bad[act[degenerate]] = True
        ok = ~degenerate
        act, idx, pi = act[ok], idx[ok], pi[ok]
        vi = vecs[idx].conj() * keep[act]  # (a, n) eigen-coefficients of row idx
        col = vi @ vecs.T
        if t:
            ci = cols[act, :t, idx].conj()  # (a, t)
            col = col - np.einsum("at,atn->an", ci, cols[act, :t, :])
        col = col / np.sqrt(pi)[:, None]
        cols[act, t, :] = col
        resid[act] -= np.abs(col) ** 2
        resid[act, idx] = 0.0
        chosen[act, t] = idx
    out = []
    for r in range(b):
        if bad[r]:
            out.append(_draw(sd, case_rng(master_seed, lo + r)))
        else:
            out.append(tuple(sorted(int(x) for x in chosen[r, : ksize[r]])))
    return out


@dataclass(frozen=True)
class SampleBatch:
    configurations: list
    master_seed: int
    kernel_fingerprint: str

    def __len__(self) -> int:
        return len(self.configurations)

    def masks(self) -> np.ndarray:
        return np.array([indices_to_mask(c) for c in self.configurations], dtype=np.int64)

    def indicator_matrix(self, n: int) -> np.ndarray:
        out = np.zeros((len(self), n), dtype=bool)
        for row, c in enumerate(self.configurations):
            out[row, list(c)] = True
        return out


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("DPPFOCK_THREADS", "1") or 1)
    return max(1, int(threads))


_CHUNK = 4096


def sample_batch(dpp, count: int, master_seed: int, threads: int | None = None) -> SampleBatch:
    """``count`` draws, draw ``i`` using the counter-based stream ``(master_seed, i)``.

    Draw ``i`` equals ``sample(sd, case_rng(master_seed, i))``. Work is split
    into fixed chunks of trials, so the output does not depend on ``threads``.
    """
    dpp = _as_dpp(dpp)
    sd = spectral_decompose(dpp.kernel)
    threads = resolve_threads(threads)
    edges = list(range(0, count, _CHUNK)) + [count]
    spans = list(zip(edges[:-1], edges[1:]))
    if threads == 1 or len(spans) == 1:
        parts = [_draw_chunk(sd, master_seed, lo, hi) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda span: _draw_chunk(sd, master_seed, *span), spans))
    return SampleBatch([c for part in parts for c in part], int(master_seed), dpp.kernel.fingerprint())


def mc_expectation(dpp, a, trials: int, master_seed: int, threads: int | None = None) -> tuple[complex, float]:
    """Sample mean of ``Psi_a`` and its standard error ``sqrt(sum |Psi - mean|^2 / (N (N - 1)))``."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    dpp = _as_dpp(dpp)
    a = np.asarray(a, dtype=complex).reshape(-1)
    batch = sample_batch(dpp, trials, master_seed, threads)
    return batch_expectation(batch, a)


def batch_expectation(batch: SampleBatch, a) -> tuple[complex, float]:
    a = np.asarray(a, dtype=complex).reshape(-1)
    onea = 1.0 + a
    vals = np.array([np.prod(onea[list(c)]) for c in batch.configurations])
    n = len(vals)
    mean = vals.mean()
    stderr = float(np.sqrt(np.sum(np.abs(vals - mean) ** 2) / (n * (n - 1))))
    return complex(mean), stderr


@dataclass(frozen=True)
class InclusionReport:
    frequency: np.ndarray
    expected: np.ndarray
    stderr: np.ndarray
    z: np.ndarray
    trials: int

    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z))) if len(self.z) else 0.0


def _zscores(freq: np.ndarray, expected: np.ndarray, trials: int) -> tuple[np.ndarray, np.ndarray]:
    se = np.sqrt(np.clip(expected * (1.0 - expected), 0.0, None) / trials)
    diff = freq - expected
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), np.where(np.abs(diff) < 1e-12, 0.0, np.inf))
    return se, z


def inclusion_audit(dpp, trials: int, master_seed: int, threads: int | None = None,
                    batch: SampleBatch | None = None) -> InclusionReport:
    """Empirical ``P(j present)`` against ``K_jj`` with binomial z-scores."""
    dpp = _as_dpp(dpp)
    if batch is None:
        if trials < 10_000:
            raise ValueError("need at least 10^4 trials")
        batch = sample_batch(dpp, trials, master_seed, threads)
    freq = batch.indicator_matrix(dpp.n).mean(axis=0)
    expected = np.clip(np.real(np.diag(dpp.K)), 0.0, 1.0)
    se, z = _zscores(freq, expected, len(batch))
    return InclusionReport(freq, expected, se, z, len(batch))


def pair_audit(dpp, batch: SampleBatch) -> InclusionReport:
    """Empirical ``P(i and j present)`` against ``K_ii K_jj - |K_ij|^2`` for all pairs ``i < j``."""
    dpp = _as_dpp(dpp)
    ind = batch.indicator_matrix(dpp.n).astype(float)
    iu = np.triu_indices(dpp.n, 1)
    freq = ((ind.T @ ind) / len(batch))[iu]
    k = dpp.K
    d = np.real(np.diag(k))
    expected = np.clip((np.outer(d, d) - np.abs(k) ** 2)[iu], 0.0, 1.0)
    se, z = _zscores(freq, expected, len(batch))
    return InclusionReport(freq, expected, se, z, len(batch))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    pvalue: float


def distribution_chi2(dpp, batch: SampleBatch, min_expected: float = 5.0) -> ChiSquareResult:
    """Pearson chi-squared of the empirical law over all ``2**n`` subsets.

    Cells with expected count below ``min_expected`` are pooled into one cell.
    """
    dpp = _as_dpp(dpp)
    p = np.clip(all_point_probabilities(dpp), 0.0, None)
    p = p / p.sum()
    observed = np.bincount(batch.masks(), minlength=len(p)).astype(float)
    expected = p * len(batch)
    big = expected >= min_expected
    obs = list(observed[big])
    exp = list(expected[big])
    if np.any(~big):
        obs.append(observed[~big].sum())
        exp.append(expected[~big].sum())
    obs = np.array(obs)
    exp = np.array(exp)
    stat = float(np.sum((obs - exp) ** 2 / np.where(exp > 0, exp, 1.0)))
    dof = len(obs) - 1
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)))
