"""Statistical comparison utilities: KS tests, batch means, line fits.

These are the shared primitives behind every distribution-level
acceptance check.  P-values use the asymptotic Kolmogorov distribution
with the Stephens effective-size correction, the classical choice for
moderate sample sizes.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.special import kolmogorov


@dataclasses.dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n: int
    n2: int | None = None  # second sample size for two-sample tests

    def __iter__(self):  # allow "stat, p = ks_..." unpacking
        return iter((self.statistic, self.p_value))


def _ks_pvalue(d: float, effective_n: float) -> float:
    en = np.sqrt(effective_n)
    return float(kolmogorov((en + 0.12 + 0.11 / en) * d))


def ks_one_sample(sample, cdf) -> KSResult:
    """Kolmogorov-Smirnov test of ``sample`` against a continuous ``cdf``."""
    x = np.sort(np.asarray(sample, float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    c = np.asarray(cdf(x), float)
    d_plus = np.max(np.arange(1, n + 1) / n - c)
    d_minus = np.max(c - np.arange(0, n) / n)
    d = float(max(d_plus, d_minus))
    return KSResult(d, _ks_pvalue(d, n), n)


def ks_two_sample(a, b) -> KSResult:
    """Two-sample KS test; ties (atoms) are handled exactly in the statistic."""
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    na, nb = a.size, b.size
    if na == 0 or nb == 0:
        raise ValueError("empty sample")
    grid = np.concatenate([a, b])
    grid.sort(kind="mergesort")
    fa = np.searchsorted(a, grid, side="right") / na
    fb = np.searchsorted(b, grid, side="right") / nb
    d = float(np.max(np.abs(fa - fb)))
    en = na * nb / (na + nb)
    return KSResult(d, _ks_pvalue(d, en), na, nb)


def snap_to_grid(values, quantum: float) -> np.ndarray:
    """Round values to the nearest multiple of ``quantum``.

    Used before two-sample comparisons between a lattice-valued ensemble
    and a continuum one: both sides are reduced to the lattice
    resolution so the KS distance measures distributional mismatch, not
    discretization.
    """
    if quantum <= 0:
        raise ValueError("quantum must be positive")
    v = np.asarray(values, float)
    return np.round(v / quantum) * quantum


def batch_means(values, n_batches: int = 32):
    """Mean and batch-means standard error of a 1-D sample.

    The sample is split into ``n_batches`` contiguous blocks; the
    stderr is the standard deviation of block means over sqrt(blocks).
    """
    v = np.asarray(values, float)
    if v.size < n_batches:
        n_batches = max(2, v.size)
    blocks = np.array_split(v, n_batches)
    bm = np.array([blk.mean() for blk in blocks])
    return float(v.mean()), float(bm.std(ddof=1) / np.sqrt(len(bm)))


def batch_statistic(stat_fn, block_ids, n_batches: int = 32, *arrays):
    """Point estimate and batch stderr of a statistic of several arrays.

    ``block_ids`` assigns each row to a replicate; replicates are
    grouped into ``n_batches`` contiguous batches, ``stat_fn`` is
    evaluated per batch and on the full sample.  Returns
    (full_estimate, stderr, n_rows).
    """
    block_ids = np.asarray(block_ids)
    full = stat_fn(*arrays)
    lo, hi = block_ids.min(), block_ids.max() + 1
    edges = np.linspace(lo, hi, n_batches + 1)
    vals = []
    for i in range(n_batches):
        m = (block_ids >= edges[i]) & (block_ids < edges[i + 1])
        if m.sum() > 0:
            vals.append(stat_fn(*(a[m] for a in arrays)))
    vals = np.array(vals, float)
    if vals.size < 2:
        return float(full), float("nan"), int(block_ids.size)
    se = float(vals.std(ddof=1) / np.sqrt(vals.size))
    return float(full), se, int(block_ids.size)


@dataclasses.dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    slope_se: float
    n_points: int


def fit_line(x, y) -> LineFit:
    """Ordinary least-squares line fit with the residual-based slope SE."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 points")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    if n > 2:
        slope_se = float(np.sqrt(ss_res / (n - 2) / sxx))
    else:
        slope_se = 0.0
    return LineFit(slope, intercept, r2, slope_se, int(n))


def sample_correlation(a, b) -> float:
    """Pearson correlation of two equal-length samples."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.size != b.size or a.size < 2:
        raise ValueError("need two equal-length samples of size >= 2")
    return float(np.corrcoef(a, b)[0, 1])
