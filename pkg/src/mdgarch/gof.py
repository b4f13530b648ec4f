"""Goodness-of-fit and independence primitives.

Asymptotic Kolmogorov p-values only; every harness suite runs at sample
sizes where the finite-n correction is negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_LEVEL = 0.01


@dataclass(frozen=True)
class GofResult:
    statistic: float
    p_value: float
    n_effective: float
    level: float
    passed: bool


def kolmogorov_sf(lam: float) -> float:
    """P(K > lam) for the Kolmogorov distribution, to 1e-6 or better.

    Uses the alternating tail series for large lam and the
    theta-function dual series for small lam, where the former
    converges too slowly.
    """
    if lam <= 0.0:
        return 1.0
    if lam < 1.18:
        # dual series for the CDF
        a = math.pi * math.pi / (8.0 * lam * lam)
        total = 0.0
        for k in range(1, 20):
            term = math.exp(-((2 * k - 1) ** 2) * a)
            total += term
            if term < 1e-12 * max(total, 1e-300):
                break
        return 1.0 - math.sqrt(2.0 * math.pi) / lam * total
    total = 0.0
    for k in range(1, 200):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return max(0.0, min(1.0, 2.0 * total))


def _check_sample(x: np.ndarray, name: str = "sample") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 1:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if np.isnan(x).any():
        raise ValueError(f"{name} contains NaN")
    return x


def ks_one_sample(sample: Sequence[float], cdf: Callable,
                  level: float = DEFAULT_LEVEL) -> GofResult:
    """Two-sided KS distance against a continuous reference CDF."""
    x = np.sort(_check_sample(np.asarray(sample)))
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    p = kolmogorov_sf(math.sqrt(n) * d)
    return GofResult(d, p, float(n), level, p >= level)


def ks_two_sample(a: Sequence[float], b: Sequence[float],
                  level: float = DEFAULT_LEVEL) -> GofResult:
    xa = np.sort(_check_sample(np.asarray(a), "a"))
    xb = np.sort(_check_sample(np.asarray(b), "b"))
    na, nb = len(xa), len(xb)
    all_vals = np.concatenate((xa, xb))
    cdf_a = np.searchsorted(xa, all_vals, side="right") / na
    cdf_b = np.searchsorted(xb, all_vals, side="right") / nb
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = na * nb / (na + nb)
    p = kolmogorov_sf(math.sqrt(n_eff) * d)
    return GofResult(d, p, n_eff, level, p >= level)


def pairwise_correlation(matrix: np.ndarray) -> np.ndarray:
    """Pearson correlations of all checkpoint columns."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 10 or m.shape[1] < 2:
        raise ValueError("need >= 10 replications and >= 2 checkpoints")
    if np.isnan(m).any():
        raise ValueError("matrix contains NaN")
    sd = m.std(axis=0)
    if np.any(sd == 0.0):
        raise ValueError("zero-variance checkpoint column")
    return np.corrcoef(m, rowvar=False)


def max_offdiag_abs_correlation(matrix: np.ndarray) -> float:
    c = pairwise_correlation(matrix)
    off = c[~np.eye(c.shape[0], dtype=bool)]
    return float(np.max(np.abs(off)))
