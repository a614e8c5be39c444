"""HSIC independence statistic and test.

Gaussian kernels with median-heuristic bandwidths; the null distribution of
n * HSIC is approximated by a two-moment gamma fit, or by permutation.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateInput

N_MIN = 10
N_MAX = 2000


def _block(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError("expected an n x p sample matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite samples")
    return a


def _gram(a) -> np.ndarray:
    """Gaussian Gram matrix, bandwidth = median pairwise distance of the block."""
    if np.all(np.ptp(a, axis=0) == 0):
        raise DegenerateInput("block has zero variance")
    d2 = pdist(a, "sqeuclidean")
    med = np.median(np.sqrt(d2))
    if med == 0:
        # more than half the points coincide; fall back to the mean distance
        med = np.mean(np.sqrt(d2))
    return squareform(np.exp(-d2 / (2 * med * med)), checks=False) + np.eye(len(a))


@dataclass(frozen=True)
class KernelStats:
    """Centered Gram matrix plus the off-diagonal mean needed for the gamma fit."""

    Kc: np.ndarray
    mu: float

    @classmethod
    def of(cls, a) -> "KernelStats":
        K = _gram(_block(a))
        n = len(K)
        mu = (K.sum() - np.trace(K)) / n / (n - 1)
        Kc = K - K.mean(axis=0) - K.mean(axis=1)[:, None] + K.mean()
        return cls(Kc, float(mu))


@dataclass(frozen=True)
class HsicResult:
    statistic: float  # n * HSIC_b
    p_value: float
    threshold: float
    independent: bool


def subsample_index(n: int, n_max: int | None, seed: int = 0):
    if n_max is None or n <= n_max:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).choice(n, size=n_max, replace=False))


def _check_pair(x, y):
    x, y = _block(x), _block(y)
    if len(x) != len(y):
        raise ValueError("x and y disagree on sample count")
    if len(x) < N_MIN:
        raise ValueError(f"need at least {N_MIN} samples")
    return x, y


def hsic_statistic(x, y) -> float:
    """Biased estimate (1/n^2) trace(K H L H)."""
    x, y = _check_pair(x, y)
    kx, ky = KernelStats.of(x), KernelStats.of(y)
    n = len(x)
    return float(np.sum(kx.Kc * ky.Kc) / n / n)


def gamma_test(kx: KernelStats, ky: KernelStats, alpha: float) -> HsicResult:
    n = len(kx.Kc)
    prod = kx.Kc * ky.Kc
    stat = prod.sum() / n
    v = (prod / 6.0) ** 2
    var = (v.sum() - np.trace(v)) / n / (n - 1)
    var *= 72.0 * (n - 4) * (n - 5) / n / (n - 1) / (n - 2) / (n - 3)
    mean = (1.0 + kx.mu * ky.mu - kx.mu - ky.mu) / n
    if var <= 0 or mean <= 0:
        raise DegenerateInput("gamma moments are not positive")
    shape, scale = mean * mean / var, var * n / mean
    thresh = stats.gamma.ppf(1 - alpha, shape, scale=scale)
    p = stats.gamma.sf(stat, shape, scale=scale)
    return HsicResult(float(stat), float(p), float(thresh), bool(stat <= thresh))


def permutation_test(kx: KernelStats, ky: KernelStats, alpha: float, n_perm: int = 500,
                     seed: int = 0) -> HsicResult:
    n = len(kx.Kc)
    stat = np.sum(kx.Kc * ky.Kc) / n
    rng = np.random.default_rng(seed)
    null = np.empty(n_perm)
    for b in range(n_perm):
        p = rng.permutation(n)
        null[b] = np.sum(kx.Kc * ky.Kc[np.ix_(p, p)]) / n
    pval = (1 + np.sum(null >= stat)) / (1 + n_perm)
    thresh = float(np.quantile(null, 1 - alpha))
    return HsicResult(float(stat), float(pval), thresh, bool(pval > alpha))


def hsic_test(x, y, alpha: float = 0.05, mode: str = "gamma", n_max: int | None = N_MAX,
              n_perm: int = 500, seed: int = 0) -> HsicResult:
    """Test x independent of y at level alpha; rows beyond ``n_max`` are subsampled."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    x, y = _check_pair(x, y)
    idx = subsample_index(len(x), n_max, seed)
    kx, ky = KernelStats.of(x[idx]), KernelStats.of(y[idx])
    if mode == "gamma":
        return gamma_test(kx, ky, alpha)
    if mode == "permutation":
        return permutation_test(kx, ky, alpha, n_perm, seed)
    raise ValueError(f"unknown mode {mode!r}")
