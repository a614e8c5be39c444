"""Dense linear-algebra helpers.

Thin wrappers over LAPACK (through numpy/scipy) that add the input checks and
error types the rest of the package relies on.
"""

import warnings

import numpy as np
import scipy.linalg

from .errors import NoConvergence, SingularMatrix

PIVOT_TOL = 1e-12
COND_BOUND = 1e12
RANK_TOL = 1e-7


def as_matrix(m) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _require_square(m):
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")


def invert(m, cond_bound: float = COND_BOUND) -> np.ndarray:
    """Inverse via partial-pivot LU.

    Raises SingularMatrix if a pivot falls below 1e-12 in magnitude or the
    2-norm condition number exceeds ``cond_bound``.
    """
    m = as_matrix(m)
    _require_square(m)
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMatrix("pivot below tolerance")
    if np.linalg.cond(m) > cond_bound:
        raise SingularMatrix("condition number above bound")
    return scipy.linalg.lu_solve((lu, piv), np.eye(m.shape[0]), check_finite=False)


def numerical_rank(m, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus, from the full (complex) spectrum."""
    m = as_matrix(m)
    _require_square(m)
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return float(np.max(np.abs(ev)))


def covariance(data) -> np.ndarray:
    """Empirical covariance (denominator n - 1) of a Dataset or n x d array."""
    x = np.asarray(getattr(data, "values", data), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least two samples")
    return np.atleast_2d(np.cov(x, rowvar=False, ddof=1))


def local_demixer(A, S) -> np.ndarray:
    """Inverse of the principal submatrix ``A[S, S]``.

    For a mixing matrix ``A = (I - B)^{-1}`` this is the Schur complement of
    the complement block in ``I - B``, i.e. the canonical ISA demixer of X_S.
    """
    A = as_matrix(A)
    _require_square(A)
    S = list(S)
    if len(set(S)) != len(S):
        raise ValueError("S must hold distinct indices")
    return invert(A[np.ix_(S, S)])


def schur_local_adjacency(B, S) -> np.ndarray:
    """``B_SS + B_{S,S'} (I - B_{S',S'})^{-1} B_{S',S}`` with S' the complement of S."""
    B = as_matrix(B)
    S = list(S)
    rest = [i for i in range(B.shape[0]) if i not in set(S)]
    out = B[np.ix_(S, S)].copy()
    if rest:
        inner = invert(np.eye(len(rest)) - B[np.ix_(rest, rest)])
        out += B[np.ix_(S, rest)] @ inner @ B[np.ix_(rest, S)]
    return out
