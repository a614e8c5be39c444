"""Whitening and FastICA with the log-cosh contrast.

The symmetric fixed-point iteration gives a first demixer. Each row is then
polished by a one-unit fixed-point iteration with a sharper log-cosh
(``refine_scale``). The symmetric step ties all rows to the sample
covariance, whose error is large for heavy-tailed sources; the one-unit
step lets every row settle on its own optimum.
"""

import numpy as np

from .errors import NoConvergence, SingularMatrix

EIG_TOL = 1e-10


def whiten(X):
    """ZCA whitening. Returns (Z, K, mean) with Z = (X - mean) @ K.T and cov(Z) = I."""
    X = np.asarray(getattr(X, "values", X), dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an n x m sample matrix with n >= 2")
    mean = X.mean(axis=0)
    Xc = X - mean
    C = Xc.T @ Xc / (len(X) - 1)
    evals, evecs = np.linalg.eigh(C)
    if evals[-1] <= 0 or evals[0] <= EIG_TOL * evals[-1]:
        raise SingularMatrix("covariance is rank deficient")
    K = evecs @ np.diag(evals ** -0.5) @ evecs.T
    return Xc @ K.T, K, mean


def _sym_decorrelate(W):
    s, u = np.linalg.eigh(W @ W.T)
    return u @ np.diag(s ** -0.5) @ u.T @ W


def _random_orthogonal(rng, m):
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def _fixed_point(Z, W, max_iter, tol, a=1.0):
    n = len(Z)
    for it in range(1, max_iter + 1):
        U = Z @ W.T
        G = np.tanh(a * U)
        W_new = _sym_decorrelate(G.T @ Z / n - np.diag((a * (1 - G ** 2)).mean(axis=0)) @ W)
        change = np.max(np.abs(np.abs(np.sum(W_new * W, axis=1)) - 1))
        W = W_new
        if change < tol:
            return W, it
    return None, max_iter


def _one_unit(Z, w, max_iter, tol, a):
    for _ in range(max_iter):
        g = np.tanh(a * (Z @ w))
        w_new = (Z * g[:, None]).mean(axis=0) - (a * (1 - g ** 2)).mean() * w
        w_new /= np.linalg.norm(w_new)
        done = abs(abs(w_new @ w) - 1) < tol
        w = w_new
        if done:
            return w
    return None


def refine_rows(Z, W, max_iter=500, tol=1e-6, a=20.0, cond_bound=1e3):
    """One-unit polish of each row of an orthogonal W in whitened space.

    Rows that fail to converge keep their symmetric estimate; if polishing
    makes two rows nearly parallel the symmetric W is returned unchanged.
    """
    out = W.copy()
    for r in range(len(W)):
        w = _one_unit(Z, W[r].copy(), max_iter, tol, a)
        if w is not None:
            out[r] = w * np.sign(w @ W[r])
    if np.linalg.cond(out) > cond_bound:
        return W
    return out


def fastica(X, seed: int = 0, max_iter: int = 500, tol: float = 1e-6, restarts: int = 5,
            refine: bool = True, refine_scale: float = 20.0) -> np.ndarray:
    """Square demixing matrix W in the original coordinates (components = X_centered @ W.T).

    Restart ``r`` draws its orthogonal start from ``default_rng([seed, r])``;
    the first convergent restart wins.
    """
    X = np.asarray(getattr(X, "values", X), dtype=float)
    n, m = X.shape
    if m < 1 or n < 10 * m:
        raise ValueError(f"need n >= 10 m (n={n}, m={m})")
    Z, K, _ = whiten(X)
    if m == 1:
        return K.copy()
    for r in range(restarts + 1):
        W0 = _random_orthogonal(np.random.default_rng([seed, r]), m)
        W, _ = _fixed_point(Z, W0, max_iter, tol)
        if W is not None:
            if refine:
                W = refine_rows(Z, W, max_iter, tol, refine_scale)
            return W @ K
    raise NoConvergence(f"FastICA did not converge after {restarts + 1} starts")


def amari_distance(P) -> float:
    """Amari index of a square matrix: 0 iff P is a scaled permutation."""
    P = np.abs(np.asarray(P, dtype=float))
    m = P.shape[0]
    if m == 1:
        return 0.0
    rows = (P.sum(axis=1) / P.max(axis=1) - 1).sum()
    cols = (P.sum(axis=0) / P.max(axis=0) - 1).sum()
    return float((rows + cols) / (2 * m * (m - 1)))
