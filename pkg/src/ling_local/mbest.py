"""Markov-blanket estimation: nodewise lasso and inverse-covariance support."""

import numpy as np
from scipy import stats

from . import numkernel
from .errors import NoConvergence, SingularMatrix

KKT_TOL = 1e-6
MAX_SWEEPS = 10_000
COEF_ZERO = 1e-8
THETA_THRESHOLD = 0.1


def _standardize(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    live = sd > 0
    Z = np.zeros_like(X)
    Z[:, live] = (X[:, live] - mu[live]) / sd[live]
    return Z, sd, live


def _soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _kkt_residual(G, c, beta, lam):
    grad = c - G @ beta
    on = beta != 0
    r = np.zeros_like(beta)
    r[on] = np.abs(grad[on] - lam * np.sign(beta[on]))
    r[~on] = np.maximum(np.abs(grad[~on]) - lam, 0.0)
    return float(r.max()) if r.size else 0.0


def _cd(G, c, lam, beta, max_sweeps, tol):
    diag = np.diag(G)
    for _ in range(max_sweeps):
        for j in range(len(c)):
            if diag[j] <= 0:
                continue
            rho = c[j] - G[j] @ beta + diag[j] * beta[j]
            beta[j] = _soft(rho, lam) / diag[j]
        if _kkt_residual(G, c, beta, lam) < tol:
            return beta
    raise NoConvergence(f"lasso did not reach KKT tolerance {tol} in {max_sweeps} sweeps")


def lasso(X, y, lam: float, max_sweeps: int = MAX_SWEEPS, tol: float = KKT_TOL,
          standardize: bool = True) -> np.ndarray:
    """Minimize (1/2n)||y - Z b||^2 + lam ||b||_1 by cyclic coordinate descent.

    Z is X with centered, unit-variance columns; y is centered. The returned
    coefficients are mapped back to the scale of the original columns.
    Constant columns get a zero coefficient. With ``standardize=False`` the
    columns are only centered, which is what a reweighted (adaptive) fit needs.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    X = numkernel.as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    if len(y) != X.shape[0]:
        raise ValueError("X and y disagree on sample count")
    n = X.shape[0]
    Z, sd, live = _standardize(X)
    if not standardize:
        Z = X - X.mean(axis=0)
        sd = np.where(live, 1.0, 0.0)
    yc = y - y.mean()
    G = Z.T @ Z / n
    c = Z.T @ yc / n
    b = _cd(G, c, lam, np.zeros(X.shape[1]), max_sweeps, tol)
    out = np.zeros_like(b)
    out[live] = b[live] / sd[live]
    return out


def default_lambda(n: int, d: int, kappa: float = 0.5) -> float:
    return kappa * np.sqrt(np.log(max(d, 2)) / n)


def cv_lambda(X, y, folds: int = 5, n_grid: int = 20, seed: int = 0) -> float:
    """Lambda minimizing k-fold held-out squared error on a log grid."""
    X = numkernel.as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]
    if n < 2 * folds:
        raise ValueError("too few samples for cross-validation")
    Z, _, _ = _standardize(X)
    lam_max = np.max(np.abs(Z.T @ (y - y.mean()))) / n
    if lam_max == 0:
        return 0.0
    grid = lam_max * np.logspace(0, -3, n_grid)
    fold = np.random.default_rng(seed).permutation(n) % folds
    err = np.zeros(n_grid)
    for k in range(folds):
        tr, te = fold != k, fold == k
        Ztr, sd, live = _standardize(X[tr])
        mu = X[tr].mean(axis=0)
        ym = y[tr].mean()
        G = Ztr.T @ Ztr / tr.sum()
        c = Ztr.T @ (y[tr] - ym) / tr.sum()
        Zte = np.zeros((te.sum(), X.shape[1]))
        Zte[:, live] = (X[te][:, live] - mu[live]) / sd[live]
        beta = np.zeros(X.shape[1])
        for g, lam in enumerate(grid):
            # warm start along the path
            beta = _cd(G, c, lam, beta, MAX_SWEEPS, KKT_TOL)
            err[g] += np.sum((y[te] - ym - Zte @ beta) ** 2)
    return float(grid[np.argmin(err)])


def ols_prune(X, T: int, selected, alpha: float) -> set:
    """Backward elimination of ``selected`` by OLS t-tests of column T on the survivors.

    The regressor with the smallest |t| is dropped and the fit repeated until
    every remaining coefficient is significant at ``alpha`` (two-sided).
    """
    X = np.asarray(getattr(X, "values", X), dtype=float)
    n = len(X)
    sel = sorted(selected)
    y = X[:, T] - X[:, T].mean()
    while sel:
        Z = X[:, sel] - X[:, sel].mean(axis=0)
        dof = n - len(sel) - 1
        if dof < 1:
            raise ValueError("too few samples for the t-tests")
        G = numkernel.invert(Z.T @ Z)
        b = G @ Z.T @ y
        r = y - Z @ b
        t = np.abs(b) / np.sqrt(r @ r / dof * np.diag(G))
        if t.min() > stats.t.ppf(1 - alpha / 2, dof):
            break
        sel.pop(int(np.argmin(t)))
    return set(sel)


def nodewise_lasso_mb(data, T: int, lam: float | None = None, kappa: float = 0.5,
                      cv: bool = False, seed: int = 0, prune_alpha: float | None = None) -> set:
    """Indices with nonzero lasso coefficient when column T is regressed on the rest.

    With ``prune_alpha`` the lasso only screens: its selection is refit by OLS
    and pruned with ``ols_prune``.
    """
    X = np.asarray(getattr(data, "values", data), dtype=float)
    n, d = X.shape
    if not 0 <= T < d:
        raise IndexError(f"target {T} out of range")
    rest = [i for i in range(d) if i != T]
    if not rest:
        return set()
    y = X[:, T]
    sd = y.std()
    if sd == 0:
        return set()
    y = (y - y.mean()) / sd
    if lam is None:
        lam = cv_lambda(X[:, rest], y, seed=seed) if cv else default_lambda(n, d, kappa)
    beta = lasso(X[:, rest], y, lam) * X[:, rest].std(axis=0)
    out = {rest[k] for k in np.nonzero(np.abs(beta) > COEF_ZERO)[0]}
    if prune_alpha is not None:
        out = ols_prune(X, T, out, prune_alpha)
    return out


def theta_from_model(B, omega) -> np.ndarray:
    """Precision matrix of X = BX + E with noise variances omega: (I-B)^T diag(1/omega) (I-B)."""
    B = numkernel.as_matrix(B)
    omega = np.asarray(omega, dtype=float).ravel()
    if np.any(omega <= 0):
        raise ValueError("noise variances must be positive")
    W = np.eye(B.shape[0]) - B
    return W.T @ np.diag(1.0 / omega) @ W


def support(theta, threshold: float) -> np.ndarray:
    M = np.abs(np.asarray(theta)) > threshold
    M = M | M.T
    np.fill_diagonal(M, False)
    return M


def inv_cov_moral_support(data, threshold: float = THETA_THRESHOLD) -> np.ndarray:
    """Off-diagonal support of the inverse correlation matrix above ``threshold``."""
    X = np.asarray(getattr(data, "values", data), dtype=float)
    sd = X.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise SingularMatrix("constant column makes the covariance singular")
    Z = (X - X.mean(axis=0)) / sd
    theta = numkernel.invert(numkernel.covariance(Z))
    return support(theta, threshold)
