"""Regression-based local discovery for acyclic models (inverse Direct-LiNGAM).

Sinks of the local set are peeled off one at a time: a variable whose
regression residual on the remaining variables is independent of them has
no descendant among them, and its coefficients are its incoming weights.
"""

import numpy as np
from scipy import stats

from . import numkernel
from .config import DiscoveryConfig
from .errors import AssertionViolated
from .independence import hsic_test
from .local_isa_ling import LocalModel

POPULATION_TOL = 1e-9


class SampleMoments:
    """Empirical moments; independence of residuals by HSIC."""

    def __init__(self, data, cfg: DiscoveryConfig):
        self.X = np.asarray(getattr(data, "values", data), dtype=float)
        self.X = self.X - self.X.mean(axis=0)
        self.cov = numkernel.covariance(self.X)
        self.cfg = cfg
        self.n = len(self.X)

    def residual_independent(self, j, rest, beta):
        R = self.X[:, j] - self.X[:, rest] @ beta
        res = hsic_test(R, self.X[:, rest], self.cfg.alpha, mode=self.cfg.hsic_mode,
                        n_max=self.cfg.hsic_n_max, n_perm=self.cfg.hsic_permutations, seed=self.cfg.seed)
        return res.independent, res.p_value


class PopulationMoments:
    """Model-implied moments of X = BX + E; independence read from source supports."""

    def __init__(self, B, noise_var):
        B = numkernel.as_matrix(B)
        self.A = numkernel.invert(np.eye(len(B)) - B)
        self.cov = self.A @ np.diag(np.asarray(noise_var, dtype=float)) @ self.A.T
        self.n = None

    def residual_independent(self, j, rest, beta):
        # residual = r E; independent of X_rest iff no source is shared
        r = self.A[j] - beta @ self.A[rest]
        scale = np.max(np.abs(self.A)) or 1.0
        shared = (np.abs(r) > POPULATION_TOL * scale) & np.any(
            np.abs(self.A[rest]) > POPULATION_TOL * scale, axis=0)
        ok = not np.any(shared)
        return ok, 1.0 if ok else 0.0


def _coef(cov, rest, i):
    C = cov[np.ix_(rest, rest)]
    return numkernel.invert(C) @ cov[rest, i]


def regress(data, S, i):
    """OLS of X_i on X_S from empirical moments: returns (beta, residual)."""
    S = [int(s) for s in S]
    if i in S:
        raise ValueError("response must not be among the predictors")
    X = np.asarray(getattr(data, "values", data), dtype=float)
    X = X - X.mean(axis=0)
    cov = numkernel.covariance(X)
    beta = _coef(cov, S, i)
    return beta, X[:, i] - X[:, S] @ beta


def partial_correlation(cov, k, T, others) -> float:
    """Correlation of X_k and X_T after both are regressed on X_others."""
    idx = [k, T, *others]
    P = numkernel.invert(cov[np.ix_(idx, idx)])
    return float(-P[0, 1] / np.sqrt(P[0, 0] * P[1, 1]))


def _fisher_z_zero(rho, n, k, alpha) -> bool:
    """Cannot reject zero partial correlation (k conditioning variables) at level alpha."""
    z = np.arctanh(np.clip(rho, -0.999999, 0.999999)) * np.sqrt(max(n - k - 3, 1))
    return abs(z) < stats.norm.ppf(1 - alpha / 2)


def _coef_significant(cov, rest, j, beta, n, alpha) -> np.ndarray:
    """Two-sided t test of each OLS coefficient against zero."""
    C = cov[np.ix_(rest, rest)]
    s2 = cov[j, j] - beta @ cov[rest, j]
    se = np.sqrt(np.maximum(s2, 0) * np.diag(numkernel.invert(C)) / n)
    with np.errstate(divide="ignore"):
        t = np.abs(beta) / se
    return t > stats.t.ppf(1 - alpha / 2, max(n - len(rest) - 1, 1))


def _backward(cov, rest, j, n, alpha, zero_tol):
    """Drop the weakest coefficient and refit until every survivor is significant and above zero_tol."""
    keep = list(rest)
    while keep:
        beta = _coef(cov, keep, j)
        ok = _coef_significant(cov, keep, j, beta, n, alpha) & (np.abs(beta) > zero_tol)
        if ok.all():
            return keep, beta
        C = cov[np.ix_(keep, keep)]
        s2 = cov[j, j] - beta @ cov[keep, j]
        t = np.abs(beta) / np.sqrt(np.maximum(s2, 1e-300) * np.diag(numkernel.invert(C)) / n)
        t[ok] = np.inf
        keep.pop(int(np.argmin(t)))
    return keep, np.zeros(0)


def inverse_direct_lingam(T: int, MB, data, cfg: DiscoveryConfig | None = None,
                          moments=None) -> LocalModel:
    """Edges into T and its children by repeated sink peeling.

    ``moments`` defaults to sample moments of ``data``; pass a
    ``PopulationMoments`` for the noiseless version (then ``data`` is unused
    and every zero test uses a 1e-9 tolerance).

    With ``cfg.spouse_rule == "deferred"`` the spouse check runs only when no
    residual passes the independence test; a peeled vertex whose coefficient
    on T is zero is then dropped without edges. In population this returns
    the same edges: a vertex with an independent residual is either T, a
    child of T (nonzero coefficient on T) or a spouse with no common child
    left (zero coefficient on T).

    With ``cfg.remember_sinks``, when no residual passes in a round, vertices
    that passed in an earlier round are taken as passing with their best
    earlier p-value (removing vertices cannot give a sink a descendant).
    """
    cfg = cfg or DiscoveryConfig()
    if moments is None:
        moments = SampleMoments(data, cfg)
        zero_tol = cfg.zero_tol
    else:
        zero_tol = POPULATION_TOL
    cov = moments.cov
    wald = cfg.zero_rule in ("wald", "backward") and moments.n is not None
    backward = wald and cfg.zero_rule == "backward"
    deferred = cfg.spouse_rule == "deferred"
    T = int(T)
    U = sorted({int(v) for v in MB} | {T})
    passed = {}

    def find_spouse():
        for k in U:
            if k == T:
                continue
            others = [u for u in U if u not in (k, T)]
            rho = partial_correlation(cov, k, T, others)
            zero = abs(rho) < zero_tol
            if wald:
                zero = _fisher_z_zero(rho, moments.n, len(others), cfg.alpha)
            if zero:
                return k
        return None

    def candidates():
        cands = []
        for j in U:
            rest = [u for u in U if u != j]
            if not rest:
                cands.append((j, np.zeros(0), 1.0, True))
                break
            beta = _coef(cov, rest, j)
            if backward:
                # test the residual of the refitted regression (same population value);
                # significance only: a small coefficient on a high-variance regressor is real
                sel, b = _backward(cov, rest, j, moments.n, cfg.alpha, 0.0)
                beta = np.zeros(len(rest))
                beta[[rest.index(i) for i in sel]] = b
            ok, p = moments.residual_independent(j, rest, beta)
            if ok:
                passed[j] = max(p, passed.get(j, 0.0))
            cands.append((j, beta, p, ok))
            if ok and cfg.tie_break == "smallest_index":
                break
        return cands

    def pick(pool):
        if cfg.tie_break == "smallest_index":
            return pool[0]
        return max(pool, key=lambda c: c[2])

    edges = []
    while U:
        if not deferred:
            spouse = find_spouse()
            if spouse is not None:
                U.remove(spouse)
                continue
        cands = candidates()
        passing = [c for c in cands if c[3]]
        if not passing and cfg.remember_sinks:
            passing = [(j, beta, passed[j], True) for j, beta, _, _ in cands if j in passed]
        if not passing and deferred:
            spouse = find_spouse()
            if spouse is not None:
                U.remove(spouse)
                continue
        if not passing and cfg.tie_break == "most_independent":
            # the least dependent residual wins even if every test rejects
            passing = cands
        if not passing:
            raise AssertionViolated(
                f"no variable in {U} has a residual independent of the others "
                "(model cyclic or blanket wrong?)")
        j, beta = pick(passing)[:2]
        rest = [u for u in U if u != j]
        if backward and rest:
            # refit on the selected regressors only; population coefficients are unchanged
            rest, beta = _backward(cov, rest, j, moments.n, cfg.alpha, zero_tol)
        keep = np.abs(beta) > zero_tol
        if wald and not backward and len(rest):
            keep &= _coef_significant(cov, rest, j, beta, moments.n, cfg.alpha)
        found = [(i, j, float(b)) for i, b, k in zip(rest, beta, keep) if k]
        if j == T:
            edges += found
            break
        if not deferred or any(i == T for i, _, _ in found):
            edges += found
        U.remove(j)
    return LocalModel(tuple(edges))
