"""Independent subspace analysis: FastICA, then HSIC grouping of the components."""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import numkernel
from .config import DiscoveryConfig
from .ica import fastica
from .independence import KernelStats, gamma_test, hsic_test, permutation_test, subsample_index

SUPPORT_TOL = 1e-9


def _canonical(groups) -> tuple:
    return tuple(sorted(tuple(sorted(int(i) for i in g)) for g in groups))


@dataclass(frozen=True)
class IsaSolution:
    """Demixer W over the variables S (row r of W X_S is component r) and its row partition."""

    S: tuple
    W: np.ndarray
    partition: tuple

    def __post_init__(self):
        W = numkernel.as_matrix(self.W)
        m = len(self.S)
        if W.shape != (m, m):
            raise ValueError("W must be |S| x |S|")
        part = _canonical(self.partition)
        flat = [i for g in part for i in g]
        if sorted(flat) != list(range(m)):
            raise ValueError("partition must cover the rows exactly once")
        if any(len(g) == 0 for g in part):
            raise ValueError("empty group in partition")
        numkernel.invert(W)  # raises SingularMatrix
        object.__setattr__(self, "S", tuple(int(s) for s in self.S))
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "partition", part)

    @property
    def m(self) -> int:
        return len(self.S)

    def group_of(self) -> dict:
        return {i: g for g in self.partition for i in g}


class _UnionFind:
    def __init__(self, m):
        self.parent = list(range(m))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        self.parent[self.find(i)] = self.find(j)

    def groups(self):
        out = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


def _test(kx, ky, cfg, alpha, seed):
    if cfg.hsic_mode == "permutation":
        return permutation_test(kx, ky, alpha, cfg.hsic_permutations, seed)
    return gamma_test(kx, ky, alpha)


def group_components(Y, cfg: DiscoveryConfig, seed: int = 0) -> tuple:
    """Connected components of the pairwise HSIC dependence graph on the columns of Y."""
    m = Y.shape[1]
    idx = subsample_index(len(Y), cfg.hsic_n_max, seed)
    Y = Y[idx]
    stats = [KernelStats.of(Y[:, i]) for i in range(m)]
    n_pairs = m * (m - 1) // 2
    alpha = cfg.alpha / n_pairs if cfg.bonferroni and n_pairs else cfg.alpha
    uf = _UnionFind(m)
    for i, j in itertools.combinations(range(m), 2):
        if not _test(stats[i], stats[j], cfg, alpha, seed).independent:
            uf.union(i, j)
    groups = uf.groups()
    if cfg.blockwise:
        groups = _blockwise_merge(Y, groups, cfg, alpha, seed)
    return _canonical(groups)


def _blockwise_merge(Y, groups, cfg, alpha, seed):
    merged = True
    while merged and len(groups) > 1:
        merged = False
        for a, b in itertools.combinations(range(len(groups)), 2):
            ka, kb = KernelStats.of(Y[:, groups[a]]), KernelStats.of(Y[:, groups[b]])
            if not _test(ka, kb, cfg, alpha, seed).independent:
                groups[a] = groups[a] + groups[b]
                del groups[b]
                merged = True
                break
    return groups


def estimate_isa(data_S, cfg: DiscoveryConfig | None = None, seed: int | None = None, S=None) -> IsaSolution:
    """FastICA demixer on X_S with its rows grouped by pairwise HSIC dependence."""
    cfg = cfg or DiscoveryConfig()
    seed = cfg.seed if seed is None else seed
    X = np.asarray(getattr(data_S, "values", data_S), dtype=float)
    S = tuple(range(X.shape[1])) if S is None else tuple(S)
    W = fastica(X, seed=seed, max_iter=cfg.ica_max_iter, tol=cfg.ica_tol, restarts=cfg.ica_restarts,
                refine=cfg.ica_refine, refine_scale=cfg.ica_refine_scale)
    Y = (X - X.mean(axis=0)) @ W.T
    return IsaSolution(S, W, group_components(Y, cfg, seed))


# -- characterization helpers (need the true graph) --------------------------------

def source_mixing(B, S) -> np.ndarray:
    """Rows of A_SS^{-1} A_{S,:}: how each component of the local demixer mixes the sources."""
    A = numkernel.invert(np.eye(len(B)) - np.asarray(B))
    return numkernel.local_demixer(A, S) @ A[list(S), :]


def _support(M, tol=SUPPORT_TOL):
    scale = np.max(np.abs(M)) or 1.0
    return np.abs(M) > tol * scale


def partition_by_sources(M, tol=SUPPORT_TOL) -> tuple:
    """Rows linked when their source supports overlap; connected components."""
    supp = _support(M, tol)
    uf = _UnionFind(M.shape[0])
    for i, j in itertools.combinations(range(M.shape[0]), 2):
        if np.any(supp[i] & supp[j]):
            uf.union(i, j)
    return _canonical(uf.groups())


def true_partition(B, S) -> tuple:
    return partition_by_sources(source_mixing(B, S))


def is_irreducible(M_group, tol=SUPPORT_TOL) -> bool:
    """A group with source mixing M (rows x sources) splits iff the sources bipartition
    into P, Q with rank(M_P) + rank(M_Q) = rank(M)."""
    M = np.asarray(M_group, dtype=float)
    cols = np.nonzero(np.any(_support(M, tol), axis=0))[0]
    M = M[:, cols]
    r = numkernel.numerical_rank(M) if M.size else 0
    if len(cols) < 2 or r < 2:
        return True
    rest = list(range(1, len(cols)))
    # fix column 0 in P to visit each unordered bipartition once
    for k in range(len(rest)):
        for extra in itertools.combinations(rest, k):
            P = [0, *extra]
            Q = [c for c in range(len(cols)) if c not in P]
            if numkernel.numerical_rank(M[:, P]) + numkernel.numerical_rank(M[:, Q]) == r:
                return False
    return True


@dataclass
class IsaReport:
    groups: tuple
    cross_pass: int = 0
    cross_total: int = 0
    within_pass: int = 0
    within_total: int = 0
    irreducible: bool = True
    reducible_groups: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.irreducible and self.cross_pass == self.cross_total
                and self.within_pass == self.within_total)


def verify_isa_characterization(g, S, data, demixer=None, alpha: float = 0.05,
                                n_max: int | None = 2000, seed: int = 0) -> IsaReport:
    """Check that ``demixer @ X_S`` has the subspace structure implied by the model.

    ``demixer`` defaults to A_SS^{-1}. Rows are grouped by shared sources;
    cross-group pairs must test independent, each row of a multi-row group
    must test dependent on the rest of its group, and every group must be
    irreducible.
    """
    B = np.asarray(getattr(g, "B", g), dtype=float)
    S = list(S)
    A = numkernel.invert(np.eye(len(B)) - B)
    Wd = numkernel.local_demixer(A, S) if demixer is None else np.asarray(demixer, dtype=float)
    M = Wd @ A[S, :]
    groups = partition_by_sources(M)
    X = np.asarray(getattr(data, "values", data), dtype=float)[:, S]
    Y = X @ Wd.T
    Y = Y[subsample_index(len(Y), n_max, seed)]
    rep = IsaReport(groups)
    gid = {i: k for k, grp in enumerate(groups) for i in grp}
    for i, j in itertools.combinations(range(len(S)), 2):
        if gid[i] != gid[j]:
            rep.cross_total += 1
            rep.cross_pass += hsic_test(Y[:, i], Y[:, j], alpha, n_max=None).independent
    for grp in groups:
        if len(grp) > 1:
            for i in grp:
                others = [k for k in grp if k != i]
                rep.within_total += 1
                rep.within_pass += not hsic_test(Y[:, i], Y[:, others], alpha, n_max=None).independent
        if not is_irreducible(M[list(grp)]):
            rep.irreducible = False
            rep.reducible_groups.append(grp)
    return rep
