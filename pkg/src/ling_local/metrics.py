"""Structural Hamming distance and weight error for local models."""

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import graph as G
from .errors import CombinatorialLimit
from .local_isa_ling import LocalModel, LocalModelClass

PDAG_CAP = 2 ** 12


def local_truth(g: G.WeightedDigraph, T: int) -> LocalModel:
    """Edges into T and into every child of T, weighted by B."""
    edges = []
    for j in sorted({T} | G.children(g, T)):
        edges += [(i, j, float(g.B[j, i])) for i in sorted(G.parents(g, j))]
    return LocalModel(tuple(edges))


def truth_class(g: G.WeightedDigraph, T: int, stable_only: bool = False) -> LocalModelClass:
    """Local truth of every member of the equivalence class (small graphs only)."""
    out = LocalModelClass(T, ())
    for member in G.equivalence_class(g):
        if stable_only and not G.is_stable(member):
            continue
        out.add(local_truth(member, T))
    return out.canonicalize()


def _pairs(m) -> set:
    return m.pairs() if isinstance(m, LocalModel) else set(m)


def _shd_pairs(a: set, b: set) -> int:
    """Edge additions and deletions, with a single-direction swap on a pair counted as one reversal."""
    total = 0
    for u, v in {tuple(sorted(p)) for p in a | b}:
        sa, sb = ((u, v) in a, (v, u) in a), ((u, v) in b, (v, u) in b)
        if sa != sb:
            total += 1 if sum(sa) == sum(sb) else abs(sum(sa) - sum(sb))
    return total


def shd_local(truth, est) -> int:
    return _shd_pairs(_pairs(truth), _pairs(est))


def shd_local_class(truth_class, est_class) -> float:
    """Min-cost matching of models by SHD; unmatched models cost their edge count."""
    tm = list(getattr(truth_class, "models", truth_class))
    em = list(getattr(est_class, "models", est_class))
    k = max(len(tm), len(em))
    if k == 0:
        return 0.0
    cost = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i < len(tm) and j < len(em):
                cost[i, j] = shd_local(tm[i], em[j])
            elif i < len(tm):
                cost[i, j] = len(tm[i])
            elif j < len(em):
                cost[i, j] = len(em[j])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].sum() / k)


def shd_local_pdag(truth, est, undirected=()) -> float:
    """Mean SHD over all orientations of the undirected pairs in ``undirected``."""
    und = [tuple(p) for p in undirected]
    if 2 ** len(und) > PDAG_CAP:
        raise CombinatorialLimit(f"{2 ** len(und)} orientations exceed {PDAG_CAP}")
    t, base = _pairs(truth), _pairs(est)
    total = 0
    for flips in itertools.product((False, True), repeat=len(und)):
        e = set(base) | {(v, u) if f else (u, v) for (u, v), f in zip(und, flips)}
        total += _shd_pairs(t, e)
    return total / 2 ** len(und)


def weight_distance(truth: LocalModel, est: LocalModel) -> float:
    """Euclidean distance over the union of edge slots; a missing edge has weight 0."""
    tw, ew = truth.weights(), est.weights()
    keys = set(tw) | set(ew)
    return float(np.sqrt(sum((tw.get(k, 0.0) - ew.get(k, 0.0)) ** 2 for k in keys)))


def class_weight_distance(truth_class, est_class) -> float:
    """Weight distance averaged over the SHD-optimal matching (unmatched: full norm)."""
    tm = list(getattr(truth_class, "models", truth_class))
    em = list(getattr(est_class, "models", est_class))
    k = max(len(tm), len(em))
    if k == 0:
        return 0.0
    empty = LocalModel()
    cost = np.zeros((k, k))
    wd = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            a = tm[i] if i < len(tm) else empty
            b = em[j] if j < len(em) else empty
            cost[i, j] = shd_local(a, b) if (i < len(tm) and j < len(em)) else len(a) + len(b)
            wd[i, j] = weight_distance(a, b)
    r, c = linear_sum_assignment(cost + 1e-9 * wd)
    return float(wd[r, c].sum() / k)


def f1_score(truth: set, est: set) -> float:
    if not truth and not est:
        return 1.0
    return 2 * len(truth & est) / (len(truth) + len(est))
