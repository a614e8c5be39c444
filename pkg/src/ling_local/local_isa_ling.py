"""Local ISA-LiNG: read the edges into a target and its children off an ISA demixer.

Every admissible row permutation of the demixer yields one member of the
local equivalence class; a sink-peeling pass gives the single model directly
when neither the target nor its children sit on a cycle.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import numkernel
from .config import DiscoveryConfig
from .errors import (AllFiltered, AssertionViolated, CombinatorialLimit, EmptySupport,
                     NoAdmissible)
from .isa import IsaSolution, estimate_isa, true_partition

DEDUP_TOL = 1e-6
PERM_CAP = 20_000
ORACLE_ZERO_TOL = 1e-9
ORACLE_RANK_TOL = 1e-7


@dataclass(frozen=True)
class LocalModel:
    """Weighted edges ``(src, dst, w)`` in global vertex indices, kept sorted by (dst, src)."""

    edges: tuple = ()

    def __post_init__(self):
        es = tuple(sorted(((int(s), int(t), float(w)) for s, t, w in self.edges),
                          key=lambda e: (e[1], e[0])))
        if any(s == t for s, t, _ in es):
            raise ValueError("self-edges are not allowed")
        if len({(s, t) for s, t, _ in es}) != len(es):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", es)

    def pairs(self) -> set:
        return {(s, t) for s, t, _ in self.edges}

    def weights(self) -> dict:
        return {(s, t): w for s, t, w in self.edges}

    def close_to(self, other: "LocalModel", tol: float = DEDUP_TOL) -> bool:
        if self.pairs() != other.pairs():
            return False
        ow = other.weights()
        return all(abs(w - ow[(s, t)]) <= tol for s, t, w in self.edges)

    def __len__(self):
        return len(self.edges)

    def to_json(self, names=None) -> dict:
        def edge(s, t, w):
            e = {"src": s, "dst": t, "w": w}
            if names is not None:
                e["src_name"], e["dst_name"] = names[s], names[t]
            return e
        return {"edges": [edge(*e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj: dict) -> "LocalModel":
        try:
            return cls(tuple((int(e["src"]), int(e["dst"]), float(e["w"])) for e in obj["edges"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model JSON: {exc}") from None


@dataclass
class LocalModelClass:
    target: int
    S: tuple
    models: list = field(default_factory=list)
    provenance: list = field(default_factory=list)  # admissible permutations per model
    local_B: list = field(default_factory=list)  # |S| x |S| matrix per model, or None
    stable: list = field(default_factory=list)

    def __len__(self):
        return len(self.models)

    def add(self, model, perm=None, local_B=None):
        for k, m in enumerate(self.models):
            if m.close_to(model):
                if perm is not None:
                    self.provenance[k].append(tuple(perm))
                return
        self.models.append(model)
        self.provenance.append([] if perm is None else [tuple(perm)])
        self.local_B.append(local_B)
        self.stable.append(None if local_B is None else bool(numkernel.spectral_radius(local_B) < 1))

    def canonicalize(self) -> "LocalModelClass":
        order = sorted(range(len(self.models)), key=lambda k: self.models[k].edges)
        for name in ("models", "provenance", "local_B", "stable"):
            setattr(self, name, [getattr(self, name)[k] for k in order])
        return self

    def to_json(self, names=None) -> dict:
        out = {"target": self.target, "models": []}
        if names is not None:
            out["target_name"] = names[self.target]
        for m, st in zip(self.models, self.stable):
            d = m.to_json(names)
            d["stable"] = st
            out["models"].append(d)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LocalModelClass":
        try:
            cl = cls(int(obj["target"]), ())
            for m in obj["models"]:
                cl.models.append(LocalModel.from_json(m))
                cl.provenance.append([])
                cl.local_B.append(None)
                cl.stable.append(m.get("stable"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model-class JSON: {exc}") from None
        return cl


# -- demixer preprocessing ---------------------------------------------------------

def clean_demixer(W, partition, zero_tol: float) -> np.ndarray:
    """Put W on a per-group canonical scale and zero its small entries.

    Singleton rows are divided by their largest magnitude; entries at or
    below ``zero_tol`` become 0. A multi-row group is replaced by an
    orthonormal basis of its row space, and columns whose norm within the
    group is at most ``zero_tol`` of the largest are zeroed.
    """
    W = np.array(W, dtype=float)
    for g in partition:
        g = list(g)
        if len(g) == 1:
            row = W[g[0]] / np.max(np.abs(W[g[0]]))
            row[np.abs(row) <= zero_tol] = 0.0
            W[g[0]] = row
        else:
            q, _ = np.linalg.qr(W[g].T)
            block = q.T
            norms = np.linalg.norm(block, axis=0)
            block[:, norms <= zero_tol * norms.max()] = 0.0
            W[g] = block
    return W


def _abs_rank(block, tol):
    s = np.linalg.svd(block, compute_uv=False)
    return int(np.sum(s > tol))


def support_column(W, T_pos: int, zero_tol: float = 0.05) -> list:
    """Rows whose max-abs-normalized entry in column ``T_pos`` exceeds ``zero_tol``."""
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    W = numkernel.as_matrix(W)
    scale = np.max(np.abs(W), axis=1)
    scale[scale == 0] = 1.0
    C = [int(i) for i in np.nonzero(np.abs(W[:, T_pos]) / scale > zero_tol)[0]]
    if not C:
        raise EmptySupport(f"column {T_pos} of the demixer has no entry above {zero_tol}")
    return C


def admissible_permutations(sol: IsaSolution, rank_tol: float = ORACLE_RANK_TOL, W=None,
                            cap: int = PERM_CAP) -> list:
    """Row permutations whose diagonal blocks all have full rank.

    A permutation is a tuple ``pi`` with ``pi[r]`` the position row r moves
    to. Rows of one group go to a position set in sorted order, so each
    group-to-positions assignment is reported once. The rank of a block is
    the number of its singular values above ``rank_tol``; pass a cleaned
    ``W`` (see ``clean_demixer``) when working with estimates.
    """
    W = sol.W if W is None else np.asarray(W, dtype=float)
    m = sol.m
    groups = sorted(sol.partition, key=lambda g: (-len(g), g))
    out = []

    def rec(k, free, assign):
        if k == len(groups):
            pi = [0] * m
            for g, pos in assign:
                for r, p in zip(g, pos):
                    pi[r] = p
            out.append(tuple(pi))
            if len(out) > cap:
                raise CombinatorialLimit(f"more than {cap} admissible permutations")
            return
        g = groups[k]
        for pos in itertools.combinations(sorted(free), len(g)):
            if _abs_rank(W[np.ix_(g, pos)], rank_tol) == len(g):
                rec(k + 1, free - set(pos), assign + [(g, pos)])

    rec(0, set(range(m)), [])
    if not out:
        raise NoAdmissible("no row permutation gives full-rank diagonal blocks")
    return sorted(out)


def permuted_adjacency(W, partition, pi) -> np.ndarray:
    """``I - D P W`` with D the inverse of each group's diagonal block after permuting."""
    m = len(pi)
    Wp = np.zeros_like(W)
    for r in range(m):
        Wp[pi[r]] = W[r]
    D = np.zeros((m, m))
    for g in partition:
        pos = [pi[r] for r in g]
        D[np.ix_(pos, pos)] = numkernel.invert(Wp[np.ix_(pos, pos)])
    Bp = np.eye(m) - D @ Wp
    for g in partition:
        pos = [pi[r] for r in g]
        Bp[np.ix_(pos, pos)] = 0.0
    return Bp


def isa_ling_from_solution(sol: IsaSolution, T: int, zero_tol: float = ORACLE_ZERO_TOL,
                           rank_tol: float = ORACLE_RANK_TOL, clean: bool = True) -> LocalModelClass:
    """Enumerate the local models encoded by an ISA solution (one per admissible permutation)."""
    if T not in sol.S:
        raise ValueError(f"target {T} is not among the ISA variables")
    t = sol.S.index(T)
    W = clean_demixer(sol.W, sol.partition, zero_tol) if clean else sol.W
    C = support_column(W, t, zero_tol)
    groups = sol.group_of()
    bad = [i for i in C if len(groups[i]) != 1]
    if bad:
        raise AssertionViolated(
            f"rows {bad} load on the target column but sit in multi-dimensional subspaces")
    out = LocalModelClass(T, sol.S)
    for pi in admissible_permutations(sol, rank_tol, W):
        Bp = permuted_adjacency(W, sol.partition, pi)
        edges = []
        for i in C:
            p = pi[i]
            for j in range(sol.m):
                if j != p and abs(Bp[p, j]) > zero_tol:
                    edges.append((sol.S[j], sol.S[p], Bp[p, j]))
        out.add(LocalModel(tuple(edges)), pi, Bp)
    return out.canonicalize()


def acyclic_postprocess(sol: IsaSolution, T_pos: int, zero_tol: float = 0.05, clean: bool = True) -> LocalModel:
    """Sink peeling on the demixer; valid when the target and its children are acyclic.

    Repeatedly pick the smallest remaining column with a single nonzero among
    the remaining rows; that row, scaled to a unit entry in the column, is the
    structural equation of the column's variable. Its edges are kept when the
    row also loads on the target column. The subspace partition is not used:
    every row is scaled and thresholded on its own.
    """
    singletons = tuple((r,) for r in range(sol.m))
    W = clean_demixer(sol.W, singletons, zero_tol) if clean else np.asarray(sol.W, dtype=float)
    U1, U2 = list(range(sol.m)), list(range(sol.m))
    edges = []
    while U1:
        found = None
        for j in U1:
            nz = [k for k in U2 if W[k, j] != 0]
            if len(nz) == 1:
                found = (j, nz[0])
                break
        if found is None:
            raise AssertionViolated("no column with a single remaining nonzero (sink) was found")
        j, k = found
        if W[k, T_pos] != 0:
            for i in U1:
                w = -W[k, i] / W[k, j]
                if i != j and W[k, i] != 0 and abs(w) > zero_tol:
                    edges.append((sol.S[i], sol.S[j], w))
        if j == T_pos:
            break
        U1.remove(j)
        U2.remove(k)
    return LocalModel(tuple(edges))


def stable_filter(cls: LocalModelClass) -> LocalModelClass:
    """Keep the models whose local adjacency matrix is convergent."""
    if any(B is None for B in cls.local_B):
        raise ValueError("stability filtering needs the per-model local adjacency matrices")
    keep = [k for k, st in enumerate(cls.stable) if st]
    if not keep:
        raise AllFiltered("no local model has spectral radius below one")
    out = LocalModelClass(cls.target, cls.S)
    for k in keep:
        out.models.append(cls.models[k])
        out.provenance.append(list(cls.provenance[k]))
        out.local_B.append(cls.local_B[k])
        out.stable.append(True)
    return out


def _local_set(T, MB, d):
    MB = {int(v) for v in MB} - {int(T)}
    if not MB:
        raise ValueError("Markov blanket must be nonempty")
    S = tuple(sorted(MB | {int(T)}))
    if S[0] < 0 or S[-1] >= d:
        raise IndexError("Markov blanket refers to a missing column")
    return S


def oracle_solution(g, T: int, MB=None) -> IsaSolution:
    """The population ISA solution A_SS^{-1} with its source-sharing partition."""
    from .graph import markov_blanket
    MB = markov_blanket(g, T) if MB is None else MB
    S = _local_set(T, MB, g.d)
    return IsaSolution(S, numkernel.local_demixer(g.mixing, S), true_partition(g.B, S))


def oracle_local_isa_ling(g, T: int, MB=None) -> LocalModelClass:
    return isa_ling_from_solution(oracle_solution(g, T, MB), T)


def local_isa_ling(T: int, MB, data, cfg: DiscoveryConfig | None = None) -> LocalModelClass:
    """ISA on X_{T and MB}, then admissible permutations (or sink peeling) to local models."""
    cfg = cfg or DiscoveryConfig()
    X = np.asarray(getattr(data, "values", data), dtype=float)
    S = _local_set(T, MB, X.shape[1])
    sol = estimate_isa(X[:, list(S)], cfg, S=S)
    if cfg.postprocess == "sink_peeling":
        out = LocalModelClass(int(T), S)
        out.add(acyclic_postprocess(sol, S.index(T), cfg.zero_tol))
        return out
    out = isa_ling_from_solution(sol, int(T), cfg.zero_tol, cfg.rank_tol)
    return stable_filter(out) if cfg.stable else out
