"""Weighted directed graphs and the global LiNG equivalence class.

Convention: ``B[j, i]`` is the direct effect of vertex i on vertex j, so an
edge ``i -> j`` exists iff ``B[j, i] != 0``. Vertices are 0-based.
"""

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import numkernel
from .errors import CycleEnumLimit, SingularMatrix, TooLarge

EDGE_TOL = 0.0
DEDUP_TOL = 1e-9
EQUIV_GUARD = 9
CYCLE_CAP = 10_000


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    B: np.ndarray

    def __post_init__(self):
        B = numkernel.as_matrix(self.B).copy()
        if B.shape[0] != B.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if np.any(np.diag(B) != 0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        if np.linalg.cond(np.eye(B.shape[0]) - B) > numkernel.COND_BOUND:
            raise SingularMatrix("I - B is numerically singular")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)

    @property
    def d(self) -> int:
        return self.B.shape[0]

    @classmethod
    def empty(cls, d: int) -> "WeightedDigraph":
        return cls(np.zeros((d, d)))

    @classmethod
    def from_edges(cls, d: int, edges) -> "WeightedDigraph":
        B = np.zeros((d, d))
        for src, dst, w in edges:
            B[dst, src] = w
        return cls(B)

    def edges(self):
        """List of ``(src, dst, weight)`` sorted by (dst, src)."""
        dst, src = np.nonzero(self.B)
        return sorted((int(s), int(t), float(self.B[t, s])) for t, s in zip(dst, src))

    @property
    def mixing(self) -> np.ndarray:
        return numkernel.invert(np.eye(self.d) - self.B)

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.d))
        G.add_weighted_edges_from(self.edges())
        return G

    def to_json(self) -> dict:
        return {"d": self.d, "edges": [{"src": s, "dst": t, "w": w} for s, t, w in self.edges()]}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightedDigraph":
        try:
            d = int(obj["d"])
            edges = [(int(e["src"]), int(e["dst"]), float(e["w"])) for e in obj["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed graph JSON: {exc}") from None
        for s, t, _ in edges:
            if not (0 <= s < d and 0 <= t < d):
                raise ValueError(f"edge {s}->{t} out of range for d={d}")
        return cls.from_edges(d, edges)

    def __eq__(self, other):
        return isinstance(other, WeightedDigraph) and np.array_equal(self.B, other.B)

    __hash__ = None


def _check_vertex(g, i):
    if not 0 <= i < g.d:
        raise IndexError(f"vertex {i} out of range")


def parents(g: WeightedDigraph, i: int) -> set:
    _check_vertex(g, i)
    return {int(j) for j in np.nonzero(g.B[i, :])[0]}


def children(g: WeightedDigraph, i: int) -> set:
    _check_vertex(g, i)
    return {int(j) for j in np.nonzero(g.B[:, i])[0]}


def spouses(g: WeightedDigraph, i: int) -> set:
    pa, ch = parents(g, i), children(g, i)
    out = set()
    for c in ch:
        out |= parents(g, c)
    return out - pa - ch - {i}


def markov_blanket(g: WeightedDigraph, i: int) -> set:
    return (parents(g, i) | children(g, i) | spouses(g, i)) - {i}


def moral_graph(g: WeightedDigraph) -> np.ndarray:
    """Symmetric boolean adjacency: adjacent in g, or co-parents of some vertex."""
    support = g.B != 0
    M = support | support.T
    for c in range(g.d):
        pa = np.nonzero(support[c])[0]
        M[np.ix_(pa, pa)] = True
    np.fill_diagonal(M, False)
    return M


def is_stable(g: WeightedDigraph) -> bool:
    return numkernel.spectral_radius(g.B) < 1.0


def simple_cycles(g: WeightedDigraph, cap: int = CYCLE_CAP):
    out = []
    for cyc in nx.simple_cycles(g.to_networkx()):
        out.append(cyc)
        if len(out) > cap:
            raise CycleEnumLimit(f"more than {cap} simple cycles")
    return out


def has_disjoint_cycles(g: WeightedDigraph, cap: int = CYCLE_CAP) -> bool:
    seen = set()
    for cyc in simple_cycles(g, cap):
        if seen.intersection(cyc):
            return False
        seen.update(cyc)
    return True


@dataclass
class EquivalenceClass:
    """Members of the LiNG equivalence class.

    ``transforms[k]`` is the matrix ``D P`` with ``I - members[k].B = D P (I - B)``
    for the generating graph, kept so callers can map noise variances across.
    """

    members: list
    permutations: list = field(default_factory=list)
    transforms: list = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _dedup(cands, tol):
    keep = []
    for item in cands:
        if not any(np.max(np.abs(item[0] - k[0])) <= tol for k in keep):
            keep.append(item)
    return keep


def equivalence_class(g: WeightedDigraph, guard: int = EQUIV_GUARD, tol: float = DEDUP_TOL) -> EquivalenceClass:
    """All ``B' = I - D P (I - B)`` with zero diagonal, by enumerating row permutations.

    Factorial in ``d``; intended as a reference for small graphs.
    """
    if g.d > guard:
        raise TooLarge(f"d={g.d} exceeds enumeration guard {guard}")
    W = np.eye(g.d) - g.B
    cands = []
    for perm in itertools.permutations(range(g.d)):
        # row i of P W is row perm[i] of W
        PW = W[list(perm), :]
        diag = np.diag(PW)
        if np.any(np.abs(diag) <= EDGE_TOL):
            continue
        D = np.diag(1.0 / diag)
        Bp = np.eye(g.d) - D @ PW
        np.fill_diagonal(Bp, 0.0)
        P = np.eye(g.d)[list(perm), :]
        cands.append((Bp, perm, D @ P))
    cands = _dedup(cands, tol)
    return EquivalenceClass(
        members=[WeightedDigraph(c[0]) for c in cands],
        permutations=[c[1] for c in cands],
        transforms=[c[2] for c in cands],
    )


def implied_covariance(B, noise_var) -> np.ndarray:
    A = numkernel.invert(np.eye(len(noise_var)) - np.asarray(B))
    return A @ np.diag(noise_var) @ A.T
