"""Random graphs and LiNG data.

Randomness: every object is drawn from its own child stream of
``numpy.random.SeedSequence(seed)``. Children are spawned in a fixed order,
``STREAMS``, so a graph and the noise simulated on it can be reproduced
independently of each other.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import graph as G
from .dataset import Dataset
from .errors import RejectionLimit, SingularMatrix

STREAMS = ("graph", "noise", "target", "ica")


def streams(seed: int) -> dict:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


@dataclass(frozen=True)
class SemSpec:
    d: int
    graph_kind: str = "erdos_renyi_dag"
    expected_degree: float = 3.0
    weight_low: float = 0.5
    weight_high: float = 0.9
    noise_power: int = 5
    noise_scale_low: float = 0.75
    noise_scale_high: float = 1.25
    seed: int = 0
    max_degree: int = 4
    n_cycles: int = 2
    max_attempts: int = 10_000
    # "total": edge probability k/(d-1), mean total degree k.
    # "edges_per_node": edge probability 2k/(d-1), k edges per vertex on average.
    degree_mode: str = "total"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.graph_kind not in ("erdos_renyi_dag", "disjoint_cycle_dcg"):
            raise ValueError(f"unknown graph_kind {self.graph_kind!r}")
        if not 0 < self.weight_low < self.weight_high:
            raise ValueError("need 0 < weight_low < weight_high")
        if self.noise_power < 1 or self.noise_power % 2 == 0:
            raise ValueError("noise_power must be an odd integer >= 1")
        if not 0 < self.noise_scale_low <= self.noise_scale_high:
            raise ValueError("noise scale band must be positive")
        if self.expected_degree < 0:
            raise ValueError("expected_degree must be non-negative")
        if self.degree_mode not in ("total", "edges_per_node"):
            raise ValueError(f"unknown degree_mode {self.degree_mode!r}")

    @property
    def total_degree(self) -> float:
        k = self.expected_degree
        return 2 * k if self.degree_mode == "edges_per_node" else k

    def with_seed(self, seed: int) -> "SemSpec":
        return replace(self, seed=seed)


def _weights(rng, size, lo, hi):
    return rng.uniform(lo, hi, size=size) * rng.choice([-1.0, 1.0], size=size)


def _er_dag_support(rng, d, expected_degree):
    p = 0.0 if d < 2 else min(1.0, expected_degree / (d - 1))
    order = rng.permutation(d)
    S = np.zeros((d, d), dtype=bool)
    for a in range(d):
        for b in range(a + 1, d):
            if rng.random() < p:
                S[order[b], order[a]] = True
    return S


def random_dag(spec: SemSpec, rng=None) -> G.WeightedDigraph:
    """Erdos-Renyi DAG over a random vertex order.

    Edge probability is ``total_degree / (d - 1)``; see ``SemSpec.degree_mode``.
    """
    rng = rng if rng is not None else streams(spec.seed)["graph"]
    S = _er_dag_support(rng, spec.d, spec.total_degree)
    B = np.zeros((spec.d, spec.d))
    B[S] = _weights(rng, int(S.sum()), spec.weight_low, spec.weight_high)
    return G.WeightedDigraph(B)


def _degree(S):
    return S.sum(axis=0) + S.sum(axis=1)


def _dcg_candidate(rng, spec):
    d = spec.d
    S = _er_dag_support(rng, d, spec.total_degree)
    on_cycle = np.zeros((d, d), dtype=bool)
    free = list(rng.permutation(d))
    for _ in range(spec.n_cycles):
        length = int(rng.integers(2, 4))
        if len(free) < length:
            break
        verts = [int(free.pop()) for _ in range(length)]
        S[np.ix_(verts, verts)] = False
        for a, b in zip(verts, verts[1:] + verts[:1]):
            S[b, a] = True
            on_cycle[b, a] = True
    # total-degree cap: drop random backbone edges; cycle edges are kept
    deg = _degree(S)
    for v in rng.permutation(d):
        while deg[v] > spec.max_degree:
            inc = [(int(v), int(i)) for i in np.nonzero(S[v] & ~on_cycle[v])[0]]
            inc += [(int(j), int(v)) for j in np.nonzero(S[:, v] & ~on_cycle[:, v])[0]]
            j, i = inc[int(rng.integers(len(inc)))]
            S[j, i] = False
            deg = _degree(S)
    B = np.zeros((d, d))
    B[S] = _weights(rng, int(S.sum()), spec.weight_low, spec.weight_high)
    return B


def random_stable_dcg(spec: SemSpec, rng=None) -> G.WeightedDigraph:
    """Digraph with vertex-disjoint cycles and spectral radius < 1 (accept-reject).

    A DAG backbone is sampled first, then ``n_cycles`` cycles of length 2-3 are
    laid over disjoint random vertex sets. Candidates are rejected until the
    cycles are disjoint, every vertex has total degree <= ``max_degree`` and
    the adjacency matrix is convergent.
    """
    rng = rng if rng is not None else streams(spec.seed)["graph"]
    for _ in range(spec.max_attempts):
        try:
            g = G.WeightedDigraph(_dcg_candidate(rng, spec))
        except SingularMatrix:
            continue
        if G.has_disjoint_cycles(g) and G.is_stable(g):
            return g
    raise RejectionLimit(f"no stable disjoint-cycle graph after {spec.max_attempts} attempts")


def random_graph(spec: SemSpec, rng=None) -> G.WeightedDigraph:
    if spec.graph_kind == "erdos_renyi_dag":
        return random_dag(spec, rng)
    return random_stable_dcg(spec, rng)


def sample_noise(n: int, spec: SemSpec, d: int, rng=None):
    """Noise E (n x d) with E_i = U^p, U ~ Uniform(-c_i, c_i); also returns c."""
    rng = rng if rng is not None else streams(spec.seed)["noise"]
    c = rng.uniform(spec.noise_scale_low, spec.noise_scale_high, size=d)
    U = rng.uniform(-1.0, 1.0, size=(n, d)) * c
    return U ** spec.noise_power, c


def noise_variances(c, power: int) -> np.ndarray:
    """Variance of U^p for U ~ Uniform(-c, c): c^(2p) / (2p + 1)."""
    c = np.asarray(c, dtype=float)
    return c ** (2 * power) / (2 * power + 1)


def simulate(g: G.WeightedDigraph, n: int, spec: SemSpec, rng=None, return_noise: bool = False):
    """Draw n equilibrium samples X = (I - B)^{-1} E."""
    if n < 1:
        raise ValueError("n must be positive")
    A = g.mixing
    E, c = sample_noise(n, spec, g.d, rng)
    X = E @ A.T
    ds = Dataset(X)
    if return_noise:
        return ds, E, c
    return ds
