import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ling_local import graph as G, numkernel
from ling_local.errors import SingularMatrix, TooLarge
from ling_local.sem import SemSpec, random_dag, random_stable_dcg

from helpers import confounded_collider, confounded_spouse_graph, g1, two_paths


def _random_cyclic(seed, d):
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        mask = rng.random((d, d)) < 0.45
        np.fill_diagonal(mask, False)
        B = rng.uniform(0.5, 0.9, (d, d)) * rng.choice([-1, 1], (d, d)) * mask
        try:
            return G.WeightedDigraph(B)
        except SingularMatrix:
            continue
    raise RuntimeError("no nonsingular graph")


def test_digraph_validation():
    with pytest.raises(ValueError):
        G.WeightedDigraph(np.eye(2))
    with pytest.raises(ValueError):
        G.WeightedDigraph(np.zeros((2, 3)))
    with pytest.raises(SingularMatrix):
        G.WeightedDigraph([[0, 1], [1, 0]])
    g = G.WeightedDigraph.from_edges(3, [(0, 1, 0.5)])
    assert g.edges() == [(0, 1, 0.5)]
    with pytest.raises(ValueError):
        g.B[0, 1] = 1.0


def test_json_round_trip():
    g = two_paths()
    text = json.dumps(g.to_json())
    assert G.WeightedDigraph.from_json(json.loads(text)) == g
    with pytest.raises(ValueError):
        G.WeightedDigraph.from_json({"d": 2, "edges": [{"src": 0, "dst": 5, "w": 1}]})
    with pytest.raises(ValueError):
        G.WeightedDigraph.from_json({"edges": []})


def test_neighbourhoods():
    g = confounded_collider()
    assert G.parents(g, 3) == {1, 2}
    assert G.markov_blanket(g, 3) == {1, 2}
    g = G.WeightedDigraph.empty(3)
    assert G.parents(g, 0) == G.children(g, 0) == G.spouses(g, 0) == set()
    collider = g1(3, [(1, 3, 0.5), (2, 3, 0.5)])
    assert G.spouses(collider, 0) == {1}
    assert G.markov_blanket(two_paths(), 3) == {0, 2}
    assert G.markov_blanket(confounded_spouse_graph(), 3) == {1, 2, 4, 5}
    assert G.markov_blanket(G.WeightedDigraph.empty(4), 2) == set()
    with pytest.raises(IndexError):
        G.parents(collider, 5)


def _undirected(M):
    return {tuple(sorted((int(i), int(j)))) for i, j in zip(*np.nonzero(M))}


def test_moral_graph_examples():
    assert _undirected(G.moral_graph(g1(3, [(1, 3, 1), (2, 3, 1)]))) == {(0, 2), (1, 2), (0, 1)}
    assert _undirected(G.moral_graph(g1(3, [(1, 2, 1), (2, 3, 1)]))) == {(0, 1), (1, 2)}
    assert _undirected(G.moral_graph(confounded_collider())) == {(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}


@given(st.integers(0, 10 ** 6), st.integers(2, 8))
def test_markov_blanket_is_moral_neighbourhood(seed, d):
    g = _random_cyclic(seed, d)
    M = G.moral_graph(g)
    for i in range(d):
        assert G.markov_blanket(g, i) == {int(j) for j in np.nonzero(M[i])[0]}


def test_stability_examples():
    assert not G.is_stable(G.WeightedDigraph([[0, 2], [2, 0]]))
    assert G.is_stable(G.WeightedDigraph([[0, 0.5], [0.5, 0]]))
    assert G.is_stable(random_dag(SemSpec(d=8, seed=1)))


def test_disjoint_cycles_examples():
    two = G.WeightedDigraph.from_edges(4, [(0, 1, .5), (1, 0, .5), (2, 3, .5), (3, 2, .5)])
    assert G.has_disjoint_cycles(two)
    shared = G.WeightedDigraph.from_edges(3, [(0, 1, .5), (1, 0, .5), (1, 2, .5), (2, 1, .5)])
    assert not G.has_disjoint_cycles(shared)
    assert G.has_disjoint_cycles(random_dag(SemSpec(d=8, seed=2)))


def _brute_force_class(g):
    """Every row permutation of I - B with a nonzero diagonal, rescaled to unit diagonal."""
    W = np.eye(g.d) - g.B
    found = []
    for perm in itertools.permutations(range(g.d)):
        PW = W[list(perm)]
        if np.any(np.diag(PW) == 0):
            continue
        Bp = np.eye(g.d) - PW / np.diag(PW)[:, None]
        np.fill_diagonal(Bp, 0)
        if not any(np.max(np.abs(Bp - f)) <= 1e-9 for f in found):
            found.append(Bp)
    return found


def _same_sets(xs, ys, tol=1e-9):
    return len(xs) == len(ys) and all(any(np.max(np.abs(x - y)) <= tol for y in ys) for x in xs)


def test_equivalence_class_examples():
    cls = G.equivalence_class(G.WeightedDigraph([[0, 0.5], [0.5, 0]]))
    weights = sorted(sorted(abs(w) for _, _, w in m.edges()) for m in cls)
    assert weights == [[0.5, 0.5], [2.0, 2.0]]
    dag = random_dag(SemSpec(d=6, seed=3))
    cls = G.equivalence_class(dag)
    assert len(cls) == 1 and cls.members[0] == dag
    assert len(G.equivalence_class(G.WeightedDigraph.empty(3))) == 1
    with pytest.raises(TooLarge):
        G.equivalence_class(G.WeightedDigraph.empty(10))


@pytest.mark.parametrize("seed", range(25))
def test_equivalence_class_properties(seed):
    d = 2 + seed % 4
    g = _random_cyclic(seed, d)
    cls = G.equivalence_class(g)
    assert _same_sets([m.B for m in cls], _brute_force_class(g))
    omega = np.random.default_rng(seed).uniform(0.5, 2, d)
    cov = G.implied_covariance(g.B, omega)
    for m, DP in zip(cls.members, cls.transforms):
        assert np.all(np.diag(m.B) == 0)
        # I - B' = D P (I - B)
        assert np.allclose(np.eye(d) - m.B, DP @ (np.eye(d) - g.B), atol=1e-9)
        omega_p = np.diag(DP @ np.diag(omega) @ DP.T)
        assert np.max(np.abs(G.implied_covariance(m.B, omega_p) - cov)) < 1e-8
        # idempotent as a set
        assert _same_sets([x.B for x in G.equivalence_class(m)], [x.B for x in cls], 1e-7)


@pytest.mark.parametrize("seed", range(15))
def test_unique_stable_member_with_disjoint_cycles(seed):
    g = random_stable_dcg(SemSpec(d=6, graph_kind="disjoint_cycle_dcg", seed=seed))
    stable = [m for m in G.equivalence_class(g) if G.is_stable(m)]
    assert len(stable) == 1 and np.allclose(stable[0].B, g.B)


def test_implied_covariance_matches_mixing():
    g = two_paths()
    omega = np.array([1.0, 2.0, 0.5, 1.5])
    A = g.mixing
    assert np.allclose(G.implied_covariance(g.B, omega), A @ np.diag(omega) @ A.T)
    assert numkernel.spectral_radius(g.B) == 0
