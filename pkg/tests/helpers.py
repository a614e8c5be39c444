"""Small hand-built graphs shared by the tests (1-based labels are shifted to 0-based)."""

import numpy as np

from ling_local.graph import WeightedDigraph


def g1(d, edges) -> WeightedDigraph:
    """Graph from 1-based ``(src, dst, w)`` triples."""
    return WeightedDigraph.from_edges(d, [(s - 1, t - 1, w) for s, t, w in edges])


def confounded_collider(a=0.8, b=0.7, c=0.6, e=0.9):
    """1->2, 1->3, 2->4, 3->4: X1 confounds the parents of vertex 4."""
    return g1(4, [(1, 2, a), (1, 3, b), (2, 4, c), (3, 4, e)])


def two_paths(a=0.8, c=0.7, b=0.6, d=0.9):
    """1->2 (a), 2->3 (c), 1->4 (b), 3->4 (d)."""
    return g1(4, [(1, 2, a), (2, 3, c), (1, 4, b), (3, 4, d)])


def two_cycle_tail(a=0.5, b=0.6, c=0.7):
    """1->2 (a), 2->1 (b), 2->3 (c)."""
    return g1(3, [(1, 2, a), (2, 1, b), (2, 3, c)])


def confounded_spouse_graph(w=0.8):
    """Hidden 0 drives 1 and 2; 1 -> 3 -> {4, 5}; 2 -> 4.

    For T = 3 the blanket is {1, 2, 4, 5}; rows 1 and 2 of the local demixer
    share the hidden source and form one two-dimensional subspace.
    """
    e = [(0, 1, w), (0, 2, -w), (1, 3, 0.7), (3, 4, 0.6), (3, 5, -0.75), (2, 4, 0.85)]
    return WeightedDigraph.from_edges(6, e)


def cyclic_child_graph(w=0.8):
    """T=0 -> 1; 3-cycle 1 -> 2 -> 3 -> 1; 4 -> 1. Spectral radius w (< 1)."""
    e = [(0, 1, w), (1, 2, w), (2, 3, w), (3, 1, w), (4, 1, w)]
    return WeightedDigraph.from_edges(5, e)


def u5_noise(rng, n, d, power=5):
    c = rng.uniform(0.75, 1.25, d)
    return (rng.uniform(-1, 1, (n, d)) * c) ** power


def sample(g, n, seed=0):
    rng = np.random.default_rng(seed)
    E = u5_noise(rng, n, g.d)
    return E @ g.mixing.T
