"""Shared random-instance builders for the test suite.

Random trees are finite windows of leafless trees (every childless vertex is
a frontier vertex), so consistency identities hold at every interior vertex
and verdicts are honestly "up to horizon".  Consistent systems are grown
bottom-up: frontier vertices get small random atomic probability measures,
and each interior vertex gets the unique closing measure via
parent_from_children.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from treeshift import (
    AtomicMeasure,
    MeasureSystem,
    WeightedShift,
    parent_from_children,
    truncated_tree,
)


def random_truncated_tree(rng, max_vertices=40, max_depth=5):
    """Random window of a leafless tree: branching factor 1..3, ragged cuts."""
    vertices = [0]
    parent = {}
    frontier_queue = [(0, 0)]
    next_id = 1
    while frontier_queue and len(vertices) < max_vertices:
        u, depth = frontier_queue.pop(0)
        if depth >= max_depth:
            continue
        n_children = int(rng.integers(1, 4)) if depth == 0 else int(rng.integers(0, 4))
        for _ in range(n_children):
            if len(vertices) >= max_vertices:
                break
            v = next_id
            next_id += 1
            vertices.append(v)
            parent[v] = u
            frontier_queue.append((v, depth + 1))
    return truncated_tree(vertices, parent)


def random_probability_measure(rng, max_atoms=3, lo=0.15, hi=10.0):
    k = int(rng.integers(1, max_atoms + 1))
    positions = np.sort(rng.uniform(lo, hi, size=k))
    masses = rng.dirichlet(np.ones(k))
    return AtomicMeasure(tuple(zip(positions.tolist(), masses.tolist())))


def random_consistent_system(
    rng,
    tree=None,
    max_vertices=40,
    max_depth=5,
    max_atoms=3,
    support_hi=10.0,
    zero_weight_prob=0.05,
):
    """Bottom-up construction of a weight system and a consistent measure
    system on a random (or given) truncated tree."""
    if tree is None:
        tree = random_truncated_tree(rng, max_vertices, max_depth)
    depth = tree._depth_from_roots()
    order = sorted(tree.sorted_vertices, key=lambda v: -depth[v])
    root = tree.root
    measures = {}
    weights = {}
    for u in order:
        kids = tree.children(u)
        if not kids:
            measures[u] = random_probability_measure(rng, max_atoms, hi=support_hi)
            continue
        # zero weights are allowed, but only off the root may the deficit
        # vanish: interior vertices must close the identity with zero
        # point mass (a nonzero incoming weight forbids mass at zero)
        nonzero = [v for v in kids if rng.random() >= zero_weight_prob]
        if not nonzero:
            nonzero = [kids[int(rng.integers(len(kids)))]]
        budget = rng.uniform(0.55, 1.0) if u == root else 1.0
        shares = rng.dirichlet(np.ones(len(nonzero))) * budget
        acc = AtomicMeasure.zero()
        for v in kids:
            weights[v] = 0.0
        for v, share in zip(nonzero, shares):
            inv = measures[v].moment(-1)
            c = share / inv
            weights[v] = math.sqrt(c)
            acc = acc.plus(measures[v].times_power(-1).scaled(c))
        eps = max(0.0, 1.0 - acc.total_mass)
        if eps > 1e-12:
            acc = acc.plus(AtomicMeasure.delta(0.0, eps))
        measures[u] = acc
    shift = WeightedShift(tree, weights)
    mu = {}
    eps = {}
    for u in order:
        kids = tree.children(u)
        if not kids:
            mu[u] = measures[u]
            eps[u] = measures[u].mass_at_zero
            continue
        mu[u], eps[u] = parent_from_children(
            shift, u, {v: mu[v] for v in kids}
        )
    return shift, MeasureSystem(mu=mu, eps=eps)


def stratified_atoms(rng, k, lo=0.1, hi=10.0, margin=0.4, mass_lo=0.3):
    """Well-separated random atoms: one per equal-width bin of [lo, hi].

    Separation keeps the moment map's conditioning inside what float64
    moments can support; clustered atoms are *inherently* unrecoverable to
    high accuracy from rounded moments, no matter the algorithm.
    """
    edges = np.linspace(lo, hi, k + 1)
    positions = [
        rng.uniform(a + margin * (b - a), b - margin * (b - a))
        for a, b in zip(edges[:-1], edges[1:])
    ]
    masses = rng.uniform(mass_lo, 1.0, size=k)
    return AtomicMeasure(tuple(zip(positions, masses.tolist())))


def random_complex_weights(rng, tree, lo=0.3, hi=1.5):
    out = {}
    for v in tree.non_root_vertices:
        r = rng.uniform(lo, hi)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        out[v] = complex(r * math.cos(phi), r * math.sin(phi))
    return WeightedShift(tree, out)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
