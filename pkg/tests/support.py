"""Seeded random instances for property and acceptance tests.

Values, costs, and probabilities are small rationals so that ties and
boundary cases (zero costs, equal indices) occur often.  Instances are
capped at 3 edges and 3 support points per box, with a budget on the joint
outcome space so exact enumeration stays fast.
"""

from __future__ import annotations

from fractions import Fraction

from pandora_matching.boxes import PandoraBox
from pandora_matching.distributions import DiscreteDistribution
from pandora_matching.instance import EdgeSpec, MatchingInstance
from pandora_matching.rng import SplitMix64

VERTEX_POOL = ("a", "b", "c", "d", "e", "f")


def rand_fraction(rng: SplitMix64, lo: int, hi: int, dens=(1, 2, 3)) -> Fraction:
    den = dens[rng.next_below(len(dens))]
    num = lo * den + rng.next_below((hi - lo) * den + 1)
    return Fraction(num, den)


def rand_probs(rng: SplitMix64, k: int) -> list[Fraction]:
    if k == 1:
        return [Fraction(1)]
    den = (4, 6, 8, 12)[rng.next_below(4)]
    while den < k:
        den *= 2
    cuts = set()
    while len(cuts) < k - 1:
        cuts.add(1 + rng.next_below(den - 1))
    points = [0] + sorted(cuts) + [den]
    return [Fraction(points[t + 1] - points[t], den) for t in range(k)]


def rand_dist(rng: SplitMix64, positive: bool = False) -> DiscreteDistribution:
    k = 1 + rng.next_below(3)
    values: set[Fraction] = set()
    while len(values) < k:
        if positive:
            values.add(rand_fraction(rng, 1, 6, dens=(1, 2)))
        else:
            values.add(rand_fraction(rng, -3, 5))
    return DiscreteDistribution(zip(sorted(values), rand_probs(rng, k)))


def rand_box(rng: SplitMix64, positive: bool = False) -> PandoraBox:
    dist = rand_dist(rng, positive)
    if positive:
        # keep the cost within the mean so the expectation condition holds
        den = 1 + rng.next_below(4)
        cost = dist.expectation() * Fraction(rng.next_below(den + 1), den)
    else:
        cost = rand_fraction(rng, 0, 3, dens=(1, 2))
    return PandoraBox(dist, cost)


def _rand_edge_ids(rng: SplitMix64, max_edges: int) -> list[tuple[str, str]]:
    n_edges = 1 + rng.next_below(max_edges)
    n_vertices = min(len(VERTEX_POOL), n_edges + 1 + rng.next_below(2))
    pool = VERTEX_POOL[:n_vertices]
    ids: set[tuple[str, str]] = set()
    guard = 0
    while len(ids) < n_edges and guard < 200:
        guard += 1
        u = pool[rng.next_below(len(pool))]
        v = pool[rng.next_below(len(pool))]
        if u != v:
            ids.add((min(u, v), max(u, v)))
    return sorted(ids)


def rand_instance(rng: SplitMix64, positive: bool = False, max_edges: int = 3,
                  budget: int = 800) -> MatchingInstance:
    while True:
        edges = [
            EdgeSpec.independent(i, j, rand_box(rng, positive), rand_box(rng, positive))
            for i, j in _rand_edge_ids(rng, max_edges)
        ]
        vertices = {v for e in edges for v in e.endpoints()}
        inst = MatchingInstance(vertices, edges)
        if inst.realization_count() <= budget:
            return inst


def rand_joint_edge(rng: SplitMix64, i: str, j: str) -> EdgeSpec:
    ki = 1 + rng.next_below(3)
    kj = 1 + rng.next_below(3)
    labels_i = [f"s{t}" for t in range(ki)]
    labels_j = [f"t{t}" for t in range(kj)]
    pairs = [(li, lj) for li in labels_i for lj in labels_j]
    probs = rand_probs(rng, len(pairs)) if len(pairs) > 1 else [Fraction(1)]
    rows = [
        (li, lj, rand_fraction(rng, -4, 6), p)
        for (li, lj), p in zip(pairs, probs)
    ]
    return EdgeSpec.joint(i, j, rand_fraction(rng, 0, 2, dens=(1, 2)),
                          rand_fraction(rng, 0, 2, dens=(1, 2)), rows)


def rand_joint_instance(rng: SplitMix64, max_edges: int = 3,
                        budget: int = 800) -> MatchingInstance:
    while True:
        edges = [rand_joint_edge(rng, i, j) for i, j in _rand_edge_ids(rng, max_edges)]
        vertices = {v for e in edges for v in e.endpoints()}
        inst = MatchingInstance(vertices, edges)
        if inst.realization_count() <= budget:
            return inst


def rand_tree(rng: SplitMix64, depth: int | None = None, max_branch: int = 3):
    """Random outcome tree with small rational costs and values."""
    from pandora_matching.nested import OutcomeNode

    if depth is None:
        depth = 1 + rng.next_below(3)

    def build(level: int, tag: str) -> OutcomeNode:
        if level == depth:
            return OutcomeNode.leaf(rand_fraction(rng, -3, 5))
        k = 1 + rng.next_below(max_branch)
        probs = rand_probs(rng, k)
        branches = [
            (f"{tag}{t}", probs[t], build(level + 1, f"{tag}{t}."))
            for t in range(k)
        ]
        return OutcomeNode.stage(rand_fraction(rng, 0, 2, dens=(1, 2)), branches)

    return build(0, "s")


def general_batch(count: int, base_seed: int = 1000) -> list[MatchingInstance]:
    return [rand_instance(SplitMix64(base_seed + k)) for k in range(count)]


def positive_batch(count: int, base_seed: int = 5000) -> list[MatchingInstance]:
    return [rand_instance(SplitMix64(base_seed + k), positive=True) for k in range(count)]


def joint_batch(count: int, base_seed: int = 9000) -> list[MatchingInstance]:
    return [rand_joint_instance(SplitMix64(base_seed + k)) for k in range(count)]
