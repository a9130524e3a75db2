"""Matching policies: run on one realization or evaluate exactly.

Every policy is a runner object with ``run(realization) -> RunTrace``; a
realization assigns each edge one row of its joint outcome table.  Exact
expectations enumerate the product outcome space; Monte Carlo draws seeded
samples from the splitmix64 stream.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .boxes import weitzman_index
from .distributions import ZERO
from .instance import (
    EdgeId,
    MatchingInstance,
    Orientation,
    all_orientations,
    bundled_basket,
    canonical_orientation,
    oriented_basket,
)
from .nested import descending_run
from .rng import SplitMix64

DEFAULT_ENUM_BOUND = 2_000_000
ENUM_BOUND_ENV = "PANDORA_ENUM_BOUND"

Realization = dict  # edge id -> outcome index


class EnumerationBoundError(RuntimeError):
    """Exact evaluation would exceed the enumeration bound."""

    def __init__(self, size: int, bound: int):
        super().__init__(
            f"exact enumeration needs {size} weighted outcomes, above the bound "
            f"of {bound}; raise the bound (--enum-bound / {ENUM_BOUND_ENV}) or "
            f"use Monte Carlo mode"
        )
        self.size = size
        self.bound = bound


class UnsupportedModelError(ValueError):
    """Policy applied to an instance form it is not defined for."""


def resolve_enum_bound(explicit=None) -> int:
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(ENUM_BOUND_ENV)
    return int(env) if env else DEFAULT_ENUM_BOUND


def enumerate_realizations(inst: MatchingInstance) -> Iterator[tuple[Realization, Fraction]]:
    ids = inst.edge_ids
    tables = [inst.edge(eid).outcomes for eid in ids]
    for combo in itertools.product(*(range(len(t)) for t in tables)):
        prob = Fraction(1)
        for tab, k in zip(tables, combo):
            prob *= tab[k].prob
        yield dict(zip(ids, combo)), prob


def sample_realization(inst: MatchingInstance, rng: SplitMix64) -> Realization:
    out = {}
    for e in inst.edges:
        out[e.id] = rng.choose_weighted(o.prob for o in e.outcomes)
    return out


@dataclass
class RunTrace:
    """Everything one policy run did on one realization."""

    inspected: set            # directed pairs with the box opened
    matched: frozenset        # edge ids in the matching
    costs_paid: Fraction
    matched_value: Fraction
    welfare: Fraction
    steps: list = field(default_factory=list)
    nested_traces: dict = field(default_factory=dict)   # basket id -> NestedTrace


def assert_valid_trace(trace: RunTrace, inst: MatchingInstance, realization: Realization) -> None:
    """Matching legality, obligatory inspection, and welfare accounting."""
    used = set()
    value = ZERO
    for eid in trace.matched:
        e = inst.edge(eid)
        if e.i in used or e.j in used:
            raise AssertionError(f"matched edges share vertex at {eid}")
        used.update(eid)
        for d in e.directions():
            if d not in trace.inspected:
                raise AssertionError(f"matched edge {eid} not fully inspected")
        value += e.outcomes[realization[eid]].total
    costs = ZERO
    for (u, v) in trace.inspected:
        eid = (u, v) if u < v else (v, u)
        costs += inst.edge(eid).cost((u, v))
    if costs != trace.costs_paid or value != trace.matched_value:
        raise AssertionError("trace cost or value accounting is off")
    if trace.welfare != value - costs:
        raise AssertionError("welfare != matched value - costs")


def _edge_conflicts(inst: MatchingInstance):
    by_vertex: dict[str, list[EdgeId]] = {}
    for e in inst.edges:
        by_vertex.setdefault(e.i, []).append(e.id)
        by_vertex.setdefault(e.j, []).append(e.id)

    def conflicts(eid: EdgeId):
        out = set(by_vertex[eid[0]]) | set(by_vertex[eid[1]])
        out.discard(eid)
        return out

    return conflicts


class OrientedDescendingRunner:
    """Descending procedure over the oriented two-stage edge baskets."""

    def __init__(self, inst: MatchingInstance, orientation: Orientation):
        orientation.require_covers(inst)
        self.inst = inst
        self.orientation = orientation
        self.baskets = {}
        self.path_lookup = {}
        for e in inst.edges:
            d = orientation.direction_of(e.id)
            basket, lookup = oriented_basket(e, d)
            self.baskets[e.id] = basket
            self.path_lookup[e.id] = lookup
        self._conflicts = _edge_conflicts(inst)

    def paths_for(self, realization: Realization) -> dict:
        return {eid: self.path_lookup[eid][k] for eid, k in realization.items()}

    def kappa_weights(self, realization: Realization) -> dict:
        """Realized terminal capped value per edge (the greedy weights)."""
        return {eid: p.kappa1 for eid, p in self.paths_for(realization).items()}

    def run(self, realization: Realization, record_steps: bool = False) -> RunTrace:
        paths = self.paths_for(realization)
        res = descending_run(self.baskets, paths, self._conflicts, record_steps)
        inspected = set()
        for eid, tr in res.traces.items():
            d = self.orientation.direction_of(eid)
            if tr.stages_opened >= 1:
                inspected.add(d)
            if tr.stages_opened >= 2:
                inspected.add((d[1], d[0]))
        return RunTrace(inspected, frozenset(res.claimed_ids), res.total_costs,
                        res.claimed_value, res.welfare, res.steps, res.traces)


class BundledDescendingRunner:
    """Descending procedure after merging each edge's boxes into one."""

    def __init__(self, inst: MatchingInstance):
        self.inst = inst
        self.baskets = {}
        self.path_lookup = {}
        for e in inst.edges:
            basket, lookup = bundled_basket(e)
            self.baskets[e.id] = basket
            self.path_lookup[e.id] = lookup
        self._conflicts = _edge_conflicts(inst)

    def paths_for(self, realization: Realization) -> dict:
        return {eid: self.path_lookup[eid][k] for eid, k in realization.items()}

    def run(self, realization: Realization, record_steps: bool = False) -> RunTrace:
        paths = self.paths_for(realization)
        res = descending_run(self.baskets, paths, self._conflicts, record_steps)
        inspected = set()
        for eid, tr in res.traces.items():
            if tr.stages_opened >= 1:
                inspected.add(eid)
                inspected.add((eid[1], eid[0]))
        return RunTrace(inspected, frozenset(res.claimed_ids), res.total_costs,
                        res.claimed_value, res.welfare, res.steps, res.traces)


class VertexBasedDescendingRunner:
    """Descending over single-box indices and revealed endpoint values.

    Considers the highest index among unopened boxes of feasible edges and
    the highest revealed value among opened ones; opens while the index is
    strictly larger, otherwise matches the edge of the best revealed value
    (opening its partner box if needed).  Stops once the best candidate is
    not positive.  Only defined when endpoint boxes are independent.
    """

    def __init__(self, inst: MatchingInstance):
        if not inst.all_independent():
            raise UnsupportedModelError(
                "vertex-based descending needs independent endpoint boxes"
            )
        self.inst = inst
        self.sigma = {}
        self.cost = {}
        for e in inst.edges:
            for d in e.directions():
                box = e.box(d)
                self.sigma[d] = weitzman_index(box)
                self.cost[d] = box.cost

    def endpoint_values(self, realization: Realization) -> dict:
        vals = {}
        for e in self.inst.edges:
            o = e.outcomes[realization[e.id]]
            vals[(e.i, e.j)] = o.v_i
            vals[(e.j, e.i)] = o.v_j
        return vals

    def run(self, realization: Realization, record_steps: bool = False) -> RunTrace:
        vals = self.endpoint_values(realization)
        opened: dict = {}
        matched: set = set()
        blocked: set = set()
        costs = ZERO
        value = ZERO
        steps: list = []
        time = 0
        while True:
            best_sigma = best_sigma_pair = None
            best_val = best_val_pair = None
            for e in self.inst.edges:
                if e.id in matched or e.i in blocked or e.j in blocked:
                    continue
                for d in e.directions():
                    if d in opened:
                        v = opened[d]
                        if best_val is None or v > best_val or (v == best_val and d < best_val_pair):
                            best_val, best_val_pair = v, d
                    else:
                        s = self.sigma[d]
                        if best_sigma is None or s > best_sigma or (s == best_sigma and d < best_sigma_pair):
                            best_sigma, best_sigma_pair = s, d
            candidates = [x for x in (best_sigma, best_val) if x is not None]
            if not candidates or max(candidates) <= 0:
                break
            if best_sigma is not None and (best_val is None or best_sigma > best_val):
                pair = best_sigma_pair
                costs += self.cost[pair]
                opened[pair] = vals[pair]
                if record_steps:
                    steps.append((time, "open", pair, best_sigma))
            else:
                pair = best_val_pair
                partner = (pair[1], pair[0])
                if partner not in opened:
                    costs += self.cost[partner]
                    opened[partner] = vals[partner]
                eid = pair if pair[0] < pair[1] else partner
                matched.add(eid)
                blocked.update(eid)
                value += vals[pair] + vals[partner]
                if record_steps:
                    steps.append((time, "match", eid, best_val))
            time += 1
        return RunTrace(set(opened), frozenset(matched), costs, value, value - costs, steps)


class DoNothingRunner:
    """Performs no inspections; welfare 0 on every realization."""

    def __init__(self, inst: MatchingInstance):
        self.inst = inst

    def run(self, realization: Realization, record_steps: bool = False) -> RunTrace:
        return RunTrace(set(), frozenset(), ZERO, ZERO, ZERO)


def enumerate_runs(inst: MatchingInstance, runner, enum_bound=None,
                   record_steps: bool = False):
    """Yield (realization, prob, trace) over the whole outcome space."""
    bound = resolve_enum_bound(enum_bound)
    size = inst.realization_count()
    if size > bound:
        raise EnumerationBoundError(size, bound)
    for realization, prob in enumerate_realizations(inst):
        yield realization, prob, runner.run(realization, record_steps=record_steps)


def expected_welfare_exact(inst: MatchingInstance, runner, enum_bound=None) -> Fraction:
    total = ZERO
    for _, prob, trace in enumerate_runs(inst, runner, enum_bound):
        total += prob * trace.welfare
    return total


def expected_welfare_montecarlo(inst: MatchingInstance, runner, seed: int,
                                trials: int) -> tuple[float, float]:
    """(mean, standard error) of the welfare over seeded sampled runs."""
    rng = SplitMix64(seed)
    acc = ZERO
    acc_sq = ZERO
    for _ in range(trials):
        w = runner.run(sample_realization(inst, rng)).welfare
        acc += w
        acc_sq += w * w
    mean = acc / trials
    var = acc_sq / trials - mean * mean
    stderr = math.sqrt(max(0.0, float(var)) / trials)
    return float(mean), stderr


def expected_welfare(inst: MatchingInstance, runner, mode: str = "exact",
                     seed: int | None = None, trials: int = 100_000,
                     enum_bound=None):
    """Exact rational expectation, or a seeded (mean, stderr) estimate."""
    if mode == "exact":
        return expected_welfare_exact(inst, runner, enum_bound)
    if mode == "montecarlo":
        if seed is None:
            raise ValueError("montecarlo mode requires a seed")
        return expected_welfare_montecarlo(inst, runner, seed, trials)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Policies built on top of the oriented descending procedure
# ---------------------------------------------------------------------------

def oriented_descending(inst: MatchingInstance, orientation: Orientation,
                        realization: Realization) -> RunTrace:
    return OrientedDescendingRunner(inst, orientation).run(realization)

def bundled_descending(inst: MatchingInstance, realization: Realization) -> RunTrace:
    return BundledDescendingRunner(inst).run(realization)

def vertex_based_descending(inst: MatchingInstance, realization: Realization) -> RunTrace:
    return VertexBasedDescendingRunner(inst).run(realization)


def randomized_matching(inst: MatchingInstance, mode: str = "exact",
                        seed: int | None = None, enum_bound=None):
    """Uniform-random orientation, then oriented descending.

    Exact mode averages the exact welfare over all 2^|E| orientations.
    Seeded mode draws one orientation from the splitmix64 stream and returns
    (orientation, exact welfare of that orientation).
    """
    if mode == "exact":
        bound = resolve_enum_bound(enum_bound)
        size = (2 ** len(inst.edges)) * inst.realization_count()
        if size > bound:
            raise EnumerationBoundError(size, bound)
        total = ZERO
        count = 0
        for o in all_orientations(inst):
            total += expected_welfare_exact(inst, OrientedDescendingRunner(inst, o), enum_bound)
            count += 1
        return total / count
    if mode == "seeded":
        if seed is None:
            raise ValueError("seeded mode requires a seed")
        rng = SplitMix64(seed)
        pairs = []
        for (i, j) in inst.edge_ids:
            pairs.append((i, j) if rng.next_bit() == 0 else (j, i))
        o = Orientation(pairs)
        return o, expected_welfare_exact(inst, OrientedDescendingRunner(inst, o), enum_bound)
    raise ValueError(f"unknown mode {mode!r}")


def best_of_two(inst: MatchingInstance, enum_bound=None) -> tuple[Orientation, Fraction]:
    """Compare the canonical orientation against its reverse, keep the better.

    Ties go to the canonical orientation.
    """
    o = canonical_orientation(inst)
    o_rev = o.reverse()
    w = expected_welfare_exact(inst, OrientedDescendingRunner(inst, o), enum_bound)
    w_rev = expected_welfare_exact(inst, OrientedDescendingRunner(inst, o_rev), enum_bound)
    if w_rev > w:
        return o_rev, w_rev
    return o, w


def edge_based_orientation(inst: MatchingInstance, rule: str = "higher_sigma1") -> Orientation:
    """Orient each edge by a deterministic per-edge rule.

    higher_sigma1 picks the direction whose two-stage basket has the larger
    initial index, ties to the canonical direction.
    """
    if rule != "higher_sigma1":
        raise ValueError(f"unknown rule {rule!r}")
    pairs = []
    for e in inst.edges:
        d1, d2 = e.directions()
        s1 = oriented_basket(e, d1)[0].sigma1
        s2 = oriented_basket(e, d2)[0].sigma1
        pairs.append(d1 if s1 >= s2 else d2)
    return Orientation(pairs)


POLICY_NAMES = ("oriented-desc", "randomized", "best-of-two", "bundled",
                "vertex-based", "edge-based")


def make_runner(inst: MatchingInstance, policy: str, orientation: Orientation | None = None):
    """Runner factory for the per-realization policies."""
    if policy == "oriented-desc":
        if orientation is None:
            orientation = canonical_orientation(inst)
        return OrientedDescendingRunner(inst, orientation)
    if policy == "bundled":
        return BundledDescendingRunner(inst)
    if policy == "vertex-based":
        return VertexBasedDescendingRunner(inst)
    if policy == "edge-based":
        return OrientedDescendingRunner(inst, edge_based_orientation(inst))
    raise ValueError(f"{policy!r} is not a per-realization policy")
