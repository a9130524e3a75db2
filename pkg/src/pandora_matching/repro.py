"""Named benchmark instances with closed-form expected quantities.

Each generator returns the instance plus a table of (quantity, computed,
expected) rows where the expected side is a closed form evaluated at the
instance's rational parameters.  ``report`` runs every table and flags any
row where the two sides are not exactly equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algorithms import (
    OrientedDescendingRunner,
    RunTrace,
    expected_welfare_exact,
)
from .boxes import PandoraBox, weitzman_index
from .distributions import DiscreteDistribution, ZERO
from .instance import EdgeSpec, MatchingInstance, Orientation
from .oracle import optimal_welfare


@dataclass(frozen=True)
class NamedInstance:
    name: str
    params: dict
    instance: MatchingInstance
    table: tuple  # rows of (quantity, compute thunk, expected Fraction)


@dataclass(frozen=True)
class ReportRow:
    instance: str
    quantity: str
    computed: Fraction
    expected: Fraction

    @property
    def match(self) -> bool:
        return self.computed == self.expected


# ---------------------------------------------------------------------------
# Explicit strategies used by the tables
# ---------------------------------------------------------------------------

class _StrategyBase:
    """Hand-written inspection strategies; each run returns a RunTrace."""

    def __init__(self, inst: MatchingInstance):
        self.inst = inst

    def _outcome(self, realization, eid):
        return self.inst.edge(eid).outcomes[realization[eid]]


class InspectIFirstStrategy(_StrategyBase):
    """Open the i-side box; continue to j and match only on a positive value."""

    def run(self, realization, record_steps=False) -> RunTrace:
        (eid,) = self.inst.edge_ids
        e = self.inst.edge(eid)
        o = self._outcome(realization, eid)
        inspected = {(e.i, e.j)}
        costs = e.cost_ij
        if o.v_i > 0:
            inspected.add((e.j, e.i))
            costs += e.cost_ji
            return RunTrace(inspected, frozenset([eid]), costs, o.total, o.total - costs)
        return RunTrace(inspected, frozenset(), costs, ZERO, -costs)


class InspectJThenIStrategy(_StrategyBase):
    """Open j then i unconditionally; match iff the total is positive."""

    def run(self, realization, record_steps=False) -> RunTrace:
        (eid,) = self.inst.edge_ids
        e = self.inst.edge(eid)
        o = self._outcome(realization, eid)
        inspected = {(e.j, e.i), (e.i, e.j)}
        costs = e.cost_ij + e.cost_ji
        if o.total > 0:
            return RunTrace(inspected, frozenset([eid]), costs, o.total, o.total - costs)
        return RunTrace(inspected, frozenset(), costs, ZERO, -costs)


class InspectJOnlyStrategy(_StrategyBase):
    """Open the j-side box and stop."""

    def run(self, realization, record_steps=False) -> RunTrace:
        (eid,) = self.inst.edge_ids
        e = self.inst.edge(eid)
        inspected = {(e.j, e.i)}
        return RunTrace(inspected, frozenset(), e.cost_ji, ZERO, -e.cost_ji)


class InspectAllCentersStrategy(_StrategyBase):
    """Star policy: open every center box, complete and match the first hit."""

    def __init__(self, inst: MatchingInstance, center: str, high_value: Fraction):
        super().__init__(inst)
        self.center = center
        self.high = Fraction(high_value)

    def run(self, realization, record_steps=False) -> RunTrace:
        inspected = set()
        costs = ZERO
        hit = None
        for eid in self.inst.edge_ids:
            e = self.inst.edge(eid)
            leaf = e.j if e.i == self.center else e.i
            o = self._outcome(realization, eid)
            center_value = o.v_i if e.i == self.center else o.v_j
            inspected.add((self.center, leaf))
            costs += e.cost((self.center, leaf))
            if hit is None and center_value == self.high:
                hit = (eid, leaf, o.total)
        if hit is None:
            return RunTrace(inspected, frozenset(), costs, ZERO, -costs)
        eid, leaf, total = hit
        inspected.add((leaf, self.center))
        costs += self.inst.edge(eid).cost((leaf, self.center))
        return RunTrace(inspected, frozenset([eid]), costs, total, total - costs)


class IterateCopiesStrategy(_StrategyBase):
    """Star policy: probe copies leaf-side first, fall back to the outside edge.

    For each copy in edge order, open the leaf-side box; if it shows the
    zero signal, open the center side; on a joint success match the copy and
    stop.  Without a success, match the outside option.
    """

    def __init__(self, inst: MatchingInstance, center: str, outside: str,
                 success_value: Fraction):
        super().__init__(inst)
        self.center = center
        self.outside_edge = tuple(sorted((center, outside)))
        self.success = Fraction(success_value)

    def run(self, realization, record_steps=False) -> RunTrace:
        inspected = set()
        costs = ZERO
        for eid in self.inst.edge_ids:
            if eid == self.outside_edge:
                continue
            e = self.inst.edge(eid)
            leaf = e.j if e.i == self.center else e.i
            o = self._outcome(realization, eid)
            leaf_value = o.v_i if e.i == leaf else o.v_j
            center_value = o.v_i if e.i == self.center else o.v_j
            inspected.add((leaf, self.center))
            costs += e.cost((leaf, self.center))
            if leaf_value != 0:
                continue
            inspected.add((self.center, leaf))
            costs += e.cost((self.center, leaf))
            if center_value == self.success:
                return RunTrace(inspected, frozenset([eid]), costs, o.total,
                                o.total - costs)
        e = self.inst.edge(self.outside_edge)
        o = self._outcome(realization, self.outside_edge)
        for d in e.directions():
            inspected.add(d)
            costs += e.cost(d)
        return RunTrace(inspected, frozenset([self.outside_edge]), costs, o.total,
                        o.total - costs)


class OpenAllFirstStagesStrategy(_StrategyBase):
    """Deliberately exposed: open the first box of every oriented edge, stop."""

    def __init__(self, inst: MatchingInstance, orientation: Orientation):
        super().__init__(inst)
        self.orientation = orientation

    def run(self, realization, record_steps=False) -> RunTrace:
        inspected = set()
        costs = ZERO
        for eid in self.inst.edge_ids:
            d = self.orientation.direction_of(eid)
            inspected.add(d)
            costs += self.inst.edge(eid).cost(d)
        return RunTrace(inspected, frozenset(), costs, ZERO, -costs)


# ---------------------------------------------------------------------------
# Named instances
# ---------------------------------------------------------------------------

def _leaf_name(k: int, n: int) -> str:
    return f"w{k:0{len(str(n))}d}"


def bundled_star(n: int) -> NamedInstance:
    """Star around a hub: hub boxes pay 1/n for an n-or-nothing value, leaf
    boxes pay 1 for a sure 1."""
    if n < 1:
        raise ValueError("need n >= 1")
    hub = "u"
    center_dist = DiscreteDistribution([(Fraction(n), Fraction(1, n)),
                                        (Fraction(0), 1 - Fraction(1, n))]) \
        if n > 1 else DiscreteDistribution.point(Fraction(1))
    edges = []
    for k in range(1, n + 1):
        leaf = _leaf_name(k, n)
        edges.append(EdgeSpec.independent(
            hub, leaf,
            PandoraBox(center_dist, Fraction(1, n)),
            PandoraBox(DiscreteDistribution.point(Fraction(1)), Fraction(1)),
        ))
    inst = MatchingInstance([hub] + [_leaf_name(k, n) for k in range(1, n + 1)], edges)

    bundled_index_expected = 1 - Fraction(1, n)
    policy_expected = (1 - (1 - Fraction(1, n)) ** n) * n - 1
    policy = InspectAllCentersStrategy(inst, hub, Fraction(n))
    table = (
        ("bundled_index", lambda: weitzman_index(inst.edges[0].bundled_box()),
         bundled_index_expected),
        ("inspect_all_centers_welfare",
         lambda: expected_welfare_exact(inst, policy), policy_expected),
    )
    return NamedInstance("bundled-star", {"n": n}, inst, table)


def indistinguishable_edge() -> NamedInstance:
    """Single edge whose endpoints share cost and index but not distribution."""
    box_ij = PandoraBox(DiscreteDistribution([(Fraction(9), Fraction(1, 8)),
                                              (Fraction(-3), Fraction(7, 8))]), 1)
    box_ji = PandoraBox(DiscreteDistribution.point(Fraction(2)), 1)
    inst = MatchingInstance(["i", "j"], [EdgeSpec.independent("i", "j", box_ij, box_ji)])
    table = (
        ("sigma_ij", lambda: weitzman_index(box_ij), Fraction(1)),
        ("sigma_ji", lambda: weitzman_index(box_ji), Fraction(1)),
        ("opt_free", lambda: optimal_welfare(inst).value, Fraction(1, 4)),
        ("inspect_i_first_welfare",
         lambda: expected_welfare_exact(inst, InspectIFirstStrategy(inst)), Fraction(1, 4)),
        ("inspect_j_then_i_welfare",
         lambda: expected_welfare_exact(inst, InspectJThenIStrategy(inst)), Fraction(-5, 8)),
        ("inspect_j_only_welfare",
         lambda: expected_welfare_exact(inst, InspectJOnlyStrategy(inst)), Fraction(-1)),
    )
    return NamedInstance("indistinguishable-edge", {}, inst, table)


def _no_dessert_boxes(alpha: Fraction) -> tuple[PandoraBox, PandoraBox]:
    a = Fraction(alpha)
    if not 0 < a < 1:
        raise ValueError("alpha must be strictly between 0 and 1")
    box_ij = PandoraBox(
        DiscreteDistribution([(a ** -3, a), (Fraction(0), 1 - a)]), 1)
    box_ji = PandoraBox(
        DiscreteDistribution([(Fraction(0), a * a), (1 / a - a ** -3, 1 - a * a)]),
        1 - a)
    return box_ij, box_ji


def no_dessert_edge(alpha) -> NamedInstance:
    """Single edge where the better inspection order flips with the context."""
    a = Fraction(alpha)
    box_ij, box_ji = _no_dessert_boxes(a)
    inst = MatchingInstance(["i", "j"], [EdgeSpec.independent("i", "j", box_ij, box_ji)])
    o_ij = Orientation([("i", "j")])
    o_ji = o_ij.reverse()

    def desc(o: Orientation) -> Fraction:
        return expected_welfare_exact(inst, OrientedDescendingRunner(inst, o))

    table = (
        ("sigma1_ij", lambda: OrientedDescendingRunner(inst, o_ij).baskets[("i", "j")].sigma1,
         1 / a - 1),
        ("sigma1_ji", lambda: OrientedDescendingRunner(inst, o_ji).baskets[("i", "j")].sigma1,
         a ** -2 - 1 / a),
        ("welfare_desc_ij", lambda: desc(o_ij), 1 - a),
        ("welfare_desc_ji", lambda: desc(o_ji), a - a * a),
        ("opt_oriented_ij",
         lambda: optimal_welfare(inst, "oriented", o_ij).value, 1 - a),
        ("opt_oriented_ji",
         lambda: optimal_welfare(inst, "oriented", o_ji).value, a - a * a),
        ("expected_positive_capped_ij",
         lambda: OrientedDescendingRunner(inst, o_ij).baskets[("i", "j")]
         .kappa1_distribution().expected_positive_part(), 1 - a),
        ("expected_positive_capped_ji",
         lambda: OrientedDescendingRunner(inst, o_ji).baskets[("i", "j")]
         .kappa1_distribution().expected_positive_part(), a - a * a),
    )
    return NamedInstance("no-dessert-edge", {"alpha": a}, inst, table)


def no_dessert_star(alpha, m: int = 2) -> NamedInstance:
    """The edge above, copied m times around a hub with a sure outside option."""
    a = Fraction(alpha)
    if m < 0:
        raise ValueError("need m >= 0")
    box_ij, box_ji = _no_dessert_boxes(a)
    edges = []
    for t in range(1, m + 1):
        edges.append(EdgeSpec.independent("i", f"j{t:0{len(str(max(m, 1)))}d}",
                                          box_ij, box_ji))
    edges.append(EdgeSpec.independent(
        "i", "k",
        PandoraBox(DiscreteDistribution.point(1 / a), 0),
        PandoraBox(DiscreteDistribution.point(Fraction(0)), 0),
    ))
    vertices = ["i", "k"] + [e.j for e in edges if e.j != "k"]
    inst = MatchingInstance(vertices, edges)

    gain = a - 2 * a * a
    q = (1 - a ** 3) ** m
    iterate_expected = 1 / a + gain * sum(((1 - a ** 3) ** t for t in range(m)), ZERO)
    all_ji_expected = (1 / a) * q + max(a ** -2 - 1 / a, 1 / a) * (1 - q)

    def single_copy_gain() -> Fraction:
        star1 = no_dessert_star(a, 1).instance
        pol = IterateCopiesStrategy(star1, "i", "k", a ** -3)
        return expected_welfare_exact(star1, pol) - 1 / a

    def iterate_welfare() -> Fraction:
        pol = IterateCopiesStrategy(inst, "i", "k", a ** -3)
        return expected_welfare_exact(inst, pol)

    def desc_all(reverse_copies: bool) -> Fraction:
        pairs = []
        for e in inst.edges:
            if e.id == ("i", "k") or not reverse_copies:
                pairs.append((e.i, e.j))
            else:
                pairs.append((e.j, e.i))
        o = Orientation(pairs)
        return expected_welfare_exact(inst, OrientedDescendingRunner(inst, o))

    table = (
        ("per_copy_gain", single_copy_gain, gain),
        ("iterate_copies_welfare", iterate_welfare, iterate_expected),
        ("desc_all_ji_welfare", lambda: desc_all(True), all_ji_expected),
        ("desc_all_ij_welfare", lambda: desc_all(False), 1 / a),
    )
    return NamedInstance("no-dessert-star", {"alpha": a, "m": m}, inst, table)


ALL_NAMES = ("bundled-star", "indistinguishable-edge", "no-dessert-edge", "no-dessert-star")


def build(name: str, alpha=Fraction(1, 4), n: int = 4, m: int = 2) -> NamedInstance:
    if name == "bundled-star":
        return bundled_star(n)
    if name == "indistinguishable-edge":
        return indistinguishable_edge()
    if name == "no-dessert-edge":
        return no_dessert_edge(alpha)
    if name == "no-dessert-star":
        return no_dessert_star(alpha, m)
    raise ValueError(f"unknown instance {name!r}; choose from {ALL_NAMES}")


def report(only: str | None = None, alpha=Fraction(1, 4), n: int = 4,
           m: int = 2) -> list[ReportRow]:
    """Evaluate every table row of the selected named instances."""
    names = [only] if only else list(ALL_NAMES)
    rows = []
    for name in names:
        named = build(name, alpha=alpha, n=n, m=m)
        for quantity, compute, expected in named.table:
            rows.append(ReportRow(named.name, quantity, compute(), Fraction(expected)))
    return rows
