"""Matching instances: graphs with a pair of Pandora boxes per edge.

Edges come in two forms.  Independent edges carry one box per endpoint and
the edge's total value is the sum of the two draws.  Joint edges carry a
joint law over (signal_i, signal_j, total) pairs, which covers arbitrary
correlation of the two endpoint observations within an edge.  Independent
edges are compiled to the joint outcome table, so downstream code has one
representation; the endpoint values are kept alongside for the algorithms
that need them separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .boxes import PandoraBox
from .distributions import DiscreteDistribution, ZERO
from .nested import AnnotatedBasket, OutcomeNode, PathInfo, annotate
from .rationals import format_rational, parse_rational

EdgeId = tuple[str, str]
DirectedPair = tuple[str, str]


class InstanceError(ValueError):
    """Raised on malformed instances, edges, or orientations."""


@dataclass(frozen=True)
class JointOutcome:
    """One atom of an edge's joint law.

    v_i and v_j are the separate endpoint values when the edge was given in
    independent form, else None.
    """

    label_i: str
    label_j: str
    total: Fraction
    prob: Fraction
    v_i: Fraction | None = None
    v_j: Fraction | None = None


class EdgeSpec:
    """An undirected edge with its two inspection costs and outcome law.

    Endpoints are stored sorted (i < j).  Direction (u, v) means endpoint u
    is inspected first; cost(u, v) is the cost of that first inspection.
    """

    def __init__(self, i: str, j: str, cost_ij, cost_ji,
                 outcomes: Iterable[JointOutcome],
                 box_ij: PandoraBox | None = None,
                 box_ji: PandoraBox | None = None):
        if i == j:
            raise InstanceError(f"self-loop at vertex {i!r}")
        if not i < j:
            raise InstanceError("endpoints must be passed in sorted order")
        self.i = i
        self.j = j
        self.cost_ij = Fraction(cost_ij)
        self.cost_ji = Fraction(cost_ji)
        self.box_ij = box_ij
        self.box_ji = box_ji
        self.outcomes = tuple(sorted(outcomes, key=lambda o: (o.label_i, o.label_j)))
        self._check()

    @property
    def id(self) -> EdgeId:
        return (self.i, self.j)

    @property
    def is_independent(self) -> bool:
        return self.box_ij is not None

    def _check(self):
        if self.cost_ij < 0 or self.cost_ji < 0:
            raise InstanceError(f"edge {self.id}: costs must be >= 0")
        if not self.outcomes:
            raise InstanceError(f"edge {self.id}: empty outcome table")
        total = ZERO
        seen = set()
        for o in self.outcomes:
            if o.prob <= 0:
                raise InstanceError(f"edge {self.id}: outcome probability {o.prob} not positive")
            key = (o.label_i, o.label_j)
            if key in seen:
                raise InstanceError(f"edge {self.id}: duplicate signal pair {key}")
            seen.add(key)
            total += o.prob
        if total != 1:
            raise InstanceError(f"edge {self.id}: outcome probabilities sum to {total}")

    @classmethod
    def independent(cls, i: str, j: str, box_ij: PandoraBox, box_ji: PandoraBox) -> "EdgeSpec":
        """Build the joint table as the product of the two endpoint laws."""
        if not i < j:
            i, j = j, i
            box_ij, box_ji = box_ji, box_ij
        outcomes = []
        for vi, pi in box_ij.dist.atoms:
            for vj, pj in box_ji.dist.atoms:
                outcomes.append(JointOutcome(
                    format_rational(vi), format_rational(vj),
                    vi + vj, pi * pj, vi, vj,
                ))
        return cls(i, j, box_ij.cost, box_ji.cost, outcomes, box_ij, box_ji)

    @classmethod
    def joint(cls, i: str, j: str, cost_ij, cost_ji,
              rows: Iterable[tuple[str, str, Fraction, Fraction]]) -> "EdgeSpec":
        if not i < j:
            i, j = j, i
            cost_ij, cost_ji = cost_ji, cost_ij
            rows = [(lj, li, t, p) for li, lj, t, p in rows]
        outcomes = [JointOutcome(str(li), str(lj), Fraction(t), Fraction(p)) for li, lj, t, p in rows]
        return cls(i, j, cost_ij, cost_ji, outcomes)

    def endpoints(self) -> tuple[str, str]:
        return self.i, self.j

    def directions(self) -> tuple[DirectedPair, DirectedPair]:
        return (self.i, self.j), (self.j, self.i)

    def cost(self, direction: DirectedPair) -> Fraction:
        if direction == (self.i, self.j):
            return self.cost_ij
        if direction == (self.j, self.i):
            return self.cost_ji
        raise InstanceError(f"{direction} is not a direction of edge {self.id}")

    def box(self, direction: DirectedPair) -> PandoraBox:
        if not self.is_independent:
            raise InstanceError(
                f"edge {self.id} is in joint form; endpoint boxes are undefined"
            )
        if direction == (self.i, self.j):
            return self.box_ij
        if direction == (self.j, self.i):
            return self.box_ji
        raise InstanceError(f"{direction} is not a direction of edge {self.id}")

    def first_label(self, outcome: JointOutcome, direction: DirectedPair) -> str:
        return outcome.label_i if direction == (self.i, self.j) else outcome.label_j

    def second_label(self, outcome: JointOutcome, direction: DirectedPair) -> str:
        return outcome.label_j if direction == (self.i, self.j) else outcome.label_i

    def bundled_box(self) -> PandoraBox:
        """Both inspections merged into one box over the edge total."""
        dist = DiscreteDistribution((o.total, o.prob) for o in self.outcomes)
        return PandoraBox(dist, self.cost_ij + self.cost_ji)

    def total_dist(self) -> DiscreteDistribution:
        return DiscreteDistribution((o.total, o.prob) for o in self.outcomes)

    def to_json_obj(self) -> dict:
        if self.is_independent:
            return {"i": self.i, "j": self.j,
                    "box_ij": self.box_ij.to_json_obj(),
                    "box_ji": self.box_ji.to_json_obj()}
        return {"i": self.i, "j": self.j,
                "c_ij": format_rational(self.cost_ij),
                "c_ji": format_rational(self.cost_ji),
                "joint": [{"si": o.label_i, "sj": o.label_j,
                           "total": format_rational(o.total),
                           "p": format_rational(o.prob)} for o in self.outcomes]}

    @classmethod
    def from_json_obj(cls, obj) -> "EdgeSpec":
        i, j = str(obj["i"]), str(obj["j"])
        if "joint" in obj:
            rows = [(r["si"], r["sj"], parse_rational(r["total"]), parse_rational(r["p"]))
                    for r in obj["joint"]]
            return cls.joint(i, j, parse_rational(obj["c_ij"]), parse_rational(obj["c_ji"]), rows)
        return cls.independent(i, j,
                               PandoraBox.from_json_obj(obj["box_ij"]),
                               PandoraBox.from_json_obj(obj["box_ji"]))


def edge_to_basket(edge: EdgeSpec, direction: DirectedPair) -> OutcomeNode:
    """Compile an oriented edge into a two-stage outcome tree.

    Stage 1 costs cost(direction) and reveals the first endpoint's signal;
    stage 2 costs the reverse cost and reveals the edge total.
    """
    edge.cost(direction)  # direction check
    reverse_cost = edge.cost((direction[1], direction[0]))
    groups: dict[str, list[JointOutcome]] = {}
    for o in edge.outcomes:
        groups.setdefault(edge.first_label(o, direction), []).append(o)
    branches = []
    for label in sorted(groups):
        rows = groups[label]
        marginal = sum((o.prob for o in rows), ZERO)
        leaves = [
            (edge.second_label(o, direction), o.prob / marginal, OutcomeNode.leaf(o.total))
            for o in sorted(rows, key=lambda o: edge.second_label(o, direction))
        ]
        branches.append((label, marginal, OutcomeNode.stage(reverse_cost, leaves)))
    return OutcomeNode.stage(edge.cost(direction), branches)


def oriented_basket(edge: EdgeSpec, direction: DirectedPair) -> tuple[AnnotatedBasket, dict[int, PathInfo]]:
    """Annotated basket for a direction plus outcome-index -> path lookup."""
    basket = annotate(edge_to_basket(edge, direction))
    by_labels = {(p.labels[0], p.labels[1]): p for p in basket.paths}
    lookup = {
        k: by_labels[(edge.first_label(o, direction), edge.second_label(o, direction))]
        for k, o in enumerate(edge.outcomes)
    }
    return basket, lookup


def bundled_basket(edge: EdgeSpec) -> tuple[AnnotatedBasket, dict[int, PathInfo]]:
    """Single-stage basket over the edge total (both costs paid at once)."""
    box = edge.bundled_box()
    branches = [(format_rational(v), p, OutcomeNode.leaf(v)) for v, p in box.dist.atoms]
    basket = annotate(OutcomeNode.stage(box.cost, branches))
    by_label = {p.labels[0]: p for p in basket.paths}
    lookup = {k: by_label[format_rational(o.total)] for k, o in enumerate(edge.outcomes)}
    return basket, lookup


class MatchingInstance:
    """A graph with an EdgeSpec per edge.  Not required to be bipartite."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[EdgeSpec]):
        self.vertices = tuple(sorted(set(str(v) for v in vertices)))
        self.edges = tuple(sorted(edges, key=lambda e: e.id))
        vset = set(self.vertices)
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise InstanceError(f"duplicate edge {e.id}")
            seen.add(e.id)
            if e.i not in vset or e.j not in vset:
                raise InstanceError(f"edge {e.id} uses a vertex not in the vertex set")
        self._by_id = {e.id: e for e in self.edges}

    def edge(self, edge_id: EdgeId) -> EdgeSpec:
        return self._by_id[edge_id]

    @property
    def edge_ids(self) -> list[EdgeId]:
        return [e.id for e in self.edges]

    def all_independent(self) -> bool:
        return all(e.is_independent for e in self.edges)

    def realization_count(self) -> int:
        n = 1
        for e in self.edges:
            n *= len(e.outcomes)
        return n

    def to_json_obj(self) -> dict:
        return {"vertices": list(self.vertices),
                "edges": [e.to_json_obj() for e in self.edges]}

    @classmethod
    def from_json_obj(cls, obj) -> "MatchingInstance":
        edges = [EdgeSpec.from_json_obj(e) for e in obj["edges"]]
        vertices = set(obj.get("vertices", []))
        for e in edges:
            vertices.update(e.endpoints())
        return cls(vertices, edges)


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    positive_values: bool

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(inst: MatchingInstance) -> ValidationReport:
    """Re-check instance invariants and classify the value regime.

    positive_values is True iff every edge is in independent form with
    nonnegative support and expectation at least the inspection cost on
    both endpoints (so every index and capped value is nonnegative).
    """
    errors: list[str] = []
    positive = True
    for e in inst.edges:
        try:
            e._check()
        except InstanceError as exc:
            errors.append(str(exc))
            continue
        if not e.is_independent:
            positive = False
            continue
        for direction in e.directions():
            box = e.box(direction)
            if box.dist.min_value() < 0 or box.dist.expectation() < box.cost:
                positive = False
    return ValidationReport(tuple(errors), positive)


class Orientation:
    """One inspected-first endpoint per edge."""

    def __init__(self, pairs: Iterable[DirectedPair]):
        self.pairs = frozenset((str(u), str(v)) for u, v in pairs)
        by_edge = {}
        for u, v in self.pairs:
            eid = (u, v) if u < v else (v, u)
            if eid in by_edge:
                raise InstanceError(f"edge {eid} oriented twice")
            by_edge[eid] = (u, v)
        self._by_edge = by_edge

    def direction_of(self, edge_id: EdgeId) -> DirectedPair:
        try:
            return self._by_edge[edge_id]
        except KeyError:
            raise InstanceError(f"orientation does not cover edge {edge_id}") from None

    def covers(self, inst: MatchingInstance) -> bool:
        return set(self._by_edge) == set(inst.edge_ids)

    def require_covers(self, inst: MatchingInstance) -> None:
        if not self.covers(inst):
            raise InstanceError("orientation does not match the instance's edge set")

    def reverse(self) -> "Orientation":
        return Orientation((v, u) for u, v in self.pairs)

    def sorted_pairs(self) -> list[DirectedPair]:
        return sorted(self.pairs)

    def __eq__(self, other):
        if not isinstance(other, Orientation):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        return f"Orientation({self.sorted_pairs()})"

    def to_json_obj(self) -> list:
        return [list(p) for p in self.sorted_pairs()]

    @classmethod
    def from_json_obj(cls, obj) -> "Orientation":
        return cls((str(p[0]), str(p[1])) for p in obj)


def reverse(o: Orientation) -> Orientation:
    return o.reverse()


def canonical_orientation(inst: MatchingInstance) -> Orientation:
    """Deterministic default: every edge oriented low vertex id first."""
    return Orientation(inst.edge_ids)


def all_orientations(inst: MatchingInstance):
    """Iterate the 2^|E| orientations in a fixed order."""
    import itertools

    ids = inst.edge_ids
    for bits in itertools.product((0, 1), repeat=len(ids)):
        yield Orientation(
            (i, j) if b == 0 else (j, i) for (i, j), b in zip(ids, bits)
        )
