"""Multi-stage Pandora baskets (nested boxes).

A basket is an outcome tree: paying a node's stage cost reveals which branch
the world takes, and the final stage reveals the value.  Annotation runs a
backward induction that attaches to every internal node the conditional law
of the next stage's capped value and the stage index solving the Weitzman
equation against that law.  Along a realized path,

  sigma^(1..d), v   stage indices and the value,
  gamma^(l)         running minimum of the indices opened so far,
  kappa^(l)         minimum of everything still to come (indices and value),

and kappa^(1) = min(all indices, value) is the basket's terminal capped
value.  A run is exposed at stage l if it stops there although
kappa^(l+1) > gamma^(l); non-exposed runs attain the amortization identity
"expected welfare contribution equals expected claimed kappa^(1)".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .boxes import PandoraBox, weitzman_index
from .distributions import DiscreteDistribution, ZERO
from .rationals import format_rational, parse_rational, rational_json


class BasketError(ValueError):
    """Raised on malformed outcome trees or inconsistent traces."""


# ---------------------------------------------------------------------------
# Outcome trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutcomeNode:
    """One node of an outcome tree.

    Internal nodes carry the stage cost paid to advance from here and a
    branch list (label, prob, child); leaves carry the final value.  Costs
    may differ between sibling subtrees, which is how stage costs that
    depend on earlier signals are expressed.
    """

    value: Fraction | None = None
    cost: Fraction | None = None
    branches: tuple[tuple[str, Fraction, "OutcomeNode"], ...] | None = None

    @classmethod
    def leaf(cls, value) -> "OutcomeNode":
        return cls(value=Fraction(value))

    @classmethod
    def stage(cls, cost, branches) -> "OutcomeNode":
        branches = tuple((str(l), Fraction(p), c) for l, p, c in branches)
        return cls(cost=Fraction(cost), branches=branches)

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def validate(self) -> None:
        if self.is_leaf:
            if self.cost is not None or self.branches is not None:
                raise BasketError("leaf node must not carry cost or branches")
            return
        if self.cost is None or self.branches is None or not self.branches:
            raise BasketError("internal node needs a cost and at least one branch")
        if self.cost < 0:
            raise BasketError(f"stage cost must be >= 0, got {self.cost}")
        total = ZERO
        seen = set()
        for label, prob, child in self.branches:
            if prob <= 0:
                raise BasketError(f"branch probability must be positive, got {prob}")
            if label in seen:
                raise BasketError(f"duplicate branch label {label!r}")
            seen.add(label)
            total += prob
            child.validate()
        if total != 1:
            raise BasketError(f"branch probabilities sum to {total}, expected 1")

    def to_json_obj(self):
        if self.is_leaf:
            return {"value": format_rational(self.value)}
        return {
            "cost": format_rational(self.cost),
            "branches": [
                {"label": l, "p": format_rational(p), "node": c.to_json_obj()}
                for l, p, c in self.branches
            ],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "OutcomeNode":
        if "value" in obj:
            return cls.leaf(parse_rational(obj["value"]))
        branches = [
            (str(b["label"]), parse_rational(b["p"]), cls.from_json_obj(b["node"]))
            for b in obj["branches"]
        ]
        return cls.stage(parse_rational(obj["cost"]), branches)


# ---------------------------------------------------------------------------
# Annotation (backward induction)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnotatedLeaf:
    value: Fraction
    kappa_dist: DiscreteDistribution

    @property
    def is_leaf(self) -> bool:
        return True


@dataclass(frozen=True)
class AnnotatedStage:
    """Internal node with its stage index and capped-value laws.

    kappa_next_dist is the conditional law of the next stage's capped value;
    sigma solves surplus(kappa_next_dist, sigma) == cost; kappa_dist is the
    law of min(sigma, next capped value).
    """

    cost: Fraction
    sigma: Fraction
    branches: tuple[tuple[str, Fraction, Union["AnnotatedStage", AnnotatedLeaf]], ...]
    kappa_next_dist: DiscreteDistribution
    kappa_dist: DiscreteDistribution

    @property
    def is_leaf(self) -> bool:
        return False


def _annotate_node(node: OutcomeNode) -> AnnotatedStage | AnnotatedLeaf:
    if node.is_leaf:
        return AnnotatedLeaf(node.value, DiscreteDistribution.point(node.value))
    branches = tuple(
        (label, prob, _annotate_node(child)) for label, prob, child in node.branches
    )
    mixture = []
    for _, prob, child in branches:
        for v, p in child.kappa_dist.atoms:
            mixture.append((v, p * prob))
    kappa_next = DiscreteDistribution(mixture)
    sigma = weitzman_index(PandoraBox(kappa_next, node.cost))
    kappa = kappa_next.map_values(lambda v: min(v, sigma))
    return AnnotatedStage(node.cost, sigma, branches, kappa_next, kappa)


@dataclass(frozen=True)
class PathInfo:
    """One realized root-to-leaf path with everything a run needs."""

    branch_indices: tuple[int, ...]
    labels: tuple[str, ...]
    sigmas: tuple[Fraction, ...]   # stage indices along the path
    costs: tuple[Fraction, ...]    # stage costs along the path
    value: Fraction
    prob: Fraction
    kappa1: Fraction               # min(all stage indices, value)

    @property
    def depth(self) -> int:
        return len(self.sigmas)


class AnnotatedBasket:
    """An annotated outcome tree plus its enumerated path table."""

    def __init__(self, root: AnnotatedStage):
        self.root = root
        self.paths: tuple[PathInfo, ...] = tuple(self._enumerate_paths())

    @property
    def sigma1(self) -> Fraction:
        return self.root.sigma

    def kappa1_distribution(self) -> DiscreteDistribution:
        """Exact law of the terminal capped value kappa^(1)."""
        return self.root.kappa_dist

    def _enumerate_paths(self) -> Iterator[PathInfo]:
        def walk(node, idxs, labels, sigmas, costs, prob):
            if node.is_leaf:
                kappa1 = min(min(sigmas), node.value)
                yield PathInfo(
                    tuple(idxs), tuple(labels), tuple(sigmas), tuple(costs),
                    node.value, prob, kappa1,
                )
                return
            for bi, (label, p, child) in enumerate(node.branches):
                yield from walk(
                    child,
                    idxs + [bi],
                    labels + [label],
                    sigmas + [node.sigma],
                    costs + [node.cost],
                    prob * p,
                )

        yield from walk(self.root, [], [], [], [], Fraction(1))

    def node_at(self, branch_indices: Sequence[int]):
        node = self.root
        for bi in branch_indices:
            node = node.branches[bi][2]
        return node


def annotate(root: OutcomeNode) -> AnnotatedBasket:
    """Validate a tree and run the backward induction."""
    root.validate()
    if root.is_leaf:
        raise BasketError("a basket needs at least one stage of inspection")
    annotated = _annotate_node(root)
    return AnnotatedBasket(annotated)


def annotated_to_json_obj(node: AnnotatedStage | AnnotatedLeaf):
    if node.is_leaf:
        return {"value": rational_json(node.value)}
    return {
        "cost": rational_json(node.cost),
        "sigma": rational_json(node.sigma),
        "kappa_next": [
            {"v": format_rational(v), "p": format_rational(p)}
            for v, p in node.kappa_next_dist.atoms
        ],
        "branches": [
            {"label": l, "p": format_rational(p), "node": annotated_to_json_obj(c)}
            for l, p, c in node.branches
        ],
    }


# ---------------------------------------------------------------------------
# Index sequences
# ---------------------------------------------------------------------------

def gamma_sequence(sigmas: Sequence[Fraction]) -> list[Fraction]:
    """Running minima of a stage-index sequence (weakly decreasing)."""
    if not sigmas:
        raise ValueError("need at least one index")
    return list(itertools.accumulate(sigmas, min))


def kappa_sequence(sigmas: Sequence[Fraction]) -> list[Fraction]:
    """Suffix minima: the capped value seen from each stage onward."""
    if not sigmas:
        raise ValueError("need at least one index")
    out = list(sigmas)
    for i in range(len(out) - 2, -1, -1):
        out[i] = min(out[i], out[i + 1])
    return out


# ---------------------------------------------------------------------------
# Traces, exposure, amortization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NestedTrace:
    """How far one run advanced a basket on one realization.

    The path is the full realized path even beyond the last opened stage,
    so exposure can be decided from what the run left on the table.
    """

    basket_id: object
    path: PathInfo
    stages_opened: int
    claimed: bool
    costs_paid: Fraction
    welfare: Fraction

    def indicator_sequence(self) -> list[int]:
        d = self.path.depth
        seq = [1 if l < self.stages_opened else 0 for l in range(d)]
        seq.append(1 if self.claimed else 0)
        return seq


def make_trace(basket_id, path: PathInfo, stages_opened: int, claimed: bool) -> NestedTrace:
    if claimed and stages_opened != path.depth:
        raise BasketError("claiming requires opening every stage first")
    if stages_opened > path.depth:
        raise BasketError("opened more stages than the basket has")
    costs = sum(path.costs[:stages_opened], ZERO)
    welfare = (path.value if claimed else ZERO) - costs
    return NestedTrace(basket_id, path, stages_opened, claimed, costs, welfare)


def check_non_exposure(trace: NestedTrace, basket: AnnotatedBasket) -> bool:
    """True iff no stage of this realization shows the exposure pattern.

    Exposure at stage l: the run opened stage l but not l+1, while the
    realized capped value of the remainder exceeded the running index
    minimum gamma^(l).  Claimed or untouched baskets are never exposed.
    """
    path = trace.path
    if basket.node_at(path.branch_indices).value != path.value:
        raise BasketError("trace path does not belong to this basket")
    if trace.claimed or trace.stages_opened == 0:
        return True
    stop = trace.stages_opened
    gamma = min(path.sigmas[:stop])
    tail = list(path.sigmas[stop:]) + [path.value]
    kappa_next = min(tail)
    return not kappa_next > gamma


def amortized_contribution(trace: NestedTrace, basket: AnnotatedBasket) -> tuple[Fraction, Fraction]:
    """(realized welfare contribution, realized claimed capped value).

    Averaging both components over all realizations of a policy gives the
    two sides of the amortization inequality.
    """
    bound = trace.path.kappa1 if trace.claimed else ZERO
    return trace.welfare, bound


# ---------------------------------------------------------------------------
# Descending runs
# ---------------------------------------------------------------------------

@dataclass
class StagePath:
    """Mutable cursor of one basket during a descending run."""

    basket_id: object
    node: AnnotatedStage | AnnotatedLeaf
    labels: list[str] = field(default_factory=list)
    stage: int = 0
    gamma: Fraction | None = None

    def current_index(self) -> Fraction:
        # index of the advance under consideration: next stage's sigma, or
        # the revealed value when only the claim remains
        return self.node.value if self.node.is_leaf else self.node.sigma


@dataclass(frozen=True)
class DescendingStep:
    time: int
    basket_id: object
    action: str                       # "open" or "claim"
    index: Fraction
    eligible_view: tuple              # (id, sigma_t, gamma_t) per eligible basket


@dataclass
class DescendingResult:
    traces: dict
    claimed_ids: list
    total_costs: Fraction
    claimed_value: Fraction
    welfare: Fraction
    steps: list[DescendingStep]


def descending_run(
    baskets: dict,
    paths: dict,
    conflicts=None,
    record_steps: bool = False,
) -> DescendingResult:
    """Run the descending procedure on pre-drawn realizations.

    Repeatedly advance the eligible basket with the largest current index
    (ties to the smallest basket id) while that index is positive.  Claiming
    a basket removes the ids given by ``conflicts(basket_id)`` from the
    eligible set; with the default (all other ids) this is the
    single-selection problem.
    """
    ids = sorted(baskets)
    if conflicts is None:
        conflicts = lambda claimed: [i for i in ids if i != claimed]
    cursors = {i: StagePath(i, baskets[i].root) for i in ids}
    eligible = set(ids)
    claimed: list = []
    total_costs = ZERO
    claimed_value = ZERO
    steps: list[DescendingStep] = []
    time = 0
    while eligible:
        best = None
        best_idx = None
        for i in sorted(eligible):
            idx = cursors[i].current_index()
            if best_idx is None or idx > best_idx:
                best, best_idx = i, idx
        if best_idx <= 0:
            break
        cur = cursors[best]
        if record_steps:
            view = []
            for j in sorted(eligible):
                sig = cursors[j].current_index()
                g = cursors[j].gamma
                gamma_t = sig if g is None else min(g, sig)
                view.append((j, sig, gamma_t))
            steps.append(
                DescendingStep(time, best, "open" if not cur.node.is_leaf else "claim",
                               best_idx, tuple(view))
            )
        if cur.node.is_leaf:
            claimed.append(best)
            claimed_value += cur.node.value
            eligible.discard(best)
            for other in conflicts(best):
                eligible.discard(other)
        else:
            total_costs += cur.node.cost
            cur.gamma = cur.node.sigma if cur.gamma is None else min(cur.gamma, cur.node.sigma)
            bi = paths[best].branch_indices[cur.stage]
            cur.node = cur.node.branches[bi][2]
            cur.labels.append(paths[best].labels[cur.stage])
            cur.stage += 1
        time += 1
    traces = {
        i: make_trace(i, paths[i], cursors[i].stage, i in claimed) for i in ids
    }
    return DescendingResult(
        traces, claimed, total_costs, claimed_value, claimed_value - total_costs, steps
    )


def descending_select(baskets: dict, paths: dict) -> DescendingResult:
    """Single-selection descending run: claim at most one basket."""
    return descending_run(baskets, paths)


def enumerate_joint_paths(baskets: dict) -> Iterator[tuple[dict, Fraction]]:
    """All joint realizations of independent baskets with their probability."""
    ids = sorted(baskets)
    for combo in itertools.product(*(baskets[i].paths for i in ids)):
        prob = Fraction(1)
        for p in combo:
            prob *= p.prob
        yield dict(zip(ids, combo)), prob


def expected_select_welfare(baskets: dict) -> Fraction:
    """Exact expected welfare of the single-selection descending run."""
    total = ZERO
    for paths, prob in enumerate_joint_paths(baskets):
        total += prob * descending_select(baskets, paths).welfare
    return total
