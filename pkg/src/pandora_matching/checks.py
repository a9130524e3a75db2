"""Instance-level verification of the library's structural guarantees.

One enumeration pass per orientation collects everything the per-realization
properties need: trace validity, non-exposure, the greedy-matching identity,
the amortization identity, and the step-level index bookkeeping of the
descending run.  On top of those sit the oracle comparisons (half and
quarter approximation factors and the orientation-pair bound on the optimum).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algorithms import (
    BundledDescendingRunner,
    OrientedDescendingRunner,
    VertexBasedDescendingRunner,
    assert_valid_trace,
    best_of_two,
    enumerate_runs,
    randomized_matching,
)
from .distributions import ZERO
from .instance import MatchingInstance, Orientation, canonical_orientation, validate
from .nested import check_non_exposure
from .oracle import greedy_matching, optimal_welfare


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class OrientedSummary:
    """Aggregates of one full enumeration of an oriented descending run."""

    welfare: Fraction
    claimed_kappa_sum: Fraction
    traces_valid: bool
    non_exposed: bool
    greedy_equal: bool
    gamma_steps_ok: bool


def summarize_oriented(inst: MatchingInstance, orientation: Orientation,
                       enum_bound=None, record_steps: bool = True) -> OrientedSummary:
    runner = OrientedDescendingRunner(inst, orientation)
    welfare = ZERO
    kappa_sum = ZERO
    traces_valid = non_exposed = greedy_equal = gamma_ok = True
    for realization, prob, trace in enumerate_runs(inst, runner, enum_bound,
                                                   record_steps=record_steps):
        welfare += prob * trace.welfare
        weights = runner.kappa_weights(realization)
        kappa_sum += prob * sum((weights[eid] for eid in trace.matched), ZERO)
        try:
            assert_valid_trace(trace, inst, realization)
        except AssertionError:
            traces_valid = False
        for eid, nested_trace in trace.nested_traces.items():
            if not check_non_exposure(nested_trace, runner.baskets[eid]):
                non_exposed = False
        if trace.matched != greedy_matching(weights)[0]:
            greedy_equal = False
        if record_steps and not _gamma_steps_ok(trace.steps):
            gamma_ok = False
    return OrientedSummary(welfare, kappa_sum, traces_valid, non_exposed,
                           greedy_equal, gamma_ok)


def _gamma_steps_ok(steps) -> bool:
    """Advanced basket has maximal running-min index; idle ones sit at theirs."""
    for step in steps:
        view = {bid: (sigma, gamma) for bid, sigma, gamma in step.eligible_view}
        _, adv_gamma = view[step.basket_id]
        for bid, (sigma, gamma) in view.items():
            if gamma > adv_gamma:
                return False
            if bid != step.basket_id and gamma != sigma:
                return False
    return True


def bundled_summary(inst: MatchingInstance, enum_bound=None):
    """(expected welfare, traces ok, non-exposure ok, greedy-on-bundled ok)."""
    runner = BundledDescendingRunner(inst)
    welfare = ZERO
    ok_valid = ok_exposure = ok_greedy = True
    for realization, prob, trace in enumerate_runs(inst, runner, enum_bound):
        welfare += prob * trace.welfare
        try:
            assert_valid_trace(trace, inst, realization)
        except AssertionError:
            ok_valid = False
        for eid, nested_trace in trace.nested_traces.items():
            if not check_non_exposure(nested_trace, runner.baskets[eid]):
                ok_exposure = False
        weights = {eid: runner.path_lookup[eid][k].kappa1
                   for eid, k in realization.items()}
        if trace.matched != greedy_matching(weights)[0]:
            ok_greedy = False
    return welfare, ok_valid, ok_exposure, ok_greedy


def vertex_based_summary(inst: MatchingInstance, enum_bound=None):
    """(expected welfare, traces ok, single-box non-exposure ok)."""
    runner = VertexBasedDescendingRunner(inst)
    welfare = ZERO
    ok_valid = ok_exposure = True
    for realization, prob, trace in enumerate_runs(inst, runner, enum_bound):
        welfare += prob * trace.welfare
        try:
            assert_valid_trace(trace, inst, realization)
        except AssertionError:
            ok_valid = False
        values = runner.endpoint_values(realization)
        for pair in trace.inspected:
            eid = pair if pair[0] < pair[1] else (pair[1], pair[0])
            if values[pair] > runner.sigma[pair] and eid not in trace.matched:
                ok_exposure = False
    return welfare, ok_valid, ok_exposure


def run_all_checks(inst: MatchingInstance, orientation: Orientation | None = None,
                   enum_bound=None) -> list[CheckResult]:
    """The full invariant suite for one instance; all exact comparisons."""
    results: list[CheckResult] = []
    report = validate(inst)
    results.append(CheckResult("instance-valid", report.ok, "; ".join(report.errors)))
    if not report.ok:
        return results

    o = orientation or canonical_orientation(inst)
    o_rev = o.reverse()
    fwd = summarize_oriented(inst, o, enum_bound)
    rev = summarize_oriented(inst, o_rev, enum_bound)

    for label, s in (("forward", fwd), ("reverse", rev)):
        results.append(CheckResult(f"trace-validity-{label}", s.traces_valid))
        results.append(CheckResult(f"non-exposure-oriented-{label}", s.non_exposed))
        results.append(CheckResult(f"greedy-equivalence-{label}", s.greedy_equal))
        results.append(CheckResult(
            f"amortization-equality-{label}", s.welfare == s.claimed_kappa_sum,
            f"welfare {s.welfare} vs claimed capped sum {s.claimed_kappa_sum}"))
        results.append(CheckResult(f"descending-step-indices-{label}", s.gamma_steps_ok))

    bundle_welfare, b_valid, b_exposure, b_greedy = bundled_summary(inst, enum_bound)
    results.append(CheckResult("trace-validity-bundled", b_valid))
    results.append(CheckResult("non-exposure-bundled", b_exposure))
    results.append(CheckResult("greedy-equivalence-bundled", b_greedy))

    if inst.all_independent():
        _, v_valid, v_exposure = vertex_based_summary(inst, enum_bound)
        results.append(CheckResult("trace-validity-vertex-based", v_valid))
        results.append(CheckResult("non-exposure-vertex-based", v_exposure))

    opt_free = optimal_welfare(inst).value
    opt_fwd = optimal_welfare(inst, "oriented", o).value
    opt_rev = optimal_welfare(inst, "oriented", o_rev).value
    results.append(CheckResult("oracle-nonnegative", opt_free >= 0, str(opt_free)))
    results.append(CheckResult(
        "oracle-dominates-oriented", opt_free >= opt_fwd and opt_free >= opt_rev))
    results.append(CheckResult(
        "half-approx-forward", 2 * fwd.welfare >= opt_fwd,
        f"2*{fwd.welfare} vs {opt_fwd}"))
    results.append(CheckResult(
        "half-approx-reverse", 2 * rev.welfare >= opt_rev,
        f"2*{rev.welfare} vs {opt_rev}"))
    results.append(CheckResult(
        "opt-bound", opt_free <= 2 * fwd.welfare + 2 * rev.welfare,
        f"{opt_free} vs 2*{fwd.welfare} + 2*{rev.welfare}"))

    rand = randomized_matching(inst, "exact", enum_bound=enum_bound)
    results.append(CheckResult("randomized-quarter", 4 * rand >= opt_free,
                               f"4*{rand} vs {opt_free}"))
    _, bot = best_of_two(inst, enum_bound)
    results.append(CheckResult("best-of-two-quarter", 4 * bot >= opt_free,
                               f"4*{bot} vs {opt_free}"))
    return results
