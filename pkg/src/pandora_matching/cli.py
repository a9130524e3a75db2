"""Command-line interface.

Subcommands:
  index         Weitzman index of a single box JSON file
  nested-index  annotate a basket (outcome tree) JSON file
  run           evaluate a matching policy on an instance
  oracle        optimal-policy value under a constraint
  repro         tables for the named benchmark instances
  check         run the invariant suite on an instance

Exact rationals appear in JSON output as "num/den" strings with float
renderings alongside.  PANDORA_ENUM_BOUND overrides the default exact
enumeration bound.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import repro
from .algorithms import (
    EnumerationBoundError,
    UnsupportedModelError,
    best_of_two,
    expected_welfare,
    make_runner,
    randomized_matching,
    sample_realization,
)
from .boxes import PandoraBox, weitzman_index
from .checks import run_all_checks
from .instance import (
    InstanceError,
    MatchingInstance,
    Orientation,
    canonical_orientation,
    validate,
)
from .nested import OutcomeNode, annotate, annotated_to_json_obj
from .oracle import StateBoundError, optimal_action_tree, optimal_welfare
from .rationals import (
    RationalParseError,
    format_rational,
    load_json,
    loads_json,
    parse_rational,
)
from .rng import SplitMix64


class CliError(Exception):
    pass


def _load_instance(path: str) -> MatchingInstance:
    try:
        return MatchingInstance.from_json_obj(load_json(path))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"cannot read instance {path}: {exc}") from exc


def _resolve_orientation(spec: str | None, inst: MatchingInstance) -> Orientation:
    """canonical | reverse | edge-based | random:SEED | inline JSON | file path."""
    if spec is None or spec == "canonical":
        return canonical_orientation(inst)
    if spec == "reverse":
        return canonical_orientation(inst).reverse()
    if spec == "edge-based":
        from .algorithms import edge_based_orientation
        return edge_based_orientation(inst)
    if spec.startswith("random:"):
        rng = SplitMix64(int(spec.split(":", 1)[1]))
        pairs = [(i, j) if rng.next_bit() == 0 else (j, i) for i, j in inst.edge_ids]
        return Orientation(pairs)
    if spec.strip().startswith("["):
        o = Orientation.from_json_obj(loads_json(spec))
    elif os.path.exists(spec):
        o = Orientation.from_json_obj(load_json(spec))
    else:
        raise CliError(f"cannot interpret orientation spec {spec!r}")
    o.require_covers(inst)
    return o


def _emit(doc: dict, fmt: str, csv_rows=None, csv_header=None) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2))
        return
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(csv_header)
    for row in csv_rows:
        writer.writerow(row)
    sys.stdout.write(out.getvalue())


def _welfare_doc(value: Fraction) -> dict:
    return {"exact": format_rational(value), "float": float(value)}


def cmd_index(args) -> int:
    box = PandoraBox.from_json_obj(load_json(args.instance))
    sigma = weitzman_index(box)
    print(json.dumps({"sigma": format_rational(sigma), "sigma_float": float(sigma)}))
    return 0


def cmd_nested_index(args) -> int:
    root = OutcomeNode.from_json_obj(load_json(args.instance))
    basket = annotate(root)
    doc = {
        "sigma1": format_rational(basket.sigma1),
        "kappa1": [{"v": format_rational(v), "p": format_rational(p)}
                   for v, p in basket.kappa1_distribution().atoms],
        "tree": annotated_to_json_obj(basket.root),
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_run(args) -> int:
    inst = _load_instance(args.instance)
    report = validate(inst)
    if not report.ok:
        raise CliError("invalid instance: " + "; ".join(report.errors))
    bound = args.enum_bound
    orientation_desc = ""
    doc: dict = {"instance": args.instance, "policy": args.policy, "mode": args.mode}

    if args.policy == "randomized":
        if args.mode == "exact":
            value = randomized_matching(inst, "exact", enum_bound=bound)
        else:
            _require_seed(args)
            orientation, value = randomized_matching(inst, "seeded", seed=args.seed,
                                                     enum_bound=bound)
            orientation_desc = _orientation_string(orientation)
            doc["orientation"] = orientation.to_json_obj()
        doc["welfare"] = _welfare_doc(value)
    elif args.policy == "best-of-two":
        orientation, value = best_of_two(inst, bound)
        orientation_desc = _orientation_string(orientation)
        doc["orientation"] = orientation.to_json_obj()
        doc["welfare"] = _welfare_doc(value)
    else:
        orientation = None
        if args.policy == "oriented-desc":
            orientation = _resolve_orientation(args.orientation, inst)
            orientation_desc = _orientation_string(orientation)
            doc["orientation"] = orientation.to_json_obj()
        runner = make_runner(inst, args.policy, orientation)
        if args.policy == "edge-based":
            orientation_desc = _orientation_string(runner.orientation)
            doc["orientation"] = runner.orientation.to_json_obj()
        if args.mode == "exact":
            value = expected_welfare(inst, runner, "exact", enum_bound=bound)
            doc["welfare"] = _welfare_doc(value)
        else:
            _require_seed(args)
            mean, stderr = expected_welfare(inst, runner, "montecarlo",
                                            seed=args.seed, trials=args.trials)
            value = mean
            doc["welfare"] = {"float": mean, "stderr": stderr,
                              "trials": args.trials, "seed": args.seed}
        if args.trace_seed is not None:
            rng = SplitMix64(args.trace_seed)
            realization = sample_realization(inst, rng)
            trace = runner.run(realization, record_steps=True)
            doc["sample_trace"] = _trace_doc(inst, realization, trace)

    ratio = ""
    if args.with_opt:
        opt = optimal_welfare(inst).value
        doc["opt_free"] = _welfare_doc(opt)
        if opt != 0 and args.mode == "exact":
            ratio_val = Fraction(value) / opt
            doc["ratio_to_opt"] = _welfare_doc(ratio_val)
            ratio = format_rational(ratio_val)

    exact_str = format_rational(value) if isinstance(value, Fraction) else ""
    _emit(doc, args.format,
          csv_rows=[[args.instance, args.policy, orientation_desc, args.mode,
                     exact_str, float(value), ratio]],
          csv_header=["instance", "policy", "orientation", "mode",
                      "value_exact", "value_float", "ratio_to_opt"])
    return 0


def _orientation_string(o: Orientation) -> str:
    return ";".join(f"{u}>{v}" for u, v in o.sorted_pairs())


def _require_seed(args) -> None:
    if args.seed is None:
        raise CliError("this mode requires --seed")


def _trace_doc(inst, realization, trace) -> dict:
    return {
        "realization": {f"{i}-{j}": k for (i, j), k in realization.items()},
        "inspected": sorted(f"{u}>{v}" for u, v in trace.inspected),
        "matched": sorted(f"{i}-{j}" for i, j in trace.matched),
        "costs_paid": format_rational(trace.costs_paid),
        "welfare": format_rational(trace.welfare),
    }


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    orientation = None
    if args.constraint == "oriented":
        orientation = _resolve_orientation(args.orientation, inst)
    pv = optimal_welfare(inst, args.constraint, orientation)
    doc = {"constraint": args.constraint, "value": format_rational(pv.value),
           "value_float": float(pv.value)}
    if orientation is not None:
        doc["orientation"] = orientation.to_json_obj()
    if args.trace:
        doc["optimal_action_trace"] = optimal_action_tree(inst, pv)
    print(json.dumps(doc, indent=2))
    return 0


def cmd_repro(args) -> int:
    rows = repro.report(only=args.only, alpha=parse_rational(args.alpha),
                        n=args.n, m=args.m)
    mismatches = [r for r in rows if not r.match]
    if args.format == "json":
        doc = {"rows": [{
            "instance": r.instance, "quantity": r.quantity,
            "computed": format_rational(r.computed),
            "expected": format_rational(r.expected),
            "match": r.match} for r in rows],
            "mismatches": len(mismatches)}
        print(json.dumps(doc, indent=2))
    else:
        _emit({}, "csv",
              csv_rows=[[r.instance, r.quantity, format_rational(r.computed),
                         float(r.computed), format_rational(r.expected), r.match]
                        for r in rows],
              csv_header=["instance", "quantity", "computed_exact",
                          "computed_float", "expected", "match"])
    return 1 if mismatches else 0


def cmd_check(args) -> int:
    inst = _load_instance(args.instance)
    orientation = _resolve_orientation(args.orientation, inst)
    results = run_all_checks(inst, orientation, args.enum_bound)
    doc = {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                      for r in results],
           "all_passed": all(r.passed for r in results)}
    print(json.dumps(doc, indent=2))
    return 0 if doc["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pandora",
        description="Exact Pandora-box matching: indices, policies, oracle, repro.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="Weitzman index of a box JSON file")
    p.add_argument("--instance", required=True, help="box file: {dist, cost}")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("nested-index", help="annotate a basket outcome tree")
    p.add_argument("--instance", required=True, help="tree file")
    p.set_defaults(func=cmd_nested_index)

    p = sub.add_parser("run", help="evaluate a matching policy")
    p.add_argument("--instance", required=True)
    p.add_argument("--policy", required=True,
                   choices=["oriented-desc", "randomized", "best-of-two",
                            "bundled", "vertex-based", "edge-based"])
    p.add_argument("--orientation", default="canonical",
                   help="canonical | reverse | edge-based | random:SEED | file | inline JSON")
    p.add_argument("--mode", default="exact", choices=["exact", "montecarlo"])
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--enum-bound", type=int, default=None)
    p.add_argument("--with-opt", action="store_true",
                   help="also compute the free optimum and the welfare ratio")
    p.add_argument("--trace-seed", type=int, default=None,
                   help="include the trace of one seeded sample realization")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="optimal-policy value by exhaustive DP")
    p.add_argument("--instance", required=True)
    p.add_argument("--constraint", default="free",
                   choices=["free", "oriented", "bundled"])
    p.add_argument("--orientation", default="canonical")
    p.add_argument("--trace", action="store_true",
                   help="include the optimal action tree")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("repro", help="closed-form tables for named instances")
    p.add_argument("--only", default=None, choices=list(repro.ALL_NAMES))
    p.add_argument("--alpha", default="1/4", help="rational, e.g. 1/4")
    p.add_argument("--n", type=int, default=4, help="star size")
    p.add_argument("--m", type=int, default=2, help="copy count for the hub instance")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("check", help="run the invariant suite on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--orientation", default="canonical")
    p.add_argument("--enum-bound", type=int, default=None)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceError, RationalParseError, UnsupportedModelError,
            EnumerationBoundError, StateBoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
