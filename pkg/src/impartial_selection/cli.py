"""Command-line front end.

Exit codes: 0 success (selection made, class verified, impossibility
confirmed), 1 checked and failed (violation found, gap above alpha, or a
gadget query turned out satisfiable), 2 usage, parse or domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction

from . import gadgets
from .graph import GraphClass, GraphError, enumerate_class, parse_graph, to_json_obj
from .mechanisms import DomainError, MechanismId, Variant, run
from .verify import Aggregator, additive_gap, fraction_json, verify_class, verify_sampled

BUDGET_ENV = "IMPSEL_GRAPH_BUDGET"
DEFAULT_BUDGET = 10**7

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or an integer exactly; decimals are refused."""
    m = re.fullmatch(r"\s*(-?\d+)(?:\s*/\s*(\d+))?\s*", text)
    if not m:
        raise UsageError(f"expected a rational 'p/q' or an integer, got {text!r}")
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise UsageError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def graph_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None


def _fmt(x: Fraction) -> str:
    return str(x)


def _emit(obj, out) -> None:
    out.write(json.dumps(obj, sort_keys=True) + "\n")


def _mechanism(args) -> MechanismId:
    try:
        mech = MechanismId.parse(args.mechanism, args.k)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    return mech


def _graph_class(args) -> GraphClass:
    try:
        return GraphClass(args.n, args.d)
    except GraphError as exc:
        raise UsageError(str(exc)) from None


def cmd_select(args, out) -> int:
    mech = _mechanism(args)
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input) as fh:
            text = fh.read()
    g = parse_graph(text)
    chosen = run(mech, g)
    deg = g.indegrees
    gaps = {s.value: additive_gap(g, chosen, s) for s in Aggregator}
    if args.json:
        _emit(
            {
                "mechanism": str(mech),
                "graph": to_json_obj(g),
                "selected": list(chosen),
                "indegrees": {str(v): deg[v - 1] for v in chosen},
                "max_indegree": max(deg),
                "gaps": {k: fraction_json(v) for k, v in gaps.items()},
            },
            out,
        )
        return EXIT_OK
    out.write(f"mechanism: {mech}\n")
    out.write(f"selected: {' '.join(map(str, chosen))}\n")
    for v in chosen:
        out.write(f"  vertex {v}: indegree {deg[v - 1]}\n")
    out.write(f"max indegree: {max(deg)}\n")
    out.write("gaps: " + "  ".join(f"{k}={_fmt(v)}" for k, v in gaps.items()) + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    mech = _mechanism(args)
    spec = _graph_class(args)
    sigma = Aggregator(args.objective)
    alpha = parse_rational(args.alpha)
    if mech.variant is Variant.PWRU and spec.n > 1 and spec.d != 1:
        raise UsageError("pwru is only defined with --d 1")
    if mech.variant is Variant.APWRU_DELETION and not 2 <= mech.k <= spec.n:
        raise UsageError(f"--k must lie in 2..{spec.n}")
    if args.sample is not None:
        report = verify_sampled(mech, spec, sigma, args.sample, args.seed)
    else:
        size, budget = spec.size(), graph_budget()
        if size > budget:
            raise UsageError(
                f"{spec} has {size} graphs, above the budget of {budget}; "
                f"use --sample COUNT --seed S or raise {BUDGET_ENV}"
            )
        report = verify_class(mech, spec, sigma)
    ok = report.impartial and report.worst_gap <= alpha
    if args.json:
        obj = report.to_json()
        obj["alpha"] = fraction_json(alpha)
        obj["verified"] = ok
        _emit(obj, out)
    else:
        out.write(f"mechanism: {report.mechanism}\nclass: {report.graph_class} ({report.mode})\n")
        out.write(f"graphs checked: {report.graphs_checked}\n")
        out.write(f"impartiality violations: {len(report.impartiality_violations)}\n")
        for viol in report.impartiality_violations[:5]:
            out.write(f"  vertex {viol.vertex}: {viol.graph.edges()} vs {viol.deviation.edges()}\n")
        out.write(f"worst {sigma.value} gap: {_fmt(report.worst_gap)} (alpha {_fmt(alpha)})\n")
        if report.worst_gap_witness is not None:
            out.write(f"  witness: {report.worst_gap_witness.edges()}\n")
        out.write(f"max selection size: {report.max_selection_size}\n")
        out.write("VERIFIED\n" if ok else "FAILED\n")
    return EXIT_OK if ok else EXIT_FAILED


def _family(args) -> gadgets.GadgetFamily:
    try:
        if args.family == "cycle":
            return gadgets.build_cycle_family(args.n or 3)
        if args.family == "kfam":
            if args.n is None or args.d is None:
                raise UsageError("kfam needs --n and --d")
            return gadgets.build_k_family(args.n, args.d)
        if args.as_drawn:
            return gadgets.build_figure4_family()
        return gadgets.build_figure4_closure()
    except GraphError as exc:
        raise UsageError(str(exc)) from None


def cmd_gadget(args, out) -> int:
    family = _family(args)
    try:
        query = gadgets.ImpossibilityQuery(
            family, Aggregator(args.objective), parse_rational(args.alpha), args.k or family.n
        )
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    result = gadgets.verify_impossibility(query)
    if result.satisfiable:
        problems = gadgets.check_assignment(query, result.assignment)
        if problems:
            raise RuntimeError(f"search returned an invalid witness: {problems}")
    if args.json:
        obj = result.to_json()
        obj["query"] = gadgets.query_json(query)
        obj["family"] = family.to_json()
        _emit(obj, out)
    else:
        out.write(
            f"family: {args.family} ({len(family.graphs)} graphs, {len(family.links)} links, n={family.n})\n"
            f"objective: {query.objective.value}  alpha: {_fmt(query.alpha)}  k: {query.k}\n"
            f"result: {result.status} after {result.nodes} search nodes\n"
        )
        if result.satisfiable:
            out.write("witness (family-consistent only, not a mechanism):\n")
            for i, s in result.assignment.items():
                out.write(f"  {family.labels[i]}: {{{', '.join(map(str, s))}}}\n")
        else:
            out.write("no impartial mechanism meets this guarantee on the enclosing class\n")
            for line in result.trace:
                out.write(f"  {line}\n")
    return EXIT_FAILED if result.satisfiable else EXIT_OK


def cmd_enumerate(args, out) -> int:
    spec = _graph_class(args)
    size, budget = spec.size(), graph_budget()
    if size > budget:
        raise UsageError(f"{spec} has {size} graphs, above the budget of {budget} (set {BUDGET_ENV})")
    for g in enumerate_class(spec):
        out.write(json.dumps(to_json_obj(g), separators=(",", ":")) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impsel", description="Impartial selection mechanisms and their verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    mechanisms = [v.value for v in Variant]
    objectives = [a.value for a in Aggregator]

    p = sub.add_parser("select", help="run a mechanism on one graph")
    p.add_argument("--mechanism", required=True, choices=mechanisms)
    p.add_argument("--k", type=int)
    p.add_argument("--input", required=True, help="graph file (text or JSON), '-' for stdin")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("verify", help="check impartiality and an additive bound over a graph class")
    p.add_argument("--mechanism", required=True, choices=mechanisms)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--objective", required=True, choices=objectives)
    p.add_argument("--alpha", required=True, help="threshold as p/q")
    p.add_argument("--sample", type=int, metavar="COUNT")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gadget", help="search a lower-bound gadget family")
    p.add_argument("--family", required=True, choices=["cycle", "kfam", "fig4"])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--objective", required=True, choices=objectives)
    p.add_argument("--alpha", required=True, help="threshold as p/q")
    p.add_argument("--k", type=int)
    p.add_argument("--as-drawn", action="store_true", help="fig4 only: the eight graphs without relabeled copies")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("enumerate", help="list every graph of a class as JSON lines")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int)
    p.set_defaults(func=cmd_enumerate)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "sample", None) is not None and args.seed is None:
        print("impsel: error: --sample requires --seed", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "seed", None) is not None and getattr(args, "sample", None) is None:
        print("impsel: error: --seed only applies with --sample", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, GraphError, DomainError, OSError) as exc:
        print(f"impsel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
