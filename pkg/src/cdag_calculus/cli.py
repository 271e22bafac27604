"""Command-line front end.

Exit status: 0 holds / valid, 1 fails / invalid, 2 usage or input error,
3 enumeration budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from .abstraction import canonical_graph, unfolded_graph
from .calculus import check_rule
from .cdag_model import CDagError, format_cdag, parse_cdag, parse_cluster_list, reduce_to_three, validate
from .formats import format_micro_graph, graph_to_obj, verdict_to_json, verdict_to_text
from .generators import random_cdag, random_query
from .graph_core import GraphError
from .oracle import BudgetExceeded, EnumerationBudget, count_compatible, exists_violator
from .queries import Rule, RuleQuery

OK, FAILS, USAGE, BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(args):
    return parse_cdag(_read(args.file))


def _budget(args) -> EnumerationBudget:
    return EnumerationBudget(args.max_graphs, args.max_micro_vertices)


def _query(args, rule=None) -> RuleQuery:
    rule = Rule.parse(rule or args.rule)
    sets = {k: parse_cluster_list(getattr(args, k, None)) for k in ("w", "x", "y", "z", "over", "under")}
    if not sets["x"] or not sets["y"]:
        raise CDagError("--x and --y must name at least one cluster")
    if rule is Rule.DSEP:
        if sets["w"]:
            raise CDagError("--w does not apply to dsep; use --over/--under")
        sets.pop("w")
    else:
        if sets["over"] or sets["under"]:
            raise CDagError("--over/--under apply to dsep only")
        sets.pop("over")
        sets.pop("under")
    return RuleQuery(rule, **sets)


def _emit_graph(g, fmt, eligible=()):
    if fmt == "json":
        obj = graph_to_obj(g)
        if eligible:
            obj["eligible"] = [[str(u), str(v)] for u, v in sorted(eligible)]
        print(json.dumps(obj, indent=2))
    else:
        sys.stdout.write(format_micro_graph(g, eligible))


def cmd_validate(args) -> int:
    ok = validate(_load(args))
    if args.format == "json":
        print(json.dumps({"valid": ok}))
    else:
        print("valid" if ok else "invalid")
    return OK if ok else FAILS


def cmd_canonical(args) -> int:
    _emit_graph(canonical_graph(_load(args)).graph, args.format)
    return OK


def cmd_unfolded(args) -> int:
    u = unfolded_graph(_load(args))
    _emit_graph(u.graph, args.format, u.eligible)
    return OK


def cmd_reduce(args) -> int:
    sys.stdout.write(format_cdag(reduce_to_three(_load(args))))
    return OK


def _verdict(args, rule=None) -> int:
    v = check_rule(_load(args), _query(args, rule))
    sys.stdout.write(verdict_to_json(v) if args.format == "json" else verdict_to_text(v))
    return OK if v.holds else FAILS


def cmd_dsep(args) -> int:
    return _verdict(args, "DSEP")


def cmd_check_rule(args) -> int:
    return _verdict(args)


def cmd_witness(args) -> int:
    v = check_rule(_load(args), _query(args))
    if v.holds:
        print("HOLDS")
        return OK
    _emit_graph(v.witness_graph, args.format)
    return FAILS


def cmd_oracle_count(args) -> int:
    n = count_compatible(_load(args), _budget(args))
    print(json.dumps({"compatible_graphs": n}) if args.format == "json" else n)
    return OK


def cmd_oracle_violator(args) -> int:
    g = exists_violator(_load(args), _query(args), _budget(args))
    if g is None:
        print("NONE")
        return OK
    _emit_graph(g, args.format)
    return FAILS


def cmd_crosscheck(args) -> int:
    """Engine against oracle on seeded random instances."""
    rng = random.Random(args.seed)
    budget = _budget(args)
    bad = checked = 0
    for _ in range(args.cdags):
        c = random_cdag(rng, max_clusters=3, max_size=2, p_self=0.3)
        for _ in range(args.queries):
            q = random_query(rng, c)
            v = check_rule(c, q)
            oracle_holds = exists_violator(c, q, budget) is None
            checked += 1
            if v.holds != oracle_holds:
                bad += 1
                print(f"mismatch: {q.rule.value} {q.sets()} engine={v.holds} oracle={oracle_holds}")
                print(format_cdag(c), end="")
    if args.format == "json":
        print(json.dumps({"seed": args.seed, "queries": checked, "mismatches": bad}))
    else:
        print(f"seed {args.seed}: {checked} queries, {bad} mismatches")
    return OK if bad == 0 else FAILS


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cdag", description="Calculus checks on cluster graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, file=True, query=None, budget=False):
        sp = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        if file:
            sp.add_argument("file", help="C-DAG file, or - for standard input")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        if query:
            if query in ("rule", "any"):
                choices = ("1", "2", "3") if query == "rule" else ("1", "2", "3", "dsep")
                sp.add_argument("--rule", required=True, type=str.lower, choices=choices)
                sp.add_argument("--w", help="comma-separated clusters")
            sp.add_argument("--x", required=True, help="comma-separated clusters")
            sp.add_argument("--y", required=True, help="comma-separated clusters")
            sp.add_argument("--z", help="comma-separated clusters")
            if query in ("dsep", "any"):
                sp.add_argument("--over", help="remove arrowheads into these clusters")
                sp.add_argument("--under", help="remove tails out of these clusters")
        if budget:
            sp.add_argument("--max-graphs", type=int, default=10**6)
            sp.add_argument("--max-micro-vertices", type=int, default=10)
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate)
    add("canonical", cmd_canonical)
    add("unfolded", cmd_unfolded)
    add("reduce", cmd_reduce)
    add("dsep", cmd_dsep, query="dsep")
    add("check-rule", cmd_check_rule, query="rule")
    add("witness", cmd_witness, query="any")
    add("oracle-count", cmd_oracle_count, budget=True)
    add("oracle-violator", cmd_oracle_violator, query="any", budget=True)
    cc = add("crosscheck", cmd_crosscheck, file=False, budget=True)
    cc.add_argument("--seed", type=int, required=True)
    cc.add_argument("--cdags", type=int, default=20)
    cc.add_argument("--queries", type=int, default=10)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(f"cdag: budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    except (CDagError, GraphError, OSError, ValueError) as e:
        print(f"cdag: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
