"""Rule checks and cluster separation on C-DAGs, with counterexample synthesis."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .abstraction import canonical_graph, unfolded_graph
from .cdag_model import CDag, CDagError, micro_vertices, require_valid
from .graph_core import Admg, CycleError, MixedGraph, is_acyclic, mutilate, union
from .queries import Rule, RuleQuery, dsep_query
from .structures import SearchConstraints, Structure, find_connecting_structure


@dataclass(frozen=True)
class Verdict:
    query: RuleQuery
    holds: bool
    statement: str
    witness_graph: Admg | None = None
    witness_structure: Structure | None = None
    note: str | None = None


def _names(s, lower: bool) -> str:
    return ", ".join(sorted((n.lower() if lower else n) for n in s))


def _prob(y, parts) -> str:
    parts = [p for p in parts if p]
    return f"P({y} | {', '.join(parts)})" if parts else f"P({y})"


def rule_statement(q: RuleQuery) -> str:
    """The equality (or separation claim) certified when the query holds."""
    if q.rule is Rule.DSEP:
        head = f"{_names(q.x, False)} ⊥ {_names(q.y, False)}"
        if q.z:
            head += f" | {_names(q.z, False)}"
        text = f"{head} in every compatible graph"
        cuts = []
        if q.over:
            cuts.append(f"arrowheads into {_names(q.over, False)}")
        if q.under:
            cuts.append(f"tails out of {_names(q.under, False)}")
        if cuts:
            text += " after removing " + " and ".join(cuts)
        return text
    y = _names(q.y, True) or "∅"
    do_w = f"do({_names(q.w, True)})" if q.w else ""
    x = _names(q.x, True)
    do_x = f"do({x})" if x else ""
    z = _names(q.z, True)
    if q.rule is Rule.R1:
        lhs, rhs = [do_w, x, z], [do_w, z]
    elif q.rule is Rule.R2:
        lhs, rhs = [do_w, do_x, z], [do_w, x, z]
    else:
        lhs, rhs = [do_w, do_x, z], [do_w, z]
    return f"{_prob(y, lhs)} = {_prob(y, rhs)}"


def search_constraints(c: CDag, q: RuleQuery) -> SearchConstraints:
    """The search problem deciding ``q`` on ``c``.

    The unfolded graph is mutilated at micro level (never the C-DAG itself);
    conditioning merges ``w`` and ``z``; rule 3 confines roots to ``w``, ``z``
    and ``y``.
    """
    m = {f: micro_vertices(c, getattr(q, f)) for f in ("w", "x", "y", "z")}
    cond = m["w"] | m["z"]
    allowed = None
    if q.rule is Rule.DSEP:
        host = _mutilated_unfolded(c, q.over, q.under)
        cond = m["z"]
    elif q.rule is Rule.R2:
        host = _mutilated_unfolded(c, q.w, q.x)
    else:
        host = _mutilated_unfolded(c, q.w, frozenset())
        if q.rule is Rule.R3:
            allowed = cond | m["y"]
    return SearchConstraints(host, m["x"], m["y"], cond, allowed, canonical_graph(c).graph)


@lru_cache(maxsize=4096)
def _mutilated_unfolded(c: CDag, over: frozenset, under: frozenset) -> MixedGraph:
    g = unfolded_graph(c).graph
    if not over and not under:
        return g
    return mutilate(g, micro_vertices(c, over), micro_vertices(c, under))


def check_rule(c: CDag, q: RuleQuery) -> Verdict:
    """Decide whether the rule in ``q`` holds in every graph compatible with ``c``.

    Raises
    ------
    CDagError
        If ``c`` is invalid or the query names unknown clusters (overlapping
        query sets are rejected when the query is built).
    """
    require_valid(c)
    q.check_against(c)
    statement = rule_statement(q)
    if q.vacuous:
        return Verdict(q, True, statement, note="vacuous: x or y is empty")
    sigma = find_connecting_structure(search_constraints(c, q))
    if sigma is None:
        return Verdict(q, True, statement)
    return Verdict(q, False, statement, build_witness(c, sigma), sigma)


def cluster_dsep(c: CDag, x, y, z=(), over=(), under=()) -> Verdict:
    """Separation of clusters ``x`` and ``y`` given ``z`` in every compatible graph,
    after removing arrowheads into ``over`` and tails out of ``under``."""
    return check_rule(c, dsep_query(x, y, z, over, under))


def build_witness(c: CDag, sigma: Structure | MixedGraph) -> Admg:
    """Canonical graph of ``c`` joined with ``sigma``; compatible with ``c``."""
    g = sigma.graph if isinstance(sigma, Structure) else sigma
    unf = unfolded_graph(c)
    if not (g.directed <= unf.graph.directed and g.bidirected <= unf.graph.bidirected):
        raise CDagError("structure is not inside the unfolded graph")
    u = union(unf.canonical.graph, g)
    if not is_acyclic(u):
        raise CycleError("canonical graph plus structure is cyclic")
    return Admg(u.vertices, u.directed, u.bidirected)
