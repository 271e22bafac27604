"""Brute-force referee: enumerate compatible graphs and replay the classical rules.

Nothing here depends on the structure search or on the calculus module; the
only shared code is the graph containers, the C-DAG model and the query type.

Two evaluation paths exist. :func:`enumerate_compatible` and
:func:`pearl_rule_fails` are plain Python over :mod:`graph_core`.
:func:`scan_violators` runs the same enumeration order through a compiled
bitmask kernel for the large sweeps; tests cross-check both paths.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .cdag_model import CDag, micro_vertices, require_valid
from .graph_core import Admg, MicroVertex, MixedGraph, ancestors, d_separated, is_acyclic, mutilate
from .queries import Rule, RuleQuery


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_graphs: int = 10**6
    max_micro_vertices: int = 10

    def __post_init__(self):
        if self.max_graphs < 1 or self.max_micro_vertices < 1:
            raise ValueError("budget caps must be positive")


DEFAULT_BUDGET = EnumerationBudget()


def _members(c: CDag, name: str) -> list:
    return [MicroVertex(name, i) for i in range(1, c.sizes[name] + 1)]


def edge_choices(c: CDag) -> list[tuple[tuple, list]]:
    """Per cluster edge, the micro-edges that may realise it.

    Order: directed cluster edges sorted, then bidirected ones sorted. Each
    entry is ``((kind, A, B), pairs)``.
    """
    out = []
    for a, b in sorted(c.directed):
        pairs = [(u, v) for u in _members(c, a) for v in _members(c, b) if u != v]
        out.append((("->", a, b), pairs))
    for a, b in sorted(c.bidirected):
        if a == b:
            ms = _members(c, a)
            pairs = [(ms[i], ms[j]) for i in range(len(ms)) for j in range(i + 1, len(ms))]
        else:
            pairs = [(u, v) for u in _members(c, a) for v in _members(c, b)]
        out.append((("<->", a, b), pairs))
    return out


def _subsets(pairs: list) -> list[list]:
    # nonempty subsets, ordered by their bitmask value
    return [[p for i, p in enumerate(pairs) if (m >> i) & 1] for m in range(1, 1 << len(pairs))]


def candidate_count(c: CDag) -> int:
    total = 1
    for _, pairs in edge_choices(c):
        total *= (1 << len(pairs)) - 1
    return total


def _check_budget_vertices(c: CDag, b: EnumerationBudget):
    require_valid(c)
    n = c.num_micro_vertices()
    if n > b.max_micro_vertices:
        raise BudgetExceeded(f"{n} micro-vertices exceed the cap of {b.max_micro_vertices}")


def _graph_from_digits(c: CDag, choices, digits) -> Admg:
    d, bi = [], []
    for ((kind, _, _), pairs), k in zip(choices, digits):
        chosen = [p for i, p in enumerate(pairs) if ((k + 1) >> i) & 1]
        (d if kind == "->" else bi).extend(chosen)
    return Admg(micro_vertices(c), d, bi)


def enumerate_compatible(c: CDag, b: EnumerationBudget = DEFAULT_BUDGET) -> Iterator[Admg]:
    """Yield every labelled acyclic graph compatible with ``c``, in a fixed order.

    For each cluster edge a nonempty set of realising micro-edges is chosen;
    the last cluster edge varies fastest. Cyclic unions are skipped.

    Raises
    ------
    BudgetExceeded
        When ``c`` has too many micro-vertices, or once more than
        ``b.max_graphs`` graphs would be produced.
    """
    _check_budget_vertices(c, b)
    choices = edge_choices(c)
    verts = micro_vertices(c)
    options = [_subsets(pairs) for _, pairs in choices]
    kinds = [kind for (kind, _, _), _ in choices]
    produced = 0
    for combo in itertools.product(*options):
        d, bi = [], []
        for kind, chosen in zip(kinds, combo):
            (d if kind == "->" else bi).extend(chosen)
        g = MixedGraph(verts, d, bi)
        if not is_acyclic(g):
            continue
        produced += 1
        if produced > b.max_graphs:
            raise BudgetExceeded(f"more than {b.max_graphs} compatible graphs")
        yield Admg(verts, g.directed, g.bidirected)


def micro_sets(c: CDag, q: RuleQuery) -> dict:
    return {f: micro_vertices(c, getattr(q, f)) for f in ("w", "x", "y", "z", "over", "under")}


def pearl_rule_fails(g: Admg, rule, w, x, y, z) -> bool:
    """Whether the classical rule's separation condition fails in ``g``.

    R1 tests y _||_ x | w, z after cutting arrowheads into w; R2 also cuts
    tails out of x; R3 cuts arrowheads into w and into those members of x
    that are not ancestors of z once w is cut.
    """
    rule = Rule.parse(rule.value if isinstance(rule, Rule) else rule)
    w, x, y, z = map(frozenset, (w, x, y, z))
    cond = w | z
    if rule is Rule.R1:
        h = mutilate(g, over=w)
    elif rule is Rule.R2:
        h = mutilate(g, over=w, under=x)
    elif rule is Rule.R3:
        xz = x - ancestors(mutilate(g, over=w), z)
        h = mutilate(g, over=w | xz)
    else:
        raise ValueError("pearl_rule_fails takes R1, R2 or R3")
    return not d_separated(h, y, x, cond)


def dsep_fails(g: Admg, x, y, z, over=(), under=()) -> bool:
    return not d_separated(mutilate(g, over=over, under=under), x, y, z)


def query_fails(g: Admg, c: CDag, q: RuleQuery) -> bool:
    """Evaluate a cluster query on one micro graph."""
    if q.vacuous:
        return False
    m = micro_sets(c, q)
    if q.rule is Rule.DSEP:
        return dsep_fails(g, m["x"], m["y"], m["z"], m["over"], m["under"])
    return pearl_rule_fails(g, q.rule, m["w"], m["x"], m["y"], m["z"])


def _encode(c: CDag, choices, queries: Sequence[RuleQuery]):
    verts = sorted(micro_vertices(c))
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    rows = sum((1 << len(p)) - 1 for _, p in choices)
    opt_ch = np.zeros((max(rows, 1), n), dtype=np.int64)
    opt_bi = np.zeros((max(rows, 1), n), dtype=np.int64)
    offs = [0]
    r = 0
    for (kind, _, _), pairs in choices:
        for m in range(1, 1 << len(pairs)):
            for i, (u, v) in enumerate(pairs):
                if (m >> i) & 1:
                    a, b = idx[u], idx[v]
                    if kind == "->":
                        opt_ch[r, a] |= 1 << b
                    else:
                        opt_bi[r, a] |= 1 << b
                        opt_bi[r, b] |= 1 << a
            r += 1
        offs.append(r)
    code = {Rule.R1: 0, Rule.R2: 1, Rule.R3: 2, Rule.DSEP: 3}
    qrule = np.array([code[q.rule] for q in queries], dtype=np.int64)
    qmask = np.zeros((len(queries), 6), dtype=np.int64)
    for k, q in enumerate(queries):
        m = micro_sets(c, q)
        for j, f in enumerate(("w", "x", "y", "z", "over", "under")):
            qmask[k, j] = sum(1 << idx[v] for v in m[f])
    return n, opt_ch, opt_bi, np.array(offs, dtype=np.int64), qrule, qmask


def _digits(choices, ordinal: int) -> list[int]:
    out = []
    for _, pairs in reversed(choices):
        radix = (1 << len(pairs)) - 1
        out.append(ordinal % radix)
        ordinal //= radix
    return out[::-1]


@dataclass(frozen=True)
class ScanResult:
    violators: tuple  # per query: Admg or None
    graph_count: int | None  # None when the scan stopped early


def scan_violators(c: CDag, queries: Sequence[RuleQuery], b: EnumerationBudget = DEFAULT_BUDGET,
                   count: bool = False) -> ScanResult:
    """First violating compatible graph for each query, via the compiled kernel.

    Equivalent to running :func:`exists_violator` per query; vacuous queries
    report None. With ``count`` the scan runs to the end and also reports
    the number of compatible graphs.
    """
    from . import _kernels

    _check_budget_vertices(c, b)
    if c.num_micro_vertices() > 62:
        raise BudgetExceeded("compiled oracle handles at most 62 micro-vertices")
    for q in queries:
        q.check_against(c)
    live = [q for q in queries if not q.vacuous]
    choices = edge_choices(c)
    n, opt_ch, opt_bi, offs, qrule, qmask = _encode(c, choices, live)
    first, total, status = _kernels.scan(n, opt_ch, opt_bi, offs, qrule, qmask, b.max_graphs, count)
    if status:
        raise BudgetExceeded(f"more than {b.max_graphs} compatible graphs")
    found = {}
    for q, f in zip(live, first):
        found[q] = None if f < 0 else _graph_from_digits(c, choices, _digits(choices, int(f)))
    vio = tuple(found.get(q) for q in queries)
    return ScanResult(vio, int(total) if count else None)


def exists_violator(c: CDag, q: RuleQuery, b: EnumerationBudget = DEFAULT_BUDGET,
                    compiled: bool = True) -> Admg | None:
    """First compatible graph (enumeration order) in which the query fails."""
    q.check_against(c)
    if q.vacuous:
        _check_budget_vertices(c, b)
        return None
    if compiled:
        return scan_violators(c, [q], b).violators[0]
    for g in enumerate_compatible(c, b):
        if query_fails(g, c, q):
            return g
    return None


def count_compatible(c: CDag, b: EnumerationBudget = DEFAULT_BUDGET, compiled: bool = True) -> int:
    if compiled:
        return scan_violators(c, [], b, count=True).graph_count
    return sum(1 for _ in enumerate_compatible(c, b))


def permutation_canonical_form(g: Admg, c: CDag) -> tuple:
    """Smallest edge listing over all within-cluster index permutations."""
    perms_per = [list(itertools.permutations(range(1, k + 1))) for _, k in c.clusters]
    names = c.names
    best = None
    for choice in itertools.product(*perms_per):
        mp = {n: p for n, p in zip(names, choice)}

        def f(v):
            return MicroVertex(v.cluster, mp[v.cluster][v.index - 1])

        d = tuple(sorted((f(u), f(v)) for u, v in g.directed))
        bi = tuple(sorted(tuple(sorted((f(u), f(v)))) for u, v in g.bidirected))
        key = (d, bi)
        if best is None or key < best:
            best = key
    return best


def count_up_to_permutation(c: CDag, b: EnumerationBudget = DEFAULT_BUDGET) -> int:
    return len({permutation_canonical_form(g, c) for g in enumerate_compatible(c, b)})
