"""Seeded random instances for property suites and CLI cross-checks."""
from __future__ import annotations

import random

from .cdag_model import CDag, validate
from .graph_core import Admg
from .queries import Rule, RuleQuery


def random_admg(rng: random.Random, n: int, p_dir: float, p_bi: float) -> Admg:
    """ADMG on vertices V0..V{n-1}: a random topological order, then Bernoulli edges."""
    vs = [f"V{i}" for i in range(n)]
    order = vs[:]
    rng.shuffle(order)
    d = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p_dir]
    b = [(vs[i], vs[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p_bi]
    return Admg(vs, d, b)


def random_disjoint_sets(rng: random.Random, items, k: int = 3, p_empty: float = 0.25) -> list:
    """Split a random subset of ``items`` into ``k`` disjoint sets."""
    out = [set() for _ in range(k)]
    for it in sorted(items):
        slot = rng.randrange(k + 1) if rng.random() >= p_empty else k
        if slot < k:
            out[slot].add(it)
    return [frozenset(s) for s in out]


def random_cdag(rng: random.Random, max_clusters: int = 4, min_clusters: int = 2, max_size: int = 6, p_dir: float = 0.3,
                p_bi: float = 0.15, p_self: float = 0.25, acyclic: bool = False) -> CDag:
    """A valid random C-DAG (rejection sampling on validity).

    With ``acyclic`` the directed part follows the declaration order and has
    no self-loops.
    """
    while True:
        k = rng.randint(min_clusters, max_clusters)
        names = [chr(ord("A") + i) for i in range(k)]
        clusters = tuple((n, rng.randint(1, max_size)) for n in names)
        d, b = set(), set()
        for i, a in enumerate(names):
            for j, c in enumerate(names):
                if i == j:
                    if not acyclic and rng.random() < p_self:
                        d.add((a, a))
                    if rng.random() < p_bi * 0.5:
                        b.add((a, a))
                elif (not acyclic or i < j) and rng.random() < p_dir:
                    d.add((a, c))
                if i < j and rng.random() < p_bi:
                    b.add((a, c))
        cd = CDag(clusters, frozenset(d), frozenset(b))
        if validate(cd):
            return cd


def random_query(rng: random.Random, c: CDag, rules=(Rule.R1, Rule.R2, Rule.R3, Rule.DSEP)) -> RuleQuery:
    """Random query with nonempty, pairwise disjoint cluster sets for x and y."""
    names = list(c.names)
    if len(names) < 2:
        raise ValueError("queries need at least two clusters")
    while True:
        rule = rng.choice(list(rules))
        roles = [rng.choice("wxyz..") for _ in names]
        sets = {r: frozenset(n for n, rr in zip(names, roles) if rr == r) for r in "wxyz"}
        if sets["x"] and sets["y"]:
            break
    if rule is Rule.DSEP:
        over = frozenset(n for n in names if rng.random() < 0.2)
        under = frozenset(n for n in names if rng.random() < 0.2)
        return RuleQuery(rule, x=sets["x"], y=sets["y"], z=sets["z"] | sets["w"], over=over, under=under)
    return RuleQuery(rule, sets["w"], sets["x"], sets["y"], sets["z"])
