"""Shared fixtures data and small independent oracles for the test suite."""
from __future__ import annotations

import itertools
from pathlib import Path

from cdag_calculus.cdag_model import parse_cdag
from cdag_calculus.graph_core import MicroVertex, MixedGraph, is_acyclic, union
from cdag_calculus.structures import connects, is_structure_of_interest, structure_roots

DATA = Path(__file__).parent / "data"


def load(name: str):
    return parse_cdag((DATA / f"{name}.cdag").read_text())


def mv(text: str) -> MicroVertex:
    return MicroVertex.parse(text)


def vs(text: str) -> frozenset:
    return frozenset(mv(t) for t in text.split())


def micro(directed="", bidirected="", vertices="") -> MixedGraph:
    """Graph from 'A.1>B.2 B.2>C.1' style edge lists."""
    d = [tuple(map(mv, e.split(">"))) for e in directed.split()]
    b = [tuple(map(mv, e.split("-"))) for e in bidirected.split()]
    return MixedGraph(vs(vertices) if vertices else frozenset(), d, b)


def brute_force_structure(host: MixedGraph, x, y, z, root_allowed=None, base=None):
    """Scan every edge subset of ``host`` for a connecting structure.

    Exponential; only for hosts with a dozen edges or so.
    """
    edges = [("d", e) for e in sorted(host.directed)] + [("b", e) for e in sorted(host.bidirected)]
    for r in range(1, len(edges) + 1):
        for pick in itertools.combinations(edges, r):
            g = MixedGraph(
                frozenset(),
                [e for k, e in pick if k == "d"],
                [e for k, e in pick if k == "b"],
            )
            if not is_structure_of_interest(g) or not connects(g, x, y, z):
                continue
            if root_allowed is not None and not structure_roots(g) <= root_allowed:
                continue
            if base is not None and not is_acyclic(union(base, g)):
                continue
            return g
    return None
