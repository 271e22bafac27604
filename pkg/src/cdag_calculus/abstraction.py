"""Cluster/micro bridge: projection, compatibility, canonical and unfolded graphs."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .cdag_model import CDag, CDagError, micro_vertices, require_valid
from .graph_core import Admg, MicroVertex, MixedGraph, is_acyclic


def project(g: MixedGraph, partition: CDag) -> CDag:
    """Cluster graph induced by ``g`` over the clusters of ``partition``.

    Only the cluster names and cardinalities of ``partition`` are used; its
    edges are ignored.
    """
    expected = micro_vertices(partition)
    if g.vertices != expected:
        raise CDagError("partition does not cover exactly the vertices of the graph")
    d = {(u.cluster, v.cluster) for u, v in g.directed}
    b = {(u.cluster, v.cluster) for u, v in g.bidirected}
    return CDag(partition.clusters, frozenset(d), frozenset(b))


def is_compatible(g: MixedGraph, c: CDag) -> bool:
    """True iff ``g`` is acyclic and projects onto exactly the edges of ``c``."""
    if g.vertices != micro_vertices(c):
        raise CDagError("vertex set of graph differs from the micro-vertices of the C-DAG")
    p = project(g, c)
    return p.directed == c.directed and p.bidirected == c.bidirected and is_acyclic(g)


@dataclass(frozen=True)
class CanonicalGraph:
    graph: Admg
    source: CDag


@dataclass(frozen=True)
class UnfoldedGraph:
    graph: MixedGraph
    canonical: CanonicalGraph
    eligible: frozenset  # directed micro-edges not already canonical

    @property
    def source(self) -> CDag:
        return self.canonical.source


def _micro(c: CDag, name: str) -> list[MicroVertex]:
    return [MicroVertex(name, i) for i in range(1, c.sizes[name] + 1)]


@lru_cache(maxsize=4096)
def canonical_graph(c: CDag) -> CanonicalGraph:
    """The canonical compatible graph of a valid C-DAG.

    Every bidirected cluster edge contributes all bidirected micro pairs with
    distinct endpoints, every self-loop contributes the forward edges
    ``V.i -> V.j`` (i < j), and every other directed cluster edge ``V -> W``
    contributes the single edge ``V.1 -> W.k`` with ``k`` the size of ``W``.
    """
    require_valid(c)
    d, b = set(), set()
    for p, q in c.bidirected:
        for u in _micro(c, p):
            for v in _micro(c, q):
                if u != v:
                    b.add((u, v))
    for p, q in c.directed:
        if p == q:
            vs = _micro(c, p)
            d.update((vs[i], vs[j]) for i in range(len(vs)) for j in range(i + 1, len(vs)))
        else:
            d.add((MicroVertex(p, 1), MicroVertex(q, c.sizes[q])))
    return CanonicalGraph(Admg(micro_vertices(c), d, b), c)


def _reach_sets(g: MixedGraph) -> dict:
    # descendants (reflexive) of every vertex
    out = {}
    for v in g.vertices:
        seen = {v}
        stack = [v]
        while stack:
            for w in g.children[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out[v] = seen
    return out


@lru_cache(maxsize=4096)
def unfolded_graph(c: CDag) -> UnfoldedGraph:
    """Canonical graph plus every individually acyclicity-preserving edge.

    A candidate ``V.v -> W.w`` needs the cluster edge ``V -> W`` (self-loops
    included, ``v != w``) and must not close a cycle with the canonical
    graph. The union of all such edges may be cyclic.
    """
    can = canonical_graph(c)
    reach = _reach_sets(can.graph)
    elig = set()
    for p, q in c.directed:
        for u in _micro(c, p):
            for v in _micro(c, q):
                if u == v or (u, v) in can.graph.directed:
                    continue
                # adding u -> v closes a cycle iff u is already a descendant of v
                if u not in reach[v]:
                    elig.add((u, v))
    g = MixedGraph(can.graph.vertices, can.graph.directed | elig, can.graph.bidirected)
    return UnfoldedGraph(g, can, frozenset(elig))
