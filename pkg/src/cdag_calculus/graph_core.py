"""Micro-level mixed graphs: containers, mutilation, ancestry and d-separation.

Vertices are usually :class:`MicroVertex` values but any hashable, mutually
orderable value works, which keeps the primitives usable on toy graphs with
string vertices.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Iterator, NamedTuple


class GraphError(ValueError):
    """Raised when a graph or a vertex set violates a container invariant."""


class CycleError(GraphError):
    """Raised when an acyclic graph is required but a directed cycle exists."""


class MicroVertex(NamedTuple):
    """Vertex ``index`` (1-based) of cluster ``cluster``; printed ``A.1``."""

    cluster: str
    index: int

    def __str__(self):
        return f"{self.cluster}.{self.index}"

    @classmethod
    def parse(cls, text: str) -> "MicroVertex":
        name, dot, idx = text.strip().rpartition(".")
        if not dot or not name or not idx.isdigit() or int(idx) < 1:
            raise GraphError(f"malformed micro-vertex {text!r}, expected NAME.INDEX")
        return cls(name, int(idx))


class Edge(NamedTuple):
    """A directed (``"->"``, ``u`` to ``v``) or bidirected (``"<->"``) edge.

    Bidirected edges are stored with ``u < v``.
    """

    kind: str
    u: Hashable
    v: Hashable

    def has_head_at(self, vertex) -> bool:
        if self.kind == "<->":
            return vertex == self.u or vertex == self.v
        return vertex == self.v

    def other(self, vertex):
        return self.v if vertex == self.u else self.u

    def __str__(self):
        return f"{self.u} {self.kind} {self.v}"


def directed(u, v) -> Edge:
    return Edge("->", u, v)


def bidirected(u, v) -> Edge:
    return Edge("<->", *sorted((u, v)))


def _pair(e) -> tuple:
    a, b = e
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class MixedGraph:
    """Directed plus bidirected edges over a finite vertex set, cycles allowed.

    Parameters
    ----------
    vertices : iterable
        Vertex set. Endpoints of edges are added automatically.
    directed : iterable of (u, v)
        Directed edges ``u -> v``.
    bidirected : iterable of (u, v)
        Bidirected edges; orientation is irrelevant and normalised.
    """

    vertices: frozenset = frozenset()
    directed: frozenset = frozenset()
    bidirected: frozenset = frozenset()

    def __post_init__(self):
        d = frozenset((a, b) for a, b in self.directed)
        b = frozenset(_pair(e) for e in self.bidirected)
        vs = set(self.vertices)
        for u, v in d:
            if u == v:
                raise GraphError(f"directed self-edge on {u}")
            vs.update((u, v))
        for u, v in b:
            if u == v:
                raise GraphError(f"bidirected self-pair on {u}")
            vs.update((u, v))
        object.__setattr__(self, "vertices", frozenset(vs))
        object.__setattr__(self, "directed", d)
        object.__setattr__(self, "bidirected", b)

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (self.vertices, self.directed, self.bidirected) == (
            other.vertices, other.directed, other.bidirected)

    def __hash__(self):
        return hash((self.vertices, self.directed, self.bidirected))

    # adjacency, built lazily and cached on the frozen instance
    @cached_property
    def children(self) -> dict:
        out = {v: set() for v in self.vertices}
        for u, v in self.directed:
            out[u].add(v)
        return {k: frozenset(s) for k, s in out.items()}

    @cached_property
    def parents(self) -> dict:
        out = {v: set() for v in self.vertices}
        for u, v in self.directed:
            out[v].add(u)
        return {k: frozenset(s) for k, s in out.items()}

    @cached_property
    def spouses(self) -> dict:
        out = {v: set() for v in self.vertices}
        for u, v in self.bidirected:
            out[u].add(v)
            out[v].add(u)
        return {k: frozenset(s) for k, s in out.items()}

    @cached_property
    def ordered_vertices(self) -> tuple:
        return tuple(sorted(self.vertices))

    def edges(self) -> list[Edge]:
        """All edges, directed block first, each block sorted."""
        return [Edge("->", u, v) for u, v in sorted(self.directed)] + [
            Edge("<->", u, v) for u, v in sorted(self.bidirected)
        ]

    def has_edge(self, e: Edge) -> bool:
        if e.kind == "->":
            return (e.u, e.v) in self.directed
        return _pair((e.u, e.v)) in self.bidirected

    def incident(self, v) -> Iterator[Edge]:
        """Edges touching ``v`` in canonical order of the far endpoint."""
        items = [(w, Edge("->", v, w)) for w in self.children[v]]
        items += [(w, Edge("->", w, v)) for w in self.parents[v]]
        items += [(w, bidirected(v, w)) for w in self.spouses[v]]
        items.sort(key=lambda t: (t[0], t[1].kind, t[1].u))
        for _, e in items:
            yield e

    def num_edges(self) -> int:
        return len(self.directed) + len(self.bidirected)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        body = ", ".join(str(e) for e in self.edges())
        return f"{type(self).__name__}({{{body}}}, n={len(self.vertices)})"


class Admg(MixedGraph):
    """A :class:`MixedGraph` whose directed part is acyclic (checked)."""

    def __post_init__(self):
        super().__post_init__()
        if not is_acyclic(self):
            raise CycleError("directed part contains a cycle")


def as_admg(g: MixedGraph) -> Admg:
    if isinstance(g, Admg):
        return g
    return Admg(g.vertices, g.directed, g.bidirected)


def _check_subset(g: MixedGraph, s, name="vertex set"):
    s = frozenset(s)
    extra = s - g.vertices
    if extra:
        raise GraphError(f"{name} not in graph: {sorted(map(str, extra))}")
    return s


def _check_disjoint(**sets):
    items = list(sets.items())
    for i, (na, a) in enumerate(items):
        for nb, b in items[i + 1:]:
            if a & b:
                raise GraphError(f"sets {na} and {nb} overlap")


def topological_order(g: MixedGraph) -> list | None:
    """Kahn's algorithm with smallest-vertex tie-breaking; None if cyclic."""
    indeg = {v: len(g.parents[v]) for v in g.vertices}
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g.children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return order if len(order) == len(g.vertices) else None


def is_acyclic(g: MixedGraph) -> bool:
    """True iff the directed part of ``g`` has no cycle."""
    if not g.directed:
        return True
    ch = g.children
    indeg = dict.fromkeys(g.vertices, 0)
    for _, v in g.directed:
        indeg[v] += 1
    ready = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for c in ch[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == len(indeg)


def _closure(start, step) -> set:
    seen = set(start)
    stack = list(start)
    while stack:
        v = stack.pop()
        for w in step[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def ancestors(g: MixedGraph, s: Iterable) -> frozenset:
    """Vertices with a directed path into ``s``; every vertex is its own ancestor."""
    return frozenset(_closure(_check_subset(g, s), g.parents))


def descendants(g: MixedGraph, s: Iterable) -> frozenset:
    return frozenset(_closure(_check_subset(g, s), g.children))


def mutilate(g: MixedGraph, over: Iterable = (), under: Iterable = ()) -> MixedGraph:
    """Drop arrowheads into ``over`` and directed tails out of ``under``.

    Bidirected edges touching ``over`` are removed. The vertex set and the
    concrete type of ``g`` are kept.
    """
    over = _check_subset(g, over, "over")
    under = _check_subset(g, under, "under")
    d = [(u, v) for u, v in g.directed if v not in over and u not in under]
    b = [(u, v) for u, v in g.bidirected if u not in over and v not in over]
    return type(g)(g.vertices, d, b)


def union(*graphs: MixedGraph) -> MixedGraph:
    vs, d, b = set(), set(), set()
    for g in graphs:
        vs |= g.vertices
        d |= g.directed
        b |= g.bidirected
    return MixedGraph(vs, d, b)


def induced_subgraph(g: MixedGraph, keep: Iterable) -> MixedGraph:
    keep = frozenset(keep)
    return type(g)(
        keep,
        [(u, v) for u, v in g.directed if u in keep and v in keep],
        [(u, v) for u, v in g.bidirected if u in keep and v in keep],
    )


def edge_subgraph(g: MixedGraph, edges: Iterable[Edge], vertices: Iterable = ()) -> MixedGraph:
    d, b = [], []
    for e in edges:
        if not g.has_edge(e):
            raise GraphError(f"edge {e} not in graph")
        (d if e.kind == "->" else b).append((e.u, e.v))
    return MixedGraph(vertices, d, b)


def weak_components(g: MixedGraph) -> list[frozenset]:
    nbr = {v: g.children[v] | g.parents[v] | g.spouses[v] for v in g.vertices}
    left = set(g.vertices)
    comps = []
    for v in g.ordered_vertices:
        if v in left:
            comp = _closure([v], nbr)
            left -= comp
            comps.append(frozenset(comp))
    return comps


def d_separated(g: MixedGraph, x: Iterable, y: Iterable, z: Iterable) -> bool:
    """Reachability test for d-separation of ``x`` and ``y`` given ``z``.

    Traverses (vertex, arrived-with-arrowhead) states, so walks rather than
    paths are explored; a collider may be passed only when it is an ancestor
    of ``z``. Bidirected edges carry arrowheads at both ends.

    Parameters
    ----------
    g : MixedGraph
        Normally an :class:`Admg`.
    x, y, z : iterable of vertices
        Pairwise disjoint subsets of ``g.vertices``.

    Returns
    -------
    bool
        True when every path between ``x`` and ``y`` is blocked by ``z``.
    """
    x = _check_subset(g, x, "x")
    y = _check_subset(g, y, "y")
    z = _check_subset(g, z, "z")
    _check_disjoint(x=x, y=y, z=z)
    if not x or not y:
        return True
    anc_z = _closure(z, g.parents)
    # state: (vertex, True if we arrived through an arrowhead at vertex)
    stack = []
    for v in x:
        stack += [(c, True) for c in g.children[v]]
        stack += [(s, True) for s in g.spouses[v]]
        stack += [(p, False) for p in g.parents[v]]
    seen = set()
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        v, head = state
        if v in y:
            return False
        if head:
            if v in anc_z:
                stack += [(p, False) for p in g.parents[v]]
                stack += [(s, True) for s in g.spouses[v]]
            if v not in z:
                stack += [(c, True) for c in g.children[v]]
        elif v not in z:
            stack += [(c, True) for c in g.children[v]]
            stack += [(s, True) for s in g.spouses[v]]
            stack += [(p, False) for p in g.parents[v]]
    return True


def iter_simple_paths(g: MixedGraph, x: Iterable, y: Iterable) -> Iterator["Path"]:
    """Every simple path from ``x`` to ``y`` whose interior avoids ``x`` and ``y``."""
    x, y = frozenset(x), frozenset(y)

    def extend(verts, edges):
        v = verts[-1]
        for e in g.incident(v):
            w = e.other(v)
            if w in verts or w in x:
                continue
            if w in y:
                yield Path(verts + (w,), edges + (e,))
            else:
                yield from extend(verts + (w,), edges + (e,))

    for s in sorted(x):
        yield from extend((s,), ())


def d_separated_by_paths(g: MixedGraph, x: Iterable, y: Iterable, z: Iterable) -> bool:
    """Naive d-separation: test every simple path for activity.

    A collider is open when it or one of its descendants lies in ``z``.
    Exponential; intended as a cross-check for :func:`d_separated` on small
    graphs.
    """
    x = _check_subset(g, x, "x")
    y = _check_subset(g, y, "y")
    z = _check_subset(g, z, "z")
    _check_disjoint(x=x, y=y, z=z)
    for p in iter_simple_paths(g, x, y):
        if path_is_active(g, p, z):
            return False
    return True


def path_is_active(g: MixedGraph, p: "Path", z: Iterable) -> bool:
    """Whether ``p`` is d-connecting given ``z`` (collider rule via descendants)."""
    z = frozenset(z)
    for i in range(1, len(p.vertices) - 1):
        v = p.vertices[i]
        if p.is_collider(i):
            if not (descendants(g, [v]) & z):
                return False
        elif v in z:
            return False
    return True


@dataclass(frozen=True)
class Path:
    """Alternating vertex/edge sequence ``v0 e1 v1 ... ek vk``."""

    vertices: tuple
    edges: tuple = field(default=())

    def __post_init__(self):
        if len(self.edges) != len(self.vertices) - 1:
            raise GraphError("path needs exactly one edge between consecutive vertices")
        for i, e in enumerate(self.edges):
            a, b = self.vertices[i], self.vertices[i + 1]
            if {e.u, e.v} != {a, b}:
                raise GraphError(f"edge {e} does not join {a} and {b}")

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def is_collider(self, i: int) -> bool:
        if i <= 0 or i >= len(self.vertices) - 1:
            return False
        v = self.vertices[i]
        return self.edges[i - 1].has_head_at(v) and self.edges[i].has_head_at(v)

    def as_sequence(self) -> list:
        out = [self.vertices[0]]
        for e, v in zip(self.edges, self.vertices[1:]):
            out += [e, v]
        return out

    def __len__(self):
        return len(self.edges)

    def __str__(self):
        parts = [str(self.vertices[0])]
        for e, v in zip(self.edges, self.vertices[1:]):
            prev = parts[-1]
            if e.kind == "<->":
                arrow = "<->"
            else:
                arrow = "->" if str(e.u) == prev else "<-"
            parts += [arrow, str(v)]
        return " ".join(parts)
