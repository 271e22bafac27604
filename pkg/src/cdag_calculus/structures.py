"""Structures of interest and the exact search for connecting structures.

A structure of interest is a weakly connected fragment in which every vertex
has at most one outgoing directed edge, or exactly two and no incoming
arrowhead. Its roots are the vertices without outgoing edges. The search
decides whether a host graph contains a structure that connects ``x`` and
``y`` given ``z`` while staying acyclic together with a fixed base graph.

How the search works
--------------------
Extra edges only ever help d-connection, so a connecting structure exists
iff some edge set ``D`` inside the host, acyclic together with the base,
carries a d-connecting walk whose colliders outside ``z`` have directed
tails into ``z``. Equivalently some linear order extending the base makes
the host edges that point forward in it connecting. The search branches on
the orientation of single vertex pairs, bounding each branch from above
(edges not yet contradicted) and below (edges already implied). A found walk
is turned into a path and then into a structure, and the result is
re-checked by the plain predicates below.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .graph_core import (
    Admg,
    Edge,
    GraphError,
    MixedGraph,
    Path,
    ancestors,
    as_admg,
    bidirected,
    directed,
    is_acyclic,
    topological_order,
    union,
    weak_components,
)


class StructureError(GraphError):
    pass


@dataclass(frozen=True)
class Structure:
    graph: MixedGraph
    roots: frozenset

    @classmethod
    def from_graph(cls, g: MixedGraph) -> "Structure":
        if not is_structure_of_interest(g):
            raise StructureError("graph is not a structure of interest")
        return cls(g, structure_roots(g))

    @property
    def vertices(self) -> frozenset:
        return self.graph.vertices


def structure_roots(g: MixedGraph) -> frozenset:
    return frozenset(v for v in g.vertices if not g.children[v])


def is_structure_of_interest(g: MixedGraph) -> bool:
    """Connected, and each vertex has <= 1 out-edge or 2 out-edges with no arrowhead in."""
    if not g.vertices or len(weak_components(g)) != 1:
        return False
    for v in g.vertices:
        out = len(g.children[v])
        if out <= 1:
            continue
        if out > 2 or g.parents[v] or g.spouses[v]:
            return False
    return True


def connects(s, x: Iterable, y: Iterable, z: Iterable) -> bool:
    """Whether structure ``s`` connects ``x`` and ``y`` given ``z``.

    ``s`` meets both ``x`` and ``y``, every root lies in ``z``, ``x`` or ``y``,
    and no non-root lies in ``z``.
    """
    g = s.graph if isinstance(s, Structure) else s
    x, y, z = frozenset(x), frozenset(y), frozenset(z)
    if x & y or x & z or y & z:
        raise StructureError("x, y and z must be pairwise disjoint")
    vs = g.vertices
    roots = structure_roots(g)
    return bool(vs & x) and bool(vs & y) and roots <= (x | y | z) and not ((vs - roots) & z)


@dataclass(frozen=True)
class SearchConstraints:
    """Inputs of :func:`find_connecting_structure`.

    ``root_allowed`` of None means every vertex. When given it must contain
    ``y`` and ``z`` and either all of ``x`` or none of it; these are the two
    shapes the rule checks need, and the search is exact for both.
    ``base`` of None means the edgeless graph.
    """

    host: MixedGraph
    x: frozenset
    y: frozenset
    z: frozenset
    root_allowed: frozenset | None = None
    base: Admg | None = None

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.root_allowed is not None:
            object.__setattr__(self, "root_allowed", frozenset(self.root_allowed))
        x, y, z = self.x, self.y, self.z
        if x & y or x & z or y & z:
            raise StructureError("x, y and z must be pairwise disjoint")
        universe = self.host.vertices | (self.base.vertices if self.base else frozenset())
        if not (x | y | z) <= universe:
            raise StructureError("query vertices outside the graph")
        if self.base is not None and not isinstance(self.base, Admg) and not is_acyclic(self.base):
            raise StructureError("base graph must be acyclic")
        ra = self.root_allowed
        if ra is not None:
            if not (y | z) <= ra:
                raise StructureError("root_allowed must contain y and z")
            if (x & ra) and not x <= ra:
                raise StructureError("root_allowed must contain all of x or none of it")


def _add_edge(cl: tuple, a: int, b: int) -> tuple:
    # cl[k]: reflexive descendant mask of k; add a -> b
    rb = cl[b]
    return tuple(m | rb if (m >> a) & 1 else m for m in cl)


@lru_cache(maxsize=512)
def _prepare(host: MixedGraph, base: Admg | None):
    """Index-level view of host and base shared by all queries on them."""
    verts = sorted(host.vertices | (base.vertices if base else frozenset()))
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    # adjacency entries: (j, head at i, head at j, tail, head); tail = head = -1 if bidirected
    adj = [[] for _ in range(n)]
    hch = [[] for _ in range(n)]
    for u, v in host.directed:
        i, j = idx[u], idx[v]
        adj[i].append((j, False, True, i, j))
        adj[j].append((i, True, False, i, j))
        hch[i].append(j)
    for u, v in host.bidirected:
        i, j = idx[u], idx[v]
        adj[i].append((j, True, True, -1, -1))
        adj[j].append((i, True, True, -1, -1))
    adj = tuple(tuple(sorted(a)) for a in adj)
    hch = tuple(tuple(sorted(h)) for h in hch)
    cl = [1 << i for i in range(n)]
    if base is not None:
        for v in reversed(_topo(base)):
            i = idx[v]
            for c in base.children[v]:
                cl[i] |= cl[idx[c]]
    return tuple(verts), idx, adj, hch, tuple(cl)


class _Search:
    """Branch and bound over partial orders that extend the base.

    For a partial order ``P`` a host edge ``a -> b`` is forced when ``a < b``
    in ``P``, dead when ``b <= a`` and open otherwise. If the live edges
    (forced or open) cannot connect, no extension of ``P`` can. If some
    certificate (walk plus collider tails) uses forced edges only, every
    extension carries it. Otherwise we branch on one open certificate edge;
    the two branches split the linear extensions, so the decision is exact.
    """

    def __init__(self, k: SearchConstraints):
        self.k = k
        verts, idx, self.adj, self.hch, self.cl0 = _prepare(k.host, k.base)
        self.verts, self.idx = verts, idx
        n = len(verts)

        def mask(s):
            m = 0
            for v in s:
                m |= 1 << idx[v]
            return m

        self.X, self.Y, self.Z = mask(k.x), mask(k.y), mask(k.z)
        self.allowed = (1 << n) - 1 if k.root_allowed is None else mask(k.root_allowed & set(verts))
        hpa = [[] for _ in range(n)]
        for i, cs in enumerate(self.hch):
            for j in cs:
                hpa[j].append(i)
        self.hpa = hpa

    def _anc(self, R) -> int:
        # ancestors of z over live directed edges
        anc = self.Z
        todo = [i for i in range(len(self.verts)) if (anc >> i) & 1]
        while todo:
            j = todo.pop()
            for i in self.hpa[j]:
                if not (anc >> i) & 1 and not (R[j] >> i) & 1:
                    anc |= 1 << i
                    todo.append(i)
        return anc

    def _tail(self, R, i):
        # fewest open edges on a live directed path from i into z
        Z = self.Z
        prev = {i: None}
        cost = {i: 0}
        dq = deque([i])
        done = set()
        while dq:
            u = dq.popleft()
            if u in done:
                continue
            done.add(u)
            if (Z >> u) & 1:
                out = []
                while prev[u] is not None:
                    out.append((prev[u], u))
                    u = prev[u]
                return out[::-1]
            for w in self.hch[u]:
                if (R[w] >> u) & 1:
                    continue
                c = cost[u] + (0 if (R[u] >> w) & 1 else 1)
                if c < cost.get(w, 1 << 30):
                    cost[w] = c
                    prev[w] = u
                    (dq.appendleft if c == cost[u] else dq.append)(w)
        return None

    def _certificate(self, R):
        """(directed edges, walk) connecting in the live graph, or None."""
        X, Y, Z, allowed = self.X, self.Y, self.Z, self.allowed
        anc = self._anc(R)
        n = len(self.verts)
        prev = {}
        cost = {}
        dq = deque()
        for i in range(n):
            if (X >> i) & 1:
                st = (i, 2)
                prev[st] = None
                cost[st] = 0
                dq.append(st)
        done = set()
        while dq:
            st = dq.popleft()
            if st in done:
                continue
            done.add(st)
            i, h = st
            bit = 1 << i
            for j, hi, hj, a, b in self.adj[i]:
                if (X >> j) & 1 or (a >= 0 and (R[b] >> a) & 1):
                    continue
                if h == 2:
                    need = hi and not allowed & bit
                    if need and not anc & bit:
                        continue
                elif h and hi:
                    if Z & bit:
                        need = False
                    elif anc & bit:
                        need = True
                    else:
                        continue
                else:
                    if Z & bit:
                        continue
                    need = False
                step = (i, j, a, b, need)
                if (Y >> j) & 1:
                    return self._assemble(R, prev, st, step)
                nxt = (j, int(hj))
                c = cost[st] + (1 if a >= 0 and not (R[a] >> b) & 1 else 0)
                if c < cost.get(nxt, 1 << 30):
                    cost[nxt] = c
                    prev[nxt] = (st, step)
                    (dq.appendleft if c == cost[st] else dq.append)(nxt)
        return None

    def _assemble(self, R, prev, st, last):
        walk = [last]
        while prev[st] is not None:
            st, step = prev[st]
            walk.append(step)
        walk.reverse()
        dedges = []
        for i, _, a, b, need in walk:
            if need:
                dedges.extend(self._tail(R, i))
            if a >= 0:
                dedges.append((a, b))
        return dedges, [(i, j, a, b) for i, j, a, b, _ in walk]

    def run(self):
        """Return (directed edge index pairs, walk edges) or None."""
        stack = [self.cl0]
        failed = set()
        while stack:
            R = stack.pop()
            if R in failed:
                continue
            cert = self._certificate(R)
            if cert is None:
                failed.add(R)
                continue
            dedges, walk = cert
            open_edges = [(a, b) for a, b in dedges if not (R[a] >> b) & 1]
            if not open_edges:
                return set(dedges), walk
            a, b = open_edges[0]
            stack.append(_add_edge(R, b, a))
            stack.append(_add_edge(R, a, b))
        return None

    def to_graph(self, found) -> Admg:
        dedges, walk = found
        v = self.verts
        d = {(v[a], v[b]) for a, b in dedges}
        bi = {(v[i], v[j]) for i, j, a, _ in walk if a < 0}
        return Admg(frozenset(), d, bi)


def _topo(g: MixedGraph) -> list:
    order = topological_order(g)
    if order is None:
        raise StructureError("base graph must be acyclic")
    return order


def _path_in(g: MixedGraph, x, y, z, allowed) -> Path | None:
    """First d-connecting path from x to y in g with interior outside x and y.

    A start vertex entered by an arrowhead must lie in ``allowed`` or be an
    ancestor of ``z`` in ``g``.
    """
    anc = ancestors(g, z & g.vertices)

    def extend(verts, edges):
        v = verts[-1]
        for e in g.incident(v):
            w = e.other(v)
            if w in verts or w in x:
                continue
            head_v = e.has_head_at(v)
            if len(verts) == 1:
                if head_v and v not in allowed and v not in anc:
                    continue
            else:
                collider = edges[-1].has_head_at(v) and head_v
                if collider and v not in anc:
                    continue
                if not collider and v in z:
                    continue
            if w in y:
                return Path(verts + (w,), edges + (e,))
            found = extend(verts + (w,), edges + (e,))
            if found is not None:
                return found
        return None

    for s in sorted(x & g.vertices):
        p = extend((s,), ())
        if p is not None:
            return p
    return None


def find_connecting_structure(k: SearchConstraints) -> Structure | None:
    """Exact search for a connecting structure inside ``k.host``.

    Returns a structure ``s`` with ``s`` inside the host, ``connects(s, x, y,
    z)``, roots inside ``root_allowed`` and ``base + s`` acyclic; None when no
    such structure exists. The first structure in canonical exploration order
    is returned, so results are deterministic.
    """
    if not k.x or not k.y:
        return None
    search = _Search(k)
    found = search.run()
    if found is None:
        return None
    u = search.to_graph(found)
    allowed = k.root_allowed if k.root_allowed is not None else u.vertices | k.x | k.y | k.z
    path = _path_in(u, k.x, k.y, k.z, allowed)
    if path is None:
        raise AssertionError("search produced an edge set without a connecting path")
    s = promote_path_to_structure(u, path, k.x, k.y, k.z, root_allowed=k.root_allowed)
    _verify(s, k)
    return s


def _verify(s: Structure, k: SearchConstraints) -> None:
    g = s.graph
    ok = (
        is_structure_of_interest(g)
        and connects(s, k.x, k.y, k.z)
        and (k.root_allowed is None or s.roots <= k.root_allowed)
        and g.directed <= k.host.directed
        and g.bidirected <= k.host.bidirected
        and (k.base is None or is_acyclic(union(k.base, g)))
    )
    if not ok:
        raise AssertionError("search result failed independent verification")


def _check_path(g: MixedGraph, path: Path, x, y, z) -> None:
    if path.start not in x or path.end not in y:
        raise StructureError("path must run from x to y")
    if len(set(path.vertices)) != len(path.vertices):
        raise StructureError("path repeats a vertex")
    for e in path.edges:
        if not g.has_edge(e):
            raise StructureError(f"path edge {e} not in graph")
    anc = ancestors(g, z & g.vertices)
    for i in range(1, len(path.vertices) - 1):
        v = path.vertices[i]
        if path.is_collider(i):
            if v not in anc:
                raise StructureError(f"collider {v} is not an ancestor of z")
        elif v in z:
            raise StructureError(f"non-collider {v} is in z")


def _directed_path_to(g: MixedGraph, start, z) -> list | None:
    """Shortest directed path start -> ... -> z meeting z only at its end."""
    prev = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(g.children[v]):
                if w in prev:
                    continue
                prev[w] = v
                if w in z:
                    out = [w]
                    while prev[out[-1]] is not None:
                        out.append(prev[out[-1]])
                    return out[::-1]
                nxt.append(w)
        frontier = nxt
    return None


def promote_path_to_structure(g: MixedGraph, path: Path, x, y, z, root_allowed=None) -> Structure:
    """Turn a d-connecting path into a connecting structure inside ``g``.

    Roots outside ``z`` that are not permitted (colliders outside ``z``, and
    endpoints missing from ``root_allowed``) are removed one at a time by
    attaching a directed path from the root into ``z``. When that path runs
    into a fork of the current structure, one of the fork's out-edges is
    dropped and the component still joining ``x`` and ``y`` is kept.

    Raises
    ------
    StructureError
        If the path is not d-connecting in ``g`` or a bad root cannot reach ``z``.
    """
    x, y, z = frozenset(x), frozenset(y), frozenset(z)
    _check_path(g, path, x, y, z)
    ok_roots = x | y | z
    if root_allowed is not None:
        ok_roots &= frozenset(root_allowed)
    d = {(e.u, e.v) for e in path.edges if e.kind == "->"}
    b = {(e.u, e.v) for e in path.edges if e.kind == "<->"}
    sigma = MixedGraph(path.vertices, d, b)
    for _ in range(4 * len(g.vertices) + 4):
        bad = sorted(r for r in structure_roots(sigma) if r not in ok_roots)
        if not bad:
            break
        sigma = _remove_root(g, sigma, bad[0], x, y, z)
    else:
        raise AssertionError("root repair did not terminate")
    s = Structure.from_graph(sigma)
    if not connects(s, x, y, z):
        raise AssertionError("promoted structure does not connect")
    return s


def _remove_root(g, sigma: MixedGraph, r, x, y, z) -> MixedGraph:
    tail = _directed_path_to(g, r, z)
    if tail is None:
        raise StructureError(f"root {r} has no directed path into z")
    hit = next((i for i in range(1, len(tail)) if tail[i] in sigma.vertices), None)
    if hit is None:
        return MixedGraph(sigma.vertices | set(tail), sigma.directed | set(zip(tail, tail[1:])), sigma.bidirected)
    w = tail[hit]
    prefix = tail[: hit + 1]
    grown = MixedGraph(sigma.vertices | set(prefix), sigma.directed | set(zip(prefix, prefix[1:])), sigma.bidirected)
    if len(grown.children[w]) < 2:
        return grown
    # w was a fork and now receives an arrowhead: cut one of its out-edges
    for c in sorted(grown.children[w]):
        cut = MixedGraph(grown.vertices, grown.directed - {(w, c)}, grown.bidirected)
        for comp in weak_components(cut):
            if comp & x and comp & y:
                return MixedGraph(
                    comp,
                    {(a, b) for a, b in cut.directed if a in comp},
                    {(a, b) for a, b in cut.bidirected if a in comp},
                )
    raise AssertionError("fork repair lost the connection between x and y")


def extract_connecting_path(s: Structure, x, y, z) -> Path:
    """A d-connecting path inside a connecting structure.

    Starts from a shortest path between ``x`` and ``y`` and reroutes around
    colliders whose unique descent ends in ``x`` or ``y`` instead of ``z``.
    The result meets ``x`` only at its start and ``y`` only at its end, and
    every collider on it is an ancestor of ``z`` inside ``s``.
    """
    g = s.graph if isinstance(s, Structure) else s
    x, y, z = frozenset(x), frozenset(y), frozenset(z)
    if not connects(g, x, y, z):
        raise StructureError("structure does not connect x and y given z")
    anc = ancestors(g, z & g.vertices)
    verts, edges = _shortest_path(g, x, y)
    for _ in range(4 * len(g.vertices) ** 2 + 4):
        verts, edges = _trim(verts, edges, x, y)
        bad = next(
            (i for i in range(1, len(verts) - 1)
             if edges[i - 1].has_head_at(verts[i]) and edges[i].has_head_at(verts[i]) and verts[i] not in anc),
            None,
        )
        if bad is None:
            p = Path(tuple(verts), tuple(edges))
            _check_path(g, p, x, y, z)
            return p
        verts, edges = _reroute(g, verts, edges, bad, x, y)
    raise AssertionError("path rerouting did not terminate")


def _shortest_path(g, x, y):
    prev = {}
    frontier = sorted(x & g.vertices)
    for v in frontier:
        prev[v] = None
    while frontier:
        nxt = []
        for v in frontier:
            for e in g.incident(v):
                w = e.other(v)
                if w in prev:
                    continue
                prev[w] = (v, e)
                if w in y:
                    verts, edges = [w], []
                    while prev[verts[-1]] is not None:
                        p, pe = prev[verts[-1]]
                        verts.append(p)
                        edges.append(pe)
                    return verts[::-1], edges[::-1]
                nxt.append(w)
        frontier = nxt
    raise StructureError("no path between x and y")


def _trim(verts, edges, x, y):
    first_y = next(i for i, v in enumerate(verts) if v in y)
    last_x = max(i for i, v in enumerate(verts[: first_y + 1]) if v in x)
    return verts[last_x: first_y + 1], edges[last_x:first_y]


def _reroute(g, verts, edges, c, x, y):
    """Replace collider at position c using its descent inside the structure."""
    pos = {v: i for i, v in enumerate(verts)}
    desc = [verts[c]]
    while True:
        kids = g.children[desc[-1]]
        if len(kids) != 1:
            raise AssertionError("collider descent is not unique")
        (w,) = kids
        desc.append(w)
        if w in pos or w in x or w in y:
            break
    w = desc[-1]
    down = [directed(a, b) for a, b in zip(desc, desc[1:])]
    if w in pos and pos[w] < c:
        p = pos[w]
        new_v = verts[: p + 1] + desc[-2::-1] + verts[c + 1:]
        new_e = edges[:p] + down[::-1] + edges[c:]
    elif w in pos:
        p = pos[w]
        new_v = verts[: c + 1] + desc[1:] + verts[p + 1:]
        new_e = edges[:c] + down + edges[p:]
    elif w in y:
        new_v = verts[: c + 1] + desc[1:]
        new_e = edges[:c] + down
    else:
        new_v = desc[::-1] + verts[c + 1:]
        new_e = down[::-1] + edges[c:]
    return new_v, new_e


def structure_d_connected(g: MixedGraph, x, y, z) -> bool:
    """Whether ``g`` contains a structure connecting ``x`` and ``y`` given ``z``."""
    g = as_admg(g)
    return find_connecting_structure(SearchConstraints(g, x, y, z, None, g)) is not None


def prune_structure(s: Structure, k: SearchConstraints) -> Structure | None:
    """Sub-structure of ``s`` meeting ``x`` once and ``y`` once, still within ``k``.

    Searches ``s`` with every other vertex of ``x`` and ``y`` removed, for each
    pair of endpoints in canonical order. None if no pair works.
    """
    g = s.graph
    for a in sorted(g.vertices & k.x):
        for b in sorted(g.vertices & k.y):
            drop = (k.x | k.y) - {a, b}
            keep = g.vertices - drop
            sub = MixedGraph(
                keep,
                {(u, v) for u, v in g.directed if u in keep and v in keep},
                {(u, v) for u, v in g.bidirected if u in keep and v in keep},
            )
            sub_k = SearchConstraints(sub, {a}, {b}, k.z, k.root_allowed, k.base)
            found = find_connecting_structure(sub_k)
            if found is not None:
                return found
    return None
