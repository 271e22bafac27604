import itertools
import random

import pytest

from cdag_calculus.abstraction import canonical_graph, is_compatible, project, unfolded_graph
from cdag_calculus.cdag_model import CDag, CDagError, micro_vertices, parse_cdag, validate
from cdag_calculus.generators import random_cdag
from cdag_calculus.graph_core import MicroVertex, MixedGraph, is_acyclic, topological_order, union
from cdag_calculus.oracle import enumerate_compatible

from helpers import load, micro

SIX_BOLD = "X.1>A.1 B.1>A.1 A.1>A.2 B.1>C.1 A.2>D.1"
SIX_GRAY = "X.1>A.2 A.1>B.2 B.2>B.3 C.1>C.2"


def six_micro(drop=()):
    d = " ".join(e for e in (SIX_BOLD + " " + SIX_GRAY).split() if e not in drop)
    return micro(d, "Y.1-C.1 B.1-B.2 D.1-B.2 B.3-C.2")


def edges(g):
    return {f"{u}>{v}" for u, v in g.directed} | {f"{u}-{v}" for u, v in g.bidirected}


def test_six_cluster_projection_and_compatibility():
    c = load("six_clusters")
    assert project(six_micro(), c) == c
    assert is_compatible(six_micro(), c)


def test_dropping_the_only_a_to_d_edge_breaks_compatibility():
    # A -> D is realised only by A.2 -> D.1
    c = load("six_clusters")
    g = six_micro(drop={"A.2>D.1"})
    assert ("A", "D") not in project(g, c).directed
    assert not is_compatible(g, c)


def test_edgeless_projection():
    c = CDag((("A", 2), ("B", 1)))
    assert project(MixedGraph(micro_vertices(c)), c) == c


def test_projection_needs_matching_vertices():
    with pytest.raises(CDagError):
        project(micro("A.1>B.1"), CDag((("A", 2), ("B", 1))))


def test_size_two_variant_has_a_compatible_graph():
    c = load("size_sensitive").with_sizes({"A": 2})
    g = micro("Y.1>Z1.1 Z1.1>X.1 X.1>A.2 A.1>Z2.1 Z2.1>A.2 A.1>A.2 A.1>Y.1")
    assert is_compatible(g, c)


def test_canonical_loop_pair():
    g = canonical_graph(load("loop_pair")).graph
    assert edges(g) == {"A.1>A.2", "A.2>A.3", "A.1>A.3", "A.1>B.2", "B.1>A.3"}


def test_canonical_cycle_chain():
    g = canonical_graph(load("cycle_chain")).graph
    assert edges(g) == {"A.1>B.2", "B.1>A.1", "B.1>C.1", "C.1>B.2"}


def test_canonical_singleton_chain():
    c = parse_cdag("cluster A 1\ncluster B 1\nedge A -> B")
    assert edges(canonical_graph(c).graph) == {"A.1>B.1"}
    u = unfolded_graph(c)
    assert u.graph == canonical_graph(c).graph and not u.eligible


def test_unfolded_loop_pair_eligible_edges():
    u = unfolded_graph(load("loop_pair"))
    assert edges(MixedGraph(directed=u.eligible)) == {
        "A.1>B.1", "B.1>A.1", "B.1>A.2", "A.2>B.1",
        "A.2>B.2", "B.2>A.2", "B.2>A.3", "A.3>B.2",
    }
    assert not is_acyclic(u.graph)


def test_unfolded_cycle_chain_has_nothing_to_add():
    assert unfolded_graph(load("cycle_chain")).eligible == frozenset()


def test_unfolded_feedback():
    u = unfolded_graph(load("feedback"))
    assert edges(u.canonical.graph) == {
        "Y.1>A.1", "X.1>A.1", "A.1>B.3", "B.1>Z.1", "Z.1>A.1",
        "B.1-Z.1", "B.2-Z.1", "B.3-Z.1",
    }
    assert edges(MixedGraph(directed=u.eligible)) == {"A.1>B.2", "B.2>Z.1"}


def test_unfolded_feedback_wide():
    u = unfolded_graph(load("feedback_wide"))
    assert edges(MixedGraph(directed=u.eligible)) == {"Y.2>A.1", "X.2>A.1", "A.1>B.2", "B.2>Z.1"}
    assert {"Y.1>A.1", "X.1>A.1", "A.1>B.3", "B.1>Z.1", "Z.1>A.1"} <= edges(u.canonical.graph)


def test_canonical_requires_valid():
    with pytest.raises(CDagError):
        canonical_graph(parse_cdag("cluster A 1\nedge A -> A"))


def _random_valid(n, seed, **kw):
    rng = random.Random(seed)
    return [random_cdag(rng, **kw) for _ in range(n)]


def test_canonical_graph_is_compatible():
    for c in _random_valid(300, 11, max_clusters=5, max_size=5):
        assert is_compatible(canonical_graph(c).graph, c)


def test_eligible_edges_individually_keep_canonical_acyclic():
    for c in _random_valid(200, 12, max_clusters=4, max_size=4):
        u = unfolded_graph(c)
        base = u.canonical.graph
        for e in u.eligible:
            assert e not in base.directed
            assert is_acyclic(MixedGraph(base.vertices, base.directed | {e}, base.bidirected))
            assert (e[0].cluster, e[1].cluster) in c.directed


def test_acyclic_cdag_has_acyclic_unfolded_graph():
    for c in _random_valid(200, 13, acyclic=True):
        assert is_acyclic(unfolded_graph(c).graph)


def _small_cdags():
    """All valid C-DAGs on clusters A, B (sizes <= 2) with at most three edges, plus random 3-cluster ones."""
    out = []
    for sizes in itertools.product((1, 2), repeat=2):
        cl = tuple(zip("AB", sizes))
        pairs = [("d", p) for p in itertools.product("AB", repeat=2)] + [
            ("b", p) for p in (("A", "A"), ("A", "B"), ("B", "B"))
        ]
        for r in range(4):
            for es in itertools.combinations(pairs, r):
                c = CDag(cl, frozenset(p for k, p in es if k == "d"), frozenset(p for k, p in es if k == "b"))
                if validate(c):
                    out.append(c)
    out += _random_valid(60, 14, max_clusters=3, max_size=2, min_clusters=3)
    return out


def _topological_relabel(g):
    """Renumber each cluster along a topological order of ``g``."""
    seen = {}
    mp = {}
    for v in topological_order(g):
        seen[v.cluster] = seen.get(v.cluster, 0) + 1
        mp[v] = MicroVertex(v.cluster, seen[v.cluster])
    return MixedGraph(
        {mp[v] for v in g.vertices},
        {(mp[a], mp[b]) for a, b in g.directed},
        {(mp[a], mp[b]) for a, b in g.bidirected},
    )


def test_compatible_graphs_against_canonical_and_unfolded():
    # both containments hold once indices follow a topological order of g
    checked = 0
    for c in _small_cdags():
        u = unfolded_graph(c).graph
        can = canonical_graph(c).graph
        for g in enumerate_compatible(c):
            assert project(g, c) == c
            h = _topological_relabel(g)
            assert is_compatible(h, c)
            assert is_acyclic(union(can, h))
            assert h.directed <= u.directed and h.bidirected <= u.bidirected
            checked += 1
    assert checked > 1000


def test_labelled_union_with_canonical_can_be_cyclic():
    c = parse_cdag("cluster B 2\nedge B -> B")
    g = micro("B.2>B.1")
    assert is_compatible(g, c)
    assert not is_acyclic(union(canonical_graph(c).graph, g))
    assert is_acyclic(union(canonical_graph(c).graph, _topological_relabel(g)))
