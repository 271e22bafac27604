"""Acceptance suite at full size. Each test prints one PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest;
pytest repeats the lines in its terminal summary.
"""
import itertools
import random
import sys
import time

from cdag_calculus.abstraction import canonical_graph, is_compatible, unfolded_graph
from cdag_calculus.calculus import check_rule, cluster_dsep
from cdag_calculus.cdag_model import CDag, micro_vertices, parse_cdag, reduce_to_three, validate
from cdag_calculus.generators import random_admg, random_cdag, random_disjoint_sets, random_query
from cdag_calculus.graph_core import (
    MicroVertex,
    MixedGraph,
    as_admg,
    d_separated,
    descendants,
    is_acyclic,
    mutilate,
)
from cdag_calculus.oracle import (
    count_compatible,
    count_up_to_permutation,
    enumerate_compatible,
    exists_violator,
    query_fails,
    scan_violators,
)
from cdag_calculus.queries import Rule, RuleQuery, dsep_query
from cdag_calculus.structures import structure_d_connected

from helpers import load

RESULTS = {}


def report(n, title, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}" + (f" [{detail}]" if detail else "")
    RESULTS[n] = line
    print(line, flush=True)
    return ok


def test_criterion_1_structure_search_equals_d_connection():
    rng = random.Random(20240601)
    start = time.time()
    graphs = triples = bad = 0
    for i in range(10_000):
        n = rng.randint(2, 7)
        g = random_admg(rng, n, (i % 10 + 1) / 11, (i % 6) / 10)
        graphs += 1
        # every assignment on small graphs, a sample otherwise
        if n <= 3:
            cands = []
            for roles in itertools.product(range(4), repeat=n):
                s = [frozenset(v for v, r in zip(sorted(g.vertices), roles) if r == k) for k in range(3)]
                cands.append(s)
        else:
            cands = [random_disjoint_sets(rng, g.vertices, p_empty=0.2) for _ in range(6)]
        for x, y, z in cands:
            if not x or not y:
                continue
            triples += 1
            if structure_d_connected(g, x, y, z) != (not d_separated(g, x, y, z)):
                bad += 1
    elapsed = time.time() - start
    ok = bad == 0 and graphs >= 10_000 and elapsed < 120
    assert report(1, "structure search equals d-connection",
                  ok, f"{graphs} graphs, {triples} triples, {bad} mismatches, {elapsed:.1f}s")


def sweep_cdags():
    """All valid C-DAGs on at most three clusters of size 1 or 2 with at most four cluster edges."""
    for k in (1, 2, 3):
        names = "ABC"[:k]
        dpairs = [("d", (a, b)) for a in names for b in names]
        bpairs = [("b", (a, b)) for i, a in enumerate(names) for b in names[i:]]
        for sizes in itertools.product((1, 2), repeat=k):
            cl = tuple(zip(names, sizes))
            for r in range(5):
                for es in itertools.combinations(dpairs + bpairs, r):
                    c = CDag(cl, frozenset(p for t, p in es if t == "d"), frozenset(p for t, p in es if t == "b"))
                    if validate(c):
                        yield c


def sweep_queries(c):
    """Each cluster takes one role among w, x, y, z or none; roles are used at most once."""
    out = []
    for roles in itertools.product("wxyz.", repeat=len(c.names)):
        used = [r for r in roles if r != "."]
        if len(used) != len(set(used)):
            continue
        s = {r: frozenset(n for n, rr in zip(c.names, roles) if rr == r) for r in "wxyz"}
        if not s["x"] or not s["y"]:
            continue
        for rule in (Rule.R1, Rule.R2, Rule.R3):
            out.append(RuleQuery(rule, s["w"], s["x"], s["y"], s["z"]))
        # for separation queries the w slot names the mutilated cluster
        out.append(dsep_query(s["x"], s["y"], s["z"], over=s["w"]))
        out.append(dsep_query(s["x"], s["y"], s["z"], under=s["w"]))
    return out


def test_criterion_2_engine_matches_oracle_on_exhaustive_sweep():
    start = time.time()
    ncd = nq = bad = fails = bad_witness = 0
    for c in sweep_cdags():
        ncd += 1
        qs = sweep_queries(c)
        if not qs:
            continue
        verdicts = [check_rule(c, q) for q in qs]
        found = scan_violators(c, qs).violators
        for q, v, g in zip(qs, verdicts, found):
            nq += 1
            if v.holds != (g is None):
                bad += 1
                print("mismatch", c, q, v.holds)
            if not v.holds:
                fails += 1
                if not (is_compatible(v.witness_graph, c) and query_fails(v.witness_graph, c, q)):
                    bad_witness += 1
    elapsed = time.time() - start
    ok = bad == 0 and bad_witness == 0 and elapsed < 600
    assert report(2, "engine verdicts match the brute-force oracle", ok,
                  f"{ncd} C-DAGs, {nq} queries, {bad} mismatches, {fails} witnesses, "
                  f"{bad_witness} bad witnesses, {elapsed:.0f}s")


def test_criterion_3_reduction_to_size_three_keeps_verdicts():
    rng = random.Random(77)
    n = bad = 0
    for _ in range(500):
        c = random_cdag(rng, max_clusters=4, max_size=6)
        r = reduce_to_three(c)
        for _ in range(20):
            q = random_query(rng, c)
            n += 1
            if check_rule(c, q).holds != check_rule(r, q).holds:
                bad += 1
    assert report(3, "reducing clusters to size three keeps verdicts", bad == 0,
                  f"500 C-DAGs, {n} queries, {bad} mismatches")


def test_criterion_4_golden_instances():
    checks = {}
    two = load("two_cycle")
    checks["a: two-cycle has 2 compatible graphs"] = count_compatible(two) == 2
    one_way = parse_cdag("cluster A 2\ncluster B 1\nedge A -> B")
    checks["a: one-way edge has 3 compatible graphs"] = count_compatible(one_way) == 3

    fb = load("feedback")
    q = RuleQuery(Rule.R2, x={"Z"}, y={"Y"})
    v = check_rule(fb, q)
    checks["b: rule 2 holds"] = v.holds and v.statement == "P(y | do(z)) = P(y | z)"
    checks["b: oracle agrees"] = exists_violator(fb, q) is None

    ss = load("size_sensitive")
    small = ss.with_sizes({"A": 2})
    dq = dsep_query({"X"}, {"Y"}, {"Z1", "Z2"})
    checks["c: separation fails with A:3"] = not check_rule(ss, dq).holds and exists_violator(ss, dq) is not None
    checks["c: separation holds with A:2"] = check_rule(small, dq).holds and exists_violator(small, dq) is None
    checks["c: one graph for A:2 up to index permutation"] = count_up_to_permutation(small) == 1

    chain = load("cycle_chain")
    a1, c1 = MicroVertex("A", 1), MicroVertex("C", 1)
    checks["d: no directed A.1 to C.1 path"] = all(
        c1 not in descendants(g, {a1}) for g in enumerate_compatible(chain)
    )

    cm = load("feedback_wide")
    mq = dsep_query({"X"}, {"Y"}, {"Z"})
    checks["e: separation holds"] = cluster_dsep(cm, {"X"}, {"Y"}, {"Z"}).holds
    checks["e: oracle agrees"] = exists_violator(cm, mq) is None

    failed = [k for k, ok in checks.items() if not ok]
    assert report(4, "golden instances", not failed,
                  f"{len(checks) - len(failed)}/{len(checks)} checks" + (f"; failed: {failed}" if failed else ""))


def _edges(g):
    return {f"{u}>{v}" for u, v in g.directed} | {f"{u}-{v}" for u, v in g.bidirected}


GOLDEN_GRAPHS = {
    "loop_pair": (
        {"A.1>A.2", "A.2>A.3", "A.1>A.3", "A.1>B.2", "B.1>A.3"},
        {"A.1>B.1", "B.1>A.1", "B.1>A.2", "A.2>B.1", "A.2>B.2", "B.2>A.2", "B.2>A.3", "A.3>B.2"},
    ),
    "cycle_chain": ({"A.1>B.2", "B.1>A.1", "B.1>C.1", "C.1>B.2"}, set()),
    "feedback": (
        {"Y.1>A.1", "X.1>A.1", "A.1>B.3", "B.1>Z.1", "Z.1>A.1", "B.1-Z.1", "B.2-Z.1", "B.3-Z.1"},
        {"A.1>B.2", "B.2>Z.1"},
    ),
}


def test_criterion_5_canonical_and_unfolded_graphs():
    wrong = []
    for name, (can, elig) in GOLDEN_GRAPHS.items():
        c = load(name)
        u = unfolded_graph(c)
        if _edges(canonical_graph(c).graph) != can:
            wrong.append(f"{name} canonical")
        if _edges(MixedGraph(directed=u.eligible)) != elig:
            wrong.append(f"{name} eligible")
        if _edges(u.graph) != can | elig:
            wrong.append(f"{name} unfolded")
    assert report(5, "canonical and unfolded golden graphs", not wrong,
                  "3 C-DAGs exact" if not wrong else f"wrong: {wrong}")


def test_criterion_6_acyclic_cdags_need_only_plain_separation():
    rng = random.Random(606)
    n = bad = cyclic = 0
    for _ in range(200):
        c = random_cdag(rng, max_clusters=5, max_size=3, acyclic=True)
        u = unfolded_graph(c).graph
        if not is_acyclic(u):
            cyclic += 1
            continue
        g = as_admg(u)
        for _ in range(5):
            q = random_query(rng, c, [Rule.DSEP])
            x, y, z, over, under = (micro_vertices(c, s) for s in (q.x, q.y, q.z, q.over, q.under))
            n += 1
            if check_rule(c, q).holds != d_separated(mutilate(g, over, under), x, y, z):
                bad += 1
    assert report(6, "acyclic C-DAGs reduce to plain separation", bad == 0 and cyclic == 0,
                  f"200 C-DAGs, {n} queries, {bad} mismatches, {cyclic} cyclic unfolded graphs")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
