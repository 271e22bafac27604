"""Cluster graphs: data model, text format, validity and size reduction."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

from .graph_core import MicroVertex


class CDagError(ValueError):
    """Invalid C-DAG or invalid cluster-level request."""


class CDagParseError(CDagError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _unordered(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CDag:
    """Clusters with cardinalities plus directed and bidirected cluster edges.

    ``clusters`` keeps declaration order. Self-pairs in either edge set are
    self-loops. Instances are immutable and hashable so derived graphs can be
    cached per C-DAG.
    """

    clusters: tuple
    directed: frozenset = frozenset()
    bidirected: frozenset = frozenset()

    def __post_init__(self):
        cl = tuple((str(n), int(k)) for n, k in self.clusters)
        names = [n for n, _ in cl]
        if len(set(names)) != len(names):
            raise CDagError("duplicate cluster name")
        for n, k in cl:
            if not _NAME.match(n):
                raise CDagError(f"bad cluster name {n!r}")
            if k < 1:
                raise CDagError(f"cluster {n} has cardinality {k} < 1")
        known = set(names)
        d = frozenset((a, b) for a, b in self.directed)
        b = frozenset(_unordered(a, c) for a, c in self.bidirected)
        for a, c in d | b:
            for n in (a, c):
                if n not in known:
                    raise CDagError(f"edge references unknown cluster {n!r}")
        object.__setattr__(self, "clusters", cl)
        object.__setattr__(self, "directed", d)
        object.__setattr__(self, "bidirected", b)

    @cached_property
    def sizes(self) -> dict:
        return dict(self.clusters)

    @cached_property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.clusters)

    def size(self, name: str) -> int:
        try:
            return self.sizes[name]
        except KeyError:
            raise CDagError(f"unknown cluster {name!r}") from None

    def num_micro_vertices(self) -> int:
        return sum(k for _, k in self.clusters)

    def with_sizes(self, sizes: dict) -> "CDag":
        return CDag(tuple((n, sizes.get(n, k)) for n, k in self.clusters), self.directed, self.bidirected)

    def has_cycle(self) -> bool:
        """Whether the directed cluster graph has a cycle (self-loops count)."""
        return _has_cycle(self.names, self.directed)

    def __str__(self):
        return format_cdag(self)


def _has_cycle(nodes, edges) -> bool:
    nodes = set(nodes)
    succ = {n: [] for n in nodes}
    for a, b in edges:
        if a in nodes and b in nodes:
            if a == b:
                return True
            succ[a].append(b)
    state = dict.fromkeys(nodes, 0)

    def visit(n):
        state[n] = 1
        for m in succ[n]:
            if state[m] == 1 or (state[m] == 0 and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state[n] == 0 and visit(n) for n in sorted(nodes))


def parse_cdag(text: str) -> CDag:
    """Parse the line-oriented C-DAG format.

    Each non-blank line is ``cluster NAME CARD``, ``edge A -> B`` or
    ``edge A <-> B``; ``#`` starts a comment.

    Raises
    ------
    CDagParseError
        On syntax errors, duplicate clusters, unknown clusters in edges and
        cardinalities below one, with the offending line and column.
    """
    clusters: list[tuple[str, int]] = []
    seen: set[str] = set()
    d, b = set(), set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not toks:
            continue
        head, col = toks[0]

        def fail(msg, c=col):
            raise CDagParseError(msg, lineno, c)

        if head == "cluster":
            if len(toks) != 3:
                fail("expected 'cluster <name> <cardinality>'")
            (name, ncol), (card, kcol) = toks[1], toks[2]
            if not _NAME.match(name):
                fail(f"bad cluster name {name!r}", ncol)
            if name in seen:
                fail(f"duplicate cluster {name!r}", ncol)
            if not re.fullmatch(r"[+-]?\d+", card):
                fail(f"cardinality must be an integer, got {card!r}", kcol)
            if int(card) < 1:
                fail(f"cardinality {card} < 1", kcol)
            seen.add(name)
            clusters.append((name, int(card)))
        elif head == "edge":
            if len(toks) != 4 or toks[2][0] not in ("->", "<->"):
                fail("expected 'edge <name> -> <name>' or 'edge <name> <-> <name>'")
            (a, acol), (arrow, _), (c, ccol) = toks[1], toks[2], toks[3]
            for n, nc in ((a, acol), (c, ccol)):
                if n not in seen:
                    fail(f"unknown cluster {n!r}", nc)
            if arrow == "->":
                d.add((a, c))
            else:
                b.add(_unordered(a, c))
        else:
            fail(f"unknown keyword {head!r}")
    return CDag(tuple(clusters), frozenset(d), frozenset(b))


def format_cdag(c: CDag) -> str:
    """Canonical text: clusters in declaration order, then sorted edge blocks."""
    lines = [f"cluster {n} {k}" for n, k in c.clusters]
    lines += [f"edge {a} -> {b}" for a, b in sorted(c.directed)]
    lines += [f"edge {a} <-> {b}" for a, b in sorted(c.bidirected)]
    return "\n".join(lines) + "\n"


@lru_cache(maxsize=8192)
def validate(c: CDag) -> bool:
    """True iff some acyclic micro graph can realise ``c``.

    Rejects directed cycles (self-loops included) running only through
    singleton clusters, and bidirected self-loops on singleton clusters.
    """
    singles = [n for n, k in c.clusters if k == 1]
    if _has_cycle(singles, c.directed):
        return False
    return not any(a == b and c.sizes[a] == 1 for a, b in c.bidirected)


def require_valid(c: CDag) -> None:
    if not validate(c):
        raise CDagError("invalid C-DAG: no acyclic compatible graph exists")


def reduce_to_three(c: CDag) -> CDag:
    """Cap every cardinality at three; edges are kept."""
    require_valid(c)
    return CDag(tuple((n, min(k, 3)) for n, k in c.clusters), c.directed, c.bidirected)


def check_cluster_set(c: CDag, s: Iterable[str]) -> frozenset:
    s = frozenset(s)
    unknown = s - set(c.names)
    if unknown:
        raise CDagError(f"unknown cluster(s): {', '.join(sorted(unknown))}")
    return s


def micro_vertices(c: CDag, s: Iterable[str] | None = None) -> frozenset:
    """Micro-vertices of the clusters in ``s`` (all clusters when None)."""
    names = c.names if s is None else check_cluster_set(c, s)
    return frozenset(MicroVertex(n, i) for n in names for i in range(1, c.sizes[n] + 1))


def parse_cluster_list(text: str | None) -> frozenset:
    """Comma-separated cluster names; None or blank gives the empty set."""
    if text is None or not text.strip():
        return frozenset()
    names = [t.strip() for t in text.split(",")]
    if any(not _NAME.match(n) for n in names):
        raise CDagError(f"malformed cluster list {text!r}")
    return frozenset(names)
