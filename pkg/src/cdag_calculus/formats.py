"""Text and JSON serialisation of micro graphs, structures and verdicts.

Micro-graph text mirrors the C-DAG format::

    vertex A.1
    edge A.1 -> B.2
    edge A.2 -> B.1 eligible
    edge B.1 <-> Z.1
    roots: A.1, B.2

``vertex`` lines list every vertex (isolated ones included). The optional
``eligible`` token marks edges added on top of the canonical graph; the
optional ``roots:`` trailer closes a structure.
"""
from __future__ import annotations

import json
import re

from .calculus import Verdict
from .cdag_model import CDagParseError
from .graph_core import GraphError, MicroVertex, MixedGraph, as_admg
from .queries import RuleQuery
from .structures import Structure

VERDICT_FORMAT = "cdag-verdict"
VERDICT_VERSION = 1


def format_micro_graph(g: MixedGraph, eligible=(), roots=None) -> str:
    eligible = frozenset(eligible)
    lines = [f"vertex {v}" for v in sorted(g.vertices)]
    for u, v in sorted(g.directed):
        lines.append(f"edge {u} -> {v}" + (" eligible" if (u, v) in eligible else ""))
    lines += [f"edge {u} <-> {v}" for u, v in sorted(g.bidirected)]
    if roots is not None:
        lines.append("roots: " + ", ".join(str(r) for r in sorted(roots)))
    return "\n".join(lines) + "\n"


def format_structure(s: Structure) -> str:
    return format_micro_graph(s.graph, roots=s.roots)


def _vertex(tok, lineno, col):
    try:
        return MicroVertex.parse(tok)
    except GraphError as e:
        raise CDagParseError(str(e), lineno, col) from None


def parse_micro_graph(text: str):
    """Parse micro-graph text into ``(graph, eligible, roots)``.

    ``roots`` is None when the trailer is absent. Errors carry line and
    column like the C-DAG parser.
    """
    verts, d, b, elig = set(), set(), set(), set()
    roots = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if roots is not None:
            raise CDagParseError("nothing may follow the roots: line", lineno, 1)
        stripped = line.lstrip()
        if stripped.startswith("roots:"):
            col = len(line) - len(stripped) + 7
            body = stripped[6:]
            roots = set()
            for m in re.finditer(r"[^,\s]+", body):
                roots.add(_vertex(m.group(), lineno, col + m.start()))
            continue
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        head, col = toks[0]
        if head == "vertex":
            if len(toks) != 2:
                raise CDagParseError("expected 'vertex <name>.<index>'", lineno, col)
            verts.add(_vertex(toks[1][0], lineno, toks[1][1]))
            continue
        if head != "edge":
            raise CDagParseError(f"unknown keyword {head!r}", lineno, col)
        ok = len(toks) in (4, 5) and toks[2][0] in ("->", "<->")
        if ok and len(toks) == 5:
            ok = toks[4][0] == "eligible" and toks[2][0] == "->"
        if not ok:
            raise CDagParseError("expected 'edge U -> V [eligible]' or 'edge U <-> V'", lineno, col)
        u = _vertex(toks[1][0], lineno, toks[1][1])
        v = _vertex(toks[3][0], lineno, toks[3][1])
        if u == v:
            raise CDagParseError(f"self-edge on {u}", lineno, toks[1][1])
        if toks[2][0] == "->":
            d.add((u, v))
            if len(toks) == 5:
                elig.add((u, v))
        else:
            b.add((u, v))
    g = MixedGraph(verts, d, b)
    return g, frozenset(elig), (None if roots is None else frozenset(roots))


# JSON

def graph_to_obj(g: MixedGraph) -> dict:
    return {
        "vertices": [str(v) for v in sorted(g.vertices)],
        "directed": [[str(u), str(v)] for u, v in sorted(g.directed)],
        "bidirected": [[str(u), str(v)] for u, v in sorted(g.bidirected)],
    }


def graph_from_obj(obj: dict) -> MixedGraph:
    p = MicroVertex.parse
    return MixedGraph(
        [p(v) for v in obj.get("vertices", [])],
        [(p(u), p(v)) for u, v in obj.get("directed", [])],
        [(p(u), p(v)) for u, v in obj.get("bidirected", [])],
    )


def verdict_to_obj(v: Verdict) -> dict:
    obj = {
        "format": VERDICT_FORMAT,
        "version": VERDICT_VERSION,
        "rule": v.query.rule.value,
        "sets": v.query.sets(),
        "holds": v.holds,
        "statement": v.statement,
    }
    if v.note:
        obj["note"] = v.note
    if v.witness_graph is not None:
        obj["witness_graph"] = graph_to_obj(v.witness_graph)
    if v.witness_structure is not None:
        s = graph_to_obj(v.witness_structure.graph)
        s["roots"] = [str(r) for r in sorted(v.witness_structure.roots)]
        obj["witness_structure"] = s
    return obj


def verdict_to_json(v: Verdict) -> str:
    return json.dumps(verdict_to_obj(v), indent=2, ensure_ascii=False) + "\n"


def verdict_from_obj(obj: dict) -> Verdict:
    if obj.get("format") != VERDICT_FORMAT:
        raise ValueError("not a verdict document")
    if obj.get("version") != VERDICT_VERSION:
        raise ValueError(f"unsupported verdict version {obj.get('version')!r}")
    q = RuleQuery(obj["rule"], **{k: frozenset(v) for k, v in obj["sets"].items()})
    wg = obj.get("witness_graph")
    ws = obj.get("witness_structure")
    structure = None
    if ws is not None:
        structure = Structure(graph_from_obj(ws), frozenset(MicroVertex.parse(r) for r in ws["roots"]))
    return Verdict(
        q,
        bool(obj["holds"]),
        obj["statement"],
        None if wg is None else as_admg(graph_from_obj(wg)),
        structure,
        obj.get("note"),
    )


def verdict_from_json(text: str) -> Verdict:
    return verdict_from_obj(json.loads(text))


def verdict_to_text(v: Verdict) -> str:
    out = [("HOLDS" if v.holds else "FAILS") + f" {v.query.rule.value}: {v.statement}"]
    if v.note:
        out.append(f"note: {v.note}")
    if v.witness_structure is not None:
        out.append("# connecting structure")
        out.append(format_structure(v.witness_structure).rstrip("\n"))
    if v.witness_graph is not None:
        out.append("# compatible counterexample")
        out.append(format_micro_graph(v.witness_graph).rstrip("\n"))
    return "\n".join(out) + "\n"

