"""Cluster-level query description shared by the engine and the oracle."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cdag_model import CDag, CDagError, check_cluster_set


class Rule(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    DSEP = "DSEP"

    @classmethod
    def parse(cls, text) -> "Rule":
        t = str(text).strip().upper()
        if t in ("1", "2", "3"):
            t = "R" + t
        try:
            return cls(t)
        except ValueError:
            raise CDagError(f"unknown rule {text!r}") from None


class QueryError(CDagError):
    pass


@dataclass(frozen=True)
class RuleQuery:
    """A calculus rule (R1-R3) or a cluster separation query (DSEP).

    Rules use ``w, x, y, z``; DSEP uses ``x, y, z`` plus the mutilation sets
    ``over`` (arrowheads removed) and ``under`` (tails removed).
    """

    rule: Rule
    w: frozenset = frozenset()
    x: frozenset = frozenset()
    y: frozenset = frozenset()
    z: frozenset = frozenset()
    over: frozenset = frozenset()
    under: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule.parse(self.rule.value if isinstance(self.rule, Rule) else self.rule))
        for f in ("w", "x", "y", "z", "over", "under"):
            object.__setattr__(self, f, frozenset(getattr(self, f)))
        if self.rule is Rule.DSEP:
            if self.w:
                raise QueryError("separation queries take no w set; use over/under")
        elif self.over or self.under:
            raise QueryError("over/under apply to separation queries only")
        sets = [("w", self.w), ("x", self.x), ("y", self.y), ("z", self.z)]
        for i, (na, a) in enumerate(sets):
            for nb, b in sets[i + 1:]:
                if a & b:
                    raise QueryError(f"query sets {na} and {nb} overlap on {', '.join(sorted(a & b))}")

    @property
    def vacuous(self) -> bool:
        return not self.x or not self.y

    def check_against(self, c: CDag) -> None:
        for f in ("w", "x", "y", "z", "over", "under"):
            check_cluster_set(c, getattr(self, f))

    def sets(self) -> dict:
        keys = ("x", "y", "z", "over", "under") if self.rule is Rule.DSEP else ("w", "x", "y", "z")
        return {k: sorted(getattr(self, k)) for k in keys}


def dsep_query(x, y, z=(), over=(), under=()) -> RuleQuery:
    return RuleQuery(Rule.DSEP, x=x, y=y, z=z, over=over, under=under)
