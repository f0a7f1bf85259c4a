"""Verdicts of program comparisons."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

DISTINGUISHED = "DISTINGUISHED"
NOT_SEPARATED = "NOT_SEPARATED_WITHIN_BUDGET"
EQUAL_EXACT = "EQUAL_EXACT"
VERDICTS = (DISTINGUISHED, NOT_SEPARATED, EQUAL_EXACT)


@dataclass
class EquivalenceReport:
    """A DISTINGUISHED verdict always carries a witness that can be
    replayed from the recorded seeds. NOT_SEPARATED is a statement about
    the search budget, never a claim of equivalence."""

    verdict: str
    witness: Optional[dict] = None
    budget: dict = field(default_factory=dict)
    seeds: List[int] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == DISTINGUISHED and not self.witness:
            raise ValueError("a DISTINGUISHED verdict needs a witness")

    @property
    def distinguished(self) -> bool:
        return self.verdict == DISTINGUISHED

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "budget": self.budget,
            "seeds": list(self.seeds),
            "details": self.details,
        }


def combine(reports: dict, seeds: List[int]) -> EquivalenceReport:
    """Overall verdict from per-method reports: the first witness found
    wins; otherwise the pair is not separated within the joint budget."""
    for name, r in reports.items():
        if r.distinguished:
            w = dict(r.witness)
            w.setdefault("method", name)
            return EquivalenceReport(DISTINGUISHED, w, {k: v.budget for k, v in reports.items()}, seeds,
                                     {k: v.to_json() for k, v in reports.items()})
    return EquivalenceReport(NOT_SEPARATED, None, {k: v.budget for k, v in reports.items()}, seeds,
                             {k: v.to_json() for k, v in reports.items()})
