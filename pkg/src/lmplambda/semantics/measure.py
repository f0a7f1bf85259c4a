"""Output measures of programs: weighted samples of runtime values.

A measure records how many runs were attempted and, for every converged
run, the value and its weight. Exact measures (grid quadrature, sample-free
programs) use the same container with non-uniform weights.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from typing import Dict, List, Optional

import numpy as np

from ..syntax.types import RealT, Type
from .evaluator import show_value

REAL_SAMPLE_CAP = 200
QUANTILES = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


class ValueMeasure:
    def __init__(self, type: Optional[Type], runs: int, values: List, weights=None, exact: bool = False):
        self.type = type
        self.runs = int(runs)
        self.values = list(values)
        # uniform empirical weights keep exact counts so masses are fractions
        self.uniform = weights is None
        if self.uniform:
            if self.runs < 1:
                raise ValueError("an empirical measure needs at least one run")
            weights = np.full(len(self.values), 1.0 / self.runs)
        self.weights = np.asarray(weights, dtype=float)
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights differ in length")
        if np.any(self.weights < 0):
            raise ValueError("negative weight")
        self.exact = exact
        self._reals = None

    # -- basic quantities

    @property
    def mass(self) -> float:
        if self.uniform:
            return len(self.values) / self.runs
        return math.fsum(self.weights.tolist())

    @property
    def missing_mass(self) -> float:
        return max(0.0, 1.0 - self.mass)

    @property
    def is_real(self) -> bool:
        return isinstance(self.type, RealT) or (
            self.type is None and all(type(v) is float for v in self.values))

    def reals(self) -> np.ndarray:
        if self._reals is None:
            if not all(type(v) is float for v in self.values):
                raise TypeError("measure is not over reals")
            self._reals = np.array(self.values, dtype=float)
        return self._reals

    def atom_weight(self, x: float) -> float:
        r = self.reals()
        if self.uniform:
            return int(np.count_nonzero(r == x)) / self.runs
        return math.fsum(self.weights[r == x].tolist())

    def atoms(self, min_count: int = 2) -> "OrderedDict[str, float]":
        """Printed value -> weight. For reals only values hit by at least
        ``min_count`` runs are reported (continuous parts have no atoms)."""
        acc: Dict[str, float] = {}
        if self.is_real:
            r = self.reals()
            if len(r):
                uniq, inv, counts = np.unique(r, return_inverse=True, return_counts=True)
                if self.uniform:
                    w = counts / self.runs
                else:
                    w = np.bincount(inv, weights=self.weights, minlength=len(uniq))
                for u, ww, k in zip(uniq, w, counts):
                    if k >= min_count or self.exact:
                        acc[repr(float(u))] = float(ww)
            items = sorted(acc.items(), key=lambda kv: (-kv[1], float(kv[0])))
            return OrderedDict(items)
        for v, w in zip(self.values, self.weights):
            key = show_value(v)
            acc[key] = acc.get(key, 0.0) + float(w)
        return OrderedDict(sorted(acc.items(), key=lambda kv: (-kv[1], kv[0])))

    def expectation(self, g) -> float:
        """Integral of ``g`` (applied to runtime values) against the measure."""
        if not self.values:
            return 0.0
        if self.is_real:
            return float(np.dot(self.weights, g(self.reals())))
        return float(sum(w * g(v) for v, w in zip(self.values, self.weights)))

    def effective_size(self) -> float:
        """Kish effective sample size of the converged part."""
        w = self.weights
        s2 = float((w * w).sum())
        return float(w.sum()) ** 2 / s2 if s2 > 0 else 0.0

    # -- reporting

    def report(self, seed=None, samples=None, fuel=None, atom_cap: int = 50) -> dict:
        out = {
            "type": None if self.type is None else str(self.type),
            "mass": self.mass,
            "missing_mass": self.missing_mass,
            "exact": self.exact,
        }
        atoms = list(self.atoms().items())[:atom_cap]
        out["atoms"] = [{"value": k, "weight": w} for k, w in atoms]
        if self.is_real:
            r = self.reals()
            out["real_samples"] = [float(x) for x in r[:REAL_SAMPLE_CAP]]
            if len(r):
                qs = _weighted_quantiles(r, self.weights, QUANTILES)
                out["quantiles"] = {str(q): float(v) for q, v in zip(QUANTILES, qs)}
                out["mean"] = float(np.dot(r, self.weights) / self.weights.sum()) if self.mass > 0 else None
            else:
                out["quantiles"] = {}
        else:
            out["real_samples"] = []
        out["seed"] = seed
        out["samples"] = self.runs if samples is None else samples
        out["fuel"] = fuel
        return out


def _weighted_quantiles(x: np.ndarray, w: np.ndarray, qs) -> List[float]:
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    cw = np.cumsum(ws)
    total = cw[-1]
    out = []
    for q in qs:
        i = int(np.searchsorted(cw, q * total, side="left"))
        out.append(float(xs[min(i, len(xs) - 1)]))
    return out
