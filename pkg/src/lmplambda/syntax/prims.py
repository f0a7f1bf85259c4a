"""Registry of primitive real functions and boolean tests.

Each entry knows its arity, a scalar evaluator (used by the sampler), a
numpy-vectorised evaluator (used by kernels) and whether it denotes a
continuous function. The continuous fragment admits only continuous
entries and no boolean tests.

New primitives are added with :meth:`PrimRegistry.register`; the parser
and typechecker consult whichever registry they are handed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

FULL = "full"
CONTINUOUS = "continuous"
MODES = (FULL, CONTINUOUS)

_TINY = 1e-300


@dataclass(frozen=True)
class Prim:
    name: str
    arity: int
    scalar: Callable[..., float]
    vector: Callable[..., np.ndarray]
    continuous: bool
    boolean: bool = False  # member of the boolean-test family (returns bool)


def _safe_log(x):
    return math.log(max(x, _TINY))


def _safe_sqrt(x):
    return math.sqrt(max(x, 0.0))


def _div(x, y):
    return x / y if y != 0.0 else 0.0


def _vdiv(x, y):
    y = np.asarray(y, dtype=float)
    safe = np.where(y == 0.0, 1.0, y)
    return np.where(y == 0.0, 0.0, np.asarray(x, dtype=float) / safe)


def _clamp(x, lo, hi):
    return min(max(x, lo), hi)


def sharp_leq(x, y):
    return 1.0 if x <= y else 0.0


def ramp_leq(eps: float):
    """Continuous comparison: 1 on ``x <= y`` then a linear ramp of width
    ``eps`` down to 0. Equals 1 exactly when ``x <= y``."""

    def f(x, y):
        return min(max(1.0 - (x - y) / eps, 0.0), 1.0)

    def vf(x, y):
        return np.clip(1.0 - (np.asarray(x) - np.asarray(y)) / eps, 0.0, 1.0)

    return f, vf


def _entries(leq_eps: float):
    ramp, vramp = ramp_leq(leq_eps)
    E = [
        Prim("id", 1, lambda x: x, lambda x: np.asarray(x, dtype=float), True),
        Prim("plus", 2, lambda x, y: x + y, np.add, True),
        Prim("minus", 2, lambda x, y: x - y, np.subtract, True),
        Prim("times", 2, lambda x, y: x * y, np.multiply, True),
        Prim("neg", 1, lambda x: -x, np.negative, True),
        Prim("min", 2, min, np.minimum, True),
        Prim("max", 2, max, np.maximum, True),
        Prim("clamp", 3, _clamp, lambda x, lo, hi: np.minimum(np.maximum(x, lo), hi), True),
        Prim("abs", 1, abs, np.abs, True),
        Prim("exp", 1, lambda x: math.exp(min(x, 700.0)), lambda x: np.exp(np.minimum(x, 700.0)), True),
        Prim("log", 1, _safe_log, lambda x: np.log(np.maximum(x, _TINY)), True),
        Prim("sqrt", 1, _safe_sqrt, lambda x: np.sqrt(np.maximum(x, 0.0)), True),
        Prim("sin", 1, math.sin, np.sin, True),
        Prim("cos", 1, math.cos, np.cos, True),
        Prim("sigmoid", 1, lambda x: 1.0 / (1.0 + math.exp(-max(min(x, 700.0), -700.0))),
             lambda x: 1.0 / (1.0 + np.exp(-np.clip(x, -700.0, 700.0))), True),
        Prim("leq_ramp", 2, ramp, vramp, True),
        # measurable, discontinuous
        Prim("leq_sharp", 2, sharp_leq, lambda x, y: (np.asarray(x) <= np.asarray(y)).astype(float), False),
        Prim("div", 2, _div, _vdiv, False),
        Prim("step", 1, lambda x: 1.0 if x >= 0.0 else 0.0,
             lambda x: (np.asarray(x) >= 0.0).astype(float), False),
        Prim("dirac_eq", 2, lambda x, y: 1.0 if x == y else 0.0,
             lambda x, y: (np.asarray(x) == np.asarray(y)).astype(float), False),
        # boolean tests
        Prim("eq", 2, lambda x, y: x == y, np.equal, False, boolean=True),
        Prim("lt", 2, lambda x, y: x < y, np.less, False, boolean=True),
    ]
    return {p.name: p for p in E}


@dataclass
class PrimRegistry:
    """Primitive table for one language mode.

    ``leq`` is the comparison operator required by the calculus: the sharp
    indicator of ``x <= y`` in full mode and the continuous ramp in
    continuous mode.
    """

    mode: str = FULL
    leq_eps: float = 1.0
    entries: Dict[str, Prim] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown language mode {self.mode!r}")
        if self.leq_eps <= 0:
            raise ValueError("leq_eps must be positive")
        if not self.entries:
            self.entries = _entries(self.leq_eps)
            src = "leq_ramp" if self.mode == CONTINUOUS else "leq_sharp"
            self.entries["leq"] = replace(self.entries[src], name="leq")

    def register(self, prim: Prim) -> None:
        self.entries[prim.name] = prim

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def get(self, name: str) -> Prim:
        try:
            return self.entries[name]
        except KeyError:
            raise KeyError(f"unknown primitive {name!r}") from None

    def admissible(self, name: str) -> bool:
        """Whether ``name`` may be used under this registry's mode."""
        p = self.get(name)
        if self.mode == FULL:
            return True
        return p.continuous and not p.boolean

    def op_leq(self, x: float, y: float) -> float:
        return self.entries["leq"].scalar(x, y)

    @property
    def names(self):
        return frozenset(self.entries)


_DEFAULTS: Dict[tuple, PrimRegistry] = {}


def registry_for(mode: str = FULL, leq_eps: float = 1.0) -> PrimRegistry:
    key = (mode, leq_eps)
    if key not in _DEFAULTS:
        _DEFAULTS[key] = PrimRegistry(mode=mode, leq_eps=leq_eps)
    return _DEFAULTS[key]


def default_registry() -> PrimRegistry:
    return registry_for(FULL)
