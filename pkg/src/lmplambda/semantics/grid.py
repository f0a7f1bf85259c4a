"""Deterministic quadrature oracle: every draw is replaced by the midpoints
of an ``m``-point grid on [0, 1] and all draw prefixes are enumerated."""

from __future__ import annotations

from typing import Optional

from ..syntax.prims import FULL, registry_for
from ..syntax.typing import typecheck
from .evaluator import compile_term, run_code
from .measure import ValueMeasure

MAX_DRAWS = 4


class DrawBoundExceeded(ValueError):
    pass


class _NeedDraw(Exception):
    pass


def exact_eval_grid(program, fuel: int, m: int, mode: str = FULL, max_draws: int = MAX_DRAWS,
                    registry=None) -> ValueMeasure:
    """Discrete measure obtained by running ``program`` on every cell of the
    midpoint grid; a path using ``j`` draws has weight ``m ** -j``.

    Paths are discovered by replaying draw prefixes: a run that asks for
    more draws than its prefix provides is branched into ``m`` children.
    Programs with a path needing more than ``max_draws`` draws are rejected.
    """
    if m < 1:
        raise ValueError("grid resolution must be positive")
    reg = registry or registry_for(mode)
    ty = typecheck(None, program, registry=reg)
    code = compile_term(program, reg)
    points = [(i + 0.5) / m for i in range(m)]
    vals, weights = [], []
    stack = [()]
    while stack:
        prefix = stack.pop()
        pos = [0]

        def draw():
            j = pos[0]
            if j >= len(prefix):
                raise _NeedDraw
            pos[0] = j + 1
            return prefix[j]

        try:
            out = run_code(code, (), int(fuel), draw)
        except _NeedDraw:
            if len(prefix) >= max_draws:
                raise DrawBoundExceeded(
                    f"program needs more than {max_draws} draws on some path") from None
            for p in reversed(points):
                stack.append(prefix + (p,))
            continue
        if out is not None:
            vals.append(out[0])
            weights.append(float(m) ** -len(prefix))
    return ValueMeasure(ty, 0, vals, weights, exact=True)
