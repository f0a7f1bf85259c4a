"""Monte Carlo estimation of program output measures."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

from ..syntax.prims import FULL, registry_for
from ..syntax.terms import Sample, contains
from ..syntax.typing import typecheck
from .evaluator import compile_term, run_code
from .measure import ValueMeasure
from .rng import RngStream

CHUNK = 4096


def _no_draw():
    raise AssertionError("sample-free program requested a draw")


def run_chunk(term, mode: str, leq_eps: float, fuel: int, seed: int, chunk: int, count: int
              ) -> Tuple[List, List[int]]:
    """Runs ``count`` samples on stream ``chunk``. Returns converged values
    and their derivation depths."""
    code = compile_term(term, registry_for(mode, leq_eps))
    rng = RngStream(seed, chunk)
    draw = rng.uniform
    vals, depths = [], []
    for _ in range(count):
        out = run_code(code, (), fuel, draw)
        if out is not None:
            vals.append(out[0])
            depths.append(out[1])
    return vals, depths


def _chunks(samples: int):
    out = []
    k = 0
    left = samples
    while left > 0:
        n = min(CHUNK, left)
        out.append((k, n))
        k += 1
        left -= n
    return out


def estimate(program, samples: int, fuel: int, seed: int, mode: str = FULL,
             registry=None, n_jobs: int = 1, type_=None) -> ValueMeasure:
    """Empirical output measure of ``samples`` independent runs.

    Run ``i`` uses stream ``i // CHUNK`` of ``seed``, so the result does not
    depend on ``n_jobs``. Programs without any ``sample`` are run once and
    reported exactly.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    reg = registry or registry_for(mode)
    ty = type_ if type_ is not None else typecheck(None, program, registry=reg)
    if not contains(program, Sample):
        out = run_code(compile_term(program, reg), (), int(fuel), _no_draw)
        if out is None:
            return ValueMeasure(ty, samples, [], [], exact=True)
        return ValueMeasure(ty, samples, [out[0]], [1.0], exact=True)
    jobs = _chunks(samples)
    args = [(program, reg.mode, reg.leq_eps, int(fuel), int(seed), k, n) for k, n in jobs]
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_star_chunk, args))
    else:
        parts = [run_chunk(*a) for a in args]
    vals = [v for p in parts for v in p[0]]
    return ValueMeasure(ty, samples, vals)


def _star_chunk(a):
    return run_chunk(*a)


def convergence_probability(program, samples: int, fuel: int, seed: int, mode: str = FULL) -> float:
    return estimate(program, samples, fuel, seed, mode).mass
