"""The shipped example programs and the claims checked on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib.resources import files
from typing import Callable, Dict, List, Optional

import numpy as np

from ..lmp import DEFAULT_FUEL, DEFAULT_RATIONALS, finite_lmp_from_json, make_state
from ..measures import ks_one_sample, normal_cdf, uniform_cdf, within_binomial
from ..semantics.estimate import estimate
from ..semantics.evaluator import eval_sample
from ..semantics.rng import RngStream, mix_stream
from ..syntax.parser import parse
from ..syntax.prims import CONTINUOUS, FULL, registry_for
from ..syntax.types import REAL, Arrow
from ..syntax.typing import TypeCheckError, typecheck
from .applicative import distinguish_by_tests
from .contexts import context_apply_estimate, default_contexts, distinguish_by_contexts
from .finite import Partition, logical_equiv_finite, state_bisim_finite, test_partition_finite
from .report import DISTINGUISHED, NOT_SEPARATED

SOUNDNESS_CONTEXT = default_contexts(Arrow(REAL, REAL))[0]


def corpus_dir():
    return files("lmplambda") / "corpus"


def corpus_text(name: str) -> str:
    return (corpus_dir() / name).read_text(encoding="utf-8")


def corpus_program(name: str, registry=None):
    return parse(corpus_text(name), registry)


def corpus_lmp(name: str):
    import json

    return finite_lmp_from_json(json.loads(corpus_text(name)))


def corpus_files() -> List[str]:
    return sorted(p.name for p in corpus_dir().iterdir() if p.name.endswith((".lp", ".json")))


@dataclass
class CorpusConfig:
    seed: int = 0
    samples: int = 100000
    fuel: int = DEFAULT_FUEL
    test_samples: int = 10000
    budget: int = 200
    depth: int = 1
    rationals: tuple = tuple(DEFAULT_RATIONALS)
    level: float = 0.99

    def to_json(self) -> dict:
        return {"seed": self.seed, "samples": self.samples, "fuel": self.fuel,
                "test_samples": self.test_samples, "budget": self.budget, "depth": self.depth,
                "rationals": [str(q) for q in self.rationals], "level": self.level}


def _claim(name: str, passed: bool, seed: Optional[int] = None, **data) -> dict:
    out = {"claim": name, "passed": bool(passed)}
    if seed is not None:
        out["seed"] = seed
    out.update(data)
    return out


def _seed(cfg: CorpusConfig, name: str) -> int:
    return mix_stream(cfg.seed, *name.encode())


def claim_identity(cfg):
    out = eval_sample(corpus_program("identity_app.lp"), cfg.fuel, RngStream(cfg.seed))
    return [_claim("identity_app evaluates to 3.0", str(out) == "3.0", cfg.seed, output=str(out))]


def claim_distributions(cfg):
    res = []
    alpha = 1.0 - cfg.level
    for name, label, cdf in (("sample.lp", "sample is uniform on [0, 1]", uniform_cdf),
                             ("normal_std.lp", "Box-Muller output is standard normal", normal_cdf),
                             ("normal.lp", "normal(1, 2) has the right law",
                              lambda x: normal_cdf((np.asarray(x) - 1.0) / 2.0))):
        s = _seed(cfg, name)
        m = estimate(corpus_program(name), cfg.samples, cfg.fuel, s)
        ks = ks_one_sample(m, cdf, alpha)
        res.append(_claim(label, (not ks.reject) and m.mass == 1.0, s, ks=ks.to_dict(), mass=m.mass))
    s = _seed(cfg, "bernoulli.lp")
    m = estimate(corpus_program("bernoulli.lp"), cfg.samples, cfg.fuel, s)
    p0, p1 = m.atom_weight(0.0), m.atom_weight(1.0)
    ok = within_binomial(p0, 0.5, cfg.samples) and within_binomial(p1, 0.5, cfg.samples)
    res.append(_claim("bernoulli(0, 1, 1/2) is fair", ok and m.mass == 1.0, s, mass_0=p0, mass_1=p1,
                      halfwidth=3 * math.sqrt(0.25 / cfg.samples)))
    return res


def soundness_context_figures(cfg, seed: Optional[int] = None) -> dict:
    """Output laws of ``(lam z. z (z 1)) [.]`` on the soundness pair."""
    s = _seed(cfg, "soundness-context") if seed is None else seed
    out = {"seed": s, "context": SOUNDNESS_CONTEXT.name}
    for side in ("M", "N"):
        m = context_apply_estimate(SOUNDNESS_CONTEXT, corpus_program(f"ce_soundness_{side}.lp"),
                                   cfg.samples, cfg.fuel, s)
        r = m.reals()
        cont = r[(r != 0.0) & (r != 1.0)]
        ks = ks_one_sample(cont, uniform_cdf, 1.0 - cfg.level)
        out[side] = {"atom_1": m.atom_weight(1.0), "atom_0": m.atom_weight(0.0), "mass": m.mass,
                     "continuous_part": len(cont) / cfg.samples, "continuous_ks": ks.to_dict()}
    return out


def claim_soundness_context(cfg):
    f = soundness_context_figures(cfg)
    M, N = f["M"], f["N"]
    ok = (abs(M["atom_1"] - 0.25) <= 0.01 and N["atom_1"] <= 0.005
          and abs(M["atom_0"] - 0.25) <= 0.01 and abs(N["atom_0"] - 0.5) <= 0.01
          and not M["continuous_ks"]["reject"] and not N["continuous_ks"]["reject"])
    return [_claim("context (lam z. z (z 1)) [.] gives 1/2 U + 1/4 d1 + 1/4 d0 vs 1/2 U + 1/2 d0",
                   ok, f["seed"], figures=f)]


def _pair_states(pair):
    return (make_state(corpus_program(f"{pair}_M.lp")), make_state(corpus_program(f"{pair}_N.lp")))


def pair_tests(cfg, pair: str):
    a, b = _pair_states(pair)
    s = _seed(cfg, f"{pair}-tests")
    return distinguish_by_tests(a, b, cfg.depth, cfg.rationals, cfg.budget, cfg.test_samples, s, cfg.fuel)


def pair_contexts(cfg, pair: str):
    m, n = corpus_program(f"{pair}_M.lp"), corpus_program(f"{pair}_N.lp")
    return distinguish_by_contexts(m, n, None, cfg.samples, cfg.fuel, _seed(cfg, f"{pair}-contexts"),
                                   cfg.level)


def claim_pairs(cfg):
    res = []
    r = pair_tests(cfg, "ce_soundness")
    res.append(_claim("soundness pair: no test in the budget separates", r.verdict == NOT_SEPARATED,
                      r.seeds[0], report=r.to_json()))
    r = pair_contexts(cfg, "ce_soundness")
    ok = r.verdict == DISTINGUISHED and r.witness["context"] == SOUNDNESS_CONTEXT.name
    res.append(_claim("soundness pair: context (lam z. z (z 1)) [.] separates", ok, r.seeds[0],
                      report=r.to_json()))
    r = pair_tests(cfg, "ce_state")
    res.append(_claim("state pair: no test in the budget separates", r.verdict == NOT_SEPARATED,
                      r.seeds[0], report=r.to_json()))
    r = pair_contexts(cfg, "ce_state")
    res.append(_claim("state pair: no shipped context separates", r.verdict == NOT_SEPARATED,
                      r.seeds[0], report=r.to_json()))
    return res


def claim_finite(cfg):
    res = []
    l = corpus_lmp("hand5.json")
    p = state_bisim_finite(l)
    q = logical_equiv_finite(l, len(l.states))
    t = test_partition_finite(l)
    want = Partition([["s", "t"], ["u", "v", "w"]])
    res.append(_claim("hand LMP: partition {{s, t}, {u, v, w}} by all three methods",
                      p == want and q == want and t == want, partition=p.to_json(),
                      logic=q.to_json(), tests=t.to_json()))
    l = corpus_lmp("counter_example.json")
    p = state_bisim_finite(l)
    q = logical_equiv_finite(l, len(l.states))
    t = test_partition_finite(l)
    res.append(_claim("finite fragment: M and N are not state bisimilar", not p.same("M", "N")
                      and p == q == t, partition=p.to_json()))
    return res


def claim_mode_gate(cfg):
    try:
        typecheck(None, corpus_program("step_full.lp"), mode=CONTINUOUS)
        rejected = False
        msg = ""
    except TypeCheckError as e:
        rejected = True
        msg = str(e)
    ok_full = True
    try:
        typecheck(None, corpus_program("step_full.lp"), mode=FULL)
    except TypeCheckError:
        ok_full = False
    return [_claim("discontinuous primitive rejected in continuous mode only", rejected and ok_full,
                   error=msg)]


CLAIMS: Dict[str, Callable] = {
    "identity": claim_identity,
    "distributions": claim_distributions,
    "soundness_context": claim_soundness_context,
    "pairs": claim_pairs,
    "finite": claim_finite,
    "mode_gate": claim_mode_gate,
}


def corpus_check(cfg: Optional[CorpusConfig] = None, only: Optional[List[str]] = None) -> dict:
    """Runs every named claim group; the report is a pure function of the
    configuration."""
    cfg = cfg or CorpusConfig()
    claims = []
    for name, fn in CLAIMS.items():
        if only is not None and name not in only:
            continue
        for c in fn(cfg):
            c["group"] = name
            claims.append(c)
    return {"config": cfg.to_json(), "files": corpus_files(), "claims": claims,
            "passed": all(c["passed"] for c in claims)}
