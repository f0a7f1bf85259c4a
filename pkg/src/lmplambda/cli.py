"""Command-line interface.

Every subcommand except ``run`` writes a JSON report (to ``--out`` or
stdout) that embeds its configuration and seeds. The exit status is 0 iff
every claim asserted by the command passed; parse, type and input errors
exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .equivalence.applicative import distinguish_by_tests, test_success_mc
from .equivalence.contexts import Context, default_contexts, distinguish_by_contexts
from .equivalence.corpus import CorpusConfig, corpus_check
from .equivalence.finite import (
    formula_set, logical_equiv_analysis, state_bisim_finite, test_partition_analysis, test_success_finite,
)
from .equivalence.report import EQUAL_EXACT, EquivalenceReport, combine
from .equivalence.syntax import parse_formula, parse_test
from .lmp import DEFAULT_RATIONALS, LMPFormatError, load_finite_lmp, make_state, parse_action
from .measures import ks_two_sample
from .semantics.estimate import estimate
from .semantics.evaluator import EXHAUSTED, eval_sample
from .semantics.feller import feller_audit, harmonic_sequence
from .semantics.modular import modular_eval, modular_reconstruct
from .semantics.rng import RngStream
from .syntax.parser import ParseError, parse
from .syntax.preterm import factorize
from .syntax.prims import CONTINUOUS, FULL, MODES, registry_for
from .syntax.terms import show
from .syntax.types import RealT
from .syntax.typing import TypeCheckError, typecheck

EXIT_OK, EXIT_CLAIM, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# -- helpers ------------------------------------------------------------------------


def _default_seed() -> int:
    env = os.environ.get("LMPLAMBDA_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env, 0)
    except ValueError:
        raise SystemExit(f"LMPLAMBDA_SEED is not an integer: {env!r}")


def _rationals(text: str) -> List[Fraction]:
    if not text.strip():
        return []
    try:
        return sorted({Fraction(x.strip()) for x in text.split(",")})
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a list of rationals: {text!r}") from None


def _level(text: str) -> float:
    x = float(text)
    if x > 1:
        x /= 100.0
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError("level must lie in (0, 100) percent")
    return x


def _positive(text: str) -> int:
    n = int(float(text))
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive count")
    return n


def _nonneg(text: str) -> int:
    n = int(float(text))
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(args, report: dict) -> None:
    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    return {"seed": args.seed, "samples": args.samples, "fuel": args.fuel, "mode": args.mode,
            "depth": args.depth, "rationals": [str(q) for q in args.rationals], "level": args.level}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def _program(path: str, mode: str):
    reg = registry_for(mode)
    try:
        term = parse(_read(path), reg)
    except ParseError as e:
        raise InputError(f"{path}: {e}") from None
    try:
        ty = typecheck(None, term, registry=reg)
    except TypeCheckError as e:
        raise InputError(f"{path}: type error ({mode} mode): {e}") from None
    return term, ty, reg


# -- subcommands --------------------------------------------------------------------


def cmd_run(args) -> int:
    term, ty, reg = _program(args.file, args.mode)
    out = eval_sample(term, args.fuel, RngStream(args.seed), reg)
    print(out)
    if out is EXHAUSTED:
        print(f"fuel: {args.fuel} (exhausted)")
    else:
        print(f"type: {ty}")
        print(f"fuel used: {out.depth}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    term, ty, reg = _program(args.file, args.mode)
    m = estimate(term, args.samples, args.fuel, args.seed, registry=reg, n_jobs=args.jobs, type_=ty)
    rep = m.report(args.seed, args.samples, args.fuel)
    _emit(args, {"command": "estimate", "file": args.file, "config": _config(args), "measure": rep})
    return EXIT_OK


def cmd_modular(args) -> int:
    term, ty, reg = _program(args.file, args.mode)
    pre, reals = factorize(term)
    dist = modular_eval(pre, args.fuel, registry=reg)
    recon = modular_reconstruct(pre, reals, args.fuel, args.samples, args.seed, registry=reg, dist=dist)
    direct = estimate(term, args.samples, args.fuel, args.seed + 1, registry=reg, type_=ty)
    claims = []
    if isinstance(ty, RealT) and len(recon.values) and len(direct.values):
        ks = ks_two_sample(recon, direct, 1.0 - args.level)
        claims.append({"claim": "modular reconstruction matches direct sampling (two-sample KS)",
                       "passed": not ks.reject, "ks": ks.to_dict()})
    n = args.samples
    diff = abs(recon.mass - direct.mass)
    p = (recon.mass + direct.mass) / 2
    z = 0.0 if p in (0.0, 1.0) else diff / math.sqrt(2 * p * (1 - p) / n)
    claims.append({"claim": "convergence probabilities agree", "passed": diff == 0.0 or z <= 3.0,
                   "modular": recon.mass, "direct": direct.mass})
    rep = {
        "command": "modular", "file": args.file, "config": _config(args),
        "preterm": str(pre), "holes": pre.hole_count, "reals": [float(x) for x in reals],
        "entries": [{"prevalue": show(e.prevalue), "kernel": repr(e.kernel), "weight": e.weight,
                     "holes": e.holes, "feller": e.kernel.feller} for e in dist.entries],
        "reconstructed": recon.report(args.seed, args.samples, args.fuel),
        "direct": direct.report(args.seed + 1, args.samples, args.fuel),
        "claims": claims,
        "passed": all(c["passed"] for c in claims),
    }
    _emit(args, rep)
    return EXIT_OK if rep["passed"] else EXIT_CLAIM


def cmd_feller(args) -> int:
    term, ty, reg = _program(args.file, args.mode)
    pre, reals = factorize(term)
    if pre.hole_count == 0:
        raise InputError(f"{args.file}: program has no real literal to perturb")
    seq = harmonic_sequence(reals, args.points, args.n_max, args.sign)
    rep = feller_audit(pre, reals, seq, samples=args.samples, seed=args.seed, fuel=args.fuel,
                       mode=args.mode, threshold=args.threshold)
    out = {"command": "feller", "file": args.file, "config": _config(args), "preterm": str(pre),
           "target": [float(x) for x in reals], "sign": args.sign, "audit": rep.to_dict()}
    code = EXIT_OK
    if args.expect:
        ok = rep.verdict == args.expect.upper()
        out["claims"] = [{"claim": f"verdict is {args.expect.upper()}", "passed": ok}]
        code = EXIT_OK if ok else EXIT_CLAIM
    _emit(args, out)
    return code


def cmd_test(args) -> int:
    if args.file.endswith(".json"):
        try:
            l = load_finite_lmp(args.file)
        except LMPFormatError as e:
            raise InputError(str(e)) from None
        res = {"command": "test", "file": args.file, "config": _config(args), "results": []}
        states = [args.state] if args.state else l.states
        for s in states:
            if s not in l.index:
                raise InputError(f"unknown state {s!r}")
        for text in args.test or []:
            t = parse_test(text)
            vals = {s: test_success_finite(l, s, t) for s in states}
            res["results"].append({"test": str(t), "exact": {s: str(v) for s, v in vals.items()},
                                   "float": {s: float(v) for s, v in vals.items()}})
        for text in args.formula or []:
            phi = parse_formula(text)
            sat = formula_set(l, phi)
            res["results"].append({"formula": str(phi), "satisfied_by": [s for s in states if s in sat]})
        _emit(args, res)
        return EXIT_OK
    term, ty, reg = _program(args.file, args.mode)
    s = make_state(term, reg)
    res = {"command": "test", "file": args.file, "config": _config(args), "state_type": str(ty),
           "results": []}
    for i, text in enumerate(args.test or []):
        try:
            t = parse_test(text, lambda lab: parse_action(lab, reg))
        except ValueError as e:
            raise InputError(f"bad test {text!r}: {e}") from None
        est = test_success_mc(s, t, args.samples, args.fuel, args.seed, reg, test_index=i)
        res["results"].append({"test": str(t), "test_index": i, **est.to_json()})
    _emit(args, res)
    return EXIT_OK


def cmd_bisim(args) -> int:
    try:
        l = load_finite_lmp(args.file)
    except LMPFormatError as e:
        raise InputError(str(e)) from None
    p = state_bisim_finite(l)
    logic = logical_equiv_analysis(l, len(l.states))
    tests = test_partition_analysis(l)
    witnesses = []
    for i, s in enumerate(l.states):
        for t in l.states[i + 1:]:
            if not p.same(s, t):
                f = logic.witness(l, s, t)
                w = tests.witness(l, s, t)
                witnesses.append({"states": [s, t], "formula": None if f is None else str(f),
                                  "test": None if w is None else str(w)})
    ok = p == logic.partition == tests.partition
    rep = {"command": "bisim", "file": args.file, "partition": p.to_json(),
           "logic_partition": logic.partition.to_json(), "test_partition": tests.partition.to_json(),
           "witnesses": witnesses,
           "claims": [{"claim": "refinement, logic and tests give the same partition", "passed": ok}],
           "passed": ok}
    _emit(args, rep)
    return EXIT_OK if ok else EXIT_CLAIM


def _load_contexts(spec: str, ty, reg) -> List[Context]:
    if spec == "default":
        return default_contexts(ty)
    if spec == "none":
        return []
    out = []
    for i, line in enumerate(_read(spec).splitlines()):
        line = line.strip()
        if line and not line.startswith("--"):
            out.append(Context(line, line))
    return out


def cmd_compare(args) -> int:
    m, tm, reg = _program(args.first, args.mode)
    n, tn, _ = _program(args.second, args.mode)
    if str(tm) != str(tn):
        raise InputError(f"programs have different types: {tm} vs {tn}")
    if show(m) == show(n):
        rep = EquivalenceReport(EQUAL_EXACT, {"kind": "syntactic", "program": show(m)},
                                {}, [args.seed])
    else:
        parts = {}
        if args.budget > 0:
            parts["tests"] = distinguish_by_tests(make_state(m, reg), make_state(n, reg), args.depth,
                                                  args.rationals, args.budget, args.test_samples,
                                                  args.seed, args.fuel, reg)
        ctxs = _load_contexts(args.contexts, tm, reg)
        if ctxs:
            parts["contexts"] = distinguish_by_contexts(m, n, ctxs, args.samples, args.fuel, args.seed,
                                                        args.level, reg)
        rep = combine(parts, [args.seed])
    out = {"command": "compare", "files": [args.first, args.second], "config": _config(args),
           "type": str(tm), **rep.to_json()}
    code = EXIT_OK
    if args.expect:
        want = {"distinguished": "DISTINGUISHED", "not-separated": "NOT_SEPARATED_WITHIN_BUDGET",
                "equal": EQUAL_EXACT}[args.expect]
        ok = rep.verdict == want
        out["claims"] = [{"claim": f"verdict is {want}", "passed": ok}]
        code = EXIT_OK if ok else EXIT_CLAIM
    _emit(args, out)
    return code


def cmd_corpus(args) -> int:
    cfg = CorpusConfig(seed=args.seed, samples=args.samples, fuel=args.fuel,
                       test_samples=args.test_samples, budget=args.budget, depth=args.depth,
                       rationals=tuple(args.rationals), level=args.level)
    rep = corpus_check(cfg, args.only)
    rep["command"] = "corpus"
    _emit(args, rep)
    if not args.quiet:
        for c in rep["claims"]:
            print(("PASS " if c["passed"] else "FAIL ") + c["claim"], file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_CLAIM


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=_default_seed(),
                        help="u64 seed (default: $LMPLAMBDA_SEED or 0)")
    common.add_argument("--samples", type=_positive, default=100000)
    common.add_argument("--fuel", type=_nonneg, default=10000)
    common.add_argument("--mode", choices=MODES, default=FULL)
    common.add_argument("--depth", type=_nonneg, default=1, help="value depth of the label family")
    common.add_argument("--rationals", type=_rationals, default=list(DEFAULT_RATIONALS),
                        help="comma-separated rationals of the label family")
    common.add_argument("--level", type=_level, default=0.99, help="confidence level in percent")
    common.add_argument("--out", default=None, help="report path (default: stdout)")

    p = argparse.ArgumentParser(prog="lmplambda", description="Workbench for a typed probabilistic "
                                "lambda calculus and its labelled Markov processes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common], help="evaluate a program once")
    s.add_argument("file")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("estimate", parents=[common], help="empirical output measure")
    s.add_argument("file")
    s.add_argument("--jobs", type=_positive, default=1)
    s.set_defaults(fn=cmd_estimate)

    s = sub.add_parser("modular", parents=[common], help="modular semantics of the pre-term")
    s.add_argument("file")
    s.set_defaults(fn=cmd_modular)

    s = sub.add_parser("feller", parents=[common], help="weak-convergence audit along r + 1/n")
    s.add_argument("file")
    s.add_argument("--points", type=_positive, default=20)
    s.add_argument("--n-max", type=float, default=1e7)
    s.add_argument("--sign", type=float, default=1.0)
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--expect", choices=["convergent", "divergent", "inconclusive"])
    s.set_defaults(fn=cmd_feller, samples=10000)

    s = sub.add_parser("test", parents=[common], help="success probability of tests")
    s.add_argument("file", help="program (.lp) or finite LMP (.json)")
    s.add_argument("--test", action="append", help="test text, e.g. 'eval.leq:1/2.w'")
    s.add_argument("--formula", action="append", help="modal formula (finite LMPs)")
    s.add_argument("--state", help="state of a finite LMP (default: all)")
    s.set_defaults(fn=cmd_test, samples=10000)

    s = sub.add_parser("bisim", parents=[common], help="bisimilarity on a finite LMP")
    s.add_argument("file")
    s.set_defaults(fn=cmd_bisim)

    s = sub.add_parser("compare", parents=[common], help="search for tests or contexts separating "
                       "two programs")
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("--contexts", default="default", help="'default', 'none' or a file of contexts")
    s.add_argument("--budget", type=_nonneg, default=200, help="number of tests (0 disables tests)")
    s.add_argument("--test-samples", type=_positive, default=10000)
    s.add_argument("--expect", choices=["distinguished", "not-separated", "equal"])
    s.set_defaults(fn=cmd_compare)

    s = sub.add_parser("corpus", parents=[common], help="check the claims on the shipped examples")
    s.add_argument("--budget", type=_positive, default=200)
    s.add_argument("--test-samples", type=_positive, default=10000)
    s.add_argument("--only", action="append", help="restrict to a claim group")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(fn=cmd_corpus)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TypeError, KeyError) as e:
        print(f"error: {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
