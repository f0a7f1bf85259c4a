"""Finite measures, relation liftings, couplings and statistical
comparators.

Two liftings of an equivalence relation R to sub-probability measures are
implemented independently:

* ``gamma_related``: the measures agree on every R-closed set. On a finite
  carrier the closed sets are exactly the unions of blocks, so agreement on
  blocks suffices (a union of disjoint blocks has the summed mass).
* ``theta_related``: some coupling puts all its mass on R. Decided by an
  exact max-flow on the bipartite graph of related pairs.

Both work on the bottom-completed measures, where the missing mass of a
sub-probability measure sits on a fresh point ``BOT`` related only to
itself.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

TOL = 1e-9
MASS_SLACK = 1e-12


class _Bot:
    __slots__ = ()

    def __repr__(self):
        return "BOT"

    def __str__(self):
        return "⊥"

    def __reduce__(self):
        return (_bot, ())


def _bot():
    return BOT


BOT = _Bot()


class CarrierMismatch(ValueError):
    pass


# -- finite measures ------------------------------------------------------------


class FiniteMeasure:
    """Sub-probability measure with finite support. Weights may be floats
    or exact rationals."""

    __slots__ = ("_w",)

    def __init__(self, weights=None):
        w: Dict[Hashable, object] = {}
        items = weights.items() if isinstance(weights, dict) else (weights or ())
        for x, v in items:
            if x in w:
                raise ValueError(f"support point {x!r} listed twice")
            if v < 0:
                raise ValueError(f"negative weight at {x!r}")
            w[x] = v
        total = sum(w.values(), 0)
        if total > 1 + MASS_SLACK:
            raise ValueError(f"total mass {float(total)} exceeds 1")
        self._w = w

    @classmethod
    def dirac(cls, x) -> "FiniteMeasure":
        return cls({x: 1})

    @classmethod
    def empty(cls) -> "FiniteMeasure":
        return cls({})

    def __getitem__(self, x):
        return self._w.get(x, 0)

    def __iter__(self):
        return iter(self._w)

    def items(self):
        return self._w.items()

    @property
    def support(self) -> List:
        return [x for x, v in self._w.items() if v > 0]

    @property
    def points(self) -> List:
        return list(self._w)

    @property
    def total(self):
        return sum(self._w.values(), 0)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Rational) for v in self._w.values())

    def mass_of(self, points: Iterable) -> object:
        return sum((self._w.get(x, 0) for x in points), 0)

    def __repr__(self):
        inner = ", ".join(f"{x!r}: {v}" for x, v in self._w.items())
        return f"FiniteMeasure({{{inner}}})"


def bot_complete(m: FiniteMeasure) -> FiniteMeasure:
    """Probability measure with the deficit ``1 - total`` moved to BOT
    (added to BOT's weight if it is already present, so completing twice
    changes nothing)."""
    w = dict(m.items())
    deficit = 1 - m.total
    if deficit < 0:  # float round-off within the slack
        deficit = 0 * deficit
    w[BOT] = w.get(BOT, 0 * deficit) + deficit
    return FiniteMeasure(w)


# -- equivalence relations ------------------------------------------------------


class EquivRelation:
    """Equivalence relation on a finite carrier, given by its blocks."""

    def __init__(self, blocks: Iterable[Iterable]):
        bl = [tuple(b) for b in blocks]
        seen: Dict[Hashable, int] = {}
        for i, b in enumerate(bl):
            if not b:
                raise ValueError("empty block")
            for x in b:
                if x in seen:
                    raise ValueError(f"{x!r} occurs in two blocks")
                seen[x] = i
        self.blocks: Tuple[Tuple, ...] = tuple(bl)
        self._index = seen

    @classmethod
    def identity(cls, carrier: Iterable) -> "EquivRelation":
        return cls([(x,) for x in carrier])

    @classmethod
    def total(cls, carrier: Iterable) -> "EquivRelation":
        c = list(carrier)
        return cls([c] if c else [])

    @property
    def carrier(self) -> List:
        return [x for b in self.blocks for x in b]

    def block_of(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise CarrierMismatch(f"{x!r} is not in the carrier") from None

    def related(self, x, y) -> bool:
        return self.block_of(x) == self.block_of(y)

    def __contains__(self, pair) -> bool:
        x, y = pair
        return x in self._index and y in self._index and self._index[x] == self._index[y]

    def with_bot(self) -> "EquivRelation":
        if BOT in self._index:
            return self
        return EquivRelation(list(self.blocks) + [(BOT,)])

    def pairs(self) -> List[Tuple]:
        return [(x, y) for b in self.blocks for x in b for y in b]

    def __repr__(self):
        return "EquivRelation(" + " | ".join(" ".join(map(str, b)) for b in self.blocks) + ")"


def _check_carrier(r: EquivRelation, *ms: FiniteMeasure) -> None:
    for m in ms:
        for x in m.points:
            if x not in r._index:
                raise CarrierMismatch(f"support point {x!r} is outside the relation's carrier")


def _eq(a, b, tol) -> bool:
    if isinstance(a, Rational) and isinstance(b, Rational):
        return a == b
    return abs(float(a) - float(b)) <= tol


def gamma_related(r: EquivRelation, mu: FiniteMeasure, nu: FiniteMeasure, tol: float = TOL) -> bool:
    """Blockwise mass equality of the bottom-completed measures."""
    _check_carrier(r, mu, nu)
    mb, nb = bot_complete(mu), bot_complete(nu)
    for b in r.with_bot().blocks:
        if not _eq(mb.mass_of(b), nb.mass_of(b), tol):
            return False
    return True


# -- couplings ---------------------------------------------------------------------


@dataclass
class Coupling:
    rows: List
    cols: List
    entries: Dict[Tuple[int, int], object] = field(default_factory=dict)

    def weight(self, x, y):
        try:
            return self.entries.get((self.rows.index(x), self.cols.index(y)), 0)
        except ValueError:
            return 0

    def row_sums(self) -> Dict:
        out = {x: 0 for x in self.rows}
        for (i, _), w in self.entries.items():
            out[self.rows[i]] += w
        return out

    def col_sums(self) -> Dict:
        out = {y: 0 for y in self.cols}
        for (_, j), w in self.entries.items():
            out[self.cols[j]] += w
        return out

    def support_pairs(self) -> List[Tuple]:
        return [(self.rows[i], self.cols[j]) for (i, j), w in self.entries.items() if w > 0]

    def to_json(self) -> dict:
        def num(w):
            return float(w)

        return {
            "rows": [str(x) for x in self.rows],
            "cols": [str(y) for y in self.cols],
            "entries": [[i, j, num(w)] for (i, j), w in sorted(self.entries.items()) if w != 0],
        }


class _NotRelated:
    def __bool__(self):
        return False

    def __repr__(self):
        return "NotRelated"


NOT_RELATED = _NotRelated()


def max_flow_coupling(mu: Dict, nu: Dict, allowed: Callable[[object, object], bool], tol=0):
    """Largest flow from ``mu`` to ``nu`` along allowed pairs
    (Edmonds-Karp). Returns ``(value, flow)`` with ``flow[(x, y)]``.

    Arithmetic is exact when the weights are rationals."""
    xs = [x for x in mu if mu[x] > 0]
    ys = [y for y in nu if nu[y] > 0]
    nx = len(xs)
    n = nx + len(ys) + 2
    s, t = n - 2, n - 1
    cap: Dict[Tuple[int, int], object] = {}
    adj: List[List[int]] = [[] for _ in range(n)]

    def add(u, v, c):
        cap[(u, v)] = cap.get((u, v), 0) + c
        cap.setdefault((v, u), 0)
        adj[u].append(v)
        adj[v].append(u)

    one = 1
    for i, x in enumerate(xs):
        add(s, i, mu[x])
    for j, y in enumerate(ys):
        add(nx + j, t, nu[y])
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if allowed(x, y):
                add(i, nx + j, one)
    value = 0
    while True:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > tol:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            break
        path = []
        v = t
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        b = min(cap[e] for e in path)
        for u, v in path:
            cap[(u, v)] -= b
            cap[(v, u)] += b
        value += b
    flow = {}
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if allowed(x, y):
                f = cap[(nx + j, i)]
                if f > 0:
                    flow[(x, y)] = f
    return value, flow


def theta_related(r, mu: FiniteMeasure, nu: FiniteMeasure, tol: float = TOL):
    """A coupling of the bottom-completed measures concentrated on ``r``
    (plus the pair (BOT, BOT)), or ``NOT_RELATED``.

    ``r`` is an :class:`EquivRelation` or any predicate on pairs; the flow
    network uses every related pair, not the block structure."""
    if isinstance(r, EquivRelation):
        _check_carrier(r, mu, nu)
        rel = r.related
    else:
        rel = r

    def allowed(x, y):
        if x is BOT or y is BOT:
            return x is BOT and y is BOT
        return rel(x, y)

    mb, nb = bot_complete(mu), bot_complete(nu)
    exact = mb.exact and nb.exact
    ftol = 0 if exact else tol * 1e-3
    value, flow = max_flow_coupling(dict(mb.items()), dict(nb.items()), allowed, ftol)
    ok = value == 1 if exact else abs(float(value) - 1.0) <= tol
    if not ok:
        return NOT_RELATED
    rows, cols = mb.points, nb.points
    entries = {(rows.index(x), cols.index(y)): w for (x, y), w in flow.items()}
    return Coupling(rows, cols, entries)


def coupling_marginal_error(c: Coupling, mu: FiniteMeasure, nu: FiniteMeasure) -> float:
    mb, nb = bot_complete(mu), bot_complete(nu)
    rs, cs = c.row_sums(), c.col_sums()
    err = 0.0
    for x in set(rs) | set(mb.points):
        err = max(err, abs(float(rs.get(x, 0)) - float(mb[x])))
    for y in set(cs) | set(nb.points):
        err = max(err, abs(float(cs.get(y, 0)) - float(nb[y])))
    return err


# -- randomized verification of Gamma = Theta -------------------------------------


def random_partition(carrier: Sequence, rng: random.Random) -> EquivRelation:
    blocks: List[List] = []
    for x in carrier:
        j = rng.randrange(len(blocks) + 1)
        if j == len(blocks):
            blocks.append([x])
        else:
            blocks[j].append(x)
    return EquivRelation(blocks)


def random_measure(carrier: Sequence, rng: random.Random, denom: int = 12, allow_deficit: bool = True
                   ) -> FiniteMeasure:
    """Random rational sub-probability measure with weights in ``1/denom``."""
    budget = denom if not allow_deficit or rng.random() < 0.5 else rng.randrange(denom + 1)
    w = {x: 0 for x in carrier}
    for _ in range(budget):
        w[rng.choice(list(carrier))] += 1
    return FiniteMeasure({x: Fraction(k, denom) for x, k in w.items()})


def _reshuffle_within_blocks(r: EquivRelation, mu: FiniteMeasure, rng: random.Random, denom: int
                             ) -> FiniteMeasure:
    """A measure with the same block masses as ``mu`` (hence related)."""
    w = {x: Fraction(0) for x in r.carrier}
    for b in r.blocks:
        units = int(mu.mass_of(b) * denom)
        for _ in range(units):
            w[rng.choice(b)] += Fraction(1, denom)
    return FiniteMeasure(w)


@dataclass
class VerificationReport:
    trials: int
    agreements: int
    related: int
    disagreements: List = field(default_factory=list)
    theta_not_in_gamma: List = field(default_factory=list)
    marginal_error: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.disagreements and not self.theta_not_in_gamma

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "agreements": self.agreements,
            "related_both": self.related,
            "disagreements": [repr(d) for d in self.disagreements],
            "theta_not_in_gamma": [repr(d) for d in self.theta_not_in_gamma],
            "max_marginal_error": self.marginal_error,
            "ok": self.ok,
        }


def random_triple(max_size: int, rng: random.Random, denom: int = 12):
    size = rng.randint(1, max_size)
    carrier = [f"x{i}" for i in range(size)]
    r = random_partition(carrier, rng)
    mu = random_measure(carrier, rng, denom)
    if rng.random() < 0.5:
        nu = _reshuffle_within_blocks(r, mu, rng, denom)
    else:
        nu = random_measure(carrier, rng, denom)
    return r, mu, nu


def check_gamma_eq_theta(max_size: int = 6, trials: int = 10000, seed: int = 0) -> VerificationReport:
    """Random (relation, mu, nu) triples: Gamma holds exactly when a
    coupling exists, and every coupling found respects Gamma."""
    if max_size > 8:
        raise ValueError("carriers are limited to 8 points")
    rng = random.Random(seed)
    rep = VerificationReport(trials, 0, 0)
    for _ in range(trials):
        r, mu, nu = random_triple(max_size, rng)
        g = gamma_related(r, mu, nu)
        c = theta_related(r, mu, nu)
        if g == bool(c):
            rep.agreements += 1
        else:
            rep.disagreements.append((r, mu, nu))
        if c:
            rep.related += 1
            if not g:
                rep.theta_not_in_gamma.append((r, mu, nu))
            rep.marginal_error = max(rep.marginal_error, coupling_marginal_error(c, mu, nu))
            if any(not (x is BOT and y is BOT) and (x is BOT or y is BOT or not r.related(x, y))
                   for x, y in c.support_pairs()):
                rep.theta_not_in_gamma.append(("coupling off the relation", r, mu, nu))
    return rep


# -- distances and statistical tests -------------------------------------------


def tv_discrete(a: FiniteMeasure, b: FiniteMeasure) -> float:
    """Total variation distance of the bottom-completed measures."""
    ab, bb = bot_complete(a), bot_complete(b)
    pts = set(ab.points) | set(bb.points)
    return float(sum(abs(ab[x] - bb[x]) for x in pts)) / 2.0


def ks_critical_coefficient(alpha: float) -> float:
    """Asymptotic Kolmogorov coefficient ``c(alpha) = sqrt(-ln(alpha/2)/2)``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    critical: float
    n: float
    m: float
    alpha: float

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "critical": self.critical, "n": self.n, "m": self.m,
                "alpha": self.alpha, "reject": self.reject}


def _as_weighted(x) -> Tuple[np.ndarray, np.ndarray]:
    """Sample values and weights from an array or a real-valued measure."""
    if hasattr(x, "reals") and hasattr(x, "weights"):
        return np.asarray(x.reals(), dtype=float), np.asarray(x.weights, dtype=float)
    a = np.asarray(x, dtype=float).ravel()
    return a, np.ones(len(a))


def _ecdf_at(x: np.ndarray, w: np.ndarray, at: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.cumsum(w[order]) / w.sum()
    idx = np.searchsorted(xs, at, side="right")
    return np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)


def _ess(w: np.ndarray) -> float:
    return float(w.sum() ** 2 / (w * w).sum())


def ks_two_sample(a, b, alpha: float = 0.01) -> KSResult:
    """Two-sample Kolmogorov-Smirnov test on the normalised (converged)
    parts. Weighted inputs use their Kish effective sizes."""
    xa, wa = _as_weighted(a)
    xb, wb = _as_weighted(b)
    if len(xa) == 0 or len(xb) == 0 or wa.sum() <= 0 or wb.sum() <= 0:
        raise ValueError("KS test needs two nonempty samples")
    at = np.union1d(xa, xb)
    d = float(np.max(np.abs(_ecdf_at(xa, wa, at) - _ecdf_at(xb, wb, at))))
    n, m = _ess(wa), _ess(wb)
    crit = ks_critical_coefficient(alpha) * math.sqrt((n + m) / (n * m))
    return KSResult(d, crit, n, m, alpha)


def ks_one_sample(a, cdf: Callable[[np.ndarray], np.ndarray], alpha: float = 0.01) -> KSResult:
    """One-sample KS statistic against a continuous CDF."""
    xa, wa = _as_weighted(a)
    if len(xa) == 0:
        raise ValueError("KS test needs a nonempty sample")
    order = np.argsort(xa, kind="stable")
    xs = xa[order]
    cw = np.cumsum(wa[order]) / wa.sum()
    before = np.concatenate([[0.0], cw[:-1]])
    f = cdf(xs)
    d = float(max(np.max(cw - f), np.max(f - before)))
    n = _ess(wa)
    crit = ks_critical_coefficient(alpha) / math.sqrt(n)
    return KSResult(d, crit, n, float("inf"), alpha)


def uniform_cdf(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def normal_cdf(x):
    from scipy.special import ndtr

    return ndtr(np.asarray(x, dtype=float))


def binomial_halfwidth(p: float, n: float, z: float = 3.0) -> float:
    """``z`` standard errors of a proportion estimated from ``n`` runs."""
    return z * math.sqrt(max(p * (1 - p), 0.0) / n) if n > 0 else float("inf")


def within_binomial(p_hat: float, p: float, n: float, z: float = 3.0) -> bool:
    return abs(p_hat - p) <= z * math.sqrt(p * (1 - p) / n) + 1e-12


# -- stability of Theta under limits ----------------------------------------


@dataclass
class StabilityReport:
    feasible_steps: List[bool]
    feasible_limit: bool
    finding: Optional[str]

    def to_dict(self):
        return {"feasible_steps": self.feasible_steps, "feasible_limit": self.feasible_limit,
                "finding": self.finding}


def theta_stability_probe(relation: Callable[[object, object], bool], mus: Sequence[FiniteMeasure],
                          nus: Sequence[FiniteMeasure], mu_limit: FiniteMeasure, nu_limit: FiniteMeasure,
                          tol: float = 1e-6) -> StabilityReport:
    """Check that a closed relation related along converging sequences
    still admits a coupling at the limit."""
    steps = [bool(theta_related(relation, m, n, tol)) for m, n in zip(mus, nus)]
    lim = bool(theta_related(relation, mu_limit, nu_limit, tol))
    finding = None
    if all(steps) and not lim:
        finding = "FINDING: related along the sequence but no coupling at the limit"
    return StabilityReport(steps, lim, finding)


def discretize_uniform(lo: float, hi: float, k: int) -> FiniteMeasure:
    """Uniform law on ``[lo, hi]`` discretised on ``k`` cell midpoints."""
    w = Fraction(1, k)
    return FiniteMeasure({lo + (hi - lo) * (i + 0.5) / k: w for i in range(k)})
