"""Exact equivalences on finite LMPs.

Three independent routes to the same partition:

* ``state_bisim_finite``: signature refinement, where related states must
  give every block the same mass under every label;
* ``logical_equiv_finite``: the sets denoted by modal formulas of bounded
  depth, built level by level;
* ``test_partition_finite``: explicit tests whose success vectors span
  the values of all tests of bounded depth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..lmp import FiniteLMP
from .syntax import OMEGA, TOP, Act, And, Conj, Diamond, Omega, Top

MAX_LOGIC_SETS = 1 << 16


# -- partitions ---------------------------------------------------------------------


class Partition:
    """Blocks over a finite state list, in canonical order (blocks sorted
    by their first state in the reference order)."""

    def __init__(self, blocks: Iterable[Iterable[str]], order: Optional[Sequence[str]] = None):
        bl = [list(b) for b in blocks if b]
        every = [s for b in bl for s in b]
        if len(set(every)) != len(every):
            raise ValueError("blocks overlap")
        rank = {s: i for i, s in enumerate(order if order is not None else sorted(every))}
        bl = [sorted(b, key=lambda s: rank[s]) for b in bl]
        bl.sort(key=lambda b: rank[b[0]])
        self.blocks: Tuple[Tuple[str, ...], ...] = tuple(tuple(b) for b in bl)
        self._of = {s: i for i, b in enumerate(self.blocks) for s in b}

    @classmethod
    def from_keys(cls, states: Sequence[str], key) -> "Partition":
        groups: Dict = {}
        for s in states:
            groups.setdefault(key(s), []).append(s)
        return cls(groups.values(), states)

    def block_of(self, s) -> int:
        return self._of[s]

    def same(self, s, t) -> bool:
        return self._of[s] == self._of[t]

    def as_sets(self) -> frozenset:
        return frozenset(frozenset(b) for b in self.blocks)

    def refines(self, other: "Partition") -> bool:
        """Every block of ``self`` lies inside a block of ``other``."""
        return all(len({other.block_of(s) for s in b}) == 1 for b in self.blocks)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.as_sets() == other.as_sets()

    def __hash__(self):
        return hash(self.as_sets())

    def __len__(self):
        return len(self.blocks)

    def to_json(self) -> list:
        return [list(b) for b in self.blocks]

    def __str__(self):
        return "{" + ", ".join("{" + ", ".join(b) + "}" for b in self.blocks) + "}"

    __repr__ = __str__


# -- state bisimilarity -------------------------------------------------------------


def _signature(l: FiniteLMP, i: int, block_of: List[int], nblocks: int):
    sig = []
    for a in l.labels:
        acc = [Fraction(0)] * nblocks
        for j, w in enumerate(l.kernels[a][i]):
            if w:
                acc[block_of[j]] += w
        sig.append(tuple(acc))
    return tuple(sig)


def refine_once(l: FiniteLMP, p: Partition) -> Partition:
    block_of = [p.block_of(s) for s in l.states]
    n = len(p)
    return Partition.from_keys(
        l.states, lambda s: (p.block_of(s), _signature(l, l.index[s], block_of, n)))


def is_bisimulation(l: FiniteLMP, p: Partition) -> bool:
    """Related states give equal mass to every block under every label."""
    return refine_once(l, p) == p


def state_bisim_finite(l: FiniteLMP) -> Partition:
    """Largest state bisimulation, by splitting to a fixpoint."""
    p = Partition([l.states], l.states)
    while True:
        q = refine_once(l, p)
        if len(q) == len(p):
            return q
        p = q


# -- modal logic ------------------------------------------------------------------


def _check_label(l: FiniteLMP, a):
    if a not in l.kernels:
        raise KeyError(f"unknown label {a!r}")


def formula_set(l: FiniteLMP, phi) -> frozenset:
    """States satisfying ``phi``."""
    if isinstance(phi, Top):
        return frozenset(l.states)
    if isinstance(phi, And):
        return formula_set(l, phi.left) & formula_set(l, phi.right)
    if isinstance(phi, Diamond):
        _check_label(l, phi.label)
        inner = [l.index[s] for s in formula_set(l, phi.body)]
        return frozenset(s for s in l.states if l.mass(phi.label, s, inner) > phi.q)
    raise TypeError(f"not a formula: {phi!r}")


def logic_sat_finite(l: FiniteLMP, s: str, phi) -> bool:
    return s in formula_set(l, phi)


class _IntKernels:
    """Kernel rows scaled to integers by a common denominator."""

    def __init__(self, l: FiniteLMP):
        dens = [w.denominator for a in l.labels for r in l.kernels[a] for w in r]
        self.den = reduce(lcm, dens, 1)
        self.rows = {a: [[int(w * self.den) for w in r] for r in l.kernels[a]] for a in l.labels}

    def mass(self, a: str, i: int, mask: int) -> int:
        r = self.rows[a][i]
        tot = 0
        j = 0
        while mask:
            if mask & 1:
                tot += r[j]
            mask >>= 1
            j += 1
        return tot


@dataclass
class LogicResult:
    partition: Partition
    levels: int
    sets: Dict[int, object]  # bitmask -> a formula denoting it

    def witness(self, l: FiniteLMP, s: str, t: str):
        """A formula true at exactly one of the two states, or None."""
        i, j = l.index[s], l.index[t]
        best = None
        for mask, phi in self.sets.items():
            if ((mask >> i) & 1) != ((mask >> j) & 1):
                if best is None or len(str(phi)) < len(str(best)):
                    best = phi
        return best


def logical_equiv_analysis(l: FiniteLMP, depth: int, rationals: Optional[Iterable] = None) -> LogicResult:
    """Formulas of modal depth at most ``depth``, thresholds from
    ``rationals`` (when None, every mass ``h_a(s, X)`` that occurs is used
    as a threshold; since satisfaction is strict this separates any two
    distinct masses)."""
    n = len(l.states)
    full = (1 << n) - 1
    ik = _IntKernels(l)
    qs = None if rationals is None else sorted({Fraction(q) for q in rationals})
    sets: Dict[int, object] = {full: TOP}
    level = 0
    for level in range(1, depth + 1):
        gens: Dict[int, object] = {}
        for mask, phi in list(sets.items()):
            for a in l.labels:
                masses = [ik.mass(a, i, mask) for i in range(n)]
                thresholds = sorted({Fraction(m, ik.den) for m in masses}) if qs is None else qs
                for q in thresholds:
                    if not 0 <= q <= 1:
                        continue
                    bound = q * ik.den
                    g = 0
                    for i, m in enumerate(masses):
                        if m > bound:
                            g |= 1 << i
                    if g not in sets and g not in gens:
                        gens[g] = Diamond(a, q, phi)
        if not gens:
            break
        # close under intersection, one generator at a time
        for g, phi in gens.items():
            if g in sets:
                continue
            new = {g: phi}
            for mask, psi in sets.items():
                m = mask & g
                if m not in sets and m not in new:
                    new[m] = And(psi, phi)
            sets.update(new)
            if len(sets) > MAX_LOGIC_SETS:
                raise RuntimeError("too many formula denotations")
    part = Partition.from_keys(
        l.states, lambda s: tuple(sorted(m for m in sets if (m >> l.index[s]) & 1)))
    return LogicResult(part, level, sets)


def logical_equiv_finite(l: FiniteLMP, depth: int, rationals: Optional[Iterable] = None) -> Partition:
    return logical_equiv_analysis(l, depth, rationals).partition


# -- tests --------------------------------------------------------------------------


def test_success_finite(l: FiniteLMP, s, t):
    """Success probability of test ``t`` from state ``s`` (exact)."""
    if isinstance(t, Omega):
        return Fraction(1)
    if isinstance(t, Conj):
        return test_success_finite(l, s, t.left) * test_success_finite(l, s, t.right)
    if isinstance(t, Act):
        _check_label(l, t.label)
        row = l.row(t.label, s)
        return sum((w * test_success_finite(l, u, t.then) for u, w in zip(l.states, row) if w), Fraction(0))
    raise TypeError(f"not a test: {t!r}")


@dataclass
class TestPartitionResult:
    partition: Partition
    tests: List  # tests whose value vectors span all test values
    levels: int

    def witness(self, l: FiniteLMP, s: str, t: str):
        best = None
        for test in self.tests:
            if test_success_finite(l, s, test) != test_success_finite(l, t, test):
                if best is None or test.size < best.size:
                    best = test
        return best


class _Span:
    """Exact row-echelon basis of a space of rational vectors."""

    def __init__(self):
        self.rows: List[Tuple[int, List[Fraction]]] = []  # (pivot, row)

    def reduce(self, v) -> List[Fraction]:
        v = list(v)
        for piv, r in self.rows:
            c = v[piv]
            if c:
                v = [x - c * y for x, y in zip(v, r)]
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        c = v[piv]
        v = [x / c for x in v]
        self.rows = [(p, [x - r[piv] * y for x, y in zip(r, v)]) for p, r in self.rows]
        self.rows.append((piv, v))
        return True


def test_partition_analysis(l: FiniteLMP, depth: Optional[int] = None) -> TestPartitionResult:
    """Partition by the exact success values of all tests of nesting depth
    at most ``depth`` (default: the number of states).

    Success values are linear under ``a.t`` and multiply under
    conjunction, so the linear span of the value vectors of all tests of a
    given depth is spanned by at most ``|S|`` explicit tests, found by
    closing a basis under both operations. Two states are separated by
    some test iff they are separated by one of the basis tests."""
    d = len(l.states) if depth is None else depth
    n = len(l.states)
    span = _Span()
    basis: List[Tuple[object, Tuple]] = []

    def offer(t, v) -> bool:
        if span.add(v):
            basis.append((t, v))
            return True
        return False

    offer(OMEGA, tuple(Fraction(1) for _ in range(n)))
    level = 0
    for level in range(1, d + 1):
        before = len(basis)
        for t, v in list(basis):
            for a in l.labels:
                rows = l.kernels[a]
                offer(Act(a, t), tuple(sum((w * x for w, x in zip(rows[i], v) if w), Fraction(0))
                                       for i in range(n)))
        grown = True
        while grown:
            grown = False
            cur = list(basis)
            for i, (t1, v1) in enumerate(cur):
                for t2, v2 in cur[i:]:
                    if isinstance(t1, Omega) or isinstance(t2, Omega):
                        continue
                    if offer(Conj(t1, t2), tuple(x * y for x, y in zip(v1, v2))):
                        grown = True
        if len(basis) == before:
            break
    part = Partition.from_keys(l.states, lambda s: tuple(v[l.index[s]] for _, v in basis))
    return TestPartitionResult(part, [t for t, _ in basis], level)


def test_partition_finite(l: FiniteLMP, depth: Optional[int] = None) -> Partition:
    return test_partition_analysis(l, depth).partition


# -- random LMPs ------------------------------------------------------------------


def random_finite_lmp(rng: random.Random, max_states: int = 8, max_labels: int = 3,
                      denominator: int = 4) -> FiniteLMP:
    """Random LMP with weights in ``1/denominator``. Half of the draws are
    built by copying states of a smaller LMP, so that nontrivial
    bisimilarities are common."""
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_labels)
    states = [f"s{i}" for i in range(n)]
    labels = ["abc"[i] if i < 3 else f"a{i}" for i in range(k)]
    if n > 1 and rng.random() < 0.5:
        base = rng.randint(1, n - 1)
        proj = list(range(base)) + [rng.randrange(base) for _ in range(n - base)]
        rng.shuffle(proj)
        base_rows = {a: [_random_row(rng, base, denominator) for _ in range(base)] for a in labels}
        kernels = {}
        for a in labels:
            rows = []
            for i in range(n):
                target = base_rows[a][proj[i]]
                row = [Fraction(0)] * n
                for b, w in enumerate(target):
                    # spread mass of base state b over its copies
                    copies = [j for j in range(n) if proj[j] == b]
                    units = int(w * denominator)
                    for _ in range(units):
                        row[rng.choice(copies)] += Fraction(1, denominator)
                rows.append(row)
            kernels[a] = rows
    else:
        kernels = {a: [_random_row(rng, n, denominator) for _ in range(n)] for a in labels}
    return FiniteLMP(states, labels, kernels)


def _random_row(rng: random.Random, n: int, denominator: int) -> List[Fraction]:
    if rng.random() < 0.2:
        return [Fraction(0)] * n
    units = rng.randint(0, denominator)
    row = [Fraction(0)] * n
    for _ in range(units):
        row[rng.randrange(n)] += Fraction(1, denominator)
    return row
