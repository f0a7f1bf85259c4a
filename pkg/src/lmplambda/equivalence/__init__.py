"""Equivalences of labelled Markov processes: exact algorithms on finite
processes and statistical probes on programs."""

from .applicative import (
    TestEnumerator, TestEstimate, distinguish_by_tests, enumerate_tests, test_success_mc,
)
from .contexts import (
    Context, compose, context_apply_estimate, default_contexts, distinguish_by_contexts,
)
from .corpus import CorpusConfig, corpus_check
from .finite import (
    Partition, is_bisimulation, logic_sat_finite, logical_equiv_finite, random_finite_lmp,
    state_bisim_finite, test_partition_finite, test_success_finite,
)
from .report import DISTINGUISHED, EQUAL_EXACT, NOT_SEPARATED, EquivalenceReport
from .syntax import OMEGA, TOP, Act, And, Conj, Diamond, Omega, Top, parse_formula, parse_test

__all__ = [
    "TestEnumerator", "TestEstimate", "distinguish_by_tests", "enumerate_tests", "test_success_mc",
    "Context", "compose", "context_apply_estimate", "default_contexts", "distinguish_by_contexts",
    "CorpusConfig", "corpus_check",
    "Partition", "is_bisimulation", "logic_sat_finite", "logical_equiv_finite", "random_finite_lmp",
    "state_bisim_finite", "test_partition_finite", "test_success_finite",
    "DISTINGUISHED", "EQUAL_EXACT", "NOT_SEPARATED", "EquivalenceReport",
    "OMEGA", "TOP", "Act", "And", "Conj", "Diamond", "Omega", "Top", "parse_formula", "parse_test",
]
