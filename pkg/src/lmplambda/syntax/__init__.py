"""Syntax of the calculus: types, terms, parsing, typing and pre-terms."""

from .parser import FALSE, TRUE, ParseError, parse, parse_type, parse_value
from .prims import CONTINUOUS, FULL, MODES, Prim, PrimRegistry, default_registry, registry_for
from .preterm import PreTerm, factorize, fill
from .terms import (
    App, Case, CtxHole, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample, Unfold, Val,
    Var, free_vars, plug, show, substitute,
)
from .types import BOOL, REAL, UNIT, VOID, Arrow, Mu, RealT, Sum, TVar, types_equal
from .typing import Environment, TypeCheckError, check_program, typecheck

__all__ = [
    "FALSE", "TRUE", "ParseError", "parse", "parse_type", "parse_value",
    "CONTINUOUS", "FULL", "MODES", "Prim", "PrimRegistry", "default_registry", "registry_for",
    "PreTerm", "factorize", "fill",
    "App", "Case", "CtxHole", "Fold", "Hole", "Inj", "Lam", "Let", "PrimB", "PrimC", "RealLit",
    "Sample", "Unfold", "Val", "Var", "free_vars", "plug", "show", "substitute",
    "BOOL", "REAL", "UNIT", "VOID", "Arrow", "Mu", "RealT", "Sum", "TVar", "types_equal",
    "Environment", "TypeCheckError", "check_program", "typecheck",
]
