"""Sampling semantics, exact grid oracle, modular semantics of pre-terms
and the weak-convergence audit."""

from .estimate import estimate
from .evaluator import EXHAUSTED, Converged, FuelExhausted, eval_sample
from .feller import ConvergenceReport, TestFunction, default_battery, feller_audit, harmonic_sequence
from .grid import DrawBoundExceeded, exact_eval_grid
from .measure import ValueMeasure
from .modular import ModularDistribution, ModularEntry, modular_eval, modular_grid, modular_reconstruct
from .rng import RngStream

__all__ = [
    "estimate", "EXHAUSTED", "Converged", "FuelExhausted", "eval_sample",
    "ConvergenceReport", "TestFunction", "default_battery", "feller_audit", "harmonic_sequence",
    "DrawBoundExceeded", "exact_eval_grid", "ValueMeasure",
    "ModularDistribution", "ModularEntry", "modular_eval", "modular_grid", "modular_reconstruct",
    "RngStream",
]
