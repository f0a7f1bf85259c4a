"""Workbench for a typed stochastic lambda calculus: sampling semantics,
labelled Markov processes and program equivalences."""

__version__ = "0.1.0"
