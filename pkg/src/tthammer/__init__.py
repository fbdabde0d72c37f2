"""Hammer for a dependent type theory: translation to first-order logic,
a builtin saturation prover, and intuitionistic proof reconstruction."""

from . import atp, corpus, encoder, fol, kernel, oracle, reconstruct, translate
from .atp import prove_builtin
from .corpus import load, load_bundled
from .reconstruct import Budget, Hints, flatten_goal, prove_seq
from .translate import build_problem, translate_all

__all__ = [
    "atp", "corpus", "encoder", "fol", "kernel", "oracle", "reconstruct", "translate",
    "prove_builtin", "load", "load_bundled", "Budget", "Hints", "flatten_goal", "prove_seq",
    "build_problem", "translate_all",
]
