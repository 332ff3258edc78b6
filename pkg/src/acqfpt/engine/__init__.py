"""Evaluation engine for acyclic functional formulas and relational queries."""
from .clauses import negate_to_fafo
from .eliminate import eliminate_comparison, eliminate_leaf, eliminate_leaf_negonly
from .evaluate import enumerate_solutions, enumerate_to, eval_general, eval_strict
from .relational import check_query, enumerate_relational, eval_relational
from .structure import Expansion, StepCounter

__all__ = [
    "Expansion", "StepCounter", "check_query", "eliminate_comparison", "eliminate_leaf", "eliminate_leaf_negonly",
    "enumerate_relational", "enumerate_solutions", "enumerate_to", "eval_general", "eval_relational",
    "eval_strict", "negate_to_fafo",
]
