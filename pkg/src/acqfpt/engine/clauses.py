"""Clause-form conversion and clause-set simplification."""
from __future__ import annotations

from typing import Iterable

from ..acyclic import ORDER_OPS
from ..errors import PreconditionError
from ..model import Atom, FuncFormula, Literal, Member, literal_key

Clause = frozenset  # of Literal


def negate_to_fafo(phi: FuncFormula) -> FuncFormula:
    """Universal clause form of the negation of a conjunctive formula without order comparisons.

    ``=`` atoms become negative literals, ``!=`` atoms positive ``=`` literals,
    membership atoms negative membership literals.
    """
    if phi.kind != "conjunctive":
        raise PreconditionError("expected a conjunctive formula")
    lits = []
    for a in phi.atoms:
        if isinstance(a, Member):
            lits.append(Literal(a, False))
        elif a.op == "=":
            lits.append(Literal(a, False))
        elif a.op == "!=":
            lits.append(Literal(Atom(a.left, "=", a.right), True))
        elif a.op in ORDER_OPS:
            raise PreconditionError(f"order comparison {a} has no clause form here")
        else:
            raise PreconditionError(f"unknown operator {a.op}")
    return FuncFormula(phi.free, phi.bound, clauses=(frozenset(lits),), kind="clauses")


def is_tautology(clause: Iterable[Literal]) -> bool:
    clause = set(clause)
    return any(lit.negated() in clause for lit in clause if lit.positive)


def simplify(clauses: Iterable[Clause], subsume_limit: int = 400) -> list[Clause]:
    """Drop tautologies, duplicates and (for moderate sizes) subsumed clauses."""
    uniq = {c for c in clauses if not is_tautology(c)}
    ordered = sorted(uniq, key=lambda c: (len(c), sorted(literal_key(l) for l in c)))
    if len(ordered) > subsume_limit:
        return ordered
    kept: list[Clause] = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return kept


def clause_vars(clause: Iterable[Literal]) -> set[str]:
    out = set()
    for lit in clause:
        out |= lit.vars
    return out


def format_clause(clause: Iterable[Literal]) -> str:
    lits = sorted(clause, key=literal_key)
    return " | ".join(str(l) for l in lits) if lits else "false"
