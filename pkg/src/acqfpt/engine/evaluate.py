"""Strict evaluation, frontier extension to several free variables, and depth-first enumeration."""
from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

from ..acyclic import FACQ, FACQ_CMP, FACQ_NEQ, classify_functional
from ..errors import ClassificationError, PreconditionError
from ..model import FuncFormula, Member
from .clauses import negate_to_fafo
from .eliminate import exists_mask, forall_mask
from .structure import Expansion, StepCounter

DUMMY = "_z"


def _order(phi: FuncFormula) -> dict:
    return {v: i for i, v in enumerate(phi.variables)}


def _function_class(phi: FuncFormula) -> str:
    fc = classify_functional(phi)
    if fc.tag not in (FACQ, FACQ_NEQ, FACQ_CMP):
        raise ClassificationError(fc.tag, str(fc.witness) if fc.witness is not None else "")
    return fc.tag


def strict_mask(S, phi: FuncFormula, counter: StepCounter | None = None, on_step: Callable | None = None,
                tag: str | None = None) -> np.ndarray:
    """Boolean mask over elements of the single free variable; ``S`` must be an Expansion (it is extended)."""
    if len(phi.free) != 1:
        raise PreconditionError("strict evaluation needs exactly one free variable")
    counter = counter or StepCounter()
    tag = tag or _function_class(phi)
    root = phi.free[0]
    order = _order(phi)
    if tag == FACQ_CMP:
        return exists_mask(S, phi.atoms, root, order, counter, on_step)
    fafo = negate_to_fafo(phi)
    holds_for_all = forall_mask(S, fafo.clauses, root, order, counter, on_step)
    return ~holds_for_all


def _with_dummy(S: Expansion, phi: FuncFormula) -> FuncFormula:
    single = np.zeros(S.n, dtype=bool)
    single[:1] = True
    name = S.add_predicate("Single", single)
    dummy = DUMMY
    while dummy in phi.variables:
        dummy += "_"
    return FuncFormula((dummy,), phi.bound, phi.atoms + (Member(name, dummy),))


def eval_strict(F, phi: FuncFormula, counter: StepCounter | None = None, on_step: Callable | None = None):
    """Result of a formula with at most one free variable.

    Returns a sorted id array, or a bool for Boolean formulas (evaluated with
    a dummy free variable restricted to one element).
    """
    if len(phi.free) > 1:
        raise PreconditionError("formula is not strict")
    S = Expansion(F)
    tag = _function_class(phi)
    if not phi.free:
        if S.n == 0:
            return False
        return bool(strict_mask(S, _with_dummy(S, phi), counter, on_step, tag).any())
    if S.n == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(strict_mask(S, phi, counter, on_step, tag))


def _extension(F, phi: FuncFormula, prefix: tuple, counter: StepCounter, tag: str) -> np.ndarray:
    """Values of free variable number len(prefix) once the earlier ones are fixed to ``prefix``."""
    i = len(prefix)
    S = Expansion(F)
    fixed = []
    for var, value in zip(phi.free, prefix):
        mask = np.zeros(S.n, dtype=bool)
        mask[value] = True
        fixed.append(Member(S.add_predicate(f"Fix[{var}]", mask), var))
    target = phi.free[i]
    bound = tuple(v for v in phi.variables if v != target)
    strict = FuncFormula((target,), bound, phi.atoms + tuple(fixed))
    return np.flatnonzero(strict_mask(S, strict, counter, tag=tag))


def eval_general(F, phi: FuncFormula, counter: StepCounter | None = None) -> set[tuple]:
    """All satisfying tuples of the free variables, built breadth-wise one variable at a time."""
    counter = counter or StepCounter()
    if not phi.free:
        return {()} if eval_strict(F, phi, counter) else set()
    if F.n == 0:
        return set()
    tag = _function_class(phi)
    frontier = [()]
    for _ in phi.free:
        nxt = []
        for prefix in frontier:
            nxt.extend(prefix + (int(a),) for a in _extension(F, phi, prefix, counter, tag))
        frontier = nxt
    return set(frontier)


def enumerate_solutions(F, phi: FuncFormula, counter: StepCounter | None = None) -> Iterator[tuple]:
    """Depth-first stream of the satisfying tuples; each prefix extended is known to have a solution."""
    counter = counter or StepCounter()
    if not phi.free:
        if eval_strict(F, phi, counter):
            yield ()
        return
    if F.n == 0:
        return
    tag = _function_class(phi)
    k = len(phi.free)
    stack = [((), iter(_extension(F, phi, (), counter, tag).tolist()))]
    while stack:
        prefix, values = stack[-1]
        a = next(values, None)
        if a is None:
            stack.pop()
            continue
        sol = prefix + (a,)
        if len(sol) == k:
            yield sol
        else:
            stack.append((sol, iter(_extension(F, phi, sol, counter, tag).tolist())))


def enumerate_to(F, phi: FuncFormula, sink: Callable[[tuple], bool | None], counter: StepCounter | None = None) -> int:
    """Feed solutions to ``sink`` until it returns False; returns the number delivered."""
    count = 0
    for sol in enumerate_solutions(F, phi, counter):
        count += 1
        if sink(sol) is False:
            break
    return count
