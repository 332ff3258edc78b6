"""Exhaustive reference semantics, independent of the engine."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from .errors import BudgetExceeded
from .model import ID, Database, FuncFormula, Literal, Member, RelQuery

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class OracleBudget:
    max_assignments: int = 5_000_000
    max_domain: int = 10_000

    @classmethod
    def from_env(cls) -> "OracleBudget":
        raw = os.environ.get("ACQFPT_ORACLE_BUDGET")
        return cls(max_assignments=int(raw)) if raw else cls()

    def check(self, domain: int, variables: int):
        if domain > self.max_domain or domain ** variables > self.max_assignments:
            raise BudgetExceeded(f"{domain}^{variables} assignments exceed the oracle budget")


# ---------------------------------------------------------------------------
# relational


def _rel_sets(db: Database, q: RelQuery) -> dict:
    out = {}
    for a in q.atoms:
        rel = db.relations.get(a.relation)
        out[a.relation] = {tuple(int(x) for x in row) for row in rel.tuples} if rel is not None else set()
    return out


def _rel_check(q, sets, env) -> bool:
    for a in q.atoms:
        if tuple(env[v] for v in a.args) not in sets[a.relation]:
            return False
    for c in q.comparisons:
        a, b = env[c.left], env[c.right]
        if not (a != b if c.op == "!=" else _OPS[c.op](a, b)):
            return False
    return True


def oracle_eval_rel(db: Database, q: RelQuery, budget: OracleBudget | None = None,
                    method: str = "recursive") -> set[tuple]:
    """Q(db) by trying assignments of every variable to every domain element."""
    budget = budget or OracleBudget.from_env()
    variables = q.variables
    n = db.domain_size
    budget.check(n, len(variables))
    sets = _rel_sets(db, q)
    result = set()
    if method == "product":
        for values in itertools.product(range(n), repeat=len(variables)):
            env = dict(zip(variables, values))
            if _rel_check(q, sets, env):
                result.add(tuple(env[v] for v in q.head))
        return result

    # recursive: prune as soon as a fully assigned atom fails
    ready = [[] for _ in variables]
    pos = {v: i for i, v in enumerate(variables)}
    for a in q.atoms:
        ready[max(pos[v] for v in a.args)].append(("rel", a))
    for c in q.comparisons:
        ready[max(pos[c.left], pos[c.right])].append(("cmp", c))
    env = {}

    def ok(item):
        kind, x = item
        if kind == "rel":
            return tuple(env[v] for v in x.args) in sets[x.relation]
        a, b = env[x.left], env[x.right]
        return a != b if x.op == "!=" else _OPS[x.op](a, b)

    def go(i):
        if i == len(variables):
            result.add(tuple(env[v] for v in q.head))
            return
        for value in range(n):
            env[variables[i]] = value
            if all(ok(item) for item in ready[i]):
                go(i + 1)
        env.pop(variables[i], None)

    if variables:
        go(0)
    elif _rel_check(q, sets, {}):
        result.add(())
    return result


# ---------------------------------------------------------------------------
# functional


def _apply(S, fn: str, e: int):
    if fn == ID:
        return e
    v = int(S.function(fn)[e])
    return None if v < 0 else v


def atom_true(S, atom, env) -> bool:
    if isinstance(atom, Member):
        return bool(S.predicate(atom.pred)[env[atom.var]])
    a = _apply(S, atom.left.fn, env[atom.left.var])
    b = _apply(S, atom.right.fn, env[atom.right.var])
    equal = a is not None and b is not None and a == b
    if atom.op == "=":
        return equal
    if atom.op == "!=":
        return not equal
    return a is not None and b is not None and _OPS[atom.op](a, b)


def literal_true(S, lit: Literal, env) -> bool:
    return atom_true(S, lit.atom, env) == lit.positive


def oracle_eval_func(S, phi: FuncFormula, budget: OracleBudget | None = None) -> set[tuple]:
    """phi(S) over all n elements; works on any object with ``n``, ``function`` and ``predicate``."""
    budget = budget or OracleBudget.from_env()
    variables = phi.free + tuple(v for v in phi.bound if v not in phi.free)
    n, free = S.n, len(phi.free)
    budget.check(n, min(len(variables), free))
    pos = {v: i for i, v in enumerate(variables)}
    conj = phi.kind == "conjunctive"
    items = list(phi.atoms) if conj else [tuple(c) for c in phi.clauses]

    def item_vars(it):
        if conj:
            return it.vars
        return set().union(*(l.vars for l in it)) if it else set()

    # items become decidable once their last variable (in quantifier order) is assigned
    level = [max((pos[v] + 1 for v in item_vars(it)), default=0) for it in items]
    ready = [[it for it, lv in zip(items, level) if lv == i] for i in range(len(variables) + 1)]
    later = [[it for it, lv in zip(items, level) if lv > i] for i in range(len(variables) + 1)]
    env: dict = {}

    def holds(it) -> bool:
        return atom_true(S, it, env) if conj else any(literal_true(S, l, env) for l in it)

    def settled(clause) -> bool:
        # some literal is already fully assigned and true
        return any(l.vars <= env.keys() and literal_true(S, l, env) for l in clause)

    def rest(i) -> bool:
        if not all(holds(it) for it in ready[i]):
            return False
        if i == len(variables):
            return True
        if not conj and all(settled(c) for c in later[i]):
            return True
        var = variables[i]
        quant = any if conj else all
        try:
            return quant(_set(var, e) and rest(i + 1) for e in range(n))
        finally:
            env.pop(var, None)

    visited = [0]

    def _set(var, e):
        visited[0] += 1
        if visited[0] > budget.max_assignments:
            raise BudgetExceeded("oracle visited more partial assignments than its budget allows")
        env[var] = e
        return True

    result = set()
    for values in itertools.product(range(n), repeat=free):
        env.clear()
        env.update(zip(phi.free, values))
        if all(all(holds(it) for it in ready[j]) for j in range(free)) and rest(free):
            result.add(values)
    return result


# ---------------------------------------------------------------------------
# samples


def oracle_min_samples(rows, k: int, values=None, budget: OracleBudget | None = None) -> set[tuple]:
    """Minimal samples by testing every candidate in (F + blank)^k; ``rows`` are g-value tuples (None undefined)."""
    budget = budget or OracleBudget.from_env()
    rows = [tuple(r) for r in rows]
    if values is None:
        values = sorted({c for r in rows for c in r if c is not None})
    budget.check(len(values) + 1, k)

    def is_sample(s):
        return all(any(c is not None and c == r[j] for j, c in enumerate(s)) for r in rows)

    found = set()
    for s in itertools.product([None] + list(values), repeat=k):
        if not is_sample(s):
            continue
        if all(not is_sample(s[:j] + (None,) + s[j + 1:]) for j in range(k) if s[j] is not None):
            found.add(s)
    return found
