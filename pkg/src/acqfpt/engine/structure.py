"""Private expansions of a functional structure and vectorized literal evaluation."""
from __future__ import annotations

import itertools

import numpy as np

from ..model import Atom, Literal, Member, Term


class StepCounter:
    """Counts elementary operations; array passes add their length."""

    def __init__(self):
        self.steps = 0

    def add(self, n: int = 1):
        self.steps += int(n)


class Expansion:
    """Adds predicates and functions on top of a shared base structure without touching it."""

    _fresh = itertools.count()

    def __init__(self, base):
        self.base = base
        self.n = base.n
        self.extra_functions: dict[str, np.ndarray] = {}
        self.extra_predicates: dict[str, np.ndarray] = {}
        self._by_content: dict = {}  # identical additions share one name

    def function(self, name: str) -> np.ndarray:
        f = self.extra_functions.get(name)
        return f if f is not None else self.base.function(name)

    def predicate(self, name: str) -> np.ndarray:
        p = self.extra_predicates.get(name)
        return p if p is not None else self.base.predicate(name)

    def has_function(self, name: str) -> bool:
        return name in self.extra_functions or self.base.has_function(name)

    def has_predicate(self, name: str) -> bool:
        return name in self.extra_predicates or self.base.has_predicate(name)

    def _add(self, table: dict, kind: str, prefix: str, arr: np.ndarray) -> str:
        key = (kind, prefix.split("[", 1)[0], arr.tobytes())
        name = self._by_content.get(key)
        if name is None:
            name = f"{prefix}#{next(self._fresh)}"
            table[name] = arr
            self._by_content[key] = name
        return name

    def add_predicate(self, prefix: str, mask: np.ndarray) -> str:
        return self._add(self.extra_predicates, "p", prefix, np.asarray(mask, dtype=bool))

    def add_function(self, prefix: str, values: np.ndarray) -> str:
        return self._add(self.extra_functions, "f", prefix, np.asarray(values, dtype=np.int64))

    def copy(self) -> "Expansion":
        other = Expansion(self.base)
        other.extra_functions = dict(self.extra_functions)
        other.extra_predicates = dict(self.extra_predicates)
        other._by_content = dict(self._by_content)
        return other

    def label(self, elem: int):
        return self.base.label(elem) if hasattr(self.base, "label") else elem

    def size(self) -> int:
        own = sum(int(m.sum()) for m in self.extra_predicates.values())
        own += sum(int((f >= 0).sum()) for f in self.extra_functions.values())
        return self.base.size() + own


def term_values(S, t: Term, elems) -> np.ndarray:
    f = S.function(t.fn)
    return f[elems]


_CMP = {
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
}


def atom_holds(S, atom, env: dict) -> np.ndarray:
    """Truth of an atom for aligned element arrays ``env[var]``.

    Atoms applying a function outside its domain are false, except ``!=``
    which is the negation of ``=`` and therefore true there.
    """
    if isinstance(atom, Member):
        return S.predicate(atom.pred)[env[atom.var]]
    a = term_values(S, atom.left, env[atom.left.var])
    b = term_values(S, atom.right, env[atom.right.var])
    defined = (a >= 0) & (b >= 0)
    if atom.op == "=":
        return defined & (a == b)
    if atom.op == "!=":
        return ~(defined & (a == b))
    return defined & _CMP[atom.op](a, b)


def literal_holds(S, lit: Literal, env: dict) -> np.ndarray:
    v = atom_holds(S, lit.atom, env)
    return v if lit.positive else ~v


def unary_mask(S, items, var: str, combine: str = "and", negate_items: bool = False) -> np.ndarray:
    """Evaluate one-variable atoms/literals of ``var`` over every element and combine them."""
    everything = np.arange(S.n, dtype=np.int64)
    env = {var: everything}
    out = np.ones(S.n, dtype=bool) if combine == "and" else np.zeros(S.n, dtype=bool)
    for it in items:
        v = literal_holds(S, it, env) if isinstance(it, Literal) else atom_holds(S, it, env)
        if negate_items:
            v = ~v
        out = out & v if combine == "and" else out | v
    return out


def oriented(atom: Atom, var: str) -> tuple[Term, str, Term]:
    """Rewrite a two-variable atom so that ``var`` is on the left."""
    if atom.left.var == var:
        return atom.left, atom.op, atom.right
    a = atom.flipped()
    return a.left, a.op, a.right

