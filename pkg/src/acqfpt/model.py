"""Core data types: interned domains, databases, functional structures and query ASTs."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import IngestionError, SafetyError

NUMERIC = "numeric"
TEXT = "text"
COLUMN_TYPES = (NUMERIC, TEXT)

ID = "Id"  # reserved name of the identity function, valid on every sort
BLANK = None  # blank entry of a sample, printed as '-'

COMPARISON_OPS = ("!=", "<", "<=", ">", ">=")
FLIP = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


# ---------------------------------------------------------------------------
# interning


def _parse_number(raw):
    if isinstance(raw, bool):
        raise ValueError(raw)
    if isinstance(raw, (int, np.integer)):
        return int(raw)
    if isinstance(raw, (float, np.floating)):
        return int(raw) if float(raw).is_integer() else float(raw)
    text = str(raw).strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)
        return int(value) if value.is_integer() else value


def _normalise(ctype, raw):
    if ctype == NUMERIC:
        try:
            return _parse_number(raw)
        except (TypeError, ValueError):
            raise IngestionError(f"mixed-type column: {raw!r} is not numeric") from None
    if ctype == TEXT:
        if not isinstance(raw, str):
            raise IngestionError(f"mixed-type column: {raw!r} is not text")
        return raw
    raise IngestionError(f"unknown column type {ctype!r}")


def infer_type(values: Iterable) -> str:
    for v in values:
        try:
            _parse_number(v)
        except (TypeError, ValueError):
            return TEXT
    return NUMERIC


class InternTable:
    """Dense ids for typed raw values.

    Numeric values come first in numeric order, then text values in
    lexicographic order, so integer comparison of ids agrees with the value
    order inside each type.
    """

    def __init__(self, typed_values: Iterable[tuple[str, object]] = ()):
        keys = sorted(set(typed_values), key=lambda tv: (0 if tv[0] == NUMERIC else 1, tv[1]))
        self.values: list[tuple[str, object]] = keys
        self._index = {tv: i for i, tv in enumerate(keys)}

    def __len__(self):
        return len(self.values)

    def id_of(self, ctype, raw) -> int:
        return self._index[(ctype, _normalise(ctype, raw))]

    def raw(self, elem: int):
        return self.values[elem][1]

    def type_of(self, elem: int) -> str:
        return self.values[elem][0]

    @classmethod
    def identity(cls, n: int) -> "InternTable":
        return cls((NUMERIC, i) for i in range(n))


def intern(columns: Sequence[tuple[str, Sequence]]) -> tuple[InternTable, list[list[int]]]:
    """Intern typed columns jointly; returns the table and one id list per column."""
    normalised = []
    for ctype, values in columns:
        normalised.append((ctype, [_normalise(ctype, v) for v in values]))
    table = InternTable((ctype, v) for ctype, vals in normalised for v in vals)
    ids = [[table._index[(ctype, v)] for v in vals] for ctype, vals in normalised]
    return table, ids


# ---------------------------------------------------------------------------
# relational databases


@dataclass
class Relation:
    name: str
    arity: int
    tuples: np.ndarray  # shape (card, arity), int64 element ids
    types: tuple[str, ...] = ()

    @property
    def card(self) -> int:
        return int(self.tuples.shape[0])

    def __post_init__(self):
        arr = np.asarray(self.tuples, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, self.arity)
        if arr.ndim != 2 or arr.shape[1] != self.arity:
            raise IngestionError(f"relation {self.name}: tuples do not have arity {self.arity}")
        if arr.shape[0]:
            arr = np.unique(arr, axis=0)
        self.tuples = arr
        if not self.types:
            self.types = (NUMERIC,) * self.arity


@dataclass
class Database:
    table: InternTable
    relations: dict[str, Relation]
    domain_size: int = -1
    pruned: list = field(default_factory=list)

    def __post_init__(self):
        if self.domain_size < 0:
            self.domain_size = len(self.table)
        for rel in self.relations.values():
            if rel.card and (rel.tuples.min() < 0 or rel.tuples.max() >= self.domain_size):
                raise IngestionError(f"relation {rel.name} uses ids outside the domain")

    @property
    def domain(self) -> range:
        return range(self.domain_size)

    def isolated_elements(self) -> list[int]:
        seen = np.zeros(self.domain_size, dtype=bool)
        for rel in self.relations.values():
            seen[rel.tuples.ravel()] = True
        return [int(i) for i in np.flatnonzero(~seen)]

    def raw_tuple(self, ids: Sequence[int]) -> tuple:
        return tuple(self.table.raw(i) for i in ids)

    @classmethod
    def from_rows(cls, rows: dict[str, Sequence[Sequence]], types: dict[str, Sequence[str]] | None = None,
                  extra_domain: Sequence[tuple[str, object]] = (), prune: bool = True) -> "Database":
        """Build a database from raw rows, interning every column jointly.

        Elements listed in ``extra_domain`` that occur in no tuple are pruned
        (and reported in ``pruned``) unless ``prune`` is False.
        """
        types = dict(types or {})
        columns, layout = [], []
        for name, tuples in rows.items():
            tuples = [tuple(t) for t in tuples]
            arities = {len(t) for t in tuples}
            if name in types:
                arity = len(types[name])
            elif arities:
                arity = arities.pop() if len(arities) == 1 else -1
            else:
                raise IngestionError(f"relation {name}: cannot determine arity of an empty relation")
            if arity < 1 or any(len(t) != arity for t in tuples):
                raise IngestionError(f"relation {name}: arity mismatch")
            ctypes = tuple(types.get(name) or [infer_type(t[i] for t in tuples) for i in range(arity)])
            layout.append((name, arity, ctypes, len(tuples)))
            for i in range(arity):
                columns.append((ctypes[i], [t[i] for t in tuples]))
        extra = [(c, _normalise(c, v)) for c, v in extra_domain]
        used = {(c, _normalise(c, v)) for c, vals in columns for v in vals}
        pruned = [v for c, v in extra if (c, v) not in used]
        if prune:
            extra = [tv for tv in extra if tv in used]
        table, ids = intern(columns)
        if extra:
            table = InternTable(list(table.values) + extra)
            ids = [[table.id_of(c, v) for v in vals] for c, vals in columns]
        relations, col = {}, 0
        for name, arity, ctypes, card in layout:
            arr = np.array(ids[col:col + arity], dtype=np.int64).T.reshape(card, arity)
            col += arity
            relations[name] = Relation(name, arity, arr, ctypes)
        return cls(table, relations, pruned=pruned if prune else [])

    @classmethod
    def from_ids(cls, domain_size: int, relations: dict[str, Sequence[Sequence[int]]],
                 arities: dict[str, int] | None = None) -> "Database":
        """Database over the identity intern table 0..domain_size-1 (test and generator helper)."""
        arities = arities or {}
        rels = {}
        for name, tuples in relations.items():
            arr = np.asarray(list(tuples), dtype=np.int64)
            arity = arities.get(name) or (arr.shape[1] if arr.ndim == 2 and arr.size else None)
            if arity is None:
                raise IngestionError(f"relation {name}: arity unknown")
            rels[name] = Relation(name, arity, arr.reshape(-1, arity))
        return cls(InternTable.identity(domain_size), rels, domain_size)


# ---------------------------------------------------------------------------
# functional structures


class FunctionalStructure:
    """Multisorted unary algebra over the element range 0..n-1.

    ``sorts`` maps a unary relation name to its element ids (sorts are pairwise
    disjoint); ``functions`` maps a function name to an int64 array of length n
    holding the image of each element, -1 where the function is undefined.
    """

    def __init__(self, n: int, sorts: dict | None = None, functions: dict | None = None,
                 base: str | None = None, labels: Sequence | None = None):
        self.n = int(n)
        self.sorts = {k: np.asarray(v, dtype=np.int64).ravel() for k, v in (sorts or {}).items()}
        self.functions = {}
        for name, vals in (functions or {}).items():
            arr = np.asarray(vals, dtype=np.int64)
            if arr.shape != (self.n,):
                raise ValueError(f"function {name} must have length {self.n}")
            self.functions[name] = arr
        self.base = base
        self.labels = labels
        self._masks: dict[str, np.ndarray] = {}
        self._identity = np.arange(self.n, dtype=np.int64)

    def function(self, name: str) -> np.ndarray:
        if name == ID:
            return self._identity
        return self.functions[name]

    def predicate(self, name: str) -> np.ndarray:
        mask = self._masks.get(name)
        if mask is None:
            mask = np.zeros(self.n, dtype=bool)
            mask[self.sorts[name]] = True
            self._masks[name] = mask
        return mask

    def has_function(self, name: str) -> bool:
        return name == ID or name in self.functions

    def has_predicate(self, name: str) -> bool:
        return name in self.sorts

    def label(self, elem: int):
        return self.labels[elem] if self.labels is not None else elem

    def sorts_disjoint(self) -> bool:
        seen = np.zeros(self.n, dtype=np.int64)
        for ids in self.sorts.values():
            np.add.at(seen, ids, 1)
        return bool((seen <= 1).all())

    def size(self) -> int:
        return (self.n + sum(len(v) for v in self.sorts.values())
                + sum(int((f >= 0).sum()) for f in self.functions.values()))


# ---------------------------------------------------------------------------
# relational queries


@dataclass(frozen=True)
class RelAtom:
    relation: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.relation}({', '.join(self.args)})"


@dataclass(frozen=True)
class CompAtom:
    left: str
    op: str
    right: str

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class RelQuery:
    head: tuple[str, ...]
    atoms: tuple[RelAtom, ...]
    comparisons: tuple[CompAtom, ...] = ()
    name: str = "q"

    @property
    def free(self) -> tuple[str, ...]:
        return self.head

    @property
    def variables(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.head)
        for a in self.atoms:
            seen.update(dict.fromkeys(a.args))
        for c in self.comparisons:
            seen.update(dict.fromkeys((c.left, c.right)))
        return tuple(seen)

    @property
    def bound(self) -> tuple[str, ...]:
        head = set(self.head)
        return tuple(v for v in self.variables if v not in head)

    @property
    def is_boolean(self) -> bool:
        return not self.head

    def unsafe_variables(self) -> list[str]:
        covered = {v for a in self.atoms for v in a.args}
        return [v for v in self.variables if v not in covered]

    def check_safe(self):
        bad = self.unsafe_variables()
        if bad:
            raise SafetyError(f"variables {bad} occur in no relational atom")

    def __str__(self):
        body = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        return f"{self.name}({', '.join(self.head)}) :- {', '.join(body)}"


# ---------------------------------------------------------------------------
# functional formulas


@dataclass(frozen=True, order=True)
class Term:
    fn: str
    var: str

    def __str__(self):
        return self.var if self.fn == ID else f"{self.fn}({self.var})"


@dataclass(frozen=True)
class Atom:
    """Binary atom ``left op right``; ``!=`` is the negation of ``=``."""

    left: Term
    op: str
    right: Term

    @property
    def vars(self) -> frozenset[str]:
        return frozenset((self.left.var, self.right.var))

    def flipped(self) -> "Atom":
        return Atom(self.right, FLIP[self.op], self.left)

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Member:
    pred: str
    var: str

    @property
    def vars(self) -> frozenset[str]:
        return frozenset((self.var,))

    def __str__(self):
        return f"{self.pred}({self.var})"


@dataclass(frozen=True)
class Literal:
    atom: Atom | Member
    positive: bool = True

    @property
    def vars(self) -> frozenset[str]:
        return self.atom.vars

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self):
        return str(self.atom) if self.positive else f"~{self.atom}"


def literal_key(lit: Literal):
    a = lit.atom
    if isinstance(a, Member):
        return (0, a.var, a.pred, "", "", not lit.positive)
    return (1, a.left.var, a.left.fn, a.right.var, a.right.fn, a.op, not lit.positive)


@dataclass(frozen=True)
class FuncFormula:
    """Conjunctive (``exists bound: atoms``) or clause-set (``forall bound: clauses``) formula."""

    free: tuple[str, ...]
    bound: tuple[str, ...] = ()
    atoms: tuple = ()
    clauses: tuple = ()
    kind: str = "conjunctive"

    @property
    def variables(self) -> tuple[str, ...]:
        return self.free + self.bound

    def __post_init__(self):
        if self.kind not in ("conjunctive", "clauses"):
            raise ValueError(self.kind)
        if set(self.free) & set(self.bound):
            raise ValueError("free and bound variables overlap")
        if self.kind == "clauses":
            for clause in self.clauses:
                for lit in clause:
                    if isinstance(lit.atom, Atom) and lit.atom.op != "=":
                        raise ValueError("clause literals use '=' atoms with a sign")

    def neq_graph_edges(self, clause) -> set[frozenset[str]]:
        """Edges induced by the negative equality literals of one clause."""
        return {lit.vars for lit in clause
                if not lit.positive and isinstance(lit.atom, Atom) and len(lit.vars) == 2}

    def __str__(self):
        if self.kind == "conjunctive":
            body = " & ".join(str(a) for a in self.atoms) or "true"
            q = "exists" if self.bound else ""
        else:
            body = " & ".join("(" + " | ".join(str(l) for l in c) + ")" for c in self.clauses) or "true"
            q = "forall" if self.bound else ""
        head = f"phi({', '.join(self.free)})"
        prefix = f"{q} {', '.join(self.bound)}: " if self.bound else ""
        return f"{head} = {prefix}{body}"


# ---------------------------------------------------------------------------
# samples


def format_sample(sample: Sequence) -> str:
    return "(" + ",".join("-" if c is BLANK else str(c) for c in sample) + ")"


# ---------------------------------------------------------------------------
# hypergraphs and join forests


@dataclass(frozen=True)
class Hypergraph:
    vertices: tuple[str, ...]
    edges: tuple[frozenset, ...]

    @classmethod
    def of_query(cls, q: RelQuery) -> "Hypergraph":
        edges = tuple(frozenset(a.args) for a in q.atoms)
        verts = tuple(dict.fromkeys(v for a in q.atoms for v in a.args))
        return cls(verts, edges)


@dataclass(frozen=True)
class JoinForest:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    shared: tuple[tuple[str, ...], ...] = ()  # shared variables, aligned with edges

    def neighbors(self) -> dict[int, list[int]]:
        adj = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_acyclic(self) -> bool:
        return is_forest(self.vertices, self.edges)

    def connected_occurrences(self, q: RelQuery) -> bool:
        """Each variable's atom set induces a connected subgraph."""
        adj = self.neighbors()
        occ = defaultdict(set)
        for i, a in enumerate(q.atoms):
            for v in a.args:
                occ[v].add(i)
        for atoms in occ.values():
            start = min(atoms)
            seen, stack = {start}, [start]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w in atoms and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if seen != atoms:
                return False
        return True

    def is_valid_for(self, q: RelQuery) -> bool:
        return (set(self.vertices) == set(range(len(q.atoms)))
                and self.is_acyclic() and self.connected_occurrences(q))

    def rooted(self, roots: Sequence[int] = ()) -> tuple[dict, dict]:
        """Parent and depth maps; components are rooted at the given roots, else their lowest vertex."""
        adj = self.neighbors()
        parent, depth = {}, {}
        order = list(roots) + sorted(self.vertices)
        for r in order:
            if r in depth:
                continue
            parent[r], depth[r] = None, 0
            stack = [r]
            while stack:
                u = stack.pop()
                for w in sorted(adj[u]):
                    if w not in depth:
                        parent[w], depth[w] = u, depth[u] + 1
                        stack.append(w)
        return parent, depth


def is_forest(vertices: Iterable, edges: Iterable[Sequence]) -> bool:
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        u, v = tuple(e)
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


# ---------------------------------------------------------------------------
# sizes


def _term_size(t: Term) -> int:
    return 1 if t.fn == ID else 4


def _atom_size(a) -> int:
    if isinstance(a, Member):
        return 4
    core = _term_size(a.left) + 1 + _term_size(a.right)
    return core + 3 if a.op == "!=" else core  # x != y counts as ~(x = y)


def _literal_size(lit: Literal) -> int:
    if lit.positive:
        return _atom_size(lit.atom)
    return 1 + _atom_size(lit.atom) + (2 if isinstance(lit.atom, Atom) else 0)


def size(x) -> int:
    """Size in the uniform-cost measure: registers for data, symbol occurrences for formulas."""
    if isinstance(x, Database):
        return x.domain_size + sum(r.arity * r.card for r in x.relations.values())
    if isinstance(x, Relation):
        return x.arity * x.card
    if isinstance(x, FunctionalStructure):
        return x.size()
    if isinstance(x, RelQuery):
        n = 2 * len(x.bound)
        n += sum(2 * len(a.args) + 2 for a in x.atoms)
        n += sum(6 if c.op == "!=" else 3 for c in x.comparisons)
        n += max(len(x.atoms) + len(x.comparisons) - 1, 0)
        return n
    if isinstance(x, FuncFormula):
        n = 2 * len(x.bound)
        if x.kind == "conjunctive":
            n += sum(_atom_size(a) for a in x.atoms) + max(len(x.atoms) - 1, 0)
        else:
            for c in x.clauses:
                n += sum(_literal_size(l) for l in c) + max(len(c) - 1, 0) + (2 if len(c) > 1 else 0)
            n += max(len(x.clauses) - 1, 0)
        return n
    raise TypeError(f"no size for {type(x).__name__}")
