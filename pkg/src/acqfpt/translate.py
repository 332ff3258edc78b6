"""Databases to unary functional structures, relational queries to functional formulas."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .acyclic import ACQ, ACQ_CMP, ACQ_NEQ, QueryClass, classify
from .errors import PreconditionError
from .model import ID, Atom, Database, FuncFormula, FunctionalStructure, Member, RelQuery, Term

BASE_SORT = "D"


def sort_name(relation: str) -> str:
    return f"T_{relation}"


def fn(j: int) -> str:
    return f"f{j}"


def translate_structure(db: Database) -> FunctionalStructure:
    """Element ids of the database are kept; tuples of each relation get a block of fresh ids after them."""
    n_base = db.domain_size
    offset = n_base
    sorts = {BASE_SORT: np.arange(n_base, dtype=np.int64)}
    blocks = []
    for name, rel in db.relations.items():
        sorts[sort_name(name)] = np.arange(offset, offset + rel.card, dtype=np.int64)
        blocks.append((offset, rel))
        offset += rel.card
    m = max((rel.arity for rel in db.relations.values()), default=0)
    functions = {}
    for j in range(1, m + 1):
        f = np.full(offset, -1, dtype=np.int64)
        for start, rel in blocks:
            if rel.arity >= j:
                f[start:start + rel.card] = rel.tuples[:, j - 1]
        functions[fn(j)] = f
    labels = [db.table.raw(i) for i in range(n_base)]
    for _, rel in blocks:
        labels.extend(f"{rel.name}#{i}" for i in range(rel.card))
    return FunctionalStructure(offset, sorts, functions, base=BASE_SORT, labels=labels)


@dataclass(frozen=True)
class ProjectionSpec:
    """Head variable h is read as ``f_{pairs[h][0]}`` applied to tuple variable ``t_{pairs[h][1]}``."""

    pairs: tuple[tuple[int, int], ...]
    tuple_vars: tuple[str, ...]  # t_1..t_k names, 1-indexed by pairs

    def terms(self) -> tuple[Term, ...]:
        return tuple(Term(fn(i), self.tuple_vars[j - 1]) for i, j in self.pairs)


@dataclass
class Layout:
    """Shared bookkeeping for both formula shapes."""

    q: RelQuery
    cls: QueryClass
    tvars: tuple[str, ...]
    depth: dict

    def first_pos(self, u: int, var: str) -> int:
        return self.q.atoms[u].args.index(var) + 1

    def closest(self, var: str) -> int:
        occ = [u for u, a in enumerate(self.q.atoms) if var in a.args]
        return min(occ, key=lambda u: (self.depth[u], u))

    def term(self, u: int, var: str) -> Term:
        return Term(fn(self.first_pos(u, var)), self.tvars[u])


def _layout(q: RelQuery, cls: QueryClass | None) -> Layout:
    cls = cls or classify(q)
    if cls.tag not in (ACQ, ACQ_NEQ, ACQ_CMP):
        raise PreconditionError(f"query class {cls.tag} cannot be translated")
    names = set(q.variables)
    prefix = "t"
    while any(f"{prefix}{i + 1}" in names for i in range(len(q.atoms))):
        prefix += "_"
    tvars = tuple(f"{prefix}{i + 1}" for i in range(len(q.atoms)))
    roots = [cls.root] if cls.root is not None else []
    _, depth = cls.forest.rooted(roots)
    return Layout(q, cls, tvars, depth)


def _body(lay: Layout) -> list:
    q, tv = lay.q, lay.tvars
    atoms = [Member(sort_name(a.relation), tv[u]) for u, a in enumerate(q.atoms)]
    for u, a in enumerate(q.atoms):
        positions = {}
        for p, var in enumerate(a.args, start=1):
            positions.setdefault(var, []).append(p)
        for var in dict.fromkeys(a.args):
            ps = positions[var]
            for p1, p2 in zip(ps, ps[1:]):
                atoms.append(Atom(Term(fn(p1), tv[u]), "=", Term(fn(p2), tv[u])))
    edges = sorted((min(e), max(e)) for e in lay.cls.forest.edges)
    for u, v in edges:
        common = set(q.atoms[u].args) & set(q.atoms[v].args)
        for var in dict.fromkeys(q.atoms[u].args):
            if var in common:
                atoms.append(Atom(lay.term(u, var), "=", lay.term(v, var)))
    for ci, c in enumerate(q.comparisons):
        place = lay.cls.placement.get(ci)
        if place is None:
            inside = [u for u, a in enumerate(q.atoms) if c.left in a.args and c.right in a.args]
            if inside:
                u = min(inside, key=lambda w: (lay.depth[w], w))
                place = ("atom", u)
            else:
                place = ("edge", lay.closest(c.left), lay.closest(c.right))
        if place[0] == "atom":
            u = place[1]
            atoms.append(Atom(lay.term(u, c.left), c.op, lay.term(u, c.right)))
        else:
            atoms.append(Atom(lay.term(place[1], c.left), c.op, lay.term(place[2], c.right)))
    return atoms


def translate_query(q: RelQuery, cls: QueryClass | None = None) -> tuple[FuncFormula, ProjectionSpec]:
    """Functional formula over tuple variables plus the projection reading the head back.

    Strict queries keep only the root tuple variable free; other queries keep
    every tuple variable free. Boolean queries have no free variable.
    """
    lay = _layout(q, cls)
    atoms = _body(lay)
    if lay.cls.strict:
        root = lay.cls.root
        pairs = tuple((lay.first_pos(root, y), root + 1) for y in q.head)
        free = (lay.tvars[root],) if q.head else ()
    else:
        pairs = tuple((lay.first_pos(lay.closest(y), y), lay.closest(y) + 1) for y in q.head)
        free = lay.tvars
    bound = tuple(t for t in lay.tvars if t not in free)
    return FuncFormula(free, bound, tuple(atoms)), ProjectionSpec(pairs, lay.tvars)


def translate_query_projected(q: RelQuery, cls: QueryClass | None = None) -> FuncFormula:
    """Variant whose free variables are the head variables themselves, bound to tuple fields by ``Id(y) = f_i(t_j)``.

    Every tuple variable is bound, so results are head tuples directly and no
    projection step (and no duplicate answers) arises.
    """
    lay = _layout(q, cls)
    atoms = _body(lay)
    for y in q.head:
        u = lay.closest(y)
        atoms.append(Atom(Term(ID, y), "=", lay.term(u, y)))
    return FuncFormula(tuple(q.head), lay.tvars, tuple(atoms))


def project_results(rel: Iterable[tuple], proj: ProjectionSpec, F: FunctionalStructure,
                    free: tuple[str, ...]) -> set[tuple]:
    """Map satisfying assignments of ``free`` (tuple variables) to head tuples."""
    index = {v: i for i, v in enumerate(free)}
    getters = [(F.function(fn(i)), index[proj.tuple_vars[j - 1]]) for i, j in proj.pairs]
    out = set()
    for row in rel:
        out.add(tuple(int(f[row[pos]]) for f, pos in getters))
    return out
