"""Seeded random instances for property tests, benchmarks and the acceptance suite."""
from __future__ import annotations

import random

import numpy as np

from .acyclic import ACQ, ACQ_CMP, ACQ_NEQ, classify
from .model import (ID, Atom, CompAtom, Database, FuncFormula, FunctionalStructure, InternTable, Member,
                    RelAtom, RelQuery, Relation, Term)

CMP_OPS = ("!=", "<", "<=", ">", ">=")


def compact_database(relations: dict[str, np.ndarray]) -> Database:
    """Database over exactly the ids used in the tuples, renumbered densely in order."""
    used = np.unique(np.concatenate([t.ravel() for t in relations.values()] or [np.zeros(0, np.int64)]))
    remap = {int(v): i for i, v in enumerate(used.tolist())}
    rels = {}
    for name, tuples in relations.items():
        arr = np.vectorize(remap.get, otypes=[np.int64])(tuples) if tuples.size else tuples
        rels[name] = Relation(name, tuples.shape[1], arr.reshape(-1, tuples.shape[1]))
    return Database(InternTable.identity(len(used)), rels, len(used))


def random_database(rng: random.Random, domain: int = 8, max_tuples: int = 12,
                    arities=(1, 2, 3)) -> Database:
    relations = {}
    domain = rng.randint(min(3, domain), domain)
    for i, arity in enumerate(arities):
        card = rng.randint(0, max_tuples) if rng.random() < 0.15 else rng.randint(max_tuples // 2, max_tuples)
        rows = [[rng.randrange(domain) for _ in range(arity)] for _ in range(card)]
        relations[f"R{i + 1}"] = np.array(rows, dtype=np.int64).reshape(card, arity)
    if not any(r.size for r in relations.values()):
        relations["R1"] = np.array([[rng.randrange(domain)] * arities[0]], dtype=np.int64)
    return compact_database(relations)


def _random_atoms(rng, schema: dict, max_atoms: int, max_vars: int):
    pool = [f"x{i}" for i in range(rng.randint(1, max_vars))]
    atoms = []
    for _ in range(rng.randint(1, max_atoms)):
        name = rng.choice(sorted(schema))
        atoms.append(RelAtom(name, tuple(rng.choice(pool) for _ in range(schema[name]))))
    return atoms


def random_query(rng: random.Random, schema: dict, tag: str, max_atoms: int = 4, max_vars: int = 5,
                 tries: int = 200) -> RelQuery:
    """A random safe query whose class is ``tag`` (ACQ, ACQ_NEQ or ACQ_CMP)."""
    for _ in range(tries):
        atoms = _random_atoms(rng, schema, max_atoms, max_vars)
        base = RelQuery((), tuple(atoms))
        variables = list(base.variables)
        if len(variables) > max_vars:
            continue
        cls = classify(base)
        if cls.tag != ACQ:
            continue
        comps = []
        if tag == ACQ_NEQ and len(variables) >= 2:
            for _ in range(rng.randint(1, 3)):
                a, b = rng.sample(variables, 2)
                comps.append(CompAtom(a, "!=", b))
        elif tag == ACQ_CMP:
            sets = [set(a.args) for a in atoms]
            options = []
            for s in sets:
                if len(s) >= 2:
                    options.append(sorted(s))
            for u, v in cls.forest.edges:
                options.append((sorted(sets[u]), sorted(sets[v])))
            if not options:
                continue
            for _ in range(rng.randint(1, 3)):
                opt = rng.choice(options)
                if isinstance(opt, tuple):
                    a, b = rng.choice(opt[0]), rng.choice(opt[1])
                else:
                    a, b = rng.sample(opt, 2)
                if a != b:
                    comps.append(CompAtom(a, rng.choice(CMP_OPS), b))
            if not any(c.op != "!=" for c in comps):
                continue
        rate = rng.choice((0.0, 0.3, 0.6))
        head = tuple(v for v in variables if rng.random() < rate)
        q = RelQuery(head, tuple(atoms), tuple(dict.fromkeys(comps)))
        if classify(q).tag == tag:
            return q
    raise RuntimeError(f"could not generate a {tag} query")


def schema_of(db: Database) -> dict:
    return {name: rel.arity for name, rel in db.relations.items()}


# ---------------------------------------------------------------------------
# functional instances


def random_structure(rng: random.Random, n: int = 8, functions: int = 3, sorts: int = 2,
                     partial: float = 0.2) -> FunctionalStructure:
    """Random unary algebra: disjoint sorts over a shuffle of the elements, partial functions."""
    elems = list(range(n))
    rng.shuffle(elems)
    cuts = sorted(rng.randint(0, n) for _ in range(sorts))
    sort_map, start = {}, 0
    for i, cut in enumerate(cuts):
        sort_map[f"U{i + 1}"] = sorted(elems[start:cut])
        start = cut
    fns = {}
    span = max(1, rng.randint(n // 3, n)) if n else 1
    for j in range(functions):
        vals = [rng.randrange(span) if rng.random() >= partial else -1 for _ in range(n)]
        fns[f"g{j + 1}"] = vals
    return FunctionalStructure(n, sort_map, fns)


def _term(rng, F: FunctionalStructure, var: str) -> Term:
    names = [ID] + sorted(F.functions)
    return Term(rng.choice(names), var)


def _distinct_atom(rng, F, a: str, op: str, b: str) -> Atom:
    """Atom whose two sides are not the same term (which would make it trivially true or false)."""
    while True:
        left, right = _term(rng, F, a), _term(rng, F, b)
        if left != right or not F.functions:
            return Atom(left, op, right)


def random_formula(rng: random.Random, F: FunctionalStructure, tag: str, max_vars: int = 4,
                   free: int | None = None) -> FuncFormula:
    """Random acyclic conjunctive formula of class FACQ, FACQ_NEQ or FACQ_CMP."""
    nv = rng.randint(1, max_vars)
    variables = [f"v{i}" for i in range(nv)]
    atoms = []
    edges = []
    for i in range(1, nv):
        if rng.random() < 0.85:
            p = rng.randrange(i)
            edges.append((variables[p], variables[i]))
            for _ in range(rng.choice((1, 1, 2))):
                atoms.append(Atom(_term(rng, F, variables[p]), "=", _term(rng, F, variables[i])))
    for v in variables:
        if F.sorts and rng.random() < 0.25:
            atoms.append(Member(rng.choice(sorted(F.sorts)), v))
        if rng.random() < 0.15:
            atoms.append(_distinct_atom(rng, F, v, rng.choice(("=", "!=")), v))
    if tag == "FACQ_NEQ" and nv >= 1:
        for _ in range(rng.randint(1, 3)):
            a, b = rng.choice(variables), rng.choice(variables)
            atoms.append(_distinct_atom(rng, F, a, "!=", b))
    elif tag == "FACQ_CMP":
        for a, b in edges:
            if rng.random() < 0.6:
                atoms.append(Atom(_term(rng, F, a), rng.choice(CMP_OPS), _term(rng, F, b)))
        if rng.random() < 0.5 or len(atoms) == sum(isinstance(a, Member) for a in atoms):
            v = rng.choice(variables)
            atoms.append(_distinct_atom(rng, F, v, rng.choice(CMP_OPS[1:]), v))
    k = rng.randint(0, min(2, nv)) if free is None else free
    return FuncFormula(tuple(variables[:k]), tuple(variables[k:]), tuple(atoms))


# ---------------------------------------------------------------------------
# problem instances for the reductions


def random_graph(rng: random.Random, n: int, p: float = 0.4, max_degree: int | None = None):
    from .reductions import Graph
    edges = []
    deg = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p and (max_degree is None or max(deg[u], deg[v]) < max_degree):
                edges.append((u, v))
                deg[u] += 1
                deg[v] += 1
    return Graph.of(edges, range(n))


def random_forest(rng: random.Random, n: int, p: float = 0.85):
    from .reductions import Graph
    edges = [(rng.randrange(i), i) for i in range(1, n) if rng.random() < p]
    return Graph.of(edges, range(n))


def random_instance(rng: random.Random, problem: str):
    """Small instance of ``problem`` (host graphs up to 8 vertices, k and r up to 3)."""
    from . import reductions as R
    if problem == R.ASI:
        return R.asi(random_forest(rng, rng.randint(1, 4)), random_graph(rng, rng.randint(1, 7), rng.uniform(.2, .7)))
    if problem == R.AISI:
        d = rng.randint(1, 3)
        host = random_graph(rng, rng.randint(1, 8), rng.uniform(.2, .7), d)
        return R.aisi(random_forest(rng, rng.randint(1, 4)), host, d)
    if problem == R.MDM:
        r, span = rng.randint(1, 3), rng.randint(2, 5)
        rows = [tuple(rng.randrange(span) for _ in range(r)) for _ in range(rng.randint(1, 10))]
        return R.mdm(rows, rng.randint(1, 3))
    ground = list(range(rng.randint(2, 8)))
    if problem == R.UHS:
        return R.uhs([rng.sample(ground, rng.randint(0, min(3, len(ground)))) for _ in range(rng.randint(1, 3))])
    k = rng.randint(1, 3)
    if problem == R.ANTICHAIN:
        r = rng.randint(1, min(3, len(ground)))
        return R.antichain([rng.sample(ground, r) for _ in range(rng.randint(1, 8))], k)
    return R.disjoint([rng.sample(ground, rng.randint(0, min(3, len(ground)))) for _ in range(rng.randint(1, 8))], k)
