"""End-to-end evaluation of relational queries through the functional translation."""
from __future__ import annotations

from typing import Iterator

from ..acyclic import ORDER_OPS, QueryClass, classify
from ..errors import ClassificationError, PreconditionError
from ..model import Database, FunctionalStructure, RelQuery
from ..translate import project_results, translate_query, translate_query_projected, translate_structure
from .evaluate import enumerate_solutions, eval_general, eval_strict
from .structure import StepCounter


def check_query(db: Database, q: RelQuery) -> QueryClass:
    """Classify and validate ``q`` against the schema of ``db``; rejects what the engine cannot run."""
    q.check_safe()
    for a in q.atoms:
        rel = db.relations.get(a.relation)
        if rel is None:
            raise PreconditionError(f"unknown relation {a.relation}")
        if rel.arity != len(a.args):
            raise PreconditionError(f"{a} does not match arity {rel.arity} of {a.relation}")
    types = {}
    for a in q.atoms:
        for var, t in zip(a.args, db.relations[a.relation].types):
            types.setdefault(var, set()).add(t)
    for c in q.comparisons:
        if c.op in ORDER_OPS and len(types[c.left] | types[c.right]) > 1:
            raise PreconditionError(f"comparison {c} mixes numeric and text columns")
    cls = classify(q)
    if not cls.accepted:
        raise ClassificationError(cls.tag, str(cls.witness) if cls.witness is not None else "")
    return cls


def eval_relational(db: Database, q: RelQuery, counter: StepCounter | None = None,
                    F: FunctionalStructure | None = None) -> set[tuple]:
    """Q(db) as a set of element-id tuples."""
    counter = counter or StepCounter()
    cls = check_query(db, q)
    F = F if F is not None else translate_structure(db)
    if cls.strict:
        phi, proj = translate_query(q, cls)
        if not q.head:
            return {()} if eval_strict(F, phi, counter) else set()
        tuples = eval_strict(F, phi, counter)
        return project_results(((int(t),) for t in tuples), proj, F, phi.free)
    return eval_general(F, translate_query_projected(q, cls), counter)


def enumerate_relational(db: Database, q: RelQuery, counter: StepCounter | None = None,
                         F: FunctionalStructure | None = None) -> Iterator[tuple]:
    """Stream Q(db) without duplicates."""
    counter = counter or StepCounter()
    cls = check_query(db, q)
    F = F if F is not None else translate_structure(db)
    if cls.strict and q.head:
        phi, proj = translate_query(q, cls)
        seen = set()
        for t in eval_strict(F, phi, counter).tolist():
            row = next(iter(project_results([(t,)], proj, F, phi.free)))
            if row not in seen:
                seen.add(row)
                yield row
        return
    if cls.strict:
        phi, _ = translate_query(q, cls)
        if eval_strict(F, phi, counter):
            yield ()
        return
    yield from enumerate_solutions(F, translate_query_projected(q, cls), counter)
