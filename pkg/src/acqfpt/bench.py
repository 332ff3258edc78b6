"""Scaling databases and step/time measurements."""
from __future__ import annotations

import time

import numpy as np

from .engine import StepCounter, enumerate_relational, eval_relational
from .frontend import parse_query
from .generators import compact_database
from .model import Database, RelQuery, size

QUERIES = {
    "acq": "q(a, b) :- R(a, b), S(b, c), T(c)",
    "neq": "q(a, b) :- R(a, b), S(b, c), a != c",
    "cmp": "q(a, b) :- R(a, b), S(b, c), T(c), a < c",
}


def scaling_database(tuples: int, seed: int = 0, schema: dict | None = None) -> Database:
    """Random database with about ``tuples`` tuples spread over the schema, domain ~ tuples/4."""
    schema = schema or {"R": 2, "S": 2, "T": 1}
    gen = np.random.default_rng(seed)
    domain = max(4, tuples // 4)
    per = max(1, tuples // len(schema))
    rels = {name: gen.integers(0, domain, size=(per, arity), dtype=np.int64) for name, arity in schema.items()}
    return compact_database(rels)


def schema_for(q: RelQuery) -> dict:
    return {a.relation: len(a.args) for a in q.atoms}


def run(q: RelQuery, tuples: int, seed: int = 0, enumerate_only: bool = False) -> dict:
    db = scaling_database(tuples, seed, schema_for(q))
    counter = StepCounter()
    start = time.perf_counter()
    if enumerate_only:
        results = sum(1 for _ in enumerate_relational(db, q, counter))
    else:
        results = len(eval_relational(db, q, counter))
    wall = time.perf_counter() - start
    card = sum(r.card for r in db.relations.values())
    return {"tuples": card, "size": size(db), "steps": counter.steps, "seconds": wall, "results": results}


def scale_rows(q: RelQuery | str, scales, seed: int = 0) -> list[dict]:
    if isinstance(q, str):
        q = parse_query(q)
    return [run(q, n, seed) for n in scales]


def doubling_ratios(rows: list[dict]) -> list[float]:
    """Step growth per doubling of the database size between consecutive rows."""
    out = []
    for a, b in zip(rows, rows[1:]):
        doublings = np.log2(b["size"] / a["size"])
        out.append(float((b["steps"] / a["steps"]) ** (1 / doublings)) if doublings > 0 else float("nan"))
    return out
