import itertools
import random

import pytest

from acqfpt.errors import BudgetExceeded
from acqfpt.frontend import parse_query
from acqfpt.generators import random_database, random_formula, random_query, random_structure, schema_of
from acqfpt.model import Database, FuncFormula, FunctionalStructure, Literal
from acqfpt.oracle import OracleBudget, atom_true, oracle_eval_func, oracle_eval_rel, oracle_min_samples

from conftest import EXAMPLE_TABLE, Q3, A, M, phi3


def test_q3_on_hand_database():
    # R = {(0,1),(0,2),(1,3)}, S = {(0,2,1),(1,3,0)}, T = {(2,3),(3,0)}
    db = Database.from_ids(4, {"R": [(0, 1), (0, 2), (1, 3)], "S": [(0, 2, 1), (1, 3, 0)],
                               "T": [(2, 3), (3, 0)]})
    q = parse_query(Q3)
    # x1=0, x2=1 needs R(0,1); y2=2, x3=3; y1 in {1,2} with y1 != 3 and x2 != x1
    assert oracle_eval_rel(db, q) == {(1, 2), (2, 2)}
    assert oracle_eval_rel(db, q, method="product") == {(1, 2), (2, 2)}


def test_relational_trivial_cases():
    db = Database.from_ids(3, {"R": [(0, 1), (2, 2)], "E": []}, {"E": 1})
    assert oracle_eval_rel(db, parse_query("q(x, y) :- R(x, y)")) == {(0, 1), (2, 2)}
    assert oracle_eval_rel(db, parse_query("q(x) :- R(x, y), E(y)")) == set()


def test_budget():
    db = Database.from_ids(30, {"R": [(i, (i + 1) % 30) for i in range(30)]})
    q = parse_query("q() :- R(a, b), R(b, c), R(c, d), R(d, e), R(e, f)")
    with pytest.raises(BudgetExceeded):
        oracle_eval_rel(db, q, OracleBudget(max_assignments=1000))
    with pytest.raises(BudgetExceeded):
        oracle_min_samples([(1, 2, 3)] * 3, 3, values=range(20), budget=OracleBudget(max_assignments=100))


def test_exists_image():
    F = FunctionalStructure(5, {"A": [0, 1, 2], "B": [3, 4]}, {"f": [3, 4, 0, -1, -1]})
    phi = FuncFormula(("x",), ("y",), (M("B", "y"), A("f", "x", "=", "Id", "y")))
    assert oracle_eval_func(F, phi) == {(0,), (1,)}


def test_empty_quantifier_sort():
    F = FunctionalStructure(3, {"A": [0, 1, 2], "E": []}, {"f": [0, 1, 2]})
    ex = FuncFormula(("x",), ("y",), (M("E", "y"), A("f", "x", "=", "f", "y")))
    assert oracle_eval_func(F, ex) == set()
    clause = frozenset({Literal(M("E", "y"), False), Literal(A("f", "x", "=", "f", "y"), True)})
    forall = FuncFormula(("x",), ("y",), clauses=(clause,), kind="clauses")
    assert oracle_eval_func(F, forall) == {(0,), (1,), (2,)}


def _nested_loops(S, phi):
    """Second implementation: plain product over every variable."""
    out = set()
    for values in itertools.product(range(S.n), repeat=len(phi.variables)):
        env = dict(zip(phi.variables, values))
        if all(atom_true(S, a, env) for a in phi.atoms):
            out.add(tuple(env[v] for v in phi.free))
    return out


def test_phi3_on_hand_structure():
    # x1 = 1 forces y2 = 2 (x3 = 2); x1 = 0 forces y2 = 3 (x3 = 4); y1 is any element with f = 1
    F = FunctionalStructure(5, {"T1": [0, 1], "T2": [2, 3, 4]}, {"f": [1, 1, 3, 2, 0], "g": [2, 3, 2, 4, 0]})
    got = oracle_eval_func(F, phi3())
    assert got == _nested_loops(F, phi3())
    assert got == {(0, 2), (1, 2), (0, 3), (1, 3)}


def test_sample_oracle():
    rows = list(EXAMPLE_TABLE.values())
    assert oracle_min_samples(rows, 3) == {(1, 2, 3), (3, 2, 1), (None, 5, 4)}
    assert oracle_min_samples([], 2) == {(None, None)}
    assert oracle_min_samples([(4,), (4,)], 1) == {(4,)}
    assert oracle_min_samples([(4,), (5,)], 1) == set()


def test_relational_methods_agree():
    rng = random.Random(21)
    for i in range(150):
        db = random_database(rng)
        q = random_query(rng, schema_of(db), ["ACQ", "ACQ_NEQ", "ACQ_CMP"][i % 3])
        if q is None:
            continue
        assert oracle_eval_rel(db, q) == oracle_eval_rel(db, q, method="product")


def test_functional_oracle_agrees_with_nested_loops():
    rng = random.Random(22)
    for i in range(150):
        F = random_structure(rng, n=rng.randint(1, 6))
        phi = random_formula(rng, F, ["FACQ", "FACQ_NEQ", "FACQ_CMP"][i % 3], max_vars=3)
        assert oracle_eval_func(F, phi) == _nested_loops(F, phi)
