import random

import pytest

from acqfpt.acyclic import functional_graph, graph_is_forest
from acqfpt.engine import eval_general
from acqfpt.errors import PreconditionError
from acqfpt.frontend import parse_query
from acqfpt.generators import random_database, random_query, schema_of
from acqfpt.model import Atom, Database, Member, is_forest, size
from acqfpt.oracle import oracle_eval_func, oracle_eval_rel
from acqfpt.translate import (ProjectionSpec, project_results, translate_query, translate_query_projected,
                              translate_structure)

from conftest import Q2, T

WORKED = "q(y1, y2) :- R1(x1, y1, y2), R2(x2, x1, x2), R1(x2, x2, x3), y1 != x2"


def _parts(phi):
    rel = [a for a in phi.atoms if isinstance(a, Member)]
    eq = [a for a in phi.atoms if isinstance(a, Atom) and a.op == "="]
    other = [a for a in phi.atoms if isinstance(a, Atom) and a.op != "="]
    return rel, eq, other


def test_worked_example():
    phi, proj = translate_query(parse_query(WORKED))
    rel, eq, other = _parts(phi)
    assert [str(m) for m in rel] == ["T_R1(t1)", "T_R2(t2)", "T_R1(t3)"]
    # repeated variables inside atoms, then one equality per shared variable per forest edge
    assert [str(a) for a in eq] == ["f1(t2) = f3(t2)", "f1(t3) = f2(t3)", "f1(t1) = f2(t2)", "f1(t2) = f1(t3)"]
    assert [str(a) for a in other] == ["f2(t1) != f1(t2)"]
    assert proj.terms() == (T("f2", "t1"), T("f3", "t1"))
    assert phi.free == ("t1",)


def test_single_atom_repeated_variable():
    phi, proj = translate_query(parse_query("q(y) :- R(y, y)"))
    assert [str(a) for a in phi.atoms] == ["T_R(t1)", "f1(t1) = f2(t1)"]
    assert proj.terms() == (T("f1", "t1"),)


def test_cyclic_query_rejected():
    with pytest.raises(PreconditionError):
        translate_query(parse_query(Q2))


def test_structure_binary_relation():
    db = Database.from_ids(4, {"R": [(0, 1), (1, 2), (2, 3)]})
    F = translate_structure(db)
    assert F.n == 7
    tr = F.predicate("T_R")
    for name in ("f1", "f2"):
        assert ((F.function(name) >= 0) == tr).all()
    assert list(F.function("f2")[4:]) == [1, 2, 3]
    assert F.sorts_disjoint()


def test_structure_partial_functions():
    db = Database.from_ids(3, {"A": [(0, 1, 2)], "B": [(0,), (2,)]})
    F = translate_structure(db)
    tb = F.sorts["T_B"]
    assert (F.function("f1")[tb] >= 0).all()
    assert (F.function("f2")[tb] < 0).all() and (F.function("f3")[tb] < 0).all()


def test_structure_empty_relation():
    db = Database.from_ids(2, {"R": [(0, 1)], "E": []}, {"E": 2})
    F = translate_structure(db)
    assert len(F.sorts["T_E"]) == 0


def test_project_results_trivial_cases():
    db = Database.from_ids(2, {"R": [(0, 1)]})
    F = translate_structure(db)
    spec = ProjectionSpec(((1, 1),), ("t1",))
    assert project_results([], spec, F, ("t1",)) == set()
    assert project_results([(2,)], ProjectionSpec((), ("t1",)), F, ("t1",)) == {()}


def test_worked_example_semantics_on_small_db():
    db = Database.from_ids(4, {"R1": [(0, 1, 2), (1, 1, 3), (3, 3, 0), (1, 0, 1)],
                               "R2": [(1, 0, 1), (3, 1, 3), (2, 2, 2)]})
    q = parse_query(WORKED)
    phi, proj = translate_query(q)
    F = translate_structure(db)
    got = project_results(oracle_eval_func(F, phi), proj, F, phi.free)
    assert got == oracle_eval_rel(db, q)
    assert got  # the instance is not vacuous


def _corpus(n, seed=7):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        db = random_database(rng)
        q = random_query(rng, schema_of(db), rng.choice(["ACQ", "ACQ_NEQ", "ACQ_CMP"]))
        if q is not None:
            out.append((db, q))
    return out


@pytest.mark.parametrize("db, q", _corpus(120))
def test_translation_preserves_answers_size_and_shape(db, q):
    F = translate_structure(db)
    assert size(F) <= 4 * size(db)
    phi, proj = translate_query(q)
    assert size(phi) <= 8 * size(q)
    verts, edges = functional_graph(phi)
    assert graph_is_forest(verts, edges)
    from acqfpt.acyclic import classify
    forest = classify(q).forest
    expect = {frozenset((f"t{u + 1}", f"t{v + 1}")) for u, v in forest.edges}
    assert edges == expect and is_forest(verts, [tuple(e) for e in edges])
    truth = oracle_eval_rel(db, q)
    assert project_results(eval_general(F, phi), proj, F, phi.free) == truth
    assert eval_general(F, translate_query_projected(q)) == truth
