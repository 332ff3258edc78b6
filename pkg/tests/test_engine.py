import itertools
import random

import numpy as np
import pytest

from acqfpt.acyclic import NOT_ACYCLIC, classify_functional
from acqfpt.engine import (Expansion, StepCounter, eliminate_comparison, enumerate_relational,
                           enumerate_solutions, enumerate_to, eval_general, eval_relational, eval_strict,
                           negate_to_fafo)
from acqfpt.engine import eliminate as E
from acqfpt.errors import ClassificationError, PreconditionError
from acqfpt.frontend import parse_query
from acqfpt.model import Database, FuncFormula, FunctionalStructure, Member
from acqfpt.oracle import oracle_eval_func, oracle_eval_rel

from conftest import Q2, A, M, T, phi1, phi2, phi3


def _lits(phi):
    (clause,) = phi.clauses
    return {str(l) for l in clause}


def test_negation_of_single_equality():
    phi = FuncFormula(("x",), ("y",), (A("f", "x", "=", "g", "y"),))
    assert _lits(negate_to_fafo(phi)) == {"~f(x) = g(y)"}


def test_negation_of_phi2_body():
    out = negate_to_fafo(phi2())
    (clause,) = out.clauses
    neg = [l for l in clause if not l.positive and not isinstance(l.atom, Member)]
    pos = [l for l in clause if l.positive]
    assert len(neg) == 4 and len(pos) == 2
    assert len(out.neq_graph_edges(clause)) == 4


def test_negation_quantifier_free_and_rejects_order():
    out = negate_to_fafo(FuncFormula(("x",), (), (M("U", "x"),)))
    assert out.bound == () and _lits(out) == {"~U(x)"}
    with pytest.raises(PreconditionError):
        negate_to_fafo(phi3())


def _structure(n, fns, sorts=None):
    return FunctionalStructure(n, sorts or {"U": list(range(n))}, fns)


def test_comparison_less_than_single_class():
    # three p elements with f = 3, 5, 7 and one z element with g = 5
    F = _structure(4, {"f": [3, 5, 7, -1], "g": [-1, -1, -1, 5]})
    S = Expansion(F)
    B = np.array([False, False, False, True])
    got = eliminate_comparison(S, B, [], (T("f", "p"), "<", T("g", "z")), StepCounter())
    assert list(np.flatnonzero(got)) == [0]


def test_comparison_not_equal_with_two_values():
    F = _structure(4, {"f": [1, 2, -1, -1], "g": [-1, -1, 1, 2]})
    B = np.array([False, False, True, True])
    got = eliminate_comparison(Expansion(F), B, [], (T("f", "p"), "!=", T("g", "z")), StepCounter())
    # '!=' is the negation of '=', so an undefined f(p) satisfies it too
    assert list(np.flatnonzero(got)) == [0, 1, 2, 3]


@pytest.mark.parametrize("op", ["!=", "<", "<=", ">", ">="])
def test_comparison_matches_brute_force(op):
    cmp = {"!=": lambda a, b: a != b, "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
           ">": lambda a, b: a > b, ">=": lambda a, b: a >= b}[op]
    rng = random.Random(hash(op) & 0xFFFF)
    for _ in range(150):
        n = rng.randint(1, 10)
        fns = {name: [rng.randrange(-1, 4) for _ in range(n)] for name in ("u", "v", "w", "f", "g")}
        F = _structure(n, fns)
        S = Expansion(F)
        B = np.array([rng.random() < 0.5 for _ in range(n)])
        l = rng.randint(0, 2)
        pairs = [(T("u", "p"), T("v", "z")), (T("w", "p"), T("w", "z"))][:l]
        got = eliminate_comparison(S, B, pairs, (T("f", "p"), op, T("g", "z")), StepCounter())

        def ok(p, z):
            if not B[z]:
                return False
            for u, v in pairs:
                a, b = fns[u.fn][p], fns[v.fn][z]
                if a < 0 or b < 0 or a != b:
                    return False
            a, b = fns["f"][p], fns["g"][z]
            if op == "!=":
                return not (a >= 0 and b >= 0 and a == b)
            return a >= 0 and b >= 0 and cmp(a, b)

        expect = [p for p in range(n) if any(ok(p, z) for z in range(n))]
        assert list(np.flatnonzero(got)) == expect


def test_negonly_surjective_and_disjoint_images():
    exists = FuncFormula(("x",), ("y",), (A("f", "x", "=", "g", "y"),))
    F = _structure(4, {"f": [0, 1, 1, 0], "g": [1, 0, 0, 1]})
    assert list(eval_strict(F, exists)) == [0, 1, 2, 3]
    F = _structure(4, {"f": [0, 1, 1, 0], "g": [2, 3, 3, 2]})
    assert list(eval_strict(F, exists)) == []


def _phi1_structure():
    # elements 0-2 in T1, 3-5 in T2
    return FunctionalStructure(6, {"T1": [0, 1, 2], "T2": [3, 4, 5]}, {
        "f1": [0, 1, 2, 3, 4, 5], "f2": [3, 4, 3, -1, -1, -1],
        "g1": [0, 0, 2, -1, -1, -1], "g2": [-1, -1, -1, 0, 2, 1],
        "h1": [1, 2, 0, 3, 4, 4]})


def test_phi1_is_rejected_as_cyclic_but_oracle_still_evaluates():
    F = _phi1_structure()
    with pytest.raises(ClassificationError) as exc:
        eval_strict(F, phi1())
    assert exc.value.tag == NOT_ACYCLIC
    assert oracle_eval_func(F, phi1()) == {(0,)}  # witness y = 0, z = 3


def test_acyclic_variant_of_phi1_matches_oracle():
    # dropping f1(y) = g2(z) leaves a tree on x, y, z
    phi = FuncFormula(("x",), ("y", "z"), tuple(a for a in phi1().atoms if str(a) != "f1(y) = g2(z)"))
    F = _phi1_structure()
    got = {(int(v),) for v in eval_strict(F, phi)}
    assert got == oracle_eval_func(F, phi) and got


def test_boolean_and_empty_sort():
    F = _phi1_structure()
    yes = FuncFormula((), ("y", "z"), (M("T1", "y"), M("T2", "z"), A("f2", "y", "=", "h1", "z")))
    no = FuncFormula((), ("y", "z"), (M("T1", "y"), M("T2", "z"), A("f2", "y", "=", "g2", "z")))
    assert eval_strict(F, yes) is True and oracle_eval_func(F, yes) == {()}
    assert eval_strict(F, no) is False and oracle_eval_func(F, no) == set()
    G = FunctionalStructure(3, {"T": [0, 1, 2], "E": []}, {"f": [0, 1, 2]})
    assert len(eval_strict(G, FuncFormula(("x",), (), (M("E", "x"),)))) == 0


def _phi23_structure():
    # T1 = 0-3, T2 = 4-9; f and g map into 0-9
    return FunctionalStructure(10, {"T1": [0, 1, 2, 3], "T2": [4, 5, 6, 7, 8, 9]}, {
        "f": [1, 1, 2, 3, 4, 5, 6, 7, 8, 9], "g": [4, 5, 4, 6, 7, 8, 5, 9, 4, 6]})


def test_phi2_and_phi3_match_oracle():
    F = _phi23_structure()
    for phi in (phi2(), phi3()):
        got = eval_general(F, phi)
        assert got == oracle_eval_func(F, phi)
        assert set(enumerate_solutions(F, phi)) == got


def test_strict_general_agree_and_contradiction():
    F = _phi23_structure()
    phi = FuncFormula(("y",), ("x",), (A("f", "x", "=", "g", "y"),))
    assert eval_general(F, phi) == {(int(v),) for v in eval_strict(F, phi)}
    bad = FuncFormula(("x", "y"), (), (A("f", "x", "=", "g", "y"), A("f", "x", "!=", "g", "y")))
    assert eval_general(F, bad) == set()
    assert list(enumerate_solutions(F, bad)) == []
    with pytest.raises(PreconditionError):
        eval_strict(F, bad)


def test_enumerate_limit_and_sink_abort():
    F = _phi23_structure()
    phi = FuncFormula(("x", "y"), (), (A("g", "x", "=", "Id", "y"),))
    full = eval_general(F, phi)
    counter = StepCounter()
    first = next(enumerate_solutions(F, phi, counter))
    assert first in full and counter.steps <= 50 * F.n
    seen = []
    assert enumerate_to(F, phi, lambda s: seen.append(s) or len(seen) < 3) == 3
    out = list(enumerate_solutions(F, phi))
    assert len(out) == len(set(out)) and set(out) == full


WORKED = "q(y1, y2) :- R1(x1, y1, y2), R2(x2, x1, x2), R1(x2, x2, x3), y1 != x2"


def test_relational_worked_example():
    db = Database.from_ids(4, {"R1": [(0, 1, 2), (1, 1, 3), (3, 3, 0)],
                               "R2": [(1, 0, 1), (3, 1, 3), (2, 2, 2)]})
    q = parse_query(WORKED)
    got = eval_relational(db, q)
    assert got == oracle_eval_rel(db, q) == {(1, 3)}  # x1 = 1, x2 = 3
    assert sorted(enumerate_relational(db, q)) == sorted(got)


def test_relational_rejections_and_empty():
    db = Database.from_ids(3, {"R": [(0, 1)], "S": [(0, 1, 2)], "E": []}, {"E": 2})
    with pytest.raises(ClassificationError) as exc:
        eval_relational(db, parse_query(Q2))
    assert exc.value.tag == NOT_ACYCLIC
    assert eval_relational(db, parse_query("q(x) :- R(x, y), E(y, z)")) == set()
    assert eval_relational(db, parse_query("q() :- E(x, y)")) == set()
    assert eval_relational(db, parse_query("q() :- R(x, y)")) == {()}


# ---------------------------------------------------------------------------
# randomized agreement with the oracle

from acqfpt.acyclic import graph_is_forest  # noqa: E402
from acqfpt.engine.clauses import clause_vars  # noqa: E402
from acqfpt.generators import random_database, random_formula, random_query, random_structure, schema_of  # noqa: E402

TAGS = ["FACQ", "FACQ_NEQ", "FACQ_CMP"]


def _functional_cases(seed, count, free=None):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        F = random_structure(rng, n=rng.randint(1, 8))
        tag = TAGS[len(out) % 3]
        phi = random_formula(rng, F, tag, free=free if free is None else rng.randint(0, free))
        if classify_functional(phi).tag == tag:
            out.append((F, phi))
    return out


@pytest.mark.parametrize("seed", range(4))
def test_general_and_enumeration_match_oracle(seed):
    for F, phi in _functional_cases(seed, 60):
        expect = oracle_eval_func(F, phi)
        assert eval_general(F, phi) == expect
        out = list(enumerate_solutions(F, phi))
        assert len(out) == len(set(out)) and set(out) == expect


@pytest.mark.parametrize("seed", range(4))
def test_relational_matches_oracle(seed):
    rng = random.Random(100 + seed)
    done = 0
    while done < 60:
        db = random_database(rng)
        q = random_query(rng, schema_of(db), ["ACQ", "ACQ_NEQ", "ACQ_CMP"][done % 3])
        if q is None:
            continue
        expect = oracle_eval_rel(db, q)
        assert eval_relational(db, q) == expect
        assert sorted(enumerate_relational(db, q)) == sorted(expect)
        done += 1


def test_each_elimination_step_preserves_the_result():
    steps = 0

    def check(before_S, before, after_S, after, ctx):
        nonlocal steps
        steps += 1
        assert oracle_eval_func(before_S, before) == oracle_eval_func(after_S, after)
        if before.kind == "clauses":
            (old,) = before.clauses
            for clause in after.clauses:
                assert len(clause_vars(clause)) < len(clause_vars(old))
                assert graph_is_forest(after.variables, after.neq_graph_edges(clause))
        else:
            used = lambda phi: {v for a in phi.atoms for v in a.vars} - set(phi.free)  # noqa: E731
            assert len(used(after)) < len(used(before))

    for F, phi in _functional_cases(9, 150, free=1):
        got = eval_strict(F, phi, on_step=check)
        got = ({()} if got else set()) if not phi.free else {(int(x),) for x in got}
        assert got == oracle_eval_func(F, phi)
    assert steps > 100


def _cnf_holds(S, clauses, env):
    return all(any(bool(S.predicate(l.atom.pred)[env[l.atom.var]]) == l.positive for l in c) for c in clauses)


@pytest.mark.parametrize("limit", [E.DISTRIBUTE_LIMIT, 0])
def test_dnf_to_cnf_matches_brute_force(limit, monkeypatch):
    monkeypatch.setattr(E, "DISTRIBUTE_LIMIT", limit)
    rng = random.Random(limit + 1)
    for _ in range(120):
        n = rng.randint(1, 4)
        S = Expansion(FunctionalStructure(n))
        names = ["a", "b", "c"][:rng.randint(1, 3)]
        terms = []
        for _t in range(rng.randint(0, 4)):
            term = []
            for _i in range(rng.randint(0, 3)):
                vs = rng.sample(names, rng.randint(1, len(names)))
                term.append({v: np.array([rng.random() < 0.5 for _ in range(n)]) for v in vs})
            terms.append(term)
        clauses = E._dnf_to_cnf(S, terms, StepCounter(), {})
        for values in itertools.product(range(n), repeat=len(names)):
            env = dict(zip(names, values))
            dnf = any(all(any(m[env[v]] for v, m in item.items()) for item in t) for t in terms)
            assert _cnf_holds(S, clauses, env) == dnf


def test_transversals_are_the_minimal_hitting_sets():
    rng = random.Random(4)
    for _ in range(200):
        universe = range(rng.randint(1, 6))
        terms = [frozenset(rng.sample(universe, rng.randint(1, len(universe)))) for _ in range(rng.randint(0, 4))]
        hitting = [frozenset(c) for r in range(len(universe) + 1) for c in itertools.combinations(universe, r)
                   if all(set(c) & t for t in terms)]
        minimal = {h for h in hitting if not any(o < h for o in hitting)}
        assert set(E.transversals(terms)) == minimal
    assert E.transversals([frozenset({1, 2}), frozenset({3, 4})], cap=2) is None


def test_work_doubles_with_the_structure():
    phi = FuncFormula(("x",), ("y", "z"), (A("g1", "x", "=", "g2", "y"), A("g2", "y", "=", "g1", "z"),
                                            A("g1", "x", "!=", "g3", "z")))
    steps = []
    for n in (4000, 8000, 16000):
        rng = np.random.default_rng(1)
        F = FunctionalStructure(n, {"U": np.arange(n)},
                                {f"g{j}": rng.integers(0, n // 4, n) for j in (1, 2, 3)})
        c = StepCounter()
        eval_strict(F, phi, c)
        steps.append(c.steps)
    assert steps[1] / steps[0] <= 2.5 and steps[2] / steps[1] <= 2.5
