import random

import pytest

from acqfpt.frontend import parse_query

Q1 = "q(y1, y2) :- R(x1, y1), S(x1, y2, x2), T(y2, x3), R(x1, x2)"
Q2 = "q() :- S(x1, x2, x3), S(x1, x4, x5), R(x3, x5)"
Q3 = "q(y1, y2) :- R(x1, y1), S(x1, y2, x2), T(y2, x3), R(x1, x2), y1 != x3, x2 != x1"

# rows of the three-function table used for the minimal-sample examples
EXAMPLE_TABLE = {"a": (1, 2, 4), "b": (1, 5, 1), "c": (3, 2, 4), "d": (3, 5, 3), "e": (5, 2, 4)}


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def q1():
    return parse_query(Q1)


@pytest.fixture
def q2():
    return parse_query(Q2)


@pytest.fixture
def q3():
    return parse_query(Q3)

Q4 = "q(y1, y2) :- R(x1, y1), S(x1, y2, x2), S(y2, x3, y2), R(x1, x2), y1 < y2, x1 >= x3"


def T(fn, var):
    from acqfpt.model import Term
    return Term(fn, var)


def A(lf, lv, op, rf, rv):
    from acqfpt.model import Atom
    return Atom(T(lf, lv), op, T(rf, rv))


def M(pred, var):
    from acqfpt.model import Member
    return Member(pred, var)


def phi1():
    from acqfpt.model import FuncFormula
    return FuncFormula(("x",), ("y", "z"), (
        M("T1", "y"), M("T2", "z"),
        A("f1", "x", "=", "g1", "y"), A("f2", "x", "=", "h1", "z"),
        A("f1", "y", "=", "g2", "z"), A("f1", "z", "!=", "h1", "y"), M("T1", "x")))


def _phi23_base():
    return [M("T1", "x1"), M("T2", "x2"), M("T2", "x3"),
            A("f", "x1", "=", "f", "y1"), A("g", "x1", "=", "Id", "x2"),
            A("g", "x1", "=", "f", "y2"), A("g", "y2", "=", "Id", "x3")]


def phi2():
    from acqfpt.model import FuncFormula
    return FuncFormula(("y1", "y2"), ("x1", "x2", "x3"), tuple(_phi23_base() + [
        A("Id", "x3", "!=", "f", "x1"), A("g", "y1", "!=", "f", "y2")]))


def phi3():
    from acqfpt.model import FuncFormula
    return FuncFormula(("y1", "y2"), ("x1", "x2", "x3"), tuple(_phi23_base() + [
        A("f", "x1", "<", "g", "y2"), A("f", "y2", ">=", "g", "x3")]))
