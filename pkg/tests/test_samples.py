import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from acqfpt.errors import PreconditionError
from acqfpt.oracle import oracle_min_samples
from acqfpt.samples import (NodeCount, SampleProblem, covers, expand_group_sample, extract_minimal,
                            min_group_samples, min_samples, min_samples_partition, min_samples_rows,
                            vertex_cover_via_samples)

from conftest import EXAMPLE_TABLE

_ = None


def test_three_function_table():
    p = SampleProblem.from_table(EXAMPLE_TABLE)
    assert min_samples(p) == {(1, 2, 3), (3, 2, 1), (_, 5, 4)}


def test_empty_ground_set():
    assert min_samples(SampleProblem((), ({}, {}, {}))) == {(_, _, _)}


def test_single_constant_function():
    p = SampleProblem.from_table({"a": (7,), "b": (7,)})
    assert min_samples(p) == {(7,)}


def test_extract_minimal():
    p = SampleProblem.from_table(EXAMPLE_TABLE)
    assert extract_minimal((1, 5, 4), p) == {(_, 5, 4)}
    assert extract_minimal((1, 2, 3), p) == {(1, 2, 3)}
    assert extract_minimal((_, _, _), SampleProblem((), ({}, {}, {}))) == {(_, _, _)}
    with pytest.raises(PreconditionError):
        extract_minimal((1, _, _), p)


def test_partition_constant_and_injective_keys():
    p = SampleProblem.from_table(EXAMPLE_TABLE)
    whole = min_samples_partition(p.elements, p.functions, key=lambda e: 0)
    assert whole == {0: min_samples(p)}
    each = min_samples_partition(p.elements, p.functions, key=lambda e: e)
    assert each["b"] == {(1, _, _), (_, 5, _), (_, _, 1)}
    assert each["e"] == {(5, _, _), (_, 2, _), (_, _, 4)}


def test_partition_matches_per_class_brute_force():
    rng = random.Random(3)
    for _trial in range(30):
        elements = list(range(10))
        funcs = [{e: rng.randrange(4) for e in elements} for _k in range(3)]
        v = {e: (rng.randrange(2), rng.randrange(2)) for e in elements}
        got = min_samples_partition(elements, funcs, key=v.get)
        for a, res in got.items():
            rows = [tuple(g[e] for g in funcs) for e in elements if v[e] == a]
            assert res == oracle_min_samples(rows, 3)


def test_vertex_cover_examples():
    tri = [(0, 1), (1, 2), (0, 2)]
    cover = vertex_cover_via_samples(tri, 2)
    assert cover is not None and len(cover) <= 2 and all(a in cover or b in cover for a, b in tri)
    assert len(vertex_cover_via_samples([(0, 1)], 1)) == 1
    assert vertex_cover_via_samples([(0, 1), (0, 2), (0, 3), (0, 4)], 1) == {0}
    assert vertex_cover_via_samples(tri, 1) is None


def _rows(draw, n, k, f, undefined):
    cell = st.integers(0, f - 1)
    if undefined:
        cell = st.one_of(cell, st.none())
    return [tuple(draw(cell) for _ in range(k)) for _ in range(n)]


@st.composite
def tables(draw, max_n=12, max_k=4, max_f=6, undefined=False):
    k = draw(st.integers(1, max_k))
    return k, _rows(draw, draw(st.integers(0, max_n)), k, draw(st.integers(1, max_f)), undefined)


@given(tables())
@settings(max_examples=250, deadline=None)
def test_min_samples_exact_against_brute_force(table):
    k, rows = table
    got = min_samples_rows(rows, k)
    assert got == oracle_min_samples(rows, k)
    assert len(got) <= math.factorial(k)
    for s in got:
        assert covers(s, rows)
        for j, c in enumerate(s):
            if c is not None:
                assert not covers(s[:j] + (None,) + s[j + 1:], rows)


@given(tables(undefined=True))
@settings(max_examples=150, deadline=None)
def test_min_samples_with_undefined_values(table):
    k, rows = table
    assert min_samples_rows(rows, k) == oracle_min_samples(rows, k)


@given(st.integers(1, 3), st.integers(1, 3), st.randoms(use_true_random=False))
@settings(max_examples=120, deadline=None)
def test_grouped_samples_expand_to_ordinary_ones(groups, width, rnd):
    # columns of the same group carry identical values, as when literals share a function
    caps = [rnd.randint(1, width) for _ in range(groups)]
    columns, j = [], 0
    for c in caps:
        columns.append(list(range(j, j + c)))
        j += c
    base = [tuple(rnd.choice([None, 0, 1, 2, 3]) for _ in caps) for _ in range(rnd.randint(0, 8))]
    wide = [tuple(r[i] for i, cols in enumerate(columns) for _ in cols) for r in base]
    grouped = min_group_samples(base, caps)
    expanded = set()
    for s in grouped:
        expanded |= expand_group_sample(s, columns, j)
    assert expanded == min_samples_rows(wide, j)


def test_node_count_grows_linearly():
    k = 3
    counts = []
    for n in (200, 400, 800):
        # distinct rows, each hit by g_1 = 0 or g_2 = 1, so the search never dies out
        rows = [(0, e, e) if e % 2 else (e, 1, e) for e in range(2, n + 2)]
        c = NodeCount()
        assert min_samples_rows(rows, k, c)
        counts.append(c.nodes)
        assert c.nodes <= math.factorial(k) * n
    assert counts[2] <= 2.2 * counts[1] and counts[1] <= 2.2 * counts[0]
