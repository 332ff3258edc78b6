"""Minimal samples of a tuple of unary functions over a ground set.

A sample assigns target values to some function indices (``None`` elsewhere)
so that every ground element is mapped onto its index's value by at least one
assigned function. Samples are plain tuples of length k.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import PreconditionError
from .model import BLANK


@dataclass(frozen=True)
class SampleProblem:
    """Ground set ``elements`` with k functions; ``functions[i][e]`` is g_i(e), ``None`` if undefined."""

    elements: tuple
    functions: tuple

    @property
    def k(self) -> int:
        return len(self.functions)

    def rows(self) -> list[tuple]:
        return [tuple(_value(g, e) for g in self.functions) for e in sorted(self.elements)]

    @classmethod
    def from_table(cls, table: Mapping[Hashable, Sequence]) -> "SampleProblem":
        """Build from ``{element: (g_1(e), ..., g_k(e))}``."""
        elements = tuple(table)
        k = len(next(iter(table.values()))) if table else 0
        functions = tuple({e: table[e][i] for e in elements} for i in range(k))
        return cls(elements, functions)


def _value(g, e):
    """g(e), or None where undefined (missing key, None, or -1 in an int array)."""
    try:
        v = g[e]
    except (KeyError, IndexError):
        return None
    if hasattr(g, "dtype"):
        v = int(v)
        return None if v < 0 else v
    return v


def covers(sample: Sequence, rows: Iterable[Sequence]) -> bool:
    return all(any(c is not None and c == r[j] for j, c in enumerate(sample)) for r in rows)


class NodeCount:
    """Counts search-tree nodes; shared by callers that need the linearity figure."""

    def __init__(self):
        self.nodes = 0


def _cover_masks(sample: Sequence, rows: Iterable[Sequence]) -> set[int]:
    masks = set()
    for r in rows:
        m = 0
        for j, c in enumerate(sample):
            if c is not None and c == r[j]:
                m |= 1 << j
        masks.add(m)
    return masks


def extract_minimal_rows(sample: Sequence, rows: Sequence[Sequence]) -> set[tuple]:
    """All minimal samples contained in ``sample``, exploring every drop order with a subset memo."""
    masks = _cover_masks(sample, rows)
    if 0 in masks:
        raise PreconditionError(f"{sample} is not a sample of the given functions")
    full = sum(1 << j for j, c in enumerate(sample) if c is not None)
    k = len(sample)
    found, seen, stack = set(), {full}, [full]
    while stack:
        q = stack.pop()
        minimal = True
        for j in range(k):
            bit = 1 << j
            if q & bit and all(m & (q ^ bit) for m in masks):
                minimal = False
                nxt = q ^ bit
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if minimal:
            found.add(tuple(c if q >> j & 1 else BLANK for j, c in enumerate(sample)))
    return found


def extract_minimal(sample: Sequence, p: SampleProblem) -> set[tuple]:
    return extract_minimal_rows(tuple(sample), p.rows())


def sample_leaves(rows: Sequence[Sequence], k: int, counter: NodeCount | None = None) -> set[tuple]:
    """Leaves of the covering search tree: elements are processed in order, uncovered ones branch."""
    nodes = {(BLANK,) * k}
    for r in rows:
        nxt = set()
        for node in nodes:
            if any(c is not None and c == r[j] for j, c in enumerate(node)):
                nxt.add(node)
                continue
            for j in range(k):
                if node[j] is None and r[j] is not None:
                    nxt.add(node[:j] + (r[j],) + node[j + 1:])
        nodes = nxt
        if counter is not None:
            counter.nodes += len(nodes)
        if not nodes:
            break
    return nodes


def min_samples_rows(rows: Sequence[Sequence], k: int, counter: NodeCount | None = None) -> set[tuple]:
    rows = list(dict.fromkeys(tuple(r) for r in rows))
    out = set()
    for leaf in sample_leaves(rows, k, counter):
        out |= extract_minimal_rows(leaf, rows)
    return out


def min_samples(p: SampleProblem, counter: NodeCount | None = None) -> set[tuple]:
    """Every minimal sample of ``p`` (at most k! of them)."""
    return min_samples_rows(p.rows(), p.k, counter)


def min_samples_partition(elements: Sequence, functions: Sequence, key, counter: NodeCount | None = None) -> dict:
    """Minimal samples of each class of ``elements`` under ``key`` (one sort, one tree search per class)."""
    keyed = sorted(((key(e), e) for e in elements), key=lambda t: (t[0], t[1]))
    classes: dict = defaultdict(list)
    for kv, e in keyed:
        classes[kv].append(tuple(_value(g, e) for g in functions))
    return {kv: min_samples_rows(rows, len(functions), counter) for kv, rows in classes.items()}


def sort_samples(samples: Iterable[Sequence]) -> list[tuple]:
    """Deterministic order; blanks sort before values."""
    return sorted(samples, key=lambda s: tuple((0, 0) if c is None else (1, c) for c in s))


def vertex_cover_via_samples(edges: Sequence[tuple], k: int) -> set | None:
    """A vertex cover with at most k vertices read off a minimal sample of (f1 x k, f2 x k), or None."""
    if not edges:
        return set()
    rows = [(a,) * k + (b,) * k for a, b in edges]
    best = None
    for s in min_samples_rows(rows, 2 * k):
        values = {c for c in s if c is not None}
        if best is None or (len(values), sorted(values)) < (len(best), sorted(best)):
            best = values
    if best is None or len(best) > k:
        return None
    return best


# ---------------------------------------------------------------------------
# grouped samples
#
# When several of the k functions coincide, a sample only matters through the
# set of values it gives each distinct function.  A grouped sample is a tuple
# with one sorted value tuple per distinct function; group i holds at most
# caps[i] values (the number of indices sharing that function).


def group_covers(sample: Sequence[Sequence], rows: Iterable[Sequence]) -> bool:
    return all(any(r[i] is not None and r[i] in vals for i, vals in enumerate(sample)) for r in rows)


def _group_leaves(rows: Sequence[Sequence], caps: Sequence[int], counter: NodeCount | None) -> set[tuple]:
    nodes = {tuple(frozenset() for _ in caps)}
    for r in rows:
        nxt = set()
        for node in nodes:
            if any(r[i] is not None and r[i] in vals for i, vals in enumerate(node)):
                nxt.add(node)
                continue
            for i, vals in enumerate(node):
                if r[i] is not None and len(vals) < caps[i]:
                    nxt.add(node[:i] + (vals | {r[i]},) + node[i + 1:])
        nodes = nxt
        if counter is not None:
            counter.nodes += len(nodes)
        if not nodes:
            break
    return nodes


def _extract_group_minimal(node: tuple, rows: Sequence[Sequence]) -> set[tuple]:
    items = [(i, c) for i, vals in enumerate(node) for c in sorted(vals)]
    masks = set()
    for r in rows:
        m = 0
        for b, (i, c) in enumerate(items):
            if r[i] == c:
                m |= 1 << b
        masks.add(m)
    full = (1 << len(items)) - 1
    found, seen, stack = set(), {full}, [full]
    while stack:
        q = stack.pop()
        minimal = True
        for b in range(len(items)):
            bit = 1 << b
            if q & bit and all(m & (q ^ bit) for m in masks):
                minimal = False
                if q ^ bit not in seen:
                    seen.add(q ^ bit)
                    stack.append(q ^ bit)
        if minimal:
            groups = [[] for _ in node]
            for b, (i, c) in enumerate(items):
                if q >> b & 1:
                    groups[i].append(c)
            found.add(tuple(tuple(g) for g in groups))
    return found


def min_group_samples(rows: Sequence[Sequence], caps: Sequence[int], counter: NodeCount | None = None) -> set[tuple]:
    """Every minimal grouped sample of ``rows`` (one column per distinct function)."""
    rows = list(dict.fromkeys(tuple(r) for r in rows))
    if len(caps) == 1:
        # one function: the only candidate is the set of all its values
        values = {r[0] for r in rows}
        if None in values or len(values) > caps[0]:
            return set()
        return {(tuple(sorted(values)),)}
    out = set()
    for leaf in _group_leaves(rows, caps, counter):
        out |= _extract_group_minimal(leaf, rows)
    return out


def expand_group_sample(sample: Sequence[Sequence], columns: Sequence[Sequence[int]], k: int) -> set[tuple]:
    """Ordinary samples placing each group's values on distinct indices of that group."""
    out = set()
    per_group = [itertools.permutations(cols, len(vals)) for vals, cols in zip(sample, columns)]
    for placement in itertools.product(*per_group):
        s = [BLANK] * k
        for vals, idx in zip(sample, placement):
            for c, j in zip(vals, idx):
                s[j] = c
        out.add(tuple(s))
    return out
