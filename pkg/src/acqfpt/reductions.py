"""Parameterized graph and set problems solved as acyclic queries.

Each problem has an encoder (instance -> structure and query), a decoder for
witnesses, an exhaustive reference solver and a direct witness checker.

Encodings:

* ASI: relations ``E`` (both orientations) and ``V`` over the host vertices.
  One variable per pattern vertex, ``E(x_i, x_j)`` per pattern edge,
  ``V(x_i)`` for isolated pattern vertices, ``x_i != x_j`` for every i < j
  not joined by a pattern edge (``E`` has no loops, so an edge atom already
  separates its ends).
* AISI: as ASI, plus a relation ``Adj(v, n_1..n_d)`` listing the neighbours
  of each host vertex (padded with ``v`` itself).  Each pattern vertex gets
  an ``Adj`` atom with fresh neighbour variables, and ``x_j != n^i_t`` for
  every non-adjacent pair i < j, which makes the embedding induced.
* MDM: elements are the tuples of M and one element per (coordinate, value);
  ``f_i`` maps a tuple to its i-th coordinate element.  The formula asks for
  k tuples pairwise different in every coordinate.
* UHS: ``in_i(x) = x`` on X_i and undefined elsewhere, so ``Id(x) = in_i(x)``
  tests membership and ``Id(x) != in_i(x)`` tests non-membership.  A solution
  S with |S & X_i| = 1 groups the indices by the element of S they hit, so
  the query is a union over set partitions of 1..k: each block B gets one
  variable that lies in every X_i with i in B and in no other X_j.
* ANTICHAIN: all sets have the same size, so two members are incomparable
  exactly when they are different sets.  ``canon`` maps a member to the first
  member equal to it and the formula asks ``canon(x_i) != canon(x_j)``.
* DISJOINT: ``e_t`` maps a member to its t-th smallest element (undefined
  past its size).  Members i and j are disjoint when ``e_t(x_i) != e_u(x_j)``
  for all t, u; ``x_i != x_j`` keeps the chosen members distinct.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .acyclic import ACQ, ACQ_NEQ, NOT_ACYCLIC, classify
from .engine import StepCounter, enumerate_relational, enumerate_solutions, eval_relational, eval_strict
from .errors import ClassificationError, IngestionError, PreconditionError
from .model import (ID, Atom, CompAtom, Database, FuncFormula, FunctionalStructure, Member, RelAtom, RelQuery,
                    Term, is_forest)

ASI = "asi"
AISI = "aisi"
MDM = "mdm"
UHS = "uhs"
ANTICHAIN = "antichain"
DISJOINT = "disjoint"
PROBLEMS = (ASI, AISI, MDM, UHS, ANTICHAIN, DISJOINT)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: tuple  # unordered pairs, each stored once

    @classmethod
    def of(cls, edges: Sequence[Sequence], vertices: Sequence = ()) -> "Graph":
        vs = list(dict.fromkeys(list(vertices) + [v for e in edges for v in e]))
        seen, es = set(), []
        for u, v in edges:
            if u == v:
                raise IngestionError(f"self-loop on {u!r}")
            key = frozenset((u, v))
            if key not in seen:
                seen.add(key)
                es.append((u, v))
        return cls(tuple(vs), tuple(es))

    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def max_degree(self) -> int:
        return max((len(n) for n in self.adjacency().values()), default=0)

    def is_acyclic(self) -> bool:
        return is_forest(self.vertices, self.edges)


@dataclass(frozen=True)
class Instance:
    """One problem instance; the fields used depend on ``problem``."""
    problem: str
    pattern: Graph | None = None
    host: Graph | None = None
    d: int | None = None
    tuples: tuple = ()
    sets: tuple = ()
    k: int = 0

    @property
    def r(self) -> int:
        if self.problem == MDM:
            return len(self.tuples[0]) if self.tuples else 0
        return max((len(s) for s in self.sets), default=0)


def asi(pattern: Graph, host: Graph) -> Instance:
    return Instance(ASI, pattern=pattern, host=host)


def aisi(pattern: Graph, host: Graph, d: int | None = None) -> Instance:
    return Instance(AISI, pattern=pattern, host=host, d=host.max_degree() if d is None else d)


def mdm(tuples: Sequence[Sequence], k: int) -> Instance:
    rows = tuple(dict.fromkeys(tuple(t) for t in tuples))
    if len({len(t) for t in rows}) > 1:
        raise IngestionError("all tuples of M must have the same length")
    return Instance(MDM, tuples=rows, k=k)


def uhs(sets: Sequence[Sequence]) -> Instance:
    return Instance(UHS, sets=tuple(tuple(dict.fromkeys(s)) for s in sets), k=len(sets))


def antichain(sets: Sequence[Sequence], k: int) -> Instance:
    return Instance(ANTICHAIN, sets=tuple(tuple(sorted(set(s), key=_order_key)) for s in sets), k=k)


def disjoint(sets: Sequence[Sequence], k: int) -> Instance:
    return Instance(DISJOINT, sets=tuple(tuple(sorted(set(s), key=_order_key)) for s in sets), k=k)


def _order_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


# ---------------------------------------------------------------------------
# file formats


def _token(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


def _lines(path) -> Iterator[list]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield [_token(t) for t in re.split(r"[\s,;]+", line) if t]


def read_graph(path) -> Graph:
    """Edge list, one ``u v`` per line; a line with a single vertex declares it."""
    edges, vertices = [], []
    for row in _lines(path):
        if len(row) == 1:
            vertices.append(row[0])
        elif len(row) == 2:
            edges.append(tuple(row))
        else:
            raise IngestionError(f"{path}: expected one or two vertices per line, got {row}")
    return Graph.of(edges, vertices)


def read_tuples(path) -> list[tuple]:
    return [tuple(row) for row in _lines(path)]


def read_sets(path) -> list[tuple]:
    """One set per line; ``-`` alone stands for the empty set."""
    return [() if row == ["-"] else tuple(row) for row in _lines(path)]


# ---------------------------------------------------------------------------
# witness checkers and exhaustive solvers
#
# Witness shapes: ASI/AISI give host vertices aligned with pattern.vertices;
# MDM a tuple of tuples of M; UHS a sorted tuple of elements; ANTICHAIN and
# DISJOINT a sorted tuple of member indices into ``sets``.


def check_witness(inst: Instance, w) -> bool:
    """Verify ``w`` directly against the problem definition."""
    if inst.problem in (ASI, AISI):
        H, G = inst.pattern, inst.host
        if len(w) != len(H.vertices) or len(set(w)) != len(w) or not set(w) <= set(G.vertices):
            return False
        m = dict(zip(H.vertices, w))
        gadj, hadj = G.adjacency(), H.adjacency()
        for a, b in itertools.combinations(H.vertices, 2):
            edge = m[b] in gadj[m[a]]
            if b in hadj[a] and not edge:
                return False
            if inst.problem == AISI and b not in hadj[a] and edge:
                return False
        return True
    if inst.problem == MDM:
        if len(w) != inst.k or len(set(w)) != len(w) or not set(w) <= set(inst.tuples):
            return False
        return all(s[i] != t[i] for s, t in itertools.combinations(w, 2) for i in range(len(s)))
    if inst.problem == UHS:
        chosen = set(w)
        return all(len(chosen & set(s)) == 1 for s in inst.sets)
    if len(w) != inst.k or len(set(w)) != len(w) or not all(0 <= i < len(inst.sets) for i in w):
        return False
    chosen = [set(inst.sets[i]) for i in w]
    if inst.problem == ANTICHAIN:
        return all(a - b and b - a for a, b in itertools.combinations(chosen, 2))
    if inst.problem == DISJOINT:
        return all(not a & b for a, b in itertools.combinations(chosen, 2))
    raise ValueError(f"unknown problem {inst.problem!r}")


def brute_force(inst: Instance) -> set:
    """Every witness, by exhaustive search over candidate selections."""
    if inst.problem in (ASI, AISI):
        H, G = inst.pattern, inst.host
        return {w for w in itertools.permutations(G.vertices, len(H.vertices)) if check_witness(inst, w)}
    if inst.problem == MDM:
        return {w for w in itertools.combinations(inst.tuples, inst.k) if check_witness(inst, w)}
    if inst.problem == UHS:
        ground = sorted({v for s in inst.sets for v in s}, key=_order_key)
        out = set()
        for size in range(len(ground) + 1):
            for w in itertools.combinations(ground, size):
                if check_witness(inst, w):
                    out.add(w)
        return out
    return {w for w in itertools.combinations(range(len(inst.sets)), inst.k) if check_witness(inst, w)}


# ---------------------------------------------------------------------------
# encoders


def _var(i: int) -> str:
    return f"x{i}"


def _graph_db(H: Graph, G: Graph, extra: dict | None = None, extra_arities: dict | None = None) -> Database:
    index = {v: i for i, v in enumerate(G.vertices)}
    edges = [(index[u], index[v]) for u, v in G.edges]
    rels = {"E": edges + [(b, a) for a, b in edges], "V": [(i,) for i in range(len(G.vertices))]}
    rels.update(extra or {})
    arities = {"E": 2, "V": 1, **(extra_arities or {})}
    return Database.from_ids(len(G.vertices), rels, arities)


def _embedding_atoms(H: Graph) -> tuple[list, list]:
    index = {v: i for i, v in enumerate(H.vertices)}
    atoms = [RelAtom("E", (_var(index[u]), _var(index[v]))) for u, v in H.edges]
    touched = {v for e in H.edges for v in e}
    atoms += [RelAtom("V", (_var(i),)) for i, v in enumerate(H.vertices) if v not in touched]
    hadj = H.adjacency()
    # E is irreflexive, so adjacent pattern vertices need no inequality
    comps = [CompAtom(_var(i), "!=", _var(j)) for i, j in itertools.combinations(range(len(H.vertices)), 2)
             if H.vertices[j] not in hadj[H.vertices[i]]]
    return atoms, comps


def _require_acyclic(H: Graph):
    if not H.is_acyclic():
        raise ClassificationError(NOT_ACYCLIC, "pattern graph has a cycle")


def _checked(q: RelQuery) -> RelQuery:
    tag = classify(q).tag
    if tag not in (ACQ, ACQ_NEQ):
        raise AssertionError(f"encoding produced a {tag} query")
    return q


def encode_asi(H: Graph, G: Graph, head: bool = False) -> tuple[Database, RelQuery]:
    """Boolean query true iff H is a subgraph of G; ``head`` keeps the x variables free."""
    _require_acyclic(H)
    atoms, comps = _embedding_atoms(H)
    free = tuple(_var(i) for i in range(len(H.vertices))) if head else ()
    return _graph_db(H, G), _checked(RelQuery(free, tuple(atoms), tuple(comps)))


def encode_aisi(H: Graph, G: Graph, d: int, head: bool = False) -> tuple[Database, RelQuery | None]:
    """Boolean query true iff H is an induced subgraph of G (max degree <= d).

    The query is None when some pattern vertex has degree above d, in which
    case the answer is no.
    """
    _require_acyclic(H)
    gadj = G.adjacency()
    if G.max_degree() > d:
        raise PreconditionError(f"host graph has a vertex of degree {G.max_degree()} > d = {d}")
    index = {v: i for i, v in enumerate(G.vertices)}
    adj_rows = []
    for v in G.vertices:
        nbrs = sorted(index[u] for u in gadj[v])
        adj_rows.append((index[v],) + tuple(nbrs) + (index[v],) * (d - len(nbrs)))
    db = _graph_db(H, G, {"Adj": adj_rows}, {"Adj": d + 1})
    if H.max_degree() > d:
        return db, None
    atoms, comps = _embedding_atoms(H)
    hadj = H.adjacency()
    for i, v in enumerate(H.vertices):
        nbr = tuple(f"n{i}_{t}" for t in range(d))
        atoms.append(RelAtom("Adj", (_var(i),) + nbr))
        for j, u in enumerate(H.vertices[i + 1:], i + 1):
            if u not in hadj[v]:
                comps += [CompAtom(_var(j), "!=", n) for n in nbr]
    free = tuple(_var(i) for i in range(len(H.vertices))) if head else ()
    return db, _checked(RelQuery(free, tuple(atoms), tuple(comps)))


def _formula(k: int, atoms: list, head: bool) -> FuncFormula:
    xs = tuple(_var(i) for i in range(k))
    return FuncFormula(xs, (), tuple(atoms)) if head else FuncFormula((), xs, tuple(atoms))


def encode_mdm(tuples: Sequence[tuple], k: int, head: bool = False) -> tuple[FunctionalStructure, FuncFormula]:
    """Structure over M plus coordinate elements and the k-matching formula."""
    if k < 1:
        raise PreconditionError("k must be at least 1")
    m = len(tuples)
    r = len(tuples[0]) if tuples else 1
    coords, labels = {}, [("M", t) for t in tuples]
    fns = {f"f{i + 1}": np.full(m, -1, dtype=np.int64) for i in range(r)}
    for j, t in enumerate(tuples):
        for i, value in enumerate(t):
            key = (i, value)
            if key not in coords:
                coords[key] = m + len(coords)
                labels.append(("X", i + 1, value))
            fns[f"f{i + 1}"][j] = coords[key]
    n = m + len(coords)
    fns = {name: np.concatenate([vals, np.full(n - m, -1, dtype=np.int64)]) for name, vals in fns.items()}
    F = FunctionalStructure(n, {"M": np.arange(m)}, fns, labels=labels)
    atoms = [Member("M", _var(j)) for j in range(k)]
    for i in range(r):
        f = f"f{i + 1}"
        for a, b in itertools.combinations(range(k), 2):
            atoms.append(Atom(Term(f, _var(a)), "!=", Term(f, _var(b))))
    return F, _formula(k, atoms, head)


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def encode_uhs(sets: Sequence[tuple], head: bool = False) -> tuple[FunctionalStructure, list[tuple[list, FuncFormula]]]:
    """Ground-set structure and one formula per set partition of the indices.

    Each entry is ``(blocks, formula)`` where variable ``x{b}`` of the formula
    is the element of S shared by the sets in ``blocks[b]``.
    """
    ground = sorted({v for s in sets for v in s}, key=_order_key)
    index = {v: i for i, v in enumerate(ground)}
    n = len(ground)
    fns = {}
    for i, s in enumerate(sets):
        vals = np.full(n, -1, dtype=np.int64)
        members = [index[v] for v in s]
        vals[members] = members
        fns[f"in{i + 1}"] = vals
    F = FunctionalStructure(n, {}, fns, labels=list(ground))
    out = []
    for blocks in set_partitions(range(len(sets))):
        atoms = []
        for b, block in enumerate(blocks):
            x = _var(b)
            for i in range(len(sets)):
                op = "=" if i in block else "!="
                atoms.append(Atom(Term(ID, x), op, Term(f"in{i + 1}", x)))
        out.append((blocks, _formula(len(blocks), atoms, head)))
    return F, out


def _family_structure(sets: Sequence[tuple], functions: dict, extra: int = 0, labels=()) -> FunctionalStructure:
    m = len(sets)
    fns = {name: np.concatenate([np.asarray(v, dtype=np.int64), np.full(extra, -1, dtype=np.int64)])
           for name, v in functions.items()}
    return FunctionalStructure(m + extra, {"F": np.arange(m)}, fns,
                               labels=[("F", i) for i in range(m)] + list(labels))


def encode_antichain(sets: Sequence[tuple], k: int, head: bool = False) -> tuple[FunctionalStructure, FuncFormula]:
    """Members as elements, ``canon`` = first equal member; requires sets of one size."""
    if len({len(s) for s in sets}) > 1:
        raise PreconditionError("antichain instances need all sets of the same size r")
    if k < 1:
        raise PreconditionError("k must be at least 1")
    first = {}
    canon = [first.setdefault(frozenset(s), i) for i, s in enumerate(sets)]
    F = _family_structure(sets, {"canon": canon})
    atoms = [Member("F", _var(j)) for j in range(k)]
    atoms += [Atom(Term("canon", _var(a)), "!=", Term("canon", _var(b)))
              for a, b in itertools.combinations(range(k), 2)]
    return F, _formula(k, atoms, head)


def encode_disjoint(sets: Sequence[tuple], k: int, head: bool = False) -> tuple[FunctionalStructure, FuncFormula]:
    """Members plus ground elements; ``e_t`` picks the t-th element of a member."""
    if k < 1:
        raise PreconditionError("k must be at least 1")
    m = len(sets)
    ground = sorted({v for s in sets for v in s}, key=_order_key)
    index = {v: m + i for i, v in enumerate(ground)}
    r = max((len(s) for s in sets), default=0)
    fns = {}
    for t in range(r):
        fns[f"e{t + 1}"] = [index[s[t]] if t < len(s) else -1 for s in sets]
    F = _family_structure(sets, fns, len(ground), ground)
    atoms = [Member("F", _var(j)) for j in range(k)]
    for a, b in itertools.combinations(range(k), 2):
        atoms.append(Atom(Term(ID, _var(a)), "!=", Term(ID, _var(b))))
        for t, u in itertools.product(range(r), repeat=2):
            atoms.append(Atom(Term(f"e{t + 1}", _var(a)), "!=", Term(f"e{u + 1}", _var(b))))
    return F, _formula(k, atoms, head)


# ---------------------------------------------------------------------------
# solving


@dataclass
class Solution:
    verdict: bool
    witnesses: list


def _take(stream, limit: int | None) -> list:
    out, seen = [], set()
    for w in stream:
        if limit is not None and len(out) >= limit:
            break
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def _decide_func(F, phi: FuncFormula, counter) -> bool:
    return bool(eval_strict(F, phi, counter))


def _stream(inst: Instance, counter) -> Iterator:
    """Witnesses in problem vocabulary, possibly repeated (callers dedupe)."""
    p = inst.problem
    if p in (ASI, AISI):
        G = inst.host
        if p == ASI:
            db, q = encode_asi(inst.pattern, G, head=True)
        else:
            db, q = encode_aisi(inst.pattern, G, inst.d, head=True)
            if q is None:
                return
        for row in enumerate_relational(db, q, counter):
            yield tuple(G.vertices[i] for i in row)
    elif p == MDM:
        F, phi = encode_mdm(inst.tuples, inst.k, head=True)
        for row in enumerate_solutions(F, phi, counter):
            yield tuple(inst.tuples[i] for i in sorted(row))
    elif p == UHS:
        F, parts = encode_uhs(inst.sets, head=True)
        for _, phi in parts:
            for row in enumerate_solutions(F, phi, counter):
                yield tuple(sorted((F.labels[i] for i in row), key=_order_key))
    else:
        encode = encode_antichain if p == ANTICHAIN else encode_disjoint
        F, phi = encode(inst.sets, inst.k, head=True)
        for row in enumerate_solutions(F, phi, counter):
            yield tuple(sorted(row))


def _trivial(inst: Instance):
    """Verdict for degenerate instances the encodings do not cover, else None."""
    p = inst.problem
    if p in (ASI, AISI):
        if not inst.pattern.vertices:
            return Solution(True, [()])
        if len(inst.pattern.vertices) > len(inst.host.vertices):
            _require_acyclic(inst.pattern)
            return Solution(False, [])
    elif p == UHS and not inst.sets:
        return Solution(True, [()])
    elif p in (MDM, ANTICHAIN, DISJOINT):
        if inst.k == 0:
            return Solution(True, [()])
        if inst.k > (len(inst.tuples) if p == MDM else len(inst.sets)):
            return Solution(False, [])
    return None


def decide(inst: Instance, counter: StepCounter | None = None) -> bool:
    counter = counter or StepCounter()
    trivial = _trivial(inst)
    if trivial is not None:
        return trivial.verdict
    p = inst.problem
    if p == ASI:
        db, q = encode_asi(inst.pattern, inst.host)
        return bool(eval_relational(db, q, counter))
    if p == AISI:
        db, q = encode_aisi(inst.pattern, inst.host, inst.d)
        return q is not None and bool(eval_relational(db, q, counter))
    if p == MDM:
        return _decide_func(*encode_mdm(inst.tuples, inst.k), counter)
    if p == UHS:
        F, parts = encode_uhs(inst.sets)
        return any(_decide_func(F, phi, counter) for _, phi in parts)
    encode = encode_antichain if p == ANTICHAIN else encode_disjoint
    return _decide_func(*encode(inst.sets, inst.k), counter)


def solve(inst: Instance, witnesses: bool = False, limit: int | None = None,
          counter: StepCounter | None = None) -> Solution:
    """Decide ``inst``; with ``witnesses`` also list up to ``limit`` distinct solutions."""
    counter = counter or StepCounter()
    trivial = _trivial(inst)
    if trivial is not None:
        return Solution(trivial.verdict, trivial.witnesses[:limit] if witnesses else [])
    if not witnesses:
        return Solution(decide(inst, counter), [])
    if limit == 0:
        return Solution(decide(inst, counter), [])
    found = _take(_stream(inst, counter), limit)
    return Solution(bool(found), found)
