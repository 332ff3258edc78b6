"""GYO reduction, join forests, and query classification."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import PreconditionError
from .model import Atom, FuncFormula, Hypergraph, JoinForest, RelQuery, is_forest

ACQ = "ACQ"
ACQ_NEQ = "ACQ_NEQ"
ACQ_CMP = "ACQ_CMP"
NOT_ACYCLIC = "NOT_ACYCLIC"
CMP_VIOLATION = "CMP_VIOLATION"

FACQ = "FACQ"
FACQ_NEQ = "FACQ_NEQ"
FACQ_CMP = "FACQ_CMP"

ORDER_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class GyoTrace:
    """Steps are ``("vertex", v)``, ``("contained", i, j)`` (edge i inside edge j) or ``("empty", i)``."""

    initial: tuple[frozenset, ...]
    steps: tuple[tuple, ...]
    residual: dict

    def replay(self) -> dict:
        edges = dict(enumerate(self.initial))
        for step in self.steps:
            if step[0] == "vertex":
                edges = {i: e - {step[1]} for i, e in edges.items()}
            else:
                del edges[step[1]]
        return edges

    def rule_applications(self) -> int:
        """Number of maximal runs of the same rule (vertex removal vs. edge removal)."""
        runs, last = 0, None
        for step in self.steps:
            kind = "vertex" if step[0] == "vertex" else "edge"
            if kind != last:
                runs += 1
                last = kind
        return runs


def gyo_reduce(h: Hypergraph, rng: random.Random | None = None) -> tuple[bool, GyoTrace]:
    """Apply the two GYO rules until neither applies.

    Without ``rng`` rules are applied lowest-index first; with ``rng`` the next
    applicable rule is picked at random (used to test confluence).
    """
    edges = {i: frozenset(e) for i, e in enumerate(h.edges)}
    steps = []
    while edges:
        degree = {}
        for e in edges.values():
            for v in e:
                degree[v] = degree.get(v, 0) + 1
        moves = [("vertex", v) for v in sorted(degree, key=str) if degree[v] <= 1]
        for i in sorted(edges):
            if not edges[i]:
                moves.append(("empty", i))
                continue
            for j in sorted(edges):
                if j != i and edges[i] <= edges[j]:
                    moves.append(("contained", i, j))
                    break
        if not moves:
            break
        move = moves[0] if rng is None else rng.choice(moves)
        steps.append(move)
        if move[0] == "vertex":
            edges = {i: e - {move[1]} for i, e in edges.items()}
        else:
            del edges[move[1]]
    return not edges, GyoTrace(tuple(frozenset(e) for e in h.edges), tuple(steps), edges)


def forest_from_trace(q: RelQuery, trace: GyoTrace) -> JoinForest:
    edges, shared = [], []
    for step in trace.steps:
        if step[0] == "contained":
            i, j = step[1], step[2]
            edges.append((i, j))
            common = set(q.atoms[i].args) & set(q.atoms[j].args)
            shared.append(tuple(v for v in q.variables if v in common))
    return JoinForest(tuple(range(len(q.atoms))), tuple(edges), tuple(shared))


def build_join_forest(q: RelQuery) -> JoinForest:
    ok, trace = gyo_reduce(Hypergraph.of_query(q))
    if not ok:
        raise PreconditionError("query is not acyclic; no join forest exists")
    return forest_from_trace(q, trace)


def strict_root(q: RelQuery) -> int | None:
    """Lowest-index atom containing every free variable, or None."""
    head = set(q.head)
    for i, a in enumerate(q.atoms):
        if head <= set(a.args):
            return i
    return None


@dataclass
class QueryClass:
    tag: str
    forest: JoinForest | None = None
    strict: bool = False
    root: int | None = None
    # comparison index -> ("atom", i) or ("edge", u, v) with left var in u, right var in v
    placement: dict = field(default_factory=dict)
    witness: object = None
    trace: GyoTrace | None = None

    @property
    def accepted(self) -> bool:
        return self.tag in (ACQ, ACQ_NEQ, ACQ_CMP)


def _match(candidates: list[list]) -> list | None:
    """Assign each item a distinct candidate (augmenting paths); None if impossible."""
    owner: dict = {}

    def augment(i, seen):
        for c in candidates[i]:
            if c in seen:
                continue
            seen.add(c)
            if c not in owner or augment(owner[c], seen):
                owner[c] = i
                return True
        return False

    for i in range(len(candidates)):
        if not augment(i, set()):
            return None
    result = [None] * len(candidates)
    for c, i in owner.items():
        result[i] = c
    return result


def classify(q: RelQuery) -> QueryClass:
    ok, trace = gyo_reduce(Hypergraph.of_query(q))
    if not ok:
        return QueryClass(NOT_ACYCLIC, witness=trace.residual, trace=trace)
    forest = forest_from_trace(q, trace)
    root = strict_root(q)
    base = dict(forest=forest, strict=root is not None, root=root, trace=trace)
    if not q.comparisons:
        return QueryClass(ACQ, **base)
    if all(c.op == "!=" for c in q.comparisons):
        return QueryClass(ACQ_NEQ, **base)
    atoms = [set(a.args) for a in q.atoms]
    placement, pending, candidates = {}, [], []
    for ci, c in enumerate(q.comparisons):
        inside = [i for i, a in enumerate(atoms) if c.left in a and c.right in a]
        if inside:
            placement[ci] = ("atom", inside[0])
            continue
        cands = []
        for u, v in forest.edges:
            if c.left in atoms[u] and c.right in atoms[v]:
                cands.append((u, v))
            elif c.left in atoms[v] and c.right in atoms[u]:
                cands.append((v, u))
        if not cands:
            return QueryClass(CMP_VIOLATION, witness=c, **base)
        pending.append(ci)
        candidates.append(cands)
    keyed = [[frozenset(e) for e in cands] for cands in candidates]
    chosen = _match(keyed)
    if chosen is None:
        return QueryClass(CMP_VIOLATION, witness=[q.comparisons[ci] for ci in pending], **base)
    for ci, cands, key in zip(pending, candidates, chosen):
        u, v = next(e for e in cands if frozenset(e) == key)
        placement[ci] = ("edge", u, v)
    return QueryClass(ACQ_CMP, placement=placement, **base)


# ---------------------------------------------------------------------------
# functional formulas


def functional_graph(phi: FuncFormula) -> tuple[tuple[str, ...], set[frozenset]]:
    """Vertices and edges of the formula graph: '=' atoms (conjunctive) or negative literals (clauses)."""
    edges = set()
    if phi.kind == "conjunctive":
        for a in phi.atoms:
            if isinstance(a, Atom) and a.op == "=" and len(a.vars) == 2:
                edges.add(a.vars)
    else:
        for clause in phi.clauses:
            edges |= phi.neq_graph_edges(clause)
    return phi.variables, edges


def graph_is_forest(vertices, edges) -> bool:
    return is_forest(vertices, [tuple(e) for e in edges])


@dataclass
class FuncClass:
    tag: str
    strict: bool
    witness: object = None

    @property
    def accepted(self) -> bool:
        return self.tag in (FACQ, FACQ_NEQ, FACQ_CMP)


def classify_functional(phi: FuncFormula) -> FuncClass:
    strict = len(phi.free) <= 1
    if phi.kind == "clauses":
        for clause in phi.clauses:
            if not graph_is_forest(phi.variables, phi.neq_graph_edges(clause)):
                return FuncClass(NOT_ACYCLIC, strict, clause)
        return FuncClass("FAFO", strict)
    verts, edges = functional_graph(phi)
    if not graph_is_forest(verts, edges):
        return FuncClass(NOT_ACYCLIC, strict)
    atoms = [a for a in phi.atoms if isinstance(a, Atom)]
    if any(a.op in ORDER_OPS for a in atoms):
        used = set()
        for a in atoms:
            if a.op == "=" or len(a.vars) < 2:
                continue
            if a.vars not in edges or a.vars in used:
                return FuncClass(CMP_VIOLATION, strict, a)
            used.add(a.vars)
        return FuncClass(FACQ_CMP, strict)
    if any(a.op == "!=" for a in atoms):
        return FuncClass(FACQ_NEQ, strict)
    return FuncClass(FACQ, strict)
