"""Quantifier elimination steps.

Universal clauses (the complement of inequality queries) lose one leaf
variable per step through minimal samples; existential formulas with
comparisons lose one leaf per step through a sort/merge semijoin.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from ..model import Atom, FuncFormula, Literal, Member, Term
from ..samples import NodeCount, min_group_samples
from ..sorting import group_ids
from .clauses import Clause, clause_vars, simplify
from .structure import StepCounter, oriented, unary_mask


@dataclass
class LeafContext:
    """Everything a clause says about the leaf ``y`` being eliminated."""

    y: str
    parent: str | None
    neg: list  # (v on y, u on parent): the literal is ~(v(y) = u(parent))
    pos: list  # (g on y, f on w): the literal is g(y) = f(w)
    psi: frozenset
    restriction: np.ndarray  # elements where no one-variable literal of y holds
    stats: dict = field(default_factory=dict)

    @property
    def l(self) -> int:
        return len(self.neg)

    @property
    def k(self) -> int:
        return len(self.pos)


def _tree(edges: set, root: str, variables, order: dict) -> tuple[dict, dict]:
    """Parent and depth of every variable; components without the root hang below it virtually."""
    adj = defaultdict(set)
    for e in edges:
        a, b = tuple(e)
        adj[a].add(b)
        adj[b].add(a)
    parent, depth = {}, {}
    starts = [root] + sorted((v for v in variables if v != root), key=lambda v: order.get(v, 0))
    for s in starts:
        if s in depth:
            continue
        parent[s] = None
        depth[s] = 0 if s == root else 1
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in sorted(adj[u], key=lambda v: order.get(v, 0)):
                if w not in depth:
                    parent[w], depth[w] = u, depth[u] + 1
                    queue.append(w)
    return parent, depth


def pick_leaf(edges: set, root: str, variables, order: dict) -> tuple[str, str | None]:
    parent, depth = _tree(edges, root, variables, order)
    cands = [v for v in variables if v != root]
    y = max(cands, key=lambda v: (depth[v], order.get(v, 0)))
    return y, parent[y]


def clause_leaf_context(S, clause: Clause, root: str, order: dict, counter: StepCounter) -> LeafContext:
    variables = clause_vars(clause) | {root}
    edges = {lit.vars for lit in clause if not lit.positive and isinstance(lit.atom, Atom) and len(lit.vars) == 2}
    y, parent = pick_leaf(edges, root, variables, order)
    unary, neg, pos, psi = [], [], [], []
    for lit in clause:
        if y not in lit.vars:
            psi.append(lit)
        elif lit.vars == frozenset((y,)):
            unary.append(lit)
        elif lit.positive:
            g, _, f = oriented(lit.atom, y)
            pos.append((g, f))
        else:
            v, _, u = oriented(lit.atom, y)
            if u.var != parent:
                raise PreconditionError(f"clause is not acyclic around {y}")
            neg.append((v, u))
    restriction = unary_mask(S, unary, y, combine="or") if unary else np.zeros(S.n, dtype=bool)
    counter.add(S.n)
    return LeafContext(y, parent, sorted(set(neg)), sorted(set(pos)), frozenset(psi), ~restriction)


def _defined_all(S, terms, n) -> np.ndarray:
    ok = np.ones(n, dtype=bool)
    for t in terms:
        ok &= S.function(t.fn) >= 0
    return ok


def _stack(S, terms, elems) -> np.ndarray:
    if not terms:
        return np.zeros((len(elems), 0), dtype=np.int64)
    return np.stack([S.function(t.fn)[elems] for t in terms], axis=1)


def _classes(S, ctx: LeafContext, counter: StepCounter):
    """Elements of R grouped by v(y), and for each parent candidate the class it selects.

    Returns (Y, gY, P, gP, G): R-elements with v defined and their class ids,
    parent elements with u defined and their class ids (ids are shared, so a
    parent whose key no y realizes gets a class with no members).
    """
    vs = [v for v, _ in ctx.neg]
    us = [u for _, u in ctx.neg]
    Y = np.flatnonzero(ctx.restriction & _defined_all(S, vs, S.n))
    P = np.flatnonzero(_defined_all(S, us, S.n))
    keys = np.vstack([_stack(S, vs, Y), _stack(S, us, P)])
    ids, G = group_ids(keys, S.n)
    counter.add(S.n + 2 * (len(Y) + len(P)))
    return Y, ids[:len(Y)], P, ids[len(Y):], G


def eliminate_leaf_negonly(S, ctx: LeafContext, counter: StepCounter) -> list[Clause]:
    """Leaf without positive literals: the clause reduces to ``psi | ~D0(parent)``."""
    if ctx.k:
        raise PreconditionError("negonly elimination needs a leaf without positive literals")
    if ctx.parent is None:
        return [ctx.psi] if ctx.restriction.any() else []
    Y, gY, P, gP, G = _classes(S, ctx, counter)
    occupied = np.zeros(G, dtype=bool)
    occupied[gY] = True
    d0 = np.zeros(S.n, dtype=bool)
    d0[P[occupied[gP]]] = True
    ctx.stats["D0"] = int(d0.sum())
    name = S.add_predicate("D0", d0)
    return [ctx.psi | {Literal(Member(name, ctx.parent), False)}]


def _column_groups(ctx: LeafContext) -> list[list[int]]:
    """Indices of the positive literals, grouped by their function of the leaf."""
    groups: dict = {}
    for j, (g, _) in enumerate(ctx.pos):
        groups.setdefault(g.fn, []).append(j)
    return list(groups.values())


def _group_samples(gY: np.ndarray, rows: np.ndarray, caps: list[int], counter: StepCounter) -> dict:
    """Minimal grouped samples of every class; ``rows`` hold one value per group (-1 undefined)."""
    if len(gY) == 0:
        return {}
    uniq = np.unique(np.column_stack([gY, rows]), axis=0)
    counter.add(len(gY))
    out = {}
    if len(caps) == 1:
        # one function: the class's distinct values, if all defined and few enough
        gids, first = np.unique(uniq[:, 0], return_index=True)
        bounds = np.append(first, len(uniq))
        for g, lo, hi in zip(gids.tolist(), bounds[:-1].tolist(), bounds[1:].tolist()):
            vals = uniq[lo:hi, 1]
            out[g] = [(tuple(vals.tolist()),)] if vals[0] >= 0 and len(vals) <= caps[0] else []
        return out
    node = NodeCount()
    grouped = defaultdict(list)
    for row in uniq.tolist():
        grouped[row[0]].append(tuple(None if c < 0 else c for c in row[1:]))
    for g, class_rows in grouped.items():
        out[g] = sorted(min_group_samples(class_rows, caps, node))
    counter.add(node.nodes)
    return out


DISTRIBUTE_LIMIT = 256


def _minimal_sets(sets) -> list[frozenset]:
    kept: list[frozenset] = []
    for x in sorted(set(sets), key=lambda t: (len(t), sorted(map(repr, t)))):
        if not any(k <= x for k in kept):
            kept.append(x)
    return kept


def transversals(terms, cap: int | None = None) -> list[frozenset] | None:
    """Minimal sets meeting every term (the CNF of a DNF over shared items).

    Terms are processed one at a time, extending only the partial sets that
    miss the current term.  Returns None once more than ``cap`` partial sets
    are alive.
    """
    current = [frozenset()]
    for term in _minimal_sets(terms):
        nxt = set()
        for c in current:
            if c & term:
                nxt.add(c)
            else:
                nxt.update(c | {x} for x in term)
        current = _minimal_sets(nxt)
        if cap is not None and len(current) > cap:
            return None
    return current




def _unary_literal(S, mask: np.ndarray, var: str, cache: dict, prefix: str = "Eq") -> Literal:
    key = (prefix, var, mask.tobytes())
    if key not in cache:
        cache[key] = Literal(Member(S.add_predicate(prefix, mask), var), True)
    return cache[key]


def _dnf_to_cnf(S, terms: list[list[dict]], counter: StepCounter, cache: dict) -> list[frozenset]:
    """Clauses equivalent to ``OR_h AND_{item in term_h} OR_{w in item} P_item,w(w)``.

    An item maps variables to unary masks.  Small products are distributed
    directly.  Otherwise the variable in most items is split on: its elements
    are grouped by which items they satisfy, and each group contributes
    ``~Sig(w) | cnf(rest)``.
    """
    if any(not t for t in terms):
        return []
    if not terms:
        return [frozenset()]
    variables = sorted({w for t in terms for item in t for w in item})
    if len(variables) == 1:
        w = variables[0]
        mask = np.logical_or.reduce([np.logical_and.reduce([item[w] for item in t]) for t in terms])
        return [frozenset({_unary_literal(S, mask, w, cache)})]
    keys, item_of = [], {}
    for t in terms:
        key = set()
        for item in t:
            ik = frozenset((w, m.tobytes()) for w, m in item.items())
            item_of[ik] = item
            key.add(ik)
        keys.append(frozenset(key))
    choices = transversals(keys, DISTRIBUTE_LIMIT)
    if choices is not None:
        out = set()
        for choice in choices:
            merged: dict = {}
            for ik in choice:
                for w, m in item_of[ik].items():
                    merged[w] = merged[w] | m if w in merged else m
            out.add(frozenset(_unary_literal(S, m, w, cache) for w, m in merged.items()))
        return sorted(out, key=lambda c: sorted(map(str, c)))
    w0 = max(variables, key=lambda w: (sum(w in item for t in terms for item in t), w))
    cols = [(ti, ii) for ti, t in enumerate(terms) for ii, item in enumerate(t) if w0 in item]
    masks = np.stack([terms[ti][ii][w0] for ti, ii in cols], axis=1)
    sigs, inverse = np.unique(masks, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    counter.add(S.n * len(cols))
    out = []
    for sid, sig in enumerate(sigs):
        holds = {c for c, bit in zip(cols, sig) if bit}
        inner, true = [], False
        for ti, t in enumerate(terms):
            rest, dead = [], False
            for ii, item in enumerate(t):
                if w0 not in item:
                    rest.append(item)
                elif (ti, ii) not in holds:
                    reduced = {w: m for w, m in item.items() if w != w0}
                    if not reduced:
                        dead = True
                        break
                    rest.append(reduced)
            if dead:
                continue
            if not rest:
                true = True
                break
            inner.append(rest)
        if true:
            continue
        sub = _dnf_to_cnf(S, inner, counter, cache)
        if not sub:
            continue
        guard = Literal(Member(S.add_predicate("Sig", inverse == sid), w0), False)
        out.extend(c | {guard} for c in sub)
    return out


def eliminate_leaf(S, ctx: LeafContext, counter: StepCounter) -> list[Clause]:
    """Leaf with positive literals, eliminated through minimal grouped samples over each class."""
    if not ctx.k:
        raise PreconditionError("sample elimination needs at least one positive literal")
    columns = _column_groups(ctx)
    gs = [ctx.pos[cols[0]][0] for cols in columns]
    caps = [len(cols) for cols in columns]
    if ctx.parent is None:
        Y = np.flatnonzero(ctx.restriction)
        samples = _group_samples(np.zeros(len(Y), dtype=np.int64), _stack(S, gs, Y), caps, counter).get(0)
        if samples is None:  # empty restriction: the clause holds vacuously
            return []
        ctx.stats["samples"] = len(samples)
        terms = []
        for sample in samples:
            term = []
            for cols, vals in zip(columns, sample):
                for c in vals:
                    item: dict = {}
                    for j in cols:
                        f = ctx.pos[j][1]
                        hit = S.function(f.fn) == c
                        item[f.var] = item[f.var] | hit if f.var in item else hit
                    term.append(item)
            terms.append(term)
        counter.add(S.n * max(1, sum(len(t) for t in terms)))
        return [frozenset(ctx.psi | c) for c in _dnf_to_cnf(S, terms, counter, {})]

    Y, gY, P, gP, G = _classes(S, ctx, counter)
    per_class = _group_samples(gY, _stack(S, gs, Y), caps, counter)
    # classes grouped by shape: how many values each sample puts in each group
    shape_of_class = np.full(G, -1, dtype=np.int64)
    shapes: dict[tuple, int] = {}
    for g, samples in per_class.items():
        key = tuple(tuple(len(vals) for vals in s) for s in samples)
        shape_of_class[g] = shapes.setdefault(key, len(shapes))
    ctx.stats["shapes"] = len(shapes)
    ctx.stats["classes"] = len(per_class)
    p_shape = shape_of_class[gP]
    out = []
    for key, sid in shapes.items():
        members = p_shape == sid
        if not members.any():
            continue
        elems, cls = P[members], gP[members]
        present = np.unique(cls).tolist()
        cvals = {}
        for h, counts in enumerate(key):
            for i, count in enumerate(counts):
                for slot in range(count):
                    by_class = np.full(G, -1, dtype=np.int64)
                    for g in present:
                        by_class[g] = per_class[g][h][i][slot]
                    cvals[h, i, slot] = by_class[cls]
        counter.add(len(elems) * max(1, sum(sum(c) for c in key)))
        out.extend(_shape_clauses(S, ctx, columns, key, elems, cvals, counter))
    return out


def _pair_literal(S, ctx: LeafContext, items: list, elems: np.ndarray) -> Literal:
    """``AND_j f_j(w) = c_j(parent)`` (all f_j on one variable w) as a single equality."""
    p = ctx.parent
    if len(items) == 1:
        f, vals = items[0]
        values = np.full(S.n, -1, dtype=np.int64)
        values[elems] = vals
        return Literal(Atom(f, "=", Term(S.add_function("c", values), p)), True)
    w = items[0][0].var
    left = np.stack([S.function(f.fn) for f, _ in items], axis=1)
    right = np.stack([vals for _, vals in items], axis=1)
    ok = (left >= 0).all(axis=1)
    ids, _ = group_ids(np.vstack([left[ok], right]), S.n)
    lid, rid = ids[:int(ok.sum())], ids[int(ok.sum()):]
    used, dense = np.unique(rid, return_inverse=True)
    key_w = np.full(S.n, -1, dtype=np.int64)
    pos = np.searchsorted(used, lid)
    hit = (pos < len(used)) & (used[np.minimum(pos, len(used) - 1)] == lid)
    key_w[np.flatnonzero(ok)[hit]] = pos[hit]
    key_p = np.full(S.n, -1, dtype=np.int64)
    key_p[elems] = dense.ravel()
    kw = S.add_function(f"key[{w}]", key_w)
    kp = S.add_function("key", key_p)
    return Literal(Atom(Term(kw, w), "=", Term(kp, p)), True)


def _shape_clauses(S, ctx: LeafContext, columns: list, key: tuple, elems: np.ndarray, cvals: dict,
                   counter: StepCounter) -> list[Clause]:
    """Clauses for the parents of one shape.

    Sample h of a parent's class asks, for every value c it gives group i,
    that some f_j (j in group i) equals c.  Parts of that disjunction on the
    parent itself are evaluated on the spot; parents are grouped by which of
    those items they already satisfy, and the remaining two-variable items are
    distributed, with single-literal items on the same variable merged into
    one key equality.
    """
    p = ctx.parent
    items = []  # (h, parent mask, [(f, values)] on other variables)
    for h, counts in enumerate(key):
        for i, count in enumerate(counts):
            for slot in range(count):
                cv = cvals[h, i, slot]
                pm = np.zeros(len(elems), dtype=bool)
                rest = []
                for j in columns[i]:
                    f = ctx.pos[j][1]
                    if f.var == p:
                        pm |= S.function(f.fn)[elems] == cv
                    else:
                        rest.append((f, cv))
                items.append((h, pm, rest))
    counter.add(len(elems) * max(1, len(items)))
    if items:
        sigs, inverse = np.unique(np.stack([pm for _, pm, _ in items], axis=1), axis=0, return_inverse=True)
        inverse = inverse.ravel()
    else:
        sigs, inverse = np.zeros((1, 0), dtype=bool), np.zeros(len(elems), dtype=np.int64)
    cache: dict = {}

    def literal(group: tuple):
        if group not in cache:
            cache[group] = _pair_literal(S, ctx, [items[x][2][0] for x in group], elems)
        return cache[group]

    out = []
    for sid, sig in enumerate(sigs):
        pending = defaultdict(list)
        dead = set()
        for x, ((h, _, rest), bit) in enumerate(zip(items, sig)):
            if bit:
                continue
            if not rest:
                dead.add(h)
            pending[h].append(x)
        terms = [h for h in range(len(key)) if h not in dead]
        if any(h not in pending for h in terms):
            continue  # some sample is fully satisfied by the parent alone
        choices = []
        for h in terms:
            singles, options = defaultdict(list), []
            for x in pending[h]:
                rest = items[x][2]
                if len(rest) == 1:
                    singles[rest[0][0].var].append(x)
                else:
                    options.append(frozenset(Literal(Atom(f, "=", Term(S.add_function("c", _spread(S, elems, cv)), p)), True)
                                             for f, cv in rest))
            options += [frozenset({literal(tuple(xs))}) for _, xs in sorted(singles.items())]
            choices.append(options)
        group = elems[inverse == sid]
        mask = np.zeros(S.n, dtype=bool)
        mask[group] = True
        base = ctx.psi | {Literal(Member(S.add_predicate("Shape", mask), p), False)}
        out.extend(frozenset(base.union(*choice)) for choice in transversals(frozenset(c) for c in choices))
    return out


def _spread(S, elems: np.ndarray, vals: np.ndarray) -> np.ndarray:
    values = np.full(S.n, -1, dtype=np.int64)
    values[elems] = vals
    return values


def eliminate_clause_step(S, clause: Clause, root: str, order: dict, counter: StepCounter) -> tuple[list[Clause], LeafContext]:
    ctx = clause_leaf_context(S, clause, root, order, counter)
    if ctx.k:
        new = eliminate_leaf(S, ctx, counter)
    else:
        new = eliminate_leaf_negonly(S, ctx, counter)
    return simplify(new), ctx


def root_clause_mask(S, clause: Clause, root: str) -> np.ndarray:
    """Truth of a clause whose only variable is ``root``, for every element."""
    return unary_mask(S, list(clause), root, combine="or")


def clause_formula(root: str, clauses, bound) -> FuncFormula:
    return FuncFormula((root,), tuple(v for v in bound if v != root), clauses=tuple(clauses), kind="clauses")


def forall_mask(S, clauses, root: str, order: dict, counter: StepCounter, on_step=None) -> np.ndarray:
    """Elements x such that every clause holds for x and all values of its other variables."""
    result = np.ones(S.n, dtype=bool)
    work = list(simplify(clauses))
    while work:
        clause = work.pop()
        others = clause_vars(clause) - {root}
        if not others:
            result &= root_clause_mask(S, clause, root)
            counter.add(S.n)
            continue
        before = S.copy() if on_step else None
        new, ctx = eliminate_clause_step(S, clause, root, order, counter)
        if on_step:
            bound = sorted(others, key=lambda v: order.get(v, 0))
            on_step(before, clause_formula(root, [clause], bound), S.copy(),
                    clause_formula(root, new, bound), ctx)
        work.extend(new)
    return result


# ---------------------------------------------------------------------------
# existential elimination with one comparison per edge


def eliminate_comparison(S, B: np.ndarray, pairs, comparison, counter: StepCounter) -> np.ndarray:
    """``{p : exists z in B with u(p) = v(z) for all pairs and f(p) op g(z)}`` by one sort and one merge.

    ``pairs`` is a list of (u on p, v on z); ``comparison`` is None or
    (f on p, op, g on z).
    """
    us = [u for u, _ in pairs]
    vs = [v for _, v in pairs]
    Z = np.flatnonzero(B & _defined_all(S, vs, S.n))
    P = np.flatnonzero(_defined_all(S, us, S.n))
    keys = np.vstack([_stack(S, vs, Z), _stack(S, us, P)])
    ids, G = group_ids(keys, S.n)
    gZ, gP = ids[:len(Z)], ids[len(Z):]
    counter.add(S.n + 2 * (len(Z) + len(P)))
    out = np.zeros(S.n, dtype=bool)
    occupied = np.zeros(G, dtype=bool)
    occupied[gZ] = True
    if comparison is None:
        out[P[occupied[gP]]] = True
        return out
    f, op, g = comparison
    fp = S.function(f.fn)[P]
    gz = S.function(g.fn)[Z]
    has = occupied[gP]
    if op == "!=":
        # p qualifies unless every z of its class is defined with g(z) = f(p)
        undefined_g = np.zeros(G, dtype=bool)
        undefined_g[gZ[gz < 0]] = True
        defined = gz >= 0
        pairs_gv = np.unique(np.column_stack([gZ[defined], gz[defined]]), axis=0)
        distinct = np.bincount(pairs_gv[:, 0], minlength=G) if len(pairs_gv) else np.zeros(G, dtype=np.int64)
        single = np.full(G, -1, dtype=np.int64)
        if len(pairs_gv):
            single[pairs_gv[:, 0]] = pairs_gv[:, 1]
        c = gP
        ok = has & ((fp < 0) | undefined_g[c] | (distinct[c] >= 2) | (single[c] != fp))
        out[P[ok]] = True
        return out
    defined = gz >= 0
    if op in ("<", "<="):
        best = np.full(G, -1, dtype=np.int64)
        np.maximum.at(best, gZ[defined], gz[defined])
        cmp = np.less if op == "<" else np.less_equal
    else:
        best = np.full(G, np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(best, gZ[defined], gz[defined])
        cmp = np.greater if op == ">" else np.greater_equal
    reach = np.zeros(G, dtype=bool)
    reach[gZ[defined]] = True
    c = gP
    ok = reach[c] & (fp >= 0) & cmp(fp, best[c])
    out[P[ok]] = True
    counter.add(len(P) + len(Z))
    return out


def exists_mask(S, atoms, root: str, order: dict, counter: StepCounter, on_step=None) -> np.ndarray:
    """Elements x for which the conjunction holds for some values of the other variables."""
    atoms = list(dict.fromkeys(atoms))
    while True:
        variables = set()
        for a in atoms:
            variables |= a.vars
        others = variables - {root}
        if not others:
            break
        edges = {a.vars for a in atoms if isinstance(a, Atom) and a.op == "=" and len(a.vars) == 2}
        y, parent = pick_leaf(edges, root, variables, order)
        gamma, pairs, comps, rest = [], [], [], []
        for a in atoms:
            if y not in a.vars:
                rest.append(a)
            elif a.vars == frozenset((y,)):
                gamma.append(a)
            elif parent is None or parent not in a.vars:
                raise PreconditionError(f"atom {a} links {y} to a non-neighbour")
            elif a.op == "=":
                u, _, v = oriented(a, parent)
                pairs.append((u, v))
            else:
                f, op, g = oriented(a, parent)
                comps.append((f, op, g))
        if len(comps) > 1:
            raise PreconditionError(f"more than one comparison between {y} and {parent}")
        B = unary_mask(S, gamma, y)
        counter.add(S.n)
        before = S.copy() if on_step else None
        if parent is None:
            new_atoms = rest if B.any() else None
        else:
            d0 = eliminate_comparison(S, B, pairs, comps[0] if comps else None, counter)
            new_atoms = rest + [Member(S.add_predicate("D0", d0), parent)]
        if on_step:
            bound = sorted(others, key=lambda v: order.get(v, 0))
            after = new_atoms if new_atoms is not None else [Member(S.add_predicate("Empty", np.zeros(S.n, bool)), root)]
            on_step(before, FuncFormula((root,), tuple(bound), tuple(atoms)), S.copy(),
                    FuncFormula((root,), tuple(bound), tuple(after)), None)
        if new_atoms is None:
            return np.zeros(S.n, dtype=bool)
        atoms = new_atoms
    counter.add(S.n)
    return unary_mask(S, atoms, root) if atoms else np.ones(S.n, dtype=bool)
