"""Query parser/printer and CSV relation loader."""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import IngestionError, QuerySyntaxError, SafetyError
from .model import COLUMN_TYPES, CompAtom, Database, RelAtom, RelQuery

_TOKEN = re.compile(r"\s*(?:(:-)|(!=|<=|>=|<|>)|([A-Za-z_][A-Za-z0-9_]*)|([(),]))")


@dataclass(frozen=True)
class Span:
    start: int
    end: int


@dataclass(frozen=True)
class QueryText:
    source: str
    query: RelQuery
    spans: tuple[Span, ...]  # one per body atom, relational atoms then comparisons


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _tokenize(text: str):
    pos, out = 0, []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            line, col = _line_col(text, pos)
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        start = m.start(m.lastindex)
        kind = {1: "TURNSTILE", 2: "OP", 3: "NAME", 4: m.group(4)}[m.lastindex]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("EOF", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        line, col = _line_col(self.text, tok[2])
        raise QuerySyntaxError(msg, line, col)

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            found = tok[1] or "end of input"
            self.fail(f"expected {kind}, found {found!r}")
        self.i += 1
        return tok

    def var_list(self, allow_empty):
        self.expect("(")
        names = []
        if self.peek()[0] == ")":
            if not allow_empty:
                self.fail("atom needs at least one variable")
        else:
            names.append(self.expect("NAME")[1])
            while self.peek()[0] == ",":
                self.i += 1
                names.append(self.expect("NAME")[1])
        self.expect(")")
        return tuple(names)

    def parse(self) -> QueryText:
        name = self.expect("NAME")[1]
        head = self.var_list(allow_empty=True)
        if len(set(head)) != len(head):
            self.fail("repeated head variable", self.toks[1])
        self.expect("TURNSTILE")
        atoms, comps, aspans, cspans = [], [], [], []
        while True:
            first = self.expect("NAME")
            if self.peek()[0] == "(":
                args = self.var_list(allow_empty=False)
                atoms.append(RelAtom(first[1], args))
                aspans.append(Span(first[2], self.toks[self.i - 1][2] + 1))
            elif self.peek()[0] == "OP":
                op = self.expect("OP")[1]
                right = self.expect("NAME")
                comps.append(CompAtom(first[1], op, right[1]))
                cspans.append(Span(first[2], right[2] + len(right[1])))
            else:
                self.fail("expected '(' or a comparison operator")
            if self.peek()[0] != ",":
                break
            self.i += 1
        self.expect("EOF")
        q = RelQuery(head, tuple(atoms), tuple(comps), name)
        return QueryText(self.text, q, tuple(aspans + cspans))


def parse_query_text(text: str) -> QueryText:
    qt = _Parser(text).parse()
    q = qt.query
    covered = {v for a in q.atoms for v in a.args}
    missing = [v for v in q.head if v not in covered]
    if missing:
        raise SafetyError(f"head variables {missing} do not occur in the body")
    q.check_safe()
    return qt


def parse_query(text: str) -> RelQuery:
    """Parse ``name(y1,..) :- R(x,..), ..., x op y`` into a RelQuery."""
    return parse_query_text(text).query


def format_query(q: RelQuery) -> str:
    return str(q)


# ---------------------------------------------------------------------------
# relation loading


def _read_rows(path: Path, arity: int | None, name: str) -> list[tuple]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [tuple(c.strip() for c in row) for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    for r in rows:
        if arity is not None and len(r) != arity:
            raise IngestionError(f"relation {name}: row {r} has {len(r)} columns, expected {arity}")
    return rows


def load_database(source: str | Path, report: dict | None = None) -> Database:
    """Load relations from a directory of ``NAME.csv`` files or a manifest CSV.

    The manifest has one row ``name,file,arity,types`` per relation, ``types``
    being space-separated ``numeric``/``text`` tokens (optional; inferred when
    empty). Files referenced by a manifest are resolved relative to it.
    """
    source = Path(source)
    rows, types = {}, {}
    if source.is_dir():
        for path in sorted(source.glob("*.csv")):
            rows[path.stem] = _read_rows(path, None, path.stem)
            if not rows[path.stem]:
                raise IngestionError(f"relation {path.stem}: empty file needs a manifest to declare its arity")
    elif source.is_file():
        try:
            with open(source, newline="", encoding="utf-8") as fh:
                entries = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        except OSError as exc:
            raise IngestionError(f"cannot read manifest {source}: {exc}") from None
        if entries and entries[0][0].strip() == "name":
            entries = entries[1:]
        for entry in entries:
            if len(entry) < 3:
                raise IngestionError(f"manifest row {entry} needs name,file,arity[,types]")
            name, file, arity = entry[0].strip(), entry[1].strip(), entry[2].strip()
            if name in rows:
                raise IngestionError(f"relation {name} declared twice")
            try:
                arity = int(arity)
            except ValueError:
                raise IngestionError(f"relation {name}: bad arity {arity!r}") from None
            ctypes = entry[3].split() if len(entry) > 3 and entry[3].strip() else None
            if ctypes is not None:
                if len(ctypes) != arity or any(c not in COLUMN_TYPES for c in ctypes):
                    raise IngestionError(f"relation {name}: types {ctypes} do not match arity {arity}")
            rows[name] = _read_rows(source.parent / file, arity, name)
            if ctypes is None and not rows[name]:
                ctypes = ["numeric"] * arity
            if ctypes is not None:
                types[name] = ctypes
    else:
        raise IngestionError(f"no such file or directory: {source}")
    db = Database.from_rows(rows, types)
    if report is not None:
        report.update({name: rel.card for name, rel in db.relations.items()})
    return db
