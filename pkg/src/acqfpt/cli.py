"""Command-line driver: classify, translate, eval, enumerate, samples, solve, bench."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from pathlib import Path

from . import reductions as R
from .acyclic import classify
from .bench import doubling_ratios, run as bench_run
from .engine import StepCounter, check_query, enumerate_relational, eval_relational
from .errors import AcqError, BudgetExceeded, ClassificationError, IngestionError
from .frontend import load_database, parse_query
from .model import size
from .oracle import OracleBudget, oracle_eval_rel
from .samples import min_samples_rows, sort_samples
from .translate import translate_query, translate_query_projected, translate_structure

EXIT_OK, EXIT_NO, EXIT_USAGE, EXIT_INPUT, EXIT_REJECTED = 0, 1, 2, 3, 4
BLANK_GLYPH = "-"


def _read_query(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    return parse_query(text)


def _value_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


class Output:
    """Writes result rows as tab-separated values or JSON lines."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def row(self, values):
        if self.fmt == "jsonl":
            self.stream.write(json.dumps(list(values)) + "\n")
        else:
            self.stream.write("\t".join(str(v) for v in values) + "\n")

    def line(self, text: str):
        self.stream.write(text + "\n")


def _trace(args, message: str):
    if getattr(args, "trace", False):
        print(f"[trace] {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args) -> int:
    q = _read_query(args.query)
    cls = classify(q)
    print(cls.tag)
    if cls.forest is not None:
        edges = " ".join(f"{u}-{v}" for u, v in cls.forest.edges) or "(none)"
        print(f"forest: {edges}")
        print(f"strict: {'yes' if cls.strict else 'no'}" + (f" root: {cls.root}" if cls.strict else ""))
    if cls.witness is not None and not cls.accepted:
        print(f"witness: {cls.witness}")
    return EXIT_OK


def cmd_translate(args) -> int:
    q = _read_query(args.query)
    cls = check_query(load_database(args.db), q) if args.db else classify(q)
    if not cls.accepted:
        raise ClassificationError(cls.tag)
    if cls.strict:
        phi, proj = translate_query(q, cls)
        print(phi)
        if proj.pairs:
            print("project: " + ", ".join(str(t) for t in proj.terms()))
    else:
        phi = translate_query_projected(q, cls)
        print(phi)
    print(f"size: query {size(q)} formula {size(phi)}")
    if args.db:
        db = load_database(args.db)
        F = translate_structure(db)
        print(f"structure: elements {F.n} sorts {len(F.sorts)} functions {len(F.functions)} "
              f"size {size(F)} (database size {size(db)})")
    return EXIT_OK


def _eval_ids(args, db, q, counter):
    if args.engine == "oracle":
        return oracle_eval_rel(db, q, OracleBudget.from_env())
    return eval_relational(db, q, counter)


def cmd_eval(args) -> int:
    db = load_database(args.db)
    q = _read_query(args.query)
    cls = check_query(db, q)
    _trace(args, f"class {cls.tag}, strict {cls.strict}, engine {args.engine}")
    counter = StepCounter()
    result = _eval_ids(args, db, q, counter)
    _trace(args, f"steps {counter.steps}, results {len(result)}")
    out = Output(args.format)
    if not q.head:
        out.line("true" if result else "false")
        return EXIT_OK if result else EXIT_NO
    for ids in sorted(result):
        out.row(db.raw_tuple(ids))
    return EXIT_OK if result else EXIT_NO


def cmd_enumerate(args) -> int:
    db = load_database(args.db)
    q = _read_query(args.query)
    check_query(db, q)
    out = Output(args.format)
    counter = StepCounter()
    if args.engine == "oracle":
        stream = iter(sorted(oracle_eval_rel(db, q, OracleBudget.from_env())))
    else:
        stream = enumerate_relational(db, q, counter)
    first = next(stream, None)
    if first is None:
        if not q.head and args.limit != 0:
            out.line("false")
        return EXIT_NO
    if not q.head:
        if args.limit != 0:
            out.line("true")
        return EXIT_OK
    taken = itertools.islice(itertools.chain([first], stream), args.limit)
    if args.unsorted:
        for ids in taken:
            out.row(db.raw_tuple(ids))
    else:
        for ids in sorted(taken):
            out.row(db.raw_tuple(ids))
    _trace(args, f"steps {counter.steps}")
    return EXIT_OK


def _cell(raw: str):
    raw = raw.strip()
    if raw in ("", BLANK_GLYPH, "−"):
        return None
    try:
        return int(raw)
    except ValueError:
        return raw


def read_sample_table(path: str) -> list[tuple]:
    """CSV rows ``element,g_1(e),...,g_k(e)``; an empty cell or ``-`` means undefined."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    if rows and rows[0][0].strip().lower() in ("element", "e"):
        rows = rows[1:]
    if len({len(r) for r in rows}) > 1:
        raise IngestionError(f"{path}: rows have different lengths")
    return [tuple(_cell(c) for c in r[1:]) for r in rows]


def format_sample(sample) -> str:
    return "(" + ",".join(BLANK_GLYPH if c is None else str(c) for c in sample) + ")"


def cmd_samples(args) -> int:
    rows = read_sample_table(args.table)
    k = len(rows[0]) if rows else 0
    found = min_samples_rows(rows, k)
    try:
        ordered = sort_samples(found)
    except TypeError:
        ordered = sorted(found, key=lambda s: tuple((0, 0, "") if c is None else (1,) + _value_key(c)[1:] for c in s))
    for s in ordered:
        print(format_sample(s))
    return EXIT_OK if found else EXIT_NO


def _instance(args) -> R.Instance:
    files = args.files
    need = {R.ASI: 2, R.AISI: 2}.get(args.problem, 1)
    if len(files) != need:
        raise IngestionError(f"{args.problem} needs {need} input file(s), got {len(files)}")
    if args.problem in (R.ASI, R.AISI):
        H, G = R.read_graph(files[0]), R.read_graph(files[1])
        return R.asi(H, G) if args.problem == R.ASI else R.aisi(H, G, args.d)
    if args.problem == R.UHS:
        return R.uhs(R.read_sets(files[0]))
    if args.k is None:
        raise IngestionError(f"{args.problem} needs --k")
    if args.problem == R.MDM:
        return R.mdm(R.read_tuples(files[0]), args.k)
    sets = R.read_sets(files[0])
    return R.antichain(sets, args.k) if args.problem == R.ANTICHAIN else R.disjoint(sets, args.k)


def _format_witness(inst: R.Instance, w) -> list:
    if inst.problem in (R.ASI, R.AISI):
        return [f"{h}->{g}" for h, g in zip(inst.pattern.vertices, w)]
    if inst.problem == R.MDM:
        return ["(" + ",".join(map(str, t)) + ")" for t in w]
    if inst.problem == R.UHS:
        return [str(v) for v in w]
    return ["{" + ",".join(map(str, inst.sets[i])) + "}" for i in w]


def cmd_solve(args) -> int:
    inst = _instance(args)
    want = args.all or args.limit is not None
    sol = R.solve(inst, witnesses=want, limit=None if args.all and args.limit is None else (args.limit or 1))
    out = Output(args.format)
    out.line("yes" if sol.verdict else "no")
    for w in sol.witnesses:
        out.row(_format_witness(inst, w))
    return EXIT_OK if sol.verdict else EXIT_NO


def cmd_bench(args) -> int:
    q = _read_query(args.query)
    out = Output(args.format)
    rows = []
    if args.format == "tsv":
        out.line("tuples\tsize\tsteps\tseconds\tresults")
    for n in args.scale:
        row = bench_run(q, n, args.seed, enumerate_only=args.enumerate)
        rows.append(row)
        if args.format == "jsonl":
            out.line(json.dumps(row))
        else:
            out.row([row["tuples"], row["size"], row["steps"], f"{row['seconds']:.4f}", row["results"]])
    ratios = doubling_ratios(rows)
    if ratios:
        print("# step ratio per doubling: " + " ".join(f"{r:.3f}" for r in ratios), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _scales(text: str) -> list[int]:
    try:
        values = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scale list: {text!r}") from None
    if not values or min(values) <= 0:
        raise argparse.ArgumentTypeError("scales must be positive")
    return values


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    common.add_argument("--trace", action="store_true", help="report class and step counts on stderr")

    p = _Parser(prog="acqfpt", description="Evaluate acyclic conjunctive queries in linear time.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", parents=[common], help="report the query class and join forest")
    s.add_argument("query")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("translate", parents=[common], help="print the functional formula")
    s.add_argument("query")
    s.add_argument("--db", help="also translate this database directory")
    s.set_defaults(func=cmd_translate)

    for name, func, doc in (("eval", cmd_eval, "compute the full answer set"),
                            ("enumerate", cmd_enumerate, "stream answers one at a time")):
        s = sub.add_parser(name, parents=[common], help=doc)
        s.add_argument("--db", required=True, help="directory of CSV files, one per relation")
        s.add_argument("--query", required=True)
        s.add_argument("--engine", choices=("smart", "oracle"), default="smart")
        if name == "enumerate":
            s.add_argument("--limit", type=_nonneg, default=None)
            s.add_argument("--unsorted", action="store_true", help="keep enumeration order")
        s.set_defaults(func=func)

    s = sub.add_parser("samples", parents=[common], help="minimal samples of a function table")
    s.add_argument("table")
    s.set_defaults(func=cmd_samples)

    s = sub.add_parser("solve", parents=[common], help="solve a parameterized problem via its query encoding")
    s.add_argument("problem", choices=R.PROBLEMS)
    s.add_argument("files", nargs="+")
    s.add_argument("--k", type=_nonneg)
    s.add_argument("--d", type=_nonneg, help="degree bound for aisi (default: host max degree)")
    s.add_argument("--all", action="store_true", help="print every witness")
    s.add_argument("--limit", type=_nonneg, default=None, help="print at most this many witnesses")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bench", parents=[common], help="step counts on synthetic databases of growing size")
    s.add_argument("--query", required=True)
    s.add_argument("--scale", type=_scales, default=[100000, 200000, 400000])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--enumerate", action="store_true", help="time enumeration instead of eval")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ClassificationError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (IngestionError, BudgetExceeded, AcqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
