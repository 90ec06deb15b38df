"""Command-line front end.

Subcommands: ``table``, ``identities``, ``expand``, ``catalan``,
``evaluate``, ``scan`` and ``search``.  Reports go to stdout as JSON and,
with ``--out``, to a file (relative paths land in ``$HYPERBELL_OUT_DIR``
when it is set).  ``--csv`` adds a flat ``grouping,convention,lhs,rhs,ratio``
table.

Exit status: 0 on success, 1 when ``search --require-violation`` finds no
violation, 2 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import os
import sys
from pathlib import Path

from . import __version__
from .bell import SCAN_TOL, SearchConfig, evaluate, separable_scan, violation_search
from .errors import DomainError
from .forms import build_forms, catalan, enumerate_groupings, parse_grouping
from .hypercomplex import CONVENTIONS, composition_defect, get_table, identity_defect
from .problem import canonical_json, file_sha256, load_problem

OUT_DIR_ENV = "HYPERBELL_OUT_DIR"
TOOLKIT = "hyperbell"


class InputError(Exception):
    pass


def _version_text() -> str:
    lines = [f"{TOOLKIT} {__version__}"]
    for name, table in CONVENTIONS.items():
        lines.append(f"  {name:<10} dim={table.dim} sha256:{table.checksum()}")
    return "\n".join(lines)


class _VersionAction(argparse.Action):
    def __init__(self, option_strings, dest, **kwargs):
        super().__init__(option_strings, dest, nargs=0, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        print(_version_text())
        parser.exit()


def _out_path(arg: str) -> Path:
    path = Path(arg)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit(args, command: str, inputs: dict, result: dict, rows=None) -> None:
    report = {
        "toolkit": TOOLKIT,
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "result": result,
        "generated_at": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
    }
    text = canonical_json(report)
    sys.stdout.write(text)
    if getattr(args, "out", None):
        _out_path(args.out).write_text(text)
    if getattr(args, "csv", None) and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["grouping", "convention", "lhs", "rhs", "ratio"])
        for r in rows:
            writer.writerow([r["grouping"], r["convention"]] + ["" if r[k] is None else repr(r[k]) for k in ("lhs", "rhs", "ratio")])
        _out_path(args.csv).write_text(buf.getvalue())


def _table_for(args, fallback_dim):
    dim = args.algebra
    if dim is None:
        dim = CONVENTIONS[args.convention].dim if args.convention else fallback_dim
    return get_table(dim, args.convention)


def cmd_table(args) -> int:
    if args.convention is None and args.algebra is None:
        tables = list(CONVENTIONS.values())
    else:
        tables = [_table_for(args, None)]
    for t in tables:
        print(f"# {t.name} dim={t.dim}")
        sys.stdout.write(t.to_text())
    return 0


def cmd_identities(args) -> int:
    table = _table_for(args, 8)
    square = identity_defect(table, args.trials, args.seed)
    comp = composition_defect(table, args.trials, args.seed)
    print(f"convention={table.name} dim={table.dim} trials={args.trials} seed={args.seed}")
    print(f"max relative deviation (square identity): {square:.3e}")
    print(f"max relative deviation (|xy| = |x||y|):   {comp:.3e}")
    return 0


def cmd_expand(args) -> int:
    table = _table_for(args, 4)
    grouping = parse_grouping(args.grouping, args.n) if args.grouping else None
    text = build_forms(table, args.n, grouping).to_text()
    sys.stdout.write(text)
    if args.out:
        _out_path(args.out).write_text(text)
    return 0


def cmd_catalan(args) -> int:
    if args.n < 1:
        raise InputError("--n must be at least 1")
    print(catalan(args.n))
    for g in enumerate_groupings(args.n):
        print(g)
    return 0


def _groupings(args, problem):
    if args.grouping == "all":
        return enumerate_groupings(len(problem.sites))
    if args.grouping:
        return [parse_grouping(args.grouping, len(problem.sites))]
    return [parse_grouping(problem.grouping, len(problem.sites))]


def cmd_evaluate(args) -> int:
    problem = load_problem(args.problem)
    state = problem.quantum_state()
    reports = [evaluate(problem.instance(g), state, args.tol).to_dict() for g in _groupings(args, problem)]
    inputs = {"problem_sha256": file_sha256(args.problem), "tol": args.tol}
    _emit(args, "evaluate", inputs, {"reports": reports}, rows=reports)
    return 0


def cmd_scan(args) -> int:
    problem = load_problem(args.problem)
    scans, rows = [], []
    for g in _groupings(args, problem):
        rep = separable_scan(problem.instance(g), args.samples, args.rank, args.seed, args.tol, args.workers)
        scans.append({"grouping": str(g), "convention": problem.convention, **rep.to_dict()})
        rows.append({"grouping": str(g), "convention": problem.convention, "lhs": None, "rhs": None, "ratio": rep.max_ratio})
    inputs = {
        "problem_sha256": file_sha256(args.problem),
        "samples": args.samples,
        "rank": args.rank,
        "tol": args.tol,
        "seed": args.seed,
    }
    _emit(args, "scan", inputs, {"scans": scans}, rows=rows)
    return 0


def cmd_search(args) -> int:
    if args.problem:
        problem = load_problem(args.problem)
        site_dims, K, convention = problem.site_dims, problem.algebra, problem.convention
        grouping_text = args.grouping or problem.grouping
    else:
        if not args.sites:
            raise InputError("search needs --sites (e.g. 2,2,2) or --problem")
        site_dims = tuple(int(d) for d in args.sites.split(","))
        convention = args.convention
        K = args.algebra or (CONVENTIONS[convention].dim if convention else 2)
        grouping_text = args.grouping
    grouping = parse_grouping(grouping_text, len(site_dims)) if grouping_text else None
    config = SearchConfig(
        restarts=args.restarts,
        iterations=args.iters,
        step_start=args.step_start,
        step_end=args.step_end,
        seed=args.seed,
        refine=args.refine,
    )
    report = violation_search(site_dims, K, grouping, convention, config)
    inputs = {"site_dims": list(site_dims), "algebra": K, "convention": report.best.convention, "grouping": report.best.grouping}
    if args.problem:
        inputs["problem_sha256"] = file_sha256(args.problem)
    _emit(args, "search", inputs, report.to_dict(), rows=[report.best.to_dict()])
    if args.require_violation and not report.violated:
        print(f"no violation found (best ratio {report.best_ratio:.9f})", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOLKIT, description="Hypercomplex Bell-type inequalities")
    parser.add_argument("--version", action=_VersionAction, help="print version and table checksums")
    sub = parser.add_subparsers(dest="command", required=True)

    def algebra_flags(p):
        p.add_argument("--algebra", "--dim", dest="algebra", type=int, choices=[1, 2, 4, 8])
        p.add_argument("--convention", choices=sorted(CONVENTIONS))

    p = sub.add_parser("table", help="print structure tables")
    algebra_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("identities", help="fuzz the square identity and the composition property")
    algebra_flags(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("expand", help="dump the coefficient tensor and forms of a grouped product")
    algebra_flags(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--grouping")
    p.add_argument("--out")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("catalan", help="count and list groupings")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_catalan)

    def report_flags(p):
        p.add_argument("--grouping", help="grouping string, or 'all'")
        p.add_argument("--tol", type=float, default=SCAN_TOL)
        p.add_argument("--out")
        p.add_argument("--csv")

    p = sub.add_parser("evaluate", help="evaluate the inequality on the problem's state")
    p.add_argument("--problem", required=True)
    report_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scan", help="evaluate on random separable states")
    p.add_argument("--problem", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    report_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("search", help="search for a violating state and observables")
    algebra_flags(p)
    p.add_argument("--problem", help="take site dims, algebra, convention and grouping from a problem file")
    p.add_argument("--sites", help="comma-separated site dimensions, e.g. 2,2,2")
    p.add_argument("--grouping")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--step-start", type=float, default=SearchConfig.step_start)
    p.add_argument("--step-end", type=float, default=SearchConfig.step_end)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--require-violation", action="store_true")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
