"""Command line: ``verify-algebra``, ``thresholds``, ``flow`` and ``report``.

Exit codes: 0 success, 1 verification or monitor failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .config import OUTPUT_ENV, load_config, parse_spec
from .errors import ConfigError, InvalidInputError, InvalidSpecError
from .flow import monitors, read_series_csv, run, write_series_csv
from .pinching import THRESHOLD_CASES, threshold_solve, threshold_table
from .suites import SUITES, run_suites
from .surface import diagnostics, write_surface_csv

__all__ = ["main", "EXIT_OK", "EXIT_FAIL", "EXIT_USAGE"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _table(rows, out):
    if not rows:
        return
    cols = list(rows[0])
    widths = [max(len(c), *(len(str(r[c])) for r in rows)) for c in cols]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)), file=out)
    for r in rows:
        print("  ".join(str(r[c]).ljust(w) for c, w in zip(cols, widths)), file=out)


def _csv(rows, out):
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _output_dir(arg, default):
    return Path(arg or os.environ.get(OUTPUT_ENV) or default)


def cmd_verify_algebra(args, out):
    if args.samples < 1:
        raise _UsageError("samples must be >= 1")
    corrupt = args.negative_control or []
    bad = [c for c in corrupt if c not in SUITES]
    if bad:
        raise _UsageError(f"unknown suite(s) for --negative-control: {', '.join(bad)}")
    results = run_suites(args.samples, args.seed, k=args.k, corrupt=corrupt)
    rows = [r.row() for r in results]
    _table(rows, out)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            _csv(rows, fh)
    failed = [r.name for r in results if not r.passed]
    print(f"violations in: {', '.join(failed)}" if failed else "all suites passed", file=out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_thresholds(args, out):
    lams = [Fraction(1, 2), Fraction(2, 3)]
    for s in args.yang or []:
        try:
            lam = Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise _UsageError(f"bad lambda {s!r}") from None
        if lam not in lams:
            lams.append(lam)
    try:
        rows = threshold_table(lams)
    except InvalidSpecError as exc:
        raise _UsageError(str(exc)) from None
    (_csv if args.csv else _table)(rows, out)
    reports = [threshold_solve(c) for c in THRESHOLD_CASES]
    ok = all(r.certified and r.margin >= 0 for r in reports)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_flow(args, out):
    try:
        rc = load_config(args.config)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None
    cfg = rc.flow
    outdir = _output_dir(args.output_dir, rc["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    result = run(cfg)
    ts = result.series
    if ts.rows:
        write_series_csv(outdir / f"{stem}_series.csv", ts)
    if result.status == "completed":
        write_surface_csv(outdir / f"{stem}_final_surface.csv", result.final, diagnostics(result.final, cfg.specs))
    reports = {}
    if ts.rows:
        for spec in cfg.specs:
            reports[spec.name] = monitors(ts, spec, cfg.k, delta=cfg.delta_mon, aux=rc["aux"],
                                          trusted=result.trusted)
    summary = {"config": str(args.config), "status": result.status, "message": result.message,
               "steps": result.steps, "trusted": result.trusted, "monitors": reports}
    (outdir / f"{stem}_monitors.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    if rc["plots"] and ts.rows:
        from .plots import plot_series

        first = next(iter(reports.values()))
        plot_series(ts, outdir, first, prefix=stem)

    print(f"status {result.status}, {result.steps} steps, trusted {result.trusted}", file=out)
    for name, rep in reports.items():
        line = " ".join(f"{m}={'pass' if rep[m]['passed'] else 'FAIL'}"
                        for m in ("a_pinching", "b_decay_3k", "b_decay_6k", "c_growth", "d_angle"))
        hyp = "in hypothesis" if rep["in_hypothesis"] else "outside theorem hypotheses"
        print(f"{name}: {hyp}; {line}; pinching margin {rep['a_pinching']['margin']:.3e}", file=out)
    if result.status != "completed" or not result.trusted:
        return EXIT_FAIL
    ok = all(rep["passed"] for rep in reports.values() if rep["in_hypothesis"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_report(args, out):
    try:
        ts = read_series_csv(args.series, k=args.k)
    except (OSError, InvalidInputError) as exc:
        raise _UsageError(f"cannot read series {args.series!r}: {exc}") from None
    series = Path(args.series)
    stem = series.stem[: -len("_series")] if series.stem.endswith("_series") else series.stem
    mon_path = Path(args.monitors) if args.monitors else series.with_name(f"{stem}_monitors.json")
    report = None
    if mon_path.exists():
        saved = json.loads(mon_path.read_text()).get("monitors", {})
        report = saved.get(ts.spec_names[0])
    if report is None:
        try:
            report = monitors(ts, parse_spec(ts.spec_names[0], args.k), args.k)
        except (ConfigError, InvalidSpecError) as exc:
            raise _UsageError(str(exc)) from None
    from .plots import ascii_summary, plot_series

    outdir = _output_dir(args.output_dir, series.parent)
    paths = plot_series(ts, outdir, report, prefix=stem)
    print(ascii_summary(ts), file=out)
    print(f"decay rate c = {report['b_decay_3k']['c']:.6g} (3k), {report['b_decay_6k']['c']:.6g} (6k); "
          f"C0 = {report['c_growth']['C0']:.6g}", file=out)
    for p in paths:
        print(p, file=out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="smcflab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    va = sub.add_parser("verify-algebra", help="randomized oracle suites")
    va.add_argument("--samples", type=int, default=100000)
    va.add_argument("--seed", type=int, default=0)
    va.add_argument("--k", type=float, default=1.0)
    va.add_argument("--negative-control", action="append", metavar="SUITE",
                    help="corrupt one constant in SUITE so it must fail (repeatable)")
    va.add_argument("--out", help="also write the table as CSV")
    va.set_defaults(func=cmd_verify_algebra)

    th = sub.add_parser("thresholds", help="solved pinching thresholds")
    th.add_argument("--csv", action="store_true")
    th.add_argument("--yang", action="append", metavar="LAMBDA", help="extra family member (repeatable)")
    th.set_defaults(func=cmd_thresholds)

    fl = sub.add_parser("flow", help="run a flow experiment")
    fl.add_argument("config", help="config file or built-in name")
    fl.add_argument("--output-dir")
    fl.set_defaults(func=cmd_flow)

    rp = sub.add_parser("report", help="plot a time series CSV")
    rp.add_argument("series")
    rp.add_argument("--monitors", help="monitor JSON written by 'flow' (default: next to the series)")
    rp.add_argument("--k", type=float, default=1.0)
    rp.add_argument("--output-dir")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except _UsageError as exc:
        buf = io.StringIO()
        parser.print_usage(buf)
        print(buf.getvalue().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
