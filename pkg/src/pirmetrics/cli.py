"""Command-line entry point.

Subcommands: ``metrics``, ``pir``, ``sweep`` and ``simulate``.
Exit status is 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from collections.abc import Sequence

from . import __version__
from .data_io import (
    CSV,
    JSON,
    SCALES,
    SCHOOL6,
    atomic_write,
    load_bundle,
    parse_judgments,
    parse_runs,
    read_text,
    save_bundle,
    write_best_table,
    write_report,
)
from .errors import DataError, IdealGainZero, PirMetricsError
from .metrics_core import MetricKind, metric_eval
from .preference_eval import SweepGrid, cell_deltas, pir, pir_profile
from .study_sim import SimConfig, generate_study

log = logging.getLogger("pirmetrics")

DEFAULT_METRICS = "precision,ap,ndcg"
DEFAULT_CUTOFFS = "1-10"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


def parse_cutoffs(text: str) -> list[int]:
    """``"1-10"``, ``"1,3,5"`` or a mix such as ``"1-3,8"``."""
    cutoffs: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise ValueError(f"empty item in cutoff list {text!r}")
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            if lo > hi:
                raise ValueError(f"cutoff range {part!r} is descending")
            cutoffs.extend(range(lo, hi + 1))
        else:
            cutoffs.append(int(part))
    if any(k < 1 for k in cutoffs):
        raise ValueError(f"cutoffs must be >= 1: {text!r}")
    return sorted(set(cutoffs))


def parse_metrics(text: str, log_base: float) -> list[MetricKind]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    if not names:
        raise ValueError("no metrics given")
    kinds = []
    for name in names:
        kind = MetricKind(name, log_base if name.lower() in ("dcg", "ndcg") else None)
        if kind not in kinds:
            kinds.append(kind)
    return kinds


def _add_inputs(p: argparse.ArgumentParser, prefs: bool) -> None:
    p.add_argument("--judgments", required=True, help="TSV: query_id, doc_id, grade")
    p.add_argument("--runs", required=True, help="TSV: query_id, list_id, rank, doc_id")
    if prefs:
        p.add_argument("--prefs", required=True, help="TSV: query_id, FIRST|SECOND|TIE")
        p.add_argument("--first-list", default=None,
                       help="list_id treated as the first list of each pair (default: first seen)")
    p.add_argument("--scale", choices=SCALES, default=SCHOOL6,
                   help="grade scale of the judgments file (default: school6)")
    p.add_argument("--default-grade", type=float, default=0.0,
                   help="grade for unjudged documents (default: 0)")
    p.add_argument("--log-base", type=float, default=2.0, help="DCG/nDCG log base, >= 2 (default: 2)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=(CSV, JSON), default=None,
                   help="report format (default: from --out suffix, else csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pirmetrics", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="metric values for every ranked list")
    _add_inputs(p, prefs=False)
    p.add_argument("--metrics", default=DEFAULT_METRICS)
    p.add_argument("--cutoffs", default=DEFAULT_CUTOFFS)
    _add_output(p)

    p = sub.add_parser("pir", help="PIR of one metric at one cutoff and threshold")
    _add_inputs(p, prefs=True)
    p.add_argument("--metric", default="ndcg")
    p.add_argument("--cutoff", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--ties-in-denominator", action="store_true",
                   help="count TIE queries in the PIR denominator")
    p.add_argument("--out", default=None)

    p = sub.add_parser("sweep", help="PIR for every metric, cutoff and threshold")
    _add_inputs(p, prefs=True)
    p.add_argument("--metrics", default=DEFAULT_METRICS)
    p.add_argument("--cutoffs", default=DEFAULT_CUTOFFS)
    p.add_argument("--threshold-step", type=float, default=0.01)
    p.add_argument("--threshold-max", type=float, default=None,
                   help="largest threshold (default: 1 for unit-range metrics, max |delta| for cg/dcg)")
    p.add_argument("--ties-in-denominator", action="store_true")
    p.add_argument("--best-out", default=None, help="also write the best-threshold table as CSV")
    _add_output(p)

    p = sub.add_parser("simulate", help="write a synthetic study as three TSV files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--docs", type=int, default=50)
    p.add_argument("--grade-noise", type=float, default=0.0)
    p.add_argument("--persistence-depth", type=int, default=10)
    p.add_argument("--tie-margin", type=float, default=0.0)
    p.add_argument("--utility", default="ndcg", help="metric behind the simulated preference")
    p.add_argument("--log-base", type=float, default=2.0)
    p.add_argument("--engine-noise", type=float, default=0.5)
    p.add_argument("--scale", choices=SCALES, default=SCHOOL6, help="grade scale to write")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _report_format(args) -> str:
    if args.format:
        return args.format
    if args.out and args.out.lower().endswith(".json"):
        return JSON
    return CSV


def _meta(args, skip: Sequence[str] = ()) -> dict[str, object]:
    meta: dict[str, object] = {"tool": f"pirmetrics {__version__}"}
    for key, value in sorted(vars(args).items()):
        if key in skip or key == "verbose":
            continue
        meta[key] = value
    return meta


def cmd_metrics(args) -> int:
    kinds = parse_metrics(args.metrics, args.log_base)
    cutoffs = parse_cutoffs(args.cutoffs)
    judgments = parse_judgments(io.StringIO(read_text(args.judgments)), args.scale,
                                args.default_grade, source=args.judgments)
    lists = parse_runs(io.StringIO(read_text(args.runs)), source=args.runs)
    pools: dict[str, set[str]] = {}
    for ranked in lists:
        pools.setdefault(ranked.query_id, set()).update(ranked.docs)

    rows = []
    for ranked in lists:
        pool = pools[ranked.query_id]
        for kind in kinds:
            for k in cutoffs:
                try:
                    value: float | None = metric_eval(kind, ranked, judgments, k, pool)
                except IdealGainZero:
                    value = None
                rows.append((ranked.query_id, ranked.list_id, kind.label, k, value))

    if _report_format(args) == JSON:
        doc = {
            "meta": _meta(args, skip=("out", "format")),
            "values": [
                {"query_id": q, "list_id": l, "metric": m, "cutoff": k, "value": v}
                for q, l, m, k, v in rows
            ],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["query_id", "list_id", "metric", "cutoff", "value"])
        for q, l, m, k, v in rows:
            writer.writerow([q, l, m, k, "NA" if v is None else f"{v:.6f}"])
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def _load(args):
    return load_bundle(args.judgments, args.runs, args.prefs, args.scale,
                       args.default_grade, args.first_list)


def cmd_pir(args) -> int:
    kind = MetricKind(args.metric, args.log_base if args.metric.lower() in ("dcg", "ndcg") else None)
    if args.cutoff < 1:
        raise UsageError("--cutoff must be >= 1")
    if args.threshold < 0:
        raise UsageError("--threshold must be >= 0")
    bundle = _load(args)
    cell = cell_deltas(bundle.pairs, bundle.judgments, kind, args.cutoff)
    dropped = set(cell.dropped)
    pair_queries = {p.query_id for p in bundle.pairs}
    prefs = {q: v for q, v in bundle.prefs.items() if q in pair_queries and q not in dropped}
    value = pir(cell.deltas, prefs, args.threshold, args.ties_in_denominator)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "cutoff", "threshold", "pir", "dropped_queries"])
    writer.writerow([kind.label, args.cutoff, f"{args.threshold:.6f}", f"{value:.6f}", len(dropped)])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_sweep(args) -> int:
    kinds = parse_metrics(args.metrics, args.log_base)
    cutoffs = parse_cutoffs(args.cutoffs)
    grid = SweepGrid(kinds, cutoffs, args.threshold_step, args.threshold_max)
    bundle = _load(args)
    result = pir_profile(bundle.pairs, bundle.judgments, bundle.prefs, grid,
                         args.ties_in_denominator)
    for (kind, k), message in sorted(result.errors.items(), key=lambda i: (i[0][0].label, i[0][1])):
        log.warning("%s@%d skipped: %s", kind.label, k, message)
    meta = _meta(args, skip=("out", "best_out", "format"))
    _emit(write_report(result, _report_format(args), meta), args.out)
    best = write_best_table(result)
    if args.best_out:
        atomic_write(args.best_out, best)
    elif args.out is not None:
        sys.stdout.write(best)
    return 0


def cmd_simulate(args) -> int:
    config = SimConfig(
        seed=args.seed,
        num_queries=args.queries,
        docs_per_query=args.docs,
        grade_noise=args.grade_noise,
        persistence_depth=args.persistence_depth,
        tie_margin=args.tie_margin,
        utility=args.utility,
        log_base=args.log_base,
        engine_noise=args.engine_noise,
    )
    bundle, _ = generate_study(config)
    meta = {"tool": f"pirmetrics {__version__}", **config.as_meta()}
    paths = save_bundle(bundle, args.out, args.scale, meta)
    for path in paths.values():
        print(path)
    return 0


COMMANDS = {"metrics": cmd_metrics, "pir": cmd_pir, "sweep": cmd_sweep, "simulate": cmd_simulate}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pirmetrics {args.command}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        if isinstance(exc, DataError):
            print(f"pirmetrics {args.command}: error: {exc}", file=sys.stderr)
            return 2
        # bad flag values caught by the domain types
        print(f"pirmetrics {args.command}: {exc}", file=sys.stderr)
        return 1
    except (PirMetricsError, KeyError) as exc:
        print(f"pirmetrics {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pirmetrics {args.command}: error: {exc.filename or ''}: {exc.strerror or exc}",
              file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
