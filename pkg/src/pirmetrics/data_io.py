"""Readers and writers for the study files and sweep reports.

Input files are UTF-8, LF-terminated, TAB-separated; blank lines and lines
starting with ``#`` are ignored.

judgments   ``query_id  doc_id  grade``
runs        ``query_id  list_id  rank  doc_id``
preferences ``query_id  verdict``  (FIRST, SECOND or TIE)
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .errors import (
    DataError,
    DuplicateDoc,
    DuplicateJudgment,
    DuplicatePreference,
    DuplicateRank,
    OutOfScale,
    ParseError,
    RankGap,
)
from .metrics_core import JudgmentSet, RankedList
from .preference_eval import ListPair, SweepResult, Verdict

SCHOOL6 = "school6"
UNIT = "unit"
SCALES = (SCHOOL6, UNIT)

JUDGMENTS_FILE = "judgments.tsv"
RUNS_FILE = "runs.tsv"
PREFS_FILE = "prefs.tsv"


def convert_school_grade(g: int) -> float:
    """Map the 1 (best) .. 6 (worst) school scale onto 1.0 .. 0.0 in 0.2 steps."""
    if isinstance(g, bool) or not isinstance(g, (int, float)):
        raise OutOfScale(f"school grade must be an integer 1..6, got {g!r}")
    if isinstance(g, float) and not g.is_integer():
        raise OutOfScale(f"school grade must be an integer 1..6, got {g!r}")
    g = int(g)
    if not 1 <= g <= 6:
        raise OutOfScale(f"school grade must be an integer 1..6, got {g!r}")
    return (6 - g) / 5


def to_school_grade(grade: float) -> int:
    """Inverse of :func:`convert_school_grade`; only lattice values are accepted."""
    g = 6 - round(grade * 5)
    if not 1 <= g <= 6 or convert_school_grade(g) != grade:
        raise OutOfScale(f"grade {grade!r} is not on the 0.2 school-grade lattice")
    return g


def _records(stream: Iterable[str], width: int, source: str | None):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != width or any(not f for f in fields):
            raise ParseError(
                f"expected {width} non-empty TAB-separated fields, got {len(fields)}",
                line=lineno,
                source=source,
            )
        yield lineno, fields


def _source_of(stream) -> str | None:
    name = getattr(stream, "name", None)
    return name if isinstance(name, str) else None


def parse_judgments(
    stream: Iterable[str],
    scale: str = SCHOOL6,
    default_grade: float = 0.0,
    source: str | None = None,
) -> JudgmentSet:
    if scale not in SCALES:
        raise ValueError(f"unknown grade scale {scale!r}")
    source = source or _source_of(stream)
    grades: dict[tuple[str, str], float] = {}
    for lineno, (query_id, doc_id, raw) in _records(stream, 3, source):
        try:
            if scale == SCHOOL6:
                try:
                    value = int(raw)
                except ValueError:
                    raise OutOfScale(f"school grade must be an integer 1..6, got {raw!r}") from None
                grade = convert_school_grade(value)
            else:
                try:
                    grade = float(raw)
                except ValueError:
                    raise ParseError(f"grade {raw!r} is not a number") from None
                if not 0.0 <= grade <= 1.0:
                    raise OutOfScale(f"unit grade must lie in [0, 1], got {raw!r}")
        except DataError as exc:
            raise exc.located(line=lineno, source=source) from None
        key = (query_id, doc_id)
        if key in grades and grades[key] != grade:
            raise DuplicateJudgment(
                f"conflicting grades for {query_id}/{doc_id}: {grades[key]} vs {grade}",
                line=lineno,
                source=source,
            )
        grades[key] = grade
    return JudgmentSet(grades, default_grade=default_grade)


def parse_runs(stream: Iterable[str], source: str | None = None) -> list[RankedList]:
    """One list per (query_id, list_id), in order of first appearance."""
    source = source or _source_of(stream)
    entries: dict[tuple[str, str], dict[int, tuple[str, int]]] = {}
    for lineno, (query_id, list_id, raw_rank, doc_id) in _records(stream, 4, source):
        try:
            rank = int(raw_rank)
        except ValueError:
            raise ParseError(f"rank {raw_rank!r} is not an integer", line=lineno, source=source) from None
        if rank < 1:
            raise ParseError(f"rank must be >= 1, got {rank}", line=lineno, source=source)
        ranks = entries.setdefault((query_id, list_id), {})
        if rank in ranks:
            raise DuplicateRank(
                f"rank {rank} given twice for list {query_id}/{list_id}", line=lineno, source=source
            )
        for other_doc, other_line in ranks.values():
            if other_doc == doc_id:
                raise DuplicateDoc(
                    f"document {doc_id!r} already listed at line {other_line} of list {query_id}/{list_id}",
                    line=lineno,
                    source=source,
                )
        ranks[rank] = (doc_id, lineno)

    lists = []
    for (query_id, list_id), ranks in entries.items():
        expected = 1
        for rank in sorted(ranks):
            if rank != expected:
                raise RankGap(
                    f"list {query_id}/{list_id} jumps from rank {expected - 1} to {rank}",
                    line=ranks[rank][1],
                    source=source,
                )
            expected += 1
        docs = tuple(ranks[r][0] for r in sorted(ranks))
        lists.append(RankedList(query_id, list_id, docs))
    return lists


def parse_preferences(stream: Iterable[str], source: str | None = None) -> dict[str, Verdict]:
    source = source or _source_of(stream)
    prefs: dict[str, Verdict] = {}
    for lineno, (query_id, raw) in _records(stream, 2, source):
        try:
            verdict = Verdict(raw.strip().upper())
        except ValueError:
            raise ParseError(
                f"verdict must be FIRST, SECOND or TIE, got {raw!r}", line=lineno, source=source
            ) from None
        if query_id in prefs:
            raise DuplicatePreference(
                f"second preference for query {query_id!r}", line=lineno, source=source
            )
        prefs[query_id] = verdict
    return prefs


def _header(meta: Mapping[str, object] | None) -> str:
    if not meta:
        return ""
    return "".join(f"# {key}: {value}\n" for key, value in meta.items())


def write_judgments(
    judgments: JudgmentSet, scale: str = UNIT, meta: Mapping[str, object] | None = None
) -> str:
    """Serialize judgments sorted by (query, doc). UNIT grades use ``repr`` so they parse back exactly."""
    out = [_header(meta)]
    for (query_id, doc_id), grade in sorted(judgments.items()):
        value = str(to_school_grade(grade)) if scale == SCHOOL6 else repr(grade)
        out.append(f"{query_id}\t{doc_id}\t{value}\n")
    return "".join(out)


def write_runs(lists: Iterable[RankedList], meta: Mapping[str, object] | None = None) -> str:
    out = [_header(meta)]
    for ranked in lists:
        for rank, doc in enumerate(ranked.docs, start=1):
            out.append(f"{ranked.query_id}\t{ranked.list_id}\t{rank}\t{doc}\n")
    return "".join(out)


def write_preferences(prefs: Mapping[str, Verdict], meta: Mapping[str, object] | None = None) -> str:
    out = [_header(meta)]
    for query_id, verdict in prefs.items():
        out.append(f"{query_id}\t{verdict.value}\n")
    return "".join(out)


@dataclass
class StudyBundle:
    judgments: JudgmentSet
    pairs: list[ListPair]
    prefs: dict[str, Verdict]

    @property
    def lists(self) -> list[RankedList]:
        return [ranked for pair in self.pairs for ranked in (pair.first, pair.second)]


def pair_lists(lists: Sequence[RankedList], first_list_id: str | None = None) -> list[ListPair]:
    """Group lists by query into pairs.

    Each query must have exactly two lists. ``first_list_id`` picks which one
    is "first"; otherwise the one appearing first in ``lists`` is.
    """
    by_query: dict[str, list[RankedList]] = {}
    for ranked in lists:
        by_query.setdefault(ranked.query_id, []).append(ranked)
    pairs = []
    for query_id, group in by_query.items():
        if len(group) != 2:
            raise DataError(f"query {query_id!r} has {len(group)} result lists; pairs need exactly 2")
        a, b = group
        if first_list_id is not None:
            if b.list_id == first_list_id:
                a, b = b, a
            elif a.list_id != first_list_id:
                raise DataError(f"query {query_id!r} has no list named {first_list_id!r}")
        pairs.append(ListPair(query_id, a, b))
    return pairs


def check_bundle(bundle: StudyBundle) -> None:
    missing = [p.query_id for p in bundle.pairs if p.query_id not in bundle.prefs]
    if missing:
        raise DataError(f"no preference for queries: {', '.join(missing[:5])}")


def read_text(path: str | os.PathLike) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def load_bundle(
    judgments_path: str | os.PathLike,
    runs_path: str | os.PathLike,
    prefs_path: str | os.PathLike,
    scale: str = SCHOOL6,
    default_grade: float = 0.0,
    first_list_id: str | None = None,
) -> StudyBundle:
    judgments = parse_judgments(
        io.StringIO(read_text(judgments_path)), scale, default_grade, source=str(judgments_path)
    )
    lists = parse_runs(io.StringIO(read_text(runs_path)), source=str(runs_path))
    prefs = parse_preferences(io.StringIO(read_text(prefs_path)), source=str(prefs_path))
    bundle = StudyBundle(judgments, pair_lists(lists, first_list_id), prefs)
    check_bundle(bundle)
    return bundle


def save_bundle(
    bundle: StudyBundle,
    directory: str | os.PathLike,
    scale: str = SCHOOL6,
    meta: Mapping[str, object] | None = None,
) -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "judgments": directory / JUDGMENTS_FILE,
        "runs": directory / RUNS_FILE,
        "prefs": directory / PREFS_FILE,
    }
    atomic_write(paths["judgments"], write_judgments(bundle.judgments, scale, meta))
    atomic_write(paths["runs"], write_runs(bundle.lists, meta))
    atomic_write(paths["prefs"], write_preferences(bundle.prefs, meta))
    return paths


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


CSV = "csv"
JSON = "json"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _sorted_cells(result: SweepResult):
    return sorted(result.cells.items(), key=lambda item: (item[0][0].label, item[0][1], item[0][2]))


def _cell_keys(result: SweepResult):
    keys = set(result.best) | set(result.errors) | set(result.dropped)
    return sorted(keys, key=lambda key: (key[0].label, key[1]))


def write_report(result: SweepResult, fmt: str = CSV, meta: Mapping[str, object] | None = None) -> str:
    """Render the PIR cube.

    CSV holds the cube only, one row per (metric, cutoff, threshold). JSON
    additionally carries the best-threshold table with per-cell diagnostics.
    """
    if fmt == CSV:
        buf = io.StringIO()
        buf.write(_header(meta))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "cutoff", "threshold", "pir"])
        for (kind, k, t), value in _sorted_cells(result):
            writer.writerow([kind.label, k, _fmt(t), _fmt(value)])
        return buf.getvalue()
    if fmt == JSON:
        best = []
        for key in _cell_keys(result):
            kind, k = key
            row: dict[str, object] = {"metric": kind.label, "cutoff": k}
            if key in result.best:
                t, value = result.best[key]
                row.update(threshold=t, pir=value)
            else:
                row.update(threshold=None, pir=None)
            row["dropped_queries"] = result.dropped.get(key, 0)
            row["error"] = result.errors.get(key)
            best.append(row)
        doc = {
            "meta": dict(meta or {}),
            "summary": {
                "queries": result.queries,
                "preference_queries": result.preference_queries,
                "unjudged_documents": result.unjudged,
            },
            "cells": [
                {"metric": kind.label, "cutoff": k, "threshold": t, "pir": value}
                for (kind, k, t), value in _sorted_cells(result)
            ],
            "best": best,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def write_best_table(result: SweepResult) -> str:
    """CSV of the best threshold per (metric, cutoff): the data behind a PIR-by-cutoff plot."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "cutoff", "threshold", "pir", "dropped_queries"])
    for key in _cell_keys(result):
        kind, k = key
        if key in result.best:
            t, value = result.best[key]
            writer.writerow([kind.label, k, _fmt(t), _fmt(value), result.dropped.get(key, 0)])
        else:
            writer.writerow([kind.label, k, "", "", result.dropped.get(key, 0)])
    return buf.getvalue()
