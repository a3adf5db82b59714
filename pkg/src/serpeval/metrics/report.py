"""Report assembly and exports.

One JSON document holds every measure; each measure family additionally
gets a comma-separated table. Exports are deterministic byte-for-byte for
fixed inputs: engines, ranks and grades are emitted in sorted order and
every row carries the run id and study seed for provenance.

Undefined values (empty denominators) are null in JSON and NA in CSV.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..collector.run import CollectionRun
from ..sampler import Intent
from .measures import (
    GRADES,
    JudgedResultList,
    grade_distribution,
    macro_relevant_ratio,
    mean_graded_by_position,
    mean_reciprocal_rank,
    navigational_success_rate,
    overall_relevant_ratio,
    precision_at_k,
    success_at_n,
    targeted_list,
    url_overlap,
)
from .unpool import unpool

SCHEMA = "serpeval-report-v1"


@dataclass
class MetricsReport:
    schema: str
    run_id: str
    study_id: str
    seed: int
    engines: list[str]
    informational: dict
    navigational: dict
    overlap: list[dict]
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema,
            "run_id": self.run_id,
            "study_id": self.study_id,
            "seed": self.seed,
            "engines": self.engines,
            "informational": self.informational,
            "navigational": self.navigational,
            "overlap": self.overlap,
            "warnings": self.warnings,
        }


def _num(value: Fraction | None) -> float | None:
    return None if value is None else float(value)


def _coverage(lists: list[JudgedResultList]) -> dict:
    counts = {"judged": 0, "skipped": 0, "failed": 0, "unjudged": 0}
    binary_judged = 0
    graded_judged = 0
    total = 0
    for rl in lists:
        for entry in rl.entries:
            total += 1
            binary_judged += entry.has_binary
            graded_judged += entry.has_grade
            if entry.has_binary or entry.has_grade:
                counts["judged"] += 1
            elif entry.skipped:
                counts["skipped"] += 1
            elif entry.fetch_failed:
                counts["failed"] += 1
            else:
                counts["unjudged"] += 1
    counts["binary_judged"] = binary_judged
    counts["graded_judged"] = graded_judged
    counts["total"] = total
    return counts


def build_report(
    run: CollectionRun,
    tasks: list[dict],
    judgment_records: list[dict],
    verdicts: list[dict],
    study_id: str,
    seed: int,
) -> MetricsReport:
    engines = sorted(run.engine_ids)
    lists_by_engine = unpool(run, tasks, judgment_records)
    max_k = run.depth_policy.informational
    warnings: list[str] = []

    informational: dict = {}
    for engine in engines:
        lists = lists_by_engine.get(engine, [])
        means, cumulative = mean_graded_by_position(lists, max_rank=max_k)
        counts, ratios = grade_distribution(lists)
        coverage = _coverage(lists)
        unanswered = sum(1 for rl in lists if not rl.entries)
        informational[engine] = {
            "overall_relevant_ratio": _num(overall_relevant_ratio(lists)),
            "macro_relevant_ratio": _num(macro_relevant_ratio(lists)),
            "precision_at_k": {
                str(k): _num(_micro_precision(lists, k)) for k in range(1, max_k + 1)
            },
            "macro_precision_at_k": {
                str(k): _num(_macro_precision(lists, k)) for k in range(1, max_k + 1)
            },
            "mean_graded_by_position": {str(r): _num(means[r]) for r in means},
            "cumulative_graded_by_position": {
                str(r): _num(cumulative[r]) for r in cumulative
            },
            "grade_histogram": {str(g): counts[g] for g in GRADES},
            "grade_ratios": (
                None if ratios is None else {str(g): _num(ratios[g]) for g in GRADES}
            ),
            "queries": len(lists),
            "unanswered_queries": unanswered,
            "coverage": coverage,
        }
        if coverage["unjudged"]:
            warnings.append(
                f"{engine}: {coverage['unjudged']} of {coverage['total']} results unjudged"
            )

    navigational: dict = {}
    nav_depth = run.depth_policy.navigational
    verdict_map = {(v["query"], v["engine_id"]): v for v in verdicts}
    for engine in engines:
        targeted = []
        for capture in run.captures_for(engine):
            if capture.intent is not Intent.NAVIGATIONAL or capture.status != "succeeded":
                continue
            verdict = verdict_map.get((capture.query, engine))
            if verdict is None:
                continue
            flags = [
                (result.rank, bool(verdict["correct"]) and result.rank == 1)
                for result in capture.results
            ]
            targeted.append(targeted_list(engine, capture.query, flags))
        try:
            rate = _num(navigational_success_rate(verdicts, engine))
        except ValueError:
            rate = None
        navigational[engine] = {
            "success_rate": rate,
            "verdicts": sum(1 for v in verdicts if v["engine_id"] == engine),
            "success_at_n": {
                str(n): _num(success_at_n(targeted, n)) for n in range(1, nav_depth + 1)
            },
            "mean_reciprocal_rank": _num(mean_reciprocal_rank(targeted)),
        }
        if rate is None:
            warnings.append(f"{engine}: no navigational verdicts")

    overlap: list[dict] = []
    url_maps = {
        engine: {
            capture.query: [
                r.normalized_url for r in capture.results if r.normalized_url is not None
            ]
            for capture in run.captures_for(engine)
            if capture.intent is Intent.INFORMATIONAL and capture.status == "succeeded"
        }
        for engine in engines
    }
    for i, engine_a in enumerate(engines):
        for engine_b in engines[i + 1 :]:
            overlap.append(
                {
                    "engine_a": engine_a,
                    "engine_b": engine_b,
                    "k": max_k,
                    "jaccard": _num(url_overlap(url_maps[engine_a], url_maps[engine_b], max_k)),
                }
            )

    return MetricsReport(
        schema=SCHEMA,
        run_id=run.run_id,
        study_id=study_id,
        seed=seed,
        engines=engines,
        informational=informational,
        navigational=navigational,
        overlap=overlap,
        warnings=warnings,
    )


def _micro_precision(lists: list[JudgedResultList], k: int) -> Fraction | None:
    judged = [e for rl in lists for e in rl.entries if e.rank <= k and e.has_binary]
    if not judged:
        return None
    return Fraction(sum(1 for e in judged if e.relevant), len(judged))


def _macro_precision(lists: list[JudgedResultList], k: int) -> Fraction | None:
    values = [p for rl in lists if (p := precision_at_k(rl, k)) is not None]
    if not values:
        return None
    return sum(values, Fraction(0)) / len(values)


def _fmt(value) -> str:
    if value is None:
        return "NA"
    return str(value)


# column schemas for the CSV exports, written into the manifest so every
# report directory is self-describing
_CSV_SCHEMAS = {
    "precision.csv": "run_id,seed,engine,k,precision,macro_precision",
    "graded_positions.csv": "run_id,seed,engine,rank,mean_grade,cumulative_mean_grade",
    "grade_histogram.csv": "run_id,seed,engine,grade,count,ratio",
    "navigational.csv": "run_id,seed,engine,measure,value",
    "overlap.csv": "run_id,seed,engine_a,engine_b,k,jaccard",
    "coverage.csv": (
        "run_id,seed,engine,total,judged,binary_judged,graded_judged,"
        "skipped,failed,unjudged"
    ),
}


def write_exports(report: MetricsReport, out_dir: Path | str) -> list[Path]:
    """Write report.json plus one CSV per measure family; returns paths.

    Every row carries run_id and seed; absent values are NA. The manifest
    records the schema version and each table's columns.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_id, seed = report.run_id, report.seed
    written: list[Path] = []

    def write(name: str, text: str) -> None:
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    write(
        "manifest.json",
        json.dumps(
            {
                "schema": SCHEMA,
                "run_id": run_id,
                "study_id": report.study_id,
                "seed": seed,
                "absent_marker": "NA",
                "tables": _CSV_SCHEMAS,
            },
            ensure_ascii=False,
            sort_keys=True,
            indent=1,
        )
        + "\n",
    )

    write(
        "report.json",
        json.dumps(report.to_json_dict(), ensure_ascii=False, sort_keys=True, indent=1)
        + "\n",
    )

    lines = [_CSV_SCHEMAS["precision.csv"]]
    for engine in report.engines:
        info = report.informational[engine]
        for k in sorted(info["precision_at_k"], key=int):
            lines.append(
                f"{run_id},{seed},{engine},{k},"
                f"{_fmt(info['precision_at_k'][k])},{_fmt(info['macro_precision_at_k'][k])}"
            )
    write("precision.csv", "\n".join(lines) + "\n")

    lines = [_CSV_SCHEMAS["graded_positions.csv"]]
    for engine in report.engines:
        info = report.informational[engine]
        for rank in sorted(info["mean_graded_by_position"], key=int):
            lines.append(
                f"{run_id},{seed},{engine},{rank},"
                f"{_fmt(info['mean_graded_by_position'][rank])},"
                f"{_fmt(info['cumulative_graded_by_position'][rank])}"
            )
    write("graded_positions.csv", "\n".join(lines) + "\n")

    lines = [_CSV_SCHEMAS["grade_histogram.csv"]]
    for engine in report.engines:
        info = report.informational[engine]
        for grade in map(str, GRADES):
            ratio = None if info["grade_ratios"] is None else info["grade_ratios"][grade]
            lines.append(
                f"{run_id},{seed},{engine},{grade},"
                f"{info['grade_histogram'][grade]},{_fmt(ratio)}"
            )
    write("grade_histogram.csv", "\n".join(lines) + "\n")

    lines = [_CSV_SCHEMAS["navigational.csv"]]
    for engine in report.engines:
        nav = report.navigational[engine]
        lines.append(f"{run_id},{seed},{engine},success_rate,{_fmt(nav['success_rate'])}")
        for n in sorted(nav["success_at_n"], key=int):
            lines.append(
                f"{run_id},{seed},{engine},success_at_{n},{_fmt(nav['success_at_n'][n])}"
            )
        lines.append(
            f"{run_id},{seed},{engine},mean_reciprocal_rank,"
            f"{_fmt(nav['mean_reciprocal_rank'])}"
        )
    write("navigational.csv", "\n".join(lines) + "\n")

    lines = [_CSV_SCHEMAS["overlap.csv"]]
    for row in report.overlap:
        lines.append(
            f"{run_id},{seed},{row['engine_a']},{row['engine_b']},{row['k']},"
            f"{_fmt(row['jaccard'])}"
        )
    write("overlap.csv", "\n".join(lines) + "\n")

    lines = [_CSV_SCHEMAS["coverage.csv"]]
    for engine in report.engines:
        c = report.informational[engine]["coverage"]
        lines.append(
            f"{run_id},{seed},{engine},{c['total']},{c['judged']},{c['binary_judged']},"
            f"{c['graded_judged']},{c['skipped']},{c['failed']},{c['unjudged']}"
        )
    write("coverage.csv", "\n".join(lines) + "\n")

    return written
