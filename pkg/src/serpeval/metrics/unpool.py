"""Unpooling: judgments on deduplicated pooled results flow back to every
engine position that produced the URL.

A pooled judgment applies identically at each of its provenance entries,
so the reconstructed per-engine lists can never diverge on a shared
document. Results that never resolved or whose snapshot failed come back
as fetch-failed entries; results nobody judged come back bare. Both stay
out of every metric denominator and are reported as coverage instead.
"""

from __future__ import annotations

from ..collector.run import CollectionRun
from ..sampler import Intent
from .measures import Entry, JudgedResultList


class UnpoolError(ValueError):
    pass


def latest_judgments(judgment_records: list[dict]) -> dict[str, dict]:
    """Collapse the append-only log to the effective judgment per pooled
    result (later records supersede earlier ones)."""
    latest: dict[str, dict] = {}
    for record in sorted(judgment_records, key=lambda r: r["seq"]):
        latest[record["pooled_id"]] = record
    return latest


def unpool(
    run: CollectionRun,
    tasks: list[dict],
    judgment_records: list[dict],
) -> dict[str, list[JudgedResultList]]:
    """Rebuild each engine's original ranked lists with judgments attached.

    tasks are stored task records (with pooled + provenance); judgments
    referencing a pooled id that no task contains are a hard error.
    """
    pooled_by_id: dict[str, dict] = {}
    task_by_query: dict[str, dict] = {}
    for task in tasks:
        task_by_query[task["query"]] = task
        for pooled in task["pooled"]:
            pooled_by_id[pooled["pooled_id"]] = pooled

    latest = latest_judgments(judgment_records)
    for pooled_id in latest:
        if pooled_id not in pooled_by_id:
            raise UnpoolError(f"judgment references unknown pooled result {pooled_id!r}")

    judgment_by_url: dict[tuple[str, str], dict] = {}
    for task in tasks:
        for pooled in task["pooled"]:
            record = latest.get(pooled["pooled_id"])
            if record is not None:
                judgment_by_url[(task["query"], pooled["normalized_url"])] = record

    lists: dict[str, list[JudgedResultList]] = {engine: [] for engine in run.engine_ids}
    for capture in run.captures:
        if capture.intent is not Intent.INFORMATIONAL:
            continue
        if capture.status != "succeeded":
            continue
        entries: list[Entry] = []
        for result in capture.results:
            url = result.normalized_url
            if url is None:
                entries.append(Entry(rank=result.rank, fetch_failed=True))
                continue
            snapshot = run.snapshot_index.get(url, {})
            fetch_failed = snapshot.get("status") != "ok"
            record = judgment_by_url.get((capture.query, url))
            if record is None:
                entries.append(Entry(rank=result.rank, fetch_failed=fetch_failed))
            else:
                entries.append(
                    Entry(
                        rank=result.rank,
                        binary=record["binary"],
                        graded=record["graded"],
                        skipped=record["skipped"],
                        fetch_failed=fetch_failed,
                    )
                )
        lists[capture.engine_id].append(
            JudgedResultList(engine_id=capture.engine_id, query=capture.query, entries=entries)
        )
    for engine_lists in lists.values():
        engine_lists.sort(key=lambda rl: rl.query)
    return lists
