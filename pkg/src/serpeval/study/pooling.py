"""Pooling: engine result lists become one anonymized judgment task.

Results from all engines for a query are merged by normalized URL, so a
document both engines returned is judged once. Each pooled result keeps
its provenance (which engine ranked it where) for the later unpooling
step, but provenance never reaches jurors: the payload built for them
carries no engine identity, and the presentation order is a seeded
shuffle to kill learning and branding effects.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..collector.run import SerpResult


@dataclass
class PooledResult:
    pooled_id: str
    normalized_url: str
    snapshot_id: str | None
    fetch_status: str
    provenance: list[tuple[str, int]] = field(default_factory=list)

    @property
    def judgeable(self) -> bool:
        return self.fetch_status == "ok"


@dataclass
class JudgmentTask:
    task_id: str
    study_id: str
    query: str
    pooled: list[PooledResult]
    presentation_order: list[str]
    status: str = "open"  # open | in_progress | complete

    def pooled_by_id(self, pooled_id: str) -> PooledResult | None:
        for result in self.pooled:
            if result.pooled_id == pooled_id:
                return result
        return None

    @property
    def judgeable_count(self) -> int:
        return sum(1 for p in self.pooled if p.judgeable)


def _opaque_id(*parts: str, prefix: str) -> str:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).hexdigest()
    return f"{prefix}{digest[:16]}"


def task_id_for(study_id: str, query: str) -> str:
    return _opaque_id(study_id, query, prefix="task-")


def pool_results(
    study_id: str,
    query: str,
    per_engine: dict[str, list[SerpResult]],
    seed: int,
    snapshot_index: dict[str, dict] | None = None,
) -> JudgmentTask:
    """Merge per-engine ranked lists into one deduplicated task.

    Results whose URL never resolved carry no normalized URL and cannot be
    pooled; they stay visible in the run's ledger and in coverage counts
    instead. An empty union yields an empty task that callers mark
    complete immediately (an unanswered query).
    """
    if not per_engine:
        raise ValueError("at least one engine result list required")
    snapshot_index = snapshot_index or {}
    task_id = task_id_for(study_id, query)

    by_url: dict[str, PooledResult] = {}
    for engine_id in sorted(per_engine):
        for result in per_engine[engine_id]:
            url = result.normalized_url
            if url is None:
                continue
            pooled = by_url.get(url)
            if pooled is None:
                snapshot = snapshot_index.get(url, {})
                pooled = PooledResult(
                    pooled_id=_opaque_id(task_id, url, prefix="p-"),
                    normalized_url=url,
                    snapshot_id=snapshot.get("snapshot_id"),
                    fetch_status=snapshot.get("status", "missing"),
                    provenance=[],
                )
                by_url[url] = pooled
            if all(eng != engine_id for eng, _ in pooled.provenance):
                pooled.provenance.append((engine_id, result.rank))

    pooled_results = [by_url[url] for url in sorted(by_url)]
    order = [p.pooled_id for p in pooled_results]
    random.Random(f"{seed}/order/{task_id}").shuffle(order)

    return JudgmentTask(
        task_id=task_id,
        study_id=study_id,
        query=query,
        pooled=pooled_results,
        presentation_order=order,
        status="complete" if not pooled_results else "open",
    )


def task_to_record(task: JudgmentTask) -> dict:
    return {
        "task_id": task.task_id,
        "study_id": task.study_id,
        "query": task.query,
        "status": task.status,
        "presentation_order": list(task.presentation_order),
        "pooled": [
            {
                "pooled_id": p.pooled_id,
                "normalized_url": p.normalized_url,
                "snapshot_id": p.snapshot_id,
                "fetch_status": p.fetch_status,
                "provenance": [[eng, rank] for eng, rank in p.provenance],
            }
            for p in task.pooled
        ],
    }


def task_from_record(record: dict) -> JudgmentTask:
    return JudgmentTask(
        task_id=record["task_id"],
        study_id=record["study_id"],
        query=record["query"],
        status=record["status"],
        presentation_order=list(record["presentation_order"]),
        pooled=[
            PooledResult(
                pooled_id=p["pooled_id"],
                normalized_url=p["normalized_url"],
                snapshot_id=p.get("snapshot_id"),
                fetch_status=p.get("fetch_status", "missing"),
                provenance=[(eng, rank) for eng, rank in p.get("provenance", [])],
            )
            for p in record["pooled"]
        ],
    )
