"""Collection runs: every (query, engine) pair captured exactly once.

The run ledger is the single source of truth. Each capture attempt is
appended (with its full result payload) before it counts; a process death
mid-append leaves a torn line that the log discards, so resuming simply
re-attempts whatever the ledger does not yet acknowledge. Captures are
idempotent per (query, engine), which makes resume safe under any
interruption point.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..clock import SystemClock, isoformat_utc
from ..sampler import Intent, SampledQuery
from ..store import FileStore
from .engines import AdapterError, EngineConfig, SerpParseError, make_adapter
from .urls import TrackingPattern, UrlError, normalize_url, resolve_url

DEFAULT_FAILURE_THRESHOLD = 0.2


@dataclass
class DepthPolicy:
    """How many ranks to capture per intent. One result answers a
    navigational query; ten cover the first page for informational ones."""

    navigational: int = 1
    informational: int = 10

    def depth_for(self, intent: Intent) -> int:
        if intent is Intent.NAVIGATIONAL:
            return self.navigational
        return self.informational

    def to_dict(self) -> dict:
        return {"navigational": self.navigational, "informational": self.informational}

    @classmethod
    def from_dict(cls, data: dict) -> "DepthPolicy":
        return cls(
            navigational=int(data.get("navigational", 1)),
            informational=int(data.get("informational", 10)),
        )


@dataclass(frozen=True)
class SerpResult:
    engine_id: str
    query: str
    rank: int
    raw_url: str
    resolved_url: str | None
    normalized_url: str | None
    title: str
    snippet: str
    captured_at: str


@dataclass(frozen=True)
class DocumentSnapshot:
    normalized_url: str
    content: bytes
    content_type: str
    fetch_status: str
    fetched_at: str


@dataclass
class CaptureRecord:
    engine_id: str
    query: str
    intent: Intent
    status: str  # succeeded | failed
    results: list[SerpResult] = field(default_factory=list)
    reason: str = ""
    short_capture: bool = False
    unresolved_count: int = 0
    captured_at: str = ""


@dataclass
class CollectionRun:
    run_id: str
    sample_ref: str
    engine_ids: list[str]
    depth_policy: DepthPolicy
    captures: list[CaptureRecord]
    snapshot_index: dict[str, dict]  # normalized_url -> {snapshot_id, status}
    degraded: bool
    created_at: str

    @property
    def attempted(self) -> int:
        return len(self.captures)

    @property
    def succeeded(self) -> int:
        return sum(1 for c in self.captures if c.status == "succeeded")

    @property
    def failed(self) -> int:
        return sum(1 for c in self.captures if c.status == "failed")

    @property
    def unresolved_total(self) -> int:
        return sum(c.unresolved_count for c in self.captures)

    def captures_for(self, engine_id: str) -> list[CaptureRecord]:
        return [c for c in self.captures if c.engine_id == engine_id]

    def to_record(self) -> dict:
        return {
            "run_id": self.run_id,
            "sample_ref": self.sample_ref,
            "engine_ids": list(self.engine_ids),
            "depth_policy": self.depth_policy.to_dict(),
            "created_at": self.created_at,
            "degraded": self.degraded,
            "counters": {
                "attempted": self.attempted,
                "succeeded": self.succeeded,
                "failed": self.failed,
                "unresolved_urls": self.unresolved_total,
            },
            "snapshot_index": {u: dict(v) for u, v in sorted(self.snapshot_index.items())},
            "captures": [_capture_to_dict(c) for c in self.captures],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CollectionRun":
        return cls(
            run_id=record["run_id"],
            sample_ref=record["sample_ref"],
            engine_ids=list(record["engine_ids"]),
            depth_policy=DepthPolicy.from_dict(record["depth_policy"]),
            captures=[_capture_from_dict(c) for c in record["captures"]],
            snapshot_index=dict(record["snapshot_index"]),
            degraded=record["degraded"],
            created_at=record["created_at"],
        )


def _capture_to_dict(capture: CaptureRecord) -> dict:
    return {
        "engine_id": capture.engine_id,
        "query": capture.query,
        "intent": capture.intent.value,
        "status": capture.status,
        "reason": capture.reason,
        "short_capture": capture.short_capture,
        "unresolved_count": capture.unresolved_count,
        "captured_at": capture.captured_at,
        "results": [
            {
                "rank": r.rank,
                "raw_url": r.raw_url,
                "resolved_url": r.resolved_url,
                "normalized_url": r.normalized_url,
                "title": r.title,
                "snippet": r.snippet,
            }
            for r in capture.results
        ],
    }


def _capture_from_dict(data: dict) -> CaptureRecord:
    return CaptureRecord(
        engine_id=data["engine_id"],
        query=data["query"],
        intent=Intent(data["intent"]),
        status=data["status"],
        reason=data.get("reason", ""),
        short_capture=data.get("short_capture", False),
        unresolved_count=data.get("unresolved_count", 0),
        captured_at=data.get("captured_at", ""),
        results=[
            SerpResult(
                engine_id=data["engine_id"],
                query=data["query"],
                rank=r["rank"],
                raw_url=r["raw_url"],
                resolved_url=r.get("resolved_url"),
                normalized_url=r.get("normalized_url"),
                title=r.get("title", ""),
                snippet=r.get("snippet", ""),
                captured_at=data.get("captured_at", ""),
            )
            for r in data.get("results", [])
        ],
    )


def collect_serp(
    adapter,
    engine_id: str,
    query: str,
    k: int,
    patterns: list[TrackingPattern],
    captured_at: str,
) -> tuple[list[SerpResult], bool, int]:
    """Capture up to k ranked results; returns (results, short, unresolved).

    Raises AdapterError / SerpParseError upward; the caller records the
    failure so a capture is never silently empty.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    entries = adapter.fetch_serp(query)[:k]
    results: list[SerpResult] = []
    unresolved = 0
    for entry in entries:
        resolved = resolve_url(entry.raw_url, patterns)
        normalized: str | None = None
        if resolved is not None:
            try:
                normalized = normalize_url(resolved)
            except UrlError:
                resolved = None
        if resolved is None:
            unresolved += 1
        results.append(
            SerpResult(
                engine_id=engine_id,
                query=query,
                rank=entry.rank,
                raw_url=entry.raw_url,
                resolved_url=resolved,
                normalized_url=normalized,
                title=entry.title,
                snippet=entry.snippet,
                captured_at=captured_at,
            )
        )
    return results, len(results) < k, unresolved


class _SnapshotRegistry:
    """One fetch per normalized URL per run, across workers and resumes."""

    def __init__(self):
        self._lock = threading.Lock()
        self._claimed: set[str] = set()

    def seed(self, urls: set[str]) -> None:
        with self._lock:
            self._claimed |= urls

    def claim(self, url: str) -> bool:
        with self._lock:
            if url in self._claimed:
                return False
            self._claimed.add(url)
            return True

    def unclaim(self, url: str) -> None:
        with self._lock:
            self._claimed.discard(url)


def run_collection(
    sample: list[SampledQuery],
    engines: list[EngineConfig],
    depth_policy: DepthPolicy,
    store: FileStore,
    run_id: str,
    sample_ref: str = "",
    tracking_patterns: list[TrackingPattern] | None = None,
    concurrency: int = 1,
    failure_threshold: float = DEFAULT_FAILURE_THRESHOLD,
    clock=None,
    adapters: dict | None = None,
) -> CollectionRun:
    """Capture the whole sample against every engine, resumably.

    Already-ledgered (query, engine) pairs are skipped, so calling this
    again after an interruption finishes exactly the remaining work.
    """
    if not sample:
        raise ValueError("sample is empty")
    if not engines:
        raise ValueError("at least one engine required")
    seen_ids = {e.engine_id for e in engines}
    if len(seen_ids) != len(engines):
        raise ValueError("engine_id values must be unique per run")

    clock = clock or SystemClock()
    patterns = tracking_patterns or []
    adapters = adapters or {e.engine_id: make_adapter(e, clock=clock) for e in engines}
    ledger = store.log(f"run-{run_id}")

    done_pairs: set[tuple[str, str]] = set()
    snapshot_registry = _SnapshotRegistry()
    for record in ledger.records():
        if record["type"] == "capture":
            done_pairs.add((record["engine_id"], record["query"]))
        elif record["type"] == "snapshot":
            snapshot_registry.seed({record["normalized_url"]})

    pending = [
        (engine, query)
        for query in sample
        for engine in engines
        if (engine.engine_id, query.text) not in done_pairs
    ]

    def capture_one(engine: EngineConfig, query: SampledQuery) -> None:
        adapter = adapters[engine.engine_id]
        captured_at = isoformat_utc(clock.now())
        k = depth_policy.depth_for(query.intent)
        try:
            results, short, unresolved = collect_serp(
                adapter, engine.engine_id, query.text, k, patterns, captured_at
            )
        except (AdapterError, SerpParseError) as exc:
            ledger.append(
                {
                    "type": "capture",
                    "engine_id": engine.engine_id,
                    "query": query.text,
                    "intent": query.intent.value,
                    "status": "failed",
                    "reason": str(exc),
                    "short_capture": False,
                    "unresolved_count": 0,
                    "captured_at": captured_at,
                    "results": [],
                }
            )
            return

        # Snapshot each distinct document once per run.
        for result in results:
            url = result.normalized_url
            if url is None or not snapshot_registry.claim(url):
                continue
            try:
                fetched = adapter.fetch_document(url)
                fetched_at = isoformat_utc(clock.now())
                snapshot_id = None
                if fetched.status == "ok" and fetched.body:
                    snapshot_id = store.put_snapshot(
                        fetched.body, fetched.content_type, fetched_at
                    )
                status = fetched.status if (fetched.status != "ok" or snapshot_id) else "empty"
                ledger.append(
                    {
                        "type": "snapshot",
                        "normalized_url": url,
                        "status": status,
                        "snapshot_id": snapshot_id,
                        "fetched_at": fetched_at,
                    }
                )
            except Exception:
                snapshot_registry.unclaim(url)
                raise

        capture = _capture_to_dict(
            CaptureRecord(
                engine_id=engine.engine_id,
                query=query.text,
                intent=query.intent,
                status="succeeded",
                results=results,
                short_capture=short,
                unresolved_count=unresolved,
                captured_at=captured_at,
            )
        )
        capture["type"] = "capture"
        ledger.append(capture)

    if concurrency <= 1:
        for engine, query in pending:
            capture_one(engine, query)
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            futures = [pool.submit(capture_one, e, q) for e, q in pending]
            for future in futures:
                future.result()

    return _assemble_run(
        store, ledger, run_id, sample, engines, depth_policy, sample_ref,
        failure_threshold, clock,
    )


def _assemble_run(
    store, ledger, run_id, sample, engines, depth_policy, sample_ref,
    failure_threshold, clock,
) -> CollectionRun:
    """Build the run document from the ledger alone, so a resumed run and
    an uninterrupted run produce identical output."""
    captures: list[CaptureRecord] = []
    snapshot_index: dict[str, dict] = {}
    for record in ledger.records():
        if record["type"] == "capture":
            captures.append(_capture_from_dict(record))
        elif record["type"] == "snapshot":
            snapshot_index[record["normalized_url"]] = {
                "snapshot_id": record["snapshot_id"],
                "status": record["status"],
            }

    expected = len(sample) * len(engines)
    if len(captures) != expected:
        raise RuntimeError(
            f"ledger reconciliation failed: {len(captures)} captures for "
            f"{expected} (query, engine) pairs"
        )
    captures.sort(key=lambda c: (c.engine_id, c.query))
    failed = sum(1 for c in captures if c.status == "failed")
    degraded = expected > 0 and (failed / expected) > failure_threshold

    run = CollectionRun(
        run_id=run_id,
        sample_ref=sample_ref,
        engine_ids=sorted(e.engine_id for e in engines),
        depth_policy=depth_policy,
        captures=captures,
        snapshot_index=snapshot_index,
        degraded=degraded,
        created_at=isoformat_utc(clock.now()),
    )
    store.put_record("runs", run_id, run.to_record())
    return run


def load_run(store: FileStore, run_id: str) -> CollectionRun:
    return CollectionRun.from_record(store.get_record("runs", run_id))


def load_snapshot(store: FileStore, run: CollectionRun, normalized_url: str) -> DocumentSnapshot:
    """Materialize the snapshot a run captured for a URL; failed fetches
    come back with empty content and their recorded status."""
    entry = run.snapshot_index.get(normalized_url)
    if entry is None:
        raise KeyError(f"run {run.run_id} has no snapshot for {normalized_url!r}")
    if entry["snapshot_id"] is None:
        return DocumentSnapshot(
            normalized_url=normalized_url,
            content=b"",
            content_type="",
            fetch_status=entry["status"],
            fetched_at="",
        )
    content, meta = store.get_snapshot(entry["snapshot_id"])
    return DocumentSnapshot(
        normalized_url=normalized_url,
        content=content,
        content_type=meta.get("content_type", ""),
        fetch_status=entry["status"],
        fetched_at=meta.get("fetched_at", ""),
    )
