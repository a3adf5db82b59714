"""The judgment study: sessions, task leases, judgments, vouchers, verdicts.

State layout (all under the run's store):

    studies/<study_id>.json            study parameters
    tasks/<task_id>.json               pooled task + lease + voucher flag
    sessions/<session_id>.json         juror sessions
    logs/judgments-<study_id>.jsonl    append-only judgment audit trail
    logs/vouchers-<study_id>.jsonl     outbound voucher events
    logs/verdicts-<study_id>.jsonl     navigational verdicts

Judgments are append-only: a resubmission within an open lease appends a
superseding record carrying a back-reference, never an in-place edit.
Task completion is derived from the log, so a crash can never lose or
double-count it; the voucher flag on the task record plus the per-service
lock make voucher emission exactly-once.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta

from ..clock import SystemClock, isoformat_utc
from ..collector.run import CollectionRun
from ..sampler import Intent
from ..store import FileStore
from .pooling import (
    JudgmentTask,
    pool_results,
    task_from_record,
    task_to_record,
)

DEFAULT_LEASE_MINUTES = 60
DEFAULT_VOUCHER_THRESHOLD = 0.9

BINARY_VALUES = ("relevant", "not-relevant")


class AuthError(Exception):
    pass


class LeaseError(Exception):
    pass


class JudgmentError(ValueError):
    pass


class VerdictError(ValueError):
    pass


@dataclass(frozen=True)
class Judgment:
    session_id: str
    pooled_id: str
    binary: str | None
    graded: int | None
    skipped: bool
    recorded_at: str

    def __post_init__(self) -> None:
        if self.skipped and (self.binary is not None or self.graded is not None):
            raise JudgmentError("a skipped result carries no judgments")
        if not self.skipped and self.binary is None and self.graded is None:
            raise JudgmentError("empty submission: judge or skip")
        if self.binary is not None and self.binary not in BINARY_VALUES:
            raise JudgmentError(f"binary must be one of {BINARY_VALUES}")
        if self.graded is not None and self.graded not in (0, 1, 2, 3, 4):
            raise JudgmentError("graded must be an integer 0..4")


def _hash_code(code: str) -> str:
    return hashlib.sha256(code.encode("utf-8")).hexdigest()


class StudyService:
    """Linearizable (single-lock) study state machine over a FileStore.

    Every state change is persisted before the call returns; reads that
    feed metrics go straight to the store and may lag in-flight writers.
    """

    def __init__(self, store: FileStore, study_id: str, clock=None):
        self.store = store
        self.study_id = study_id
        self.clock = clock or SystemClock()
        self._lock = threading.RLock()
        self._study = store.get_record("studies", study_id)
        self._judgments = store.log(f"judgments-{study_id}")
        self._vouchers = store.log(f"vouchers-{study_id}")
        self._verdicts = store.log(f"verdicts-{study_id}")
        # voucher flags reconcile from the outbound log in case a crash hit
        # between the voucher append and the task-record update
        vouchered = {event["task_id"] for event in self._vouchers.records()}
        for task_id in self._study["task_ids"]:
            record = store.get_record("tasks", task_id)
            if record["task_id"] in vouchered and not record.get("voucher_emitted"):
                record["voucher_emitted"] = True
                store.put_record("tasks", task_id, record)

    # -- construction --------------------------------------------------------

    @classmethod
    def create(
        cls,
        store: FileStore,
        study_id: str,
        run: CollectionRun,
        seed: int,
        access_code: str,
        admin_token: str,
        lease_minutes: int = DEFAULT_LEASE_MINUTES,
        voucher_threshold: float = DEFAULT_VOUCHER_THRESHOLD,
        clock=None,
    ) -> "StudyService":
        """Pool an informational run into tasks and queue navigational
        first results for the single assessor."""
        clock = clock or SystemClock()
        if not access_code or not admin_token:
            raise ValueError("access_code and admin_token must be non-empty")

        info_captures: dict[str, dict[str, list]] = {}
        nav_items: list[dict] = []
        auto_verdicts: list[dict] = []
        for capture in run.captures:
            if capture.intent is Intent.INFORMATIONAL:
                info_captures.setdefault(capture.query, {})[capture.engine_id] = capture.results
            elif capture.intent is Intent.NAVIGATIONAL:
                first = capture.results[0] if capture.results else None
                if first is None or first.normalized_url is None:
                    auto_verdicts.append(
                        {
                            "query": capture.query,
                            "engine_id": capture.engine_id,
                            "correct": False,
                            "assessor": "system",
                            "reason": "no result",
                        }
                    )
                else:
                    url = first.normalized_url
                    snapshot = run.snapshot_index.get(url, {})
                    nav_items.append(
                        {
                            "verdict_id": "v-"
                            + hashlib.sha256(
                                f"{study_id}|{capture.query}|{capture.engine_id}".encode()
                            ).hexdigest()[:16],
                            "query": capture.query,
                            "engine_id": capture.engine_id,
                            "url": url,
                            "snapshot_id": snapshot.get("snapshot_id"),
                        }
                    )

        task_ids = []
        for query in sorted(info_captures):
            task = pool_results(
                study_id, query, info_captures[query], seed, run.snapshot_index
            )
            store.put_record("tasks", task.task_id, _new_task_record(task))
            task_ids.append(task.task_id)

        study = {
            "study_id": study_id,
            "run_id": run.run_id,
            "seed": seed,
            "access_code_hash": _hash_code(access_code),
            "admin_token_hash": _hash_code(admin_token),
            "lease_minutes": lease_minutes,
            "voucher_threshold": voucher_threshold,
            "task_ids": task_ids,
            "navigational_items": nav_items,
            "engine_ids": list(run.engine_ids),
            "created_at": isoformat_utc(clock.now()),
            "status": "open",
        }
        store.put_record("studies", study_id, study, refs=[("runs", run.run_id)])

        service = cls(store, study_id, clock=clock)
        for verdict in auto_verdicts:
            service._append_verdict(**verdict)
        return service

    # -- sessions -------------------------------------------------------------

    def open_session(self, access_code: str) -> str:
        if _hash_code(access_code) != self._study["access_code_hash"]:
            # deliberately uniform: no hint about which codes exist
            raise AuthError("invalid code")
        session_id = "s-" + secrets.token_hex(8)
        with self._lock:
            self.store.put_record(
                "sessions",
                session_id,
                {
                    "session_id": session_id,
                    "study_id": self.study_id,
                    "started_at": isoformat_utc(self.clock.now()),
                    "contact": None,
                },
            )
        return session_id

    def set_contact(self, session_id: str, address: str) -> None:
        with self._lock:
            record = self._session(session_id)
            record["contact"] = address
            self.store.put_record("sessions", session_id, record)

    def _session(self, session_id: str) -> dict:
        try:
            record = self.store.get_record("sessions", session_id)
        except KeyError:
            raise AuthError("unknown session") from None
        if record["study_id"] != self.study_id:
            raise AuthError("unknown session")
        return record

    def verify_admin(self, token: str) -> None:
        if _hash_code(token) != self._study["admin_token_hash"]:
            raise AuthError("invalid admin token")

    # -- task access ----------------------------------------------------------

    def _task_record(self, task_id: str) -> dict:
        return self.store.get_record("tasks", task_id)

    def _latest_judgments(self, task_id: str) -> dict[str, dict]:
        """Latest judgment per pooled result (append-only log, last wins)."""
        latest: dict[str, dict] = {}
        for record in self._judgments.records():
            if record["task_id"] == task_id:
                latest[record["pooled_id"]] = record
        return latest

    def _progress(self, record: dict, latest: dict[str, dict]) -> dict:
        judgeable = [p for p in record["pooled"] if p.get("fetch_status") == "ok"]
        graded = sum(
            1
            for p in judgeable
            if (j := latest.get(p["pooled_id"])) is not None
            and not j["skipped"]
            and j["graded"] is not None
        )
        visited = sum(1 for p in record["pooled"] if p["pooled_id"] in latest)
        return {
            "total": len(record["pooled"]),
            "judgeable": len(judgeable),
            "visited": visited,
            "graded": graded,
        }

    def task_completion(self, task_id: str) -> tuple[float | None, bool]:
        """(completion fraction or None when nothing is judgeable, complete?).

        Complete means: every pooled result visited (judged or skipped) and
        the graded fraction strictly exceeds the threshold. Empty tasks are
        born complete; they count as unanswered queries in the report.
        """
        record = self._task_record(task_id)
        return self._completion_of(record, self._latest_judgments(task_id))

    def _completion_of(self, record: dict, latest: dict[str, dict]) -> tuple[float | None, bool]:
        if not record["pooled"]:
            return None, True
        progress = self._progress(record, latest)
        fraction = (
            progress["graded"] / progress["judgeable"] if progress["judgeable"] else None
        )
        all_visited = progress["visited"] == progress["total"]
        threshold = self._study["voucher_threshold"]
        if fraction is None:
            return None, all_visited
        return fraction, all_visited and fraction > threshold

    # -- leasing ---------------------------------------------------------------

    def _lease_expired(self, lease: dict | None) -> bool:
        if not lease:
            return True
        expires = datetime.fromisoformat(lease["expires_at"].replace("Z", "+00:00"))
        return self.clock.now() >= expires

    def next_task(self, session_id: str) -> JudgmentTask | None:
        """Lease the least-judged open task this session has not judged yet.

        Idempotent: a session already holding a live lease gets that same
        task back.
        """
        self._session(session_id)
        with self._lock:
            candidates: list[tuple[int, str, dict]] = []
            for task_id in self._study["task_ids"]:
                record = self._task_record(task_id)
                lease = record.get("lease")
                if lease and lease["session_id"] == session_id and not self._lease_expired(lease):
                    if record["status"] != "complete":
                        return task_from_record(record)
                latest = self._latest_judgments(task_id)
                _, complete = self._completion_of(record, latest)
                if complete or record["status"] == "complete":
                    continue
                if session_id in record.get("sessions_involved", []):
                    continue
                if lease and not self._lease_expired(lease):
                    continue
                candidates.append((len(latest), task_id, record))

            if not candidates:
                return None
            candidates.sort(key=lambda c: (c[0], c[1]))
            _, task_id, record = candidates[0]
            expires = self.clock.now() + timedelta(minutes=self._study["lease_minutes"])
            record["lease"] = {
                "session_id": session_id,
                "expires_at": isoformat_utc(expires),
            }
            record["status"] = "in_progress"
            self.store.put_record("tasks", task_id, record)
            return task_from_record(record)

    def _leased_task_for(self, session_id: str) -> dict | None:
        for task_id in self._study["task_ids"]:
            record = self._task_record(task_id)
            lease = record.get("lease")
            if lease and lease["session_id"] == session_id and not self._lease_expired(lease):
                return record
        return None

    # -- judgments ---------------------------------------------------------------

    def record_judgment(
        self,
        session_id: str,
        pooled_id: str,
        binary: str | None = None,
        graded: int | None = None,
        skipped: bool = False,
    ) -> dict:
        """Validate, append, detect completion, maybe emit a voucher.

        Returns an acknowledgment with the updated completion fraction.
        The judgment is durable before this returns.
        """
        self._session(session_id)
        judgment = Judgment(
            session_id=session_id,
            pooled_id=pooled_id,
            binary=binary,
            graded=graded,
            skipped=skipped,
            recorded_at=isoformat_utc(self.clock.now()),
        )
        with self._lock:
            record = self._leased_task_for(session_id)
            if record is None:
                raise LeaseError("session holds no in-progress task")
            if all(p["pooled_id"] != pooled_id for p in record["pooled"]):
                raise JudgmentError("result does not belong to the session's task")

            latest = self._latest_judgments(record["task_id"])
            _, already_complete = self._completion_of(record, latest)
            if already_complete or record["status"] == "complete":
                raise JudgmentError("task already complete; judgments are final")

            supersedes = None
            previous = latest.get(pooled_id)
            if previous is not None:
                supersedes = previous["seq"]

            self._judgments.append(
                {
                    "study_id": self.study_id,
                    "task_id": record["task_id"],
                    "pooled_id": pooled_id,
                    "session_id": session_id,
                    "binary": judgment.binary,
                    "graded": judgment.graded,
                    "skipped": judgment.skipped,
                    "recorded_at": judgment.recorded_at,
                    "supersedes": supersedes,
                }
            )

            if session_id not in record.get("sessions_involved", []):
                record.setdefault("sessions_involved", []).append(session_id)

            latest = self._latest_judgments(record["task_id"])
            fraction, complete = self._completion_of(record, latest)
            voucher_issued = False
            if complete:
                record["status"] = "complete"
                record["lease"] = None
                if not record.get("voucher_emitted"):
                    self._vouchers.append(
                        {
                            "session_id": session_id,
                            "task_id": record["task_id"],
                            "issued_at": isoformat_utc(self.clock.now()),
                        }
                    )
                    record["voucher_emitted"] = True
                    voucher_issued = True
            self.store.put_record("tasks", record["task_id"], record)

            progress = self._progress(record, latest)
            return {
                "accepted": True,
                "task_id": record["task_id"],
                "completion": fraction,
                "complete": complete,
                "voucher_issued": voucher_issued,
                "progress": progress,
            }

    # -- juror payloads ------------------------------------------------------------

    def task_payload(self, session_id: str) -> dict | None:
        """What a juror sees: the task in presentation order, no engine
        identity anywhere."""
        task = self.next_task(session_id)
        if task is None:
            return None
        record = self._task_record(task.task_id)
        latest = self._latest_judgments(task.task_id)
        by_id = {p.pooled_id: p for p in task.pooled}
        results = []
        for pooled_id in task.presentation_order:
            pooled = by_id[pooled_id]
            judgment = latest.get(pooled_id)
            results.append(
                {
                    "pooled_id": pooled_id,
                    "url": pooled.normalized_url,
                    "snapshot_id": pooled.snapshot_id,
                    "snapshot_url": (
                        f"/snapshots/{pooled.snapshot_id}" if pooled.snapshot_id else None
                    ),
                    "available": pooled.judgeable,
                    "judged": judgment is not None,
                }
            )
        return {
            "task_id": task.task_id,
            "query": task.query,
            "progress": self._progress(record, latest),
            "results": results,
        }

    # -- navigational verdicts --------------------------------------------------------

    def pending_navigational(self) -> list[dict]:
        """Anonymized first results awaiting the assessor; the engine is
        mapped back by the service, never shown."""
        decided = {
            (record["query"], record["engine_id"]) for record in self._verdicts.records()
        }
        pending = []
        for item in self._study["navigational_items"]:
            if (item["query"], item["engine_id"]) in decided:
                continue
            pending.append(
                {
                    "verdict_id": item["verdict_id"],
                    "query": item["query"],
                    "url": item["url"],
                    "snapshot_id": item["snapshot_id"],
                }
            )
        pending.sort(key=lambda i: (i["query"], i["verdict_id"]))
        return pending

    def record_navigational_verdict(
        self, verdict_id: str, correct: bool, assessor: str
    ) -> dict:
        with self._lock:
            item = next(
                (
                    i
                    for i in self._study["navigational_items"]
                    if i["verdict_id"] == verdict_id
                ),
                None,
            )
            if item is None:
                raise VerdictError(f"unknown verdict id {verdict_id!r}")
            return self._append_verdict(
                query=item["query"],
                engine_id=item["engine_id"],
                correct=correct,
                assessor=assessor,
            )

    def _append_verdict(
        self,
        query: str,
        engine_id: str,
        correct: bool,
        assessor: str,
        reason: str = "",
    ) -> dict:
        with self._lock:
            for record in self._verdicts.records():
                if record["query"] == query and record["engine_id"] == engine_id:
                    raise VerdictError(
                        f"duplicate verdict for ({query!r}, {engine_id!r})"
                    )
            verdict = {
                "query": query,
                "engine_id": engine_id,
                "correct": correct,
                "assessor": assessor,
                "reason": reason,
                "recorded_at": isoformat_utc(self.clock.now()),
            }
            self._verdicts.append(verdict)
            return verdict

    # -- reads for admin and metrics ------------------------------------------------------

    def judgments(self) -> list[dict]:
        return self._judgments.records()

    def verdicts(self) -> list[dict]:
        return self._verdicts.records()

    def voucher_events(self) -> list[dict]:
        return self._vouchers.records()

    def progress_report(self) -> dict:
        tasks = []
        throughput: dict[str, int] = {}
        for task_id in self._study["task_ids"]:
            record = self._task_record(task_id)
            latest = self._latest_judgments(task_id)
            fraction, complete = self._completion_of(record, latest)
            progress = self._progress(record, latest)
            tasks.append(
                {
                    "task_id": task_id,
                    "query": record["query"],
                    "status": "complete" if complete else record["status"],
                    "completion": fraction,
                    "progress": progress,
                }
            )
        for record in self._judgments.records():
            throughput[record["session_id"]] = throughput.get(record["session_id"], 0) + 1
        pending_verdicts = len(self.pending_navigational())
        return {
            "study_id": self.study_id,
            "run_id": self._study["run_id"],
            "tasks": tasks,
            "complete_tasks": sum(1 for t in tasks if t["status"] == "complete"),
            "session_throughput": throughput,
            "voucher_events": len(self._vouchers.records()),
            "pending_navigational": pending_verdicts,
        }


def _new_task_record(task: JudgmentTask) -> dict:
    record = task_to_record(task)
    record["lease"] = None
    record["voucher_emitted"] = False
    record["sessions_involved"] = []
    return record
