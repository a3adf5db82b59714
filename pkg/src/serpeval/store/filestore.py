"""Durable single-directory persistence.

Layout under the store root (all text UTF-8):

    <family>/<key>.json          one JSON document per record
    logs/<name>.jsonl            append-only logs, gap-free "seq" numbers
    snapshots/objects/<hash>     raw page bytes, content-addressed (sha256)
    snapshots/meta/<hash>.json   sidecar: content type, fetch status, time

Desk-scale studies need auditability more than throughput, so everything
is a plain file you can open. Writes are atomic (temp + rename) and
fsynced before the call returns: an acknowledged write survives a crash,
a torn trailing log line from an unacknowledged write is discarded on
load.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from pathlib import Path
from typing import Callable, Iterable


class StoreError(RuntimeError):
    pass


class IntegrityError(StoreError):
    """A write referenced an absent record or violated a validator."""


_KEY_RE = re.compile(r"^[A-Za-z0-9._:-]+$")


def _check_key(key: str) -> str:
    if not _KEY_RE.match(key):
        raise StoreError(f"invalid store key {key!r}")
    return key


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:  # pragma: no cover - platform without dir fds
        return
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    _fsync_dir(path.parent)


class AppendLog:
    """Append-only JSONL with sequence numbers.

    Every record gets a "seq" field equal to its 0-based position; load
    verifies the numbering is gap-free. A trailing line that is torn
    (missing newline or unparseable) is treated as never written: the
    fsync before acknowledgment is the durability point.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._count: int | None = None
        self._reconciled = False
        # single-writer per log, so the in-memory view stays authoritative
        # once loaded; readers get copies
        self._cache: list[dict] | None = None

    def _load_lines(self) -> list[dict]:
        if not self.path.exists():
            return []
        raw = self.path.read_bytes()
        if not raw:
            return []
        lines = raw.split(b"\n")
        # A record is acknowledged iff newline-terminated: a crash between
        # append and ack leaves an unterminated tail, which never counts.
        lines = lines[:-1]
        records: list[dict] = []
        for i, line in enumerate(lines):
            try:
                record = json.loads(line.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                raise StoreError(f"{self.path}: corrupt record at line {i + 1}")
            if record.get("seq") != i:
                raise StoreError(f"{self.path}: sequence gap at line {i + 1}")
            records.append(record)
        return records

    def _reconcile(self) -> list[dict]:
        """Load acknowledged records and physically drop any torn tail so
        subsequent appends land at the right byte offset."""
        records = self._load_lines()
        if not self._reconciled:
            if self.path.exists():
                self._truncate_to(len(records))
            self._reconciled = True
        self._count = len(records)
        self._cache = records
        return records

    def records(self) -> list[dict]:
        with self._lock:
            if self._cache is None:
                self._reconcile()
            return list(self._cache)

    def append(self, record: dict) -> int:
        with self._lock:
            if self._cache is None:
                self._reconcile()
            seq = self._count
            payload = dict(record)
            payload["seq"] = seq
            line = json.dumps(payload, ensure_ascii=False, sort_keys=True) + "\n"
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "ab") as fh:
                fh.write(line.encode("utf-8"))
                fh.flush()
                os.fsync(fh.fileno())
            self._count = seq + 1
            self._cache.append(payload)
            return seq

    def _truncate_to(self, n_records: int) -> None:
        raw = self.path.read_bytes()
        offset = 0
        for _ in range(n_records):
            offset = raw.index(b"\n", offset) + 1
        if offset < len(raw):
            with open(self.path, "r+b") as fh:
                fh.truncate(offset)
                fh.flush()
                os.fsync(fh.fileno())


class FileStore:
    """Record families as JSON documents plus logs and snapshots."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._logs: dict[str, AppendLog] = {}
        self._validators: dict[str, Callable[[dict], None]] = {}
        self._log_guard = threading.Lock()

    # -- record families ---------------------------------------------------

    def register_validator(self, family: str, validator: Callable[[dict], None]) -> None:
        self._validators[family] = validator

    def _record_path(self, family: str, key: str) -> Path:
        return self.root / _check_key(family) / f"{_check_key(key)}.json"

    def put_record(
        self,
        family: str,
        key: str,
        record: dict,
        refs: Iterable[tuple[str, str]] = (),
    ) -> None:
        validator = self._validators.get(family)
        if validator is not None:
            try:
                validator(record)
            except Exception as exc:
                raise IntegrityError(f"{family}/{key}: {exc}") from exc
        for ref_family, ref_key in refs:
            if not self.exists(ref_family, ref_key):
                raise IntegrityError(
                    f"{family}/{key} references absent {ref_family}/{ref_key}"
                )
        data = json.dumps(record, ensure_ascii=False, sort_keys=True, indent=1).encode("utf-8")
        _atomic_write(self._record_path(family, key), data)

    def get_record(self, family: str, key: str) -> dict:
        path = self._record_path(family, key)
        if not path.exists():
            raise KeyError(f"{family}/{key} not found")
        return json.loads(path.read_text(encoding="utf-8"))

    def exists(self, family: str, key: str) -> bool:
        return self._record_path(family, key).exists()

    def keys(self, family: str) -> list[str]:
        directory = self.root / _check_key(family)
        if not directory.is_dir():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))

    # -- append-only logs ---------------------------------------------------

    def log(self, name: str) -> AppendLog:
        with self._log_guard:
            if name not in self._logs:
                self._logs[name] = AppendLog(self.root / "logs" / f"{_check_key(name)}.jsonl")
            return self._logs[name]

    # -- content-addressed snapshots -----------------------------------------

    def put_snapshot(self, content: bytes, content_type: str, fetched_at: str, status: str = "ok") -> str:
        """Store page bytes once per distinct content; returns the id."""
        snapshot_id = hashlib.sha256(content).hexdigest()
        object_path = self.root / "snapshots" / "objects" / snapshot_id
        if not object_path.exists():
            _atomic_write(object_path, content)
        meta_path = self.root / "snapshots" / "meta" / f"{snapshot_id}.json"
        if not meta_path.exists():
            meta = {
                "content_type": content_type,
                "fetch_status": status,
                "fetched_at": fetched_at,
                "size": len(content),
            }
            _atomic_write(meta_path, json.dumps(meta, sort_keys=True).encode("utf-8"))
        return snapshot_id

    def get_snapshot(self, snapshot_id: str) -> tuple[bytes, dict]:
        object_path = self.root / "snapshots" / "objects" / _check_key(snapshot_id)
        meta_path = self.root / "snapshots" / "meta" / f"{snapshot_id}.json"
        if not object_path.exists() or not meta_path.exists():
            raise KeyError(f"snapshot {snapshot_id} not found")
        return object_path.read_bytes(), json.loads(meta_path.read_text(encoding="utf-8"))

    def has_snapshot(self, snapshot_id: str) -> bool:
        return (self.root / "snapshots" / "objects" / _check_key(snapshot_id)).exists()
