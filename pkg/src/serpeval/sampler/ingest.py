"""Query log ingestion: raw lines to a popularity-sorted frequency table.

Two input formats, declared by the caller:

* ``instances`` -- one query per line, one line per time the query was
  entered.
* ``aggregate`` -- tab-separated ``query<TAB>count`` lines for logs that
  arrive pre-counted.

Queries are normalized (trim, whitespace collapse, case-fold) before
counting, so spelling variants of whitespace and case collapse into one
entry. Malformed lines never abort the ingest; they are rejected and
counted in the result's rejects report.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

FORMAT_INSTANCES = "instances"
FORMAT_AGGREGATE = "aggregate"

_MAX_REJECT_SAMPLES = 50


class IngestError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class QueryLogEntry:
    """One distinct normalized query and how often it occurred."""

    text: str
    frequency: int

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ValueError(f"frequency must be >= 1, got {self.frequency}")
        if not self.text:
            raise ValueError("query text must be non-empty")


@dataclass
class IngestResult:
    entries: list[QueryLogEntry]
    total_lines: int
    accepted_lines: int
    rejected_lines: int
    reject_samples: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def total_instances(self) -> int:
        return sum(e.frequency for e in self.entries)


def normalize_query(raw: str) -> str:
    """Trim, collapse internal whitespace, case-fold."""
    return " ".join(raw.split()).casefold()


def ingest_log(lines: Iterable[str], fmt: str = FORMAT_INSTANCES) -> IngestResult:
    """Count a raw log stream into a frequency table.

    The table holds one entry per distinct normalized query, sorted by
    frequency descending with ties broken by text ascending (the tie rule
    makes downstream segmentation deterministic).

    Raises IngestError if the stream contains no usable line at all.
    """
    if fmt not in (FORMAT_INSTANCES, FORMAT_AGGREGATE):
        raise IngestError(f"unknown log format: {fmt!r}")

    counts: Counter[str] = Counter()
    total = 0
    rejected = 0
    samples: list[tuple[int, str, str]] = []

    def reject(lineno: int, line: str, reason: str) -> None:
        nonlocal rejected
        rejected += 1
        if len(samples) < _MAX_REJECT_SAMPLES:
            samples.append((lineno, line.rstrip("\n"), reason))

    for lineno, line in enumerate(lines, start=1):
        total += 1
        if fmt == FORMAT_INSTANCES:
            text = normalize_query(line)
            if not text:
                reject(lineno, line, "empty query")
                continue
            counts[text] += 1
        else:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                reject(lineno, line, "expected query<TAB>count")
                continue
            text = normalize_query(parts[0])
            if not text:
                reject(lineno, line, "empty query")
                continue
            try:
                count = int(parts[1].strip())
            except ValueError:
                reject(lineno, line, f"count is not an integer: {parts[1].strip()!r}")
                continue
            if count < 1:
                reject(lineno, line, f"count must be >= 1, got {count}")
                continue
            counts[text] += count

    if total == 0 or not counts:
        raise IngestError("empty log")

    entries = [
        QueryLogEntry(text=t, frequency=f)
        for t, f in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return IngestResult(
        entries=entries,
        total_lines=total,
        accepted_lines=total - rejected,
        rejected_lines=rejected,
        reject_samples=samples,
    )
