"""Equal-volume popularity segmentation of a frequency table.

The sorted table is cut into K contiguous segments whose instance counts
(frequencies summed, duplicates included) are as close to T/K each as
whole queries allow. Queries are atomic: a query's instances are never
split across segments, so boundaries carry an unavoidable slack bounded
by the boundary queries' frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ingest import QueryLogEntry


class SegmentationError(ValueError):
    pass


@dataclass
class PopularitySegment:
    """A contiguous run of the popularity-sorted table.

    index is 1-based; segment 1 holds the most popular queries.
    """

    index: int
    entries: list[QueryLogEntry]

    @property
    def instance_count(self) -> int:
        return sum(e.frequency for e in self.entries)

    @property
    def distinct_count(self) -> int:
        return len(self.entries)

    @property
    def texts(self) -> list[str]:
        return [e.text for e in self.entries]


def segment_by_popularity(entries: list[QueryLogEntry], k: int) -> list[PopularitySegment]:
    """Partition a popularity-sorted table into k equal-volume segments.

    Walking the sorted list, the next query joins segment i while doing so
    keeps the cumulative instance count at least as close to the ideal
    boundary i*T/k as deferring the query to segment i+1 would. Each
    segment takes at least one query, and enough queries are held back so
    no later segment ends up empty.
    """
    if k < 1:
        raise SegmentationError(f"k must be >= 1, got {k}")
    if not entries:
        raise SegmentationError("empty frequency table")
    if k > len(entries):
        raise SegmentationError(
            f"too few distinct queries: {len(entries)} distinct for {k} segments"
        )

    total = sum(e.frequency for e in entries)
    segments: list[PopularitySegment] = []
    pos = 0
    cumulative = 0

    for index in range(1, k + 1):
        members: list[QueryLogEntry] = []
        # Ideal cumulative volume once this segment closes. Kept as an
        # exact rational via cross-multiplication below.
        remaining_segments = k - index
        while pos < len(entries):
            # Hold back one query per unfilled later segment.
            if members and len(entries) - pos <= remaining_segments:
                break
            entry = entries[pos]
            if members:
                # |cum + f - iT/k| <= |cum - iT/k|, compared exactly:
                # multiply through by k to stay in integers.
                with_q = abs((cumulative + entry.frequency) * k - index * total)
                without_q = abs(cumulative * k - index * total)
                if with_q > without_q:
                    break
            members.append(entry)
            cumulative += entry.frequency
            pos += 1
        segments.append(PopularitySegment(index=index, entries=members))

    # All entries consumed: the last segment absorbs any remainder by
    # construction (its boundary is exactly T, so adding never hurts).
    if pos != len(entries):
        segments[-1].entries.extend(entries[pos:])

    return segments
