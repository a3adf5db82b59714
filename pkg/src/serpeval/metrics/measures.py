"""Effectiveness measures over judged, engine-attributed result lists.

All ratios are computed in exact rational arithmetic (Fraction); report
writers convert to floats at the very end. An undefined measure (empty
denominator) is None, never 0 -- zero is a legitimate score.

Skipped entries and entries that were never judged contribute to no
denominator; that mirrors a study where jurors may skip and where failed
crawls leave results unjudgeable, and it makes the judged counts per
engine unequal by design.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

GRADES = (0, 1, 2, 3, 4)

BINARY_RELEVANT = "relevant"


@dataclass(frozen=True)
class Entry:
    """One ranked result with whatever judgments it inherited."""

    rank: int
    binary: str | None = None  # "relevant" | "not-relevant" | None
    graded: int | None = None
    skipped: bool = False
    fetch_failed: bool = False

    @property
    def has_binary(self) -> bool:
        return not self.skipped and self.binary is not None

    @property
    def has_grade(self) -> bool:
        return not self.skipped and self.graded is not None

    @property
    def relevant(self) -> bool:
        return self.has_binary and self.binary == BINARY_RELEVANT


@dataclass
class JudgedResultList:
    engine_id: str
    query: str
    entries: list[Entry] = field(default_factory=list)

    def __post_init__(self) -> None:
        ranks = [e.rank for e in self.entries]
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValueError(
                f"{self.engine_id}/{self.query}: ranks must be contiguous from 1, got {ranks}"
            )


@dataclass
class TargetedResultList:
    """A navigational query's ranked list with its single correct result."""

    engine_id: str
    query: str
    ranks: int  # how many results the engine returned
    target_rank: int | None  # rank of the one correct result, if present

    def __post_init__(self) -> None:
        if self.target_rank is not None and not (1 <= self.target_rank <= self.ranks):
            raise ValueError(
                f"{self.engine_id}/{self.query}: target rank {self.target_rank} "
                f"outside 1..{self.ranks}"
            )


def targeted_list(
    engine_id: str, query: str, flags: list[tuple[int, bool]]
) -> TargetedResultList:
    """Build a TargetedResultList from per-rank correctness flags.

    More than one flagged result violates the navigational definition
    (one single correct result per query) and is an error.
    """
    targets = [rank for rank, is_target in flags if is_target]
    if len(targets) > 1:
        raise ValueError(f"{engine_id}/{query}: multiple targets at ranks {targets}")
    return TargetedResultList(
        engine_id=engine_id,
        query=query,
        ranks=len(flags),
        target_rank=targets[0] if targets else None,
    )


def precision_at_k(result_list: JudgedResultList, k: int) -> Fraction | None:
    """Relevant share among binary-judged entries at ranks <= k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    judged = [e for e in result_list.entries if e.rank <= k and e.has_binary]
    if not judged:
        return None
    return Fraction(sum(1 for e in judged if e.relevant), len(judged))


def overall_relevant_ratio(lists: list[JudgedResultList]) -> Fraction | None:
    """Micro-average over every binary-judged entry across all queries."""
    judged = [e for rl in lists for e in rl.entries if e.has_binary]
    if not judged:
        return None
    return Fraction(sum(1 for e in judged if e.relevant), len(judged))


def macro_relevant_ratio(lists: list[JudgedResultList]) -> Fraction | None:
    """Mean of per-query relevant ratios (queries without binary judgments
    are excluded)."""
    per_query = [
        ratio
        for rl in lists
        if (ratio := overall_relevant_ratio([rl])) is not None
    ]
    if not per_query:
        return None
    return sum(per_query, Fraction(0)) / len(per_query)


def mean_graded_by_position(
    lists: list[JudgedResultList], max_rank: int | None = None
) -> tuple[dict[int, Fraction | None], dict[int, Fraction | None]]:
    """Per-rank grade means and the cumulative variant.

    cumulative[r] averages every grade at ranks <= r, which is the flat
    mean of the first r rank columns. Ranks with no graded entries are
    None (absent), not zero.
    """
    if max_rank is None:
        max_rank = max((e.rank for rl in lists for e in rl.entries), default=0)
    by_rank: dict[int, list[int]] = {r: [] for r in range(1, max_rank + 1)}
    for rl in lists:
        for entry in rl.entries:
            if entry.has_grade and entry.rank <= max_rank:
                by_rank[entry.rank].append(entry.graded)

    means: dict[int, Fraction | None] = {}
    cumulative: dict[int, Fraction | None] = {}
    running: list[int] = []
    for rank in range(1, max_rank + 1):
        grades = by_rank[rank]
        means[rank] = Fraction(sum(grades), len(grades)) if grades else None
        running.extend(grades)
        cumulative[rank] = Fraction(sum(running), len(running)) if running else None
    return means, cumulative


def grade_distribution(
    lists: list[JudgedResultList],
) -> tuple[dict[int, int], dict[int, Fraction] | None]:
    """Counts per grade 0..4 and their ratios over all graded entries."""
    counts = {grade: 0 for grade in GRADES}
    for rl in lists:
        for entry in rl.entries:
            if entry.has_grade:
                counts[entry.graded] += 1
    total = sum(counts.values())
    if total == 0:
        return counts, None
    return counts, {grade: Fraction(count, total) for grade, count in counts.items()}


def navigational_success_rate(verdicts: list[dict], engine_id: str) -> Fraction:
    """Correct share of an engine's navigational verdicts; queries with no
    result arrive as correct=false verdicts and so count against it."""
    mine = [v for v in verdicts if v["engine_id"] == engine_id]
    if not mine:
        raise ValueError(f"no verdicts for engine {engine_id!r}")
    return Fraction(sum(1 for v in mine if v["correct"]), len(mine))


def success_at_n(lists: list[TargetedResultList], n: int) -> Fraction | None:
    """Share of queries whose single correct result sits at rank <= n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not lists:
        return None
    hits = sum(1 for tl in lists if tl.target_rank is not None and tl.target_rank <= n)
    return Fraction(hits, len(lists))


def mean_reciprocal_rank(lists: list[TargetedResultList]) -> Fraction | None:
    """Mean of 1/target-rank, counting absent targets as 0."""
    if not lists:
        return None
    total = sum(
        (Fraction(1, tl.target_rank) if tl.target_rank is not None else Fraction(0))
        for tl in lists
    )
    return total / len(lists)


def url_overlap(
    urls_a: dict[str, list[str]], urls_b: dict[str, list[str]], k: int
) -> Fraction | None:
    """Mean Jaccard overlap of top-k URL sets over shared queries.

    urls_* map query -> ranked normalized URLs. Queries captured by both
    engines enter the mean; a query where both top-k sets are empty says
    nothing about overlap and is excluded.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    shared = sorted(set(urls_a) & set(urls_b))
    ratios: list[Fraction] = []
    for query in shared:
        top_a = set(urls_a[query][:k])
        top_b = set(urls_b[query][:k])
        union = top_a | top_b
        if not union:
            continue
        ratios.append(Fraction(len(top_a & top_b), len(union)))
    if not ratios:
        return None
    return sum(ratios, Fraction(0)) / len(ratios)
