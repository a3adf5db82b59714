"""Candidate draws and the per-intent study sample.

All randomness is seeded and derived: a draw is a pure function of
(segment contents, n, seed), and the final sample is a pure function of
the labeled candidates, the targets, and the seed. Sub-seeds are derived
per segment and intent so the draws are independent but reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .intents import Intent, LabeledQuery, STUDY_INTENTS, parse_intent
from .segmentation import PopularitySegment


@dataclass(frozen=True)
class SampledQuery:
    text: str
    segment_index: int
    intent: Intent
    draw_seed: int


@dataclass
class SampleResult:
    queries: list[SampledQuery]
    # (segment_index, intent, candidates available, target) where the
    # segment could not fill its quota; mirrors head-segment exhaustion.
    shortfalls: list[tuple[int, Intent, int, int]] = field(default_factory=list)


def _derived_rng(seed: int, *scope: object) -> random.Random:
    # str-seeding is stable across runs and platforms (no hash randomization).
    return random.Random(f"{seed}/" + "/".join(str(s) for s in scope))


def draw_candidates(segment: PopularitySegment, n: int, seed: int) -> list[str]:
    """Uniform draw without replacement over the segment's distinct queries.

    Segments with fewer than n distinct queries are returned whole. The
    result is sorted by the segment's own order to keep output stable.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    texts = segment.texts
    if len(texts) <= n:
        return list(texts)
    rng = _derived_rng(seed, "draw", segment.index)
    chosen = set(rng.sample(range(len(texts)), n))
    return [t for i, t in enumerate(texts) if i in chosen]


def build_sample(
    labeled_segments: list[tuple[int, list[LabeledQuery]]],
    target_per_intent: int,
    seed: int,
) -> SampleResult:
    """Down-sample each segment's labeled candidates to the per-intent target.

    Only informational and navigational queries are admitted; other intents
    are recorded by the caller but excluded here. Segments whose candidate
    pool is smaller than the target contribute everything they have, and
    the shortfall is reported (a warning, not an error).
    """
    if target_per_intent < 1:
        raise ValueError(f"target must be >= 1, got {target_per_intent}")

    queries: list[SampledQuery] = []
    shortfalls: list[tuple[int, Intent, int, int]] = []

    for segment_index, labeled in labeled_segments:
        for intent in STUDY_INTENTS:
            matching = [lq.text for lq in labeled if lq.intent is intent]
            if len(matching) > target_per_intent:
                rng = _derived_rng(seed, "sample", segment_index, intent.value)
                keep = set(rng.sample(range(len(matching)), target_per_intent))
                selected = [t for i, t in enumerate(matching) if i in keep]
            else:
                selected = matching
                if len(matching) < target_per_intent:
                    shortfalls.append(
                        (segment_index, intent, len(matching), target_per_intent)
                    )
            queries.extend(
                SampledQuery(
                    text=t, segment_index=segment_index, intent=intent, draw_seed=seed
                )
                for t in selected
            )

    queries.sort(key=lambda q: (q.segment_index, q.intent.value, q.text))
    return SampleResult(queries=queries, shortfalls=shortfalls)


def write_sample_file(queries: list[SampledQuery], path: Path) -> None:
    """Tab-separated ``query<TAB>segment<TAB>intent<TAB>seed``."""
    lines = [f"{q.text}\t{q.segment_index}\t{q.intent.value}\t{q.draw_seed}" for q in queries]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_sample_file(path: Path) -> list[SampledQuery]:
    queries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
        queries.append(
            SampledQuery(
                text=parts[0],
                segment_index=int(parts[1]),
                intent=parse_intent(parts[2]),
                draw_seed=int(parts[3]),
            )
        )
    return queries
