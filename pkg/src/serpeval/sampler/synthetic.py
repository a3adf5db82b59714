"""Synthetic Zipf-shaped query logs.

Real query logs are long-tailed: a handful of queries account for a large
share of all instances. These generators produce that shape with an exact
instance total, which is what the validation suite and the demo study run
on when no real log is available.
"""

from __future__ import annotations

import random
from typing import Iterator

from .ingest import QueryLogEntry


def zipf_frequency_table(
    distinct: int, instances: int, s: float = 1.0
) -> list[QueryLogEntry]:
    """Frequency table with frequencies proportional to 1/rank**s.

    Rounding uses largest remainders so the total is exactly ``instances``;
    every query keeps at least one instance. Requires
    ``instances >= distinct``.
    """
    if distinct < 1:
        raise ValueError("distinct must be >= 1")
    if instances < distinct:
        raise ValueError("instances must be >= distinct (every query occurs at least once)")

    weights = [1.0 / (rank**s) for rank in range(1, distinct + 1)]
    scale = instances / sum(weights)
    raw = [w * scale for w in weights]
    freqs = [max(1, int(r)) for r in raw]

    # Largest-remainder correction toward the exact total. Ranks are
    # adjusted head-first so the monotone non-increasing shape survives.
    deficit = instances - sum(freqs)
    if deficit > 0:
        remainders = sorted(
            range(distinct), key=lambda i: (-(raw[i] - int(raw[i])), i)
        )
        i = 0
        while deficit > 0:
            freqs[remainders[i % distinct]] += 1
            deficit -= 1
            i += 1
    elif deficit < 0:
        # Overshoot comes from the max(1, ...) clamp in the tail; take the
        # excess back from the head, never dropping below the next rank.
        while deficit < 0:
            for i in range(distinct):
                nxt = freqs[i + 1] if i + 1 < distinct else 1
                if freqs[i] > max(1, nxt):
                    freqs[i] -= 1
                    deficit += 1
                    break
            else:  # pragma: no cover - sum(1s) == distinct <= instances
                raise AssertionError("cannot reconcile instance total")

    # Re-sort defensively: largest-remainder bumps can swap neighbors.
    freqs.sort(reverse=True)

    width = len(str(distinct))
    return [
        QueryLogEntry(text=f"query {rank:0{width}d}", frequency=freq)
        for rank, freq in enumerate(freqs, start=1)
    ]


def zipf_instance_lines(
    distinct: int, instances: int, s: float = 1.0, seed: int = 0
) -> Iterator[str]:
    """The same table expanded to one instance per line, shuffled.

    Streams a realistic raw log for exercising the ``instances`` ingest
    path. Order is deterministic for a fixed seed.
    """
    table = zipf_frequency_table(distinct, instances, s)
    lines = [e.text for e in table for _ in range(e.frequency)]
    random.Random(seed).shuffle(lines)
    return iter(lines)
