"""Independent brute-force recomputation of every measure.

Everything here works on raw dicts with explicit loops and never imports
the metrics implementation, so agreement between the two is meaningful.
Fractions keep the comparison exact (tolerance zero).
"""

import random
from fractions import Fraction


def oracle_precision_at_k(entries, k):
    num = den = 0
    for e in entries:
        if e["rank"] <= k and not e["skipped"] and e["binary"] is not None:
            den += 1
            if e["binary"] == "relevant":
                num += 1
    return Fraction(num, den) if den else None


def oracle_overall_ratio(queries):
    num = den = 0
    for entries in queries:
        for e in entries:
            if not e["skipped"] and e["binary"] is not None:
                den += 1
                if e["binary"] == "relevant":
                    num += 1
    return Fraction(num, den) if den else None


def oracle_macro_ratio(queries):
    ratios = []
    for entries in queries:
        r = oracle_overall_ratio([entries])
        if r is not None:
            ratios.append(r)
    if not ratios:
        return None
    total = Fraction(0)
    for r in ratios:
        total += r
    return total / len(ratios)


def oracle_macro_precision_at_k(queries, k):
    values = []
    for entries in queries:
        p = oracle_precision_at_k(entries, k)
        if p is not None:
            values.append(p)
    if not values:
        return None
    total = Fraction(0)
    for v in values:
        total += v
    return total / len(values)


def oracle_mean_graded(queries, max_rank):
    means = {}
    cumulative = {}
    for r in range(1, max_rank + 1):
        at_r = []
        upto_r = []
        for entries in queries:
            for e in entries:
                if e["skipped"] or e["graded"] is None:
                    continue
                if e["rank"] == r:
                    at_r.append(e["graded"])
                if e["rank"] <= r:
                    upto_r.append(e["graded"])
        means[r] = Fraction(sum(at_r), len(at_r)) if at_r else None
        cumulative[r] = Fraction(sum(upto_r), len(upto_r)) if upto_r else None
    return means, cumulative


def oracle_grade_histogram(queries):
    counts = {g: 0 for g in range(5)}
    for entries in queries:
        for e in entries:
            if not e["skipped"] and e["graded"] is not None:
                counts[e["graded"]] += 1
    total = sum(counts.values())
    ratios = {g: Fraction(c, total) for g, c in counts.items()} if total else None
    return counts, ratios


def oracle_success_rate(verdicts, engine):
    mine = [v for v in verdicts if v["engine_id"] == engine]
    if not mine:
        return None
    return Fraction(sum(1 for v in mine if v["correct"]), len(mine))


def oracle_success_at_n(targets, n):
    if not targets:
        return None
    hits = 0
    for t in targets:
        if t is not None and t <= n:
            hits += 1
    return Fraction(hits, len(targets))


def oracle_mrr(targets):
    if not targets:
        return None
    total = Fraction(0)
    for t in targets:
        if t is not None:
            total += Fraction(1, t)
    return total / len(targets)


def oracle_url_overlap(urls_a, urls_b, k):
    ratios = []
    for query in set(urls_a) & set(urls_b):
        a = set(urls_a[query][:k])
        b = set(urls_b[query][:k])
        if a or b:
            ratios.append(Fraction(len(a & b), len(a | b)))
    if not ratios:
        return None
    total = Fraction(0)
    for r in ratios:
        total += r
    return total / len(ratios)


def random_micro_study(rng: random.Random, max_queries=5, max_results=5):
    """A tiny two-engine study with random judgments, skips and gaps."""
    engines = ["eng-a", "eng-b"]
    n_queries = rng.randint(1, max_queries)
    study = {"engines": engines, "queries": {}, "verdicts": [], "targets": {}}
    url_pool = [f"https://d{i:02d}.example.de/" for i in range(12)]

    for qi in range(n_queries):
        query = f"query {qi}"
        per_engine = {}
        for engine in engines:
            n = rng.randint(0, max_results)
            urls = rng.sample(url_pool, n)
            entries = []
            for rank, url in enumerate(urls, start=1):
                kind = rng.random()
                if kind < 0.15:
                    entry = {"rank": rank, "binary": None, "graded": None,
                             "skipped": True, "url": url}
                elif kind < 0.30:  # never judged
                    entry = {"rank": rank, "binary": None, "graded": None,
                             "skipped": False, "url": url}
                else:
                    binary = rng.choice(["relevant", "not-relevant", None])
                    graded = rng.choice([0, 1, 2, 3, 4, None])
                    if binary is None and graded is None:
                        binary = "relevant"
                    entry = {"rank": rank, "binary": binary, "graded": graded,
                             "skipped": False, "url": url}
                entries.append(entry)
            per_engine[engine] = entries
        study["queries"][query] = per_engine

    for engine in engines:
        targets = []
        for vi in range(rng.randint(0, max_queries)):
            n_ranks = rng.randint(0, max_results)
            target = rng.choice([None] + list(range(1, n_ranks + 1))) if n_ranks else None
            targets.append((n_ranks, target))
            study["verdicts"].append(
                {
                    "query": f"nav {vi}",
                    "engine_id": engine,
                    "correct": target == 1,
                }
            )
        study["targets"][engine] = targets
    return study
