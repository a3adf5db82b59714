#!/usr/bin/env python3
"""Construct the shipped demo study fixtures and their answer sheet.

This script is the provenance of everything under fixtures/demo/. It
builds a miniature study (60 sampled queries, two replay engines) whose
every downstream number is computed HERE, with plain loops over the
planned judgments -- deliberately not importing the package, so the
shipped answer_sheet.json is an independent oracle for the pipeline.

Design of the demo log (chosen so sampling is exact, with no dependence
on the sampler's RNG):

  segment 1: 21 distinct queries x freq 88 = 1848 instances
  segment 2: 22 distinct queries x freq 84 = 1848 instances
  segment 3: 24 distinct queries x freq 77 = 1848 instances

Equal block volumes put the three segment boundaries exactly on the block
edges, and each segment holds exactly 10 informational + 10 navigational
labeled queries (the rest are other/transactional), so the per-intent
target of 10 takes all of them deterministically.

Run from the repository root:  python3 tools/build_demo_fixtures.py
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from urllib.parse import quote

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "demo"

ENGINE_A = "srch-aq"
ENGINE_B = "srch-bo"
DISPLAY_A = "AQ Suche"
DISPLAY_B = "BO Suche"

SEED = 20110601
ACCESS_CODE = "demo-juror-code"
ADMIN_TOKEN = "demo-admin-token"
REDIRECTOR_HOST = "umleitung.example.net"
REDIRECTOR_PARAM = "ziel"

# -- the query sample ------------------------------------------------------------

INFO_QUERIES = {
    1: [
        "wetter", "nachrichten", "horoskop", "routenplaner", "fernsehprogramm",
        "lottozahlen", "rezepte", "stau", "bundesliga tabelle", "goldpreis",
    ],
    2: [
        "wetter berlin", "kindergeld antrag", "grippe symptome", "steuererklärung frist",
        "mindestlohn höhe", "reisewarnungen italien", "führerschein umtauschen",
        "nebenkosten abrechnung", "impfung auffrischung", "handytarife vergleich",
    ],
    3: [
        "symptome eisenmangel müdigkeit", "ferienwohnung ostsee mit hund",
        "bewerbung anschreiben muster ausbildung", "druckerpatrone wechseln anleitung",
        "wanderwege schwarzwald mittelschwer", "kuchen ohne zucker backen",
        "fahrrad schaltung einstellen", "zimmerpflanzen wenig licht",
        "gehalt erzieherin teilzeit", "heizung entlüften reihenfolge",
    ],
}

NAV_QUERIES = {
    1: [
        "telekom", "postbank", "bahn", "zdf mediathek", "spiegel online",
        "tagesschau", "gmx login", "wikipedia", "arbeitsagentur", "dhl sendungsverfolgung",
    ],
    2: [
        "stadt köln bürgeramt", "vhs münchen programm", "adac pannenhilfe",
        "barmer krankenkasse", "ikea katalog", "commerzbank banking",
        "eventim tickets", "uni hamburg bewerbung", "kicker liveticker",
        "chefkoch profil",
    ],
    3: [
        "stadtwerke bochum kundenportal", "volksbank raiffeisenbank eg anmeldung",
        "landratsamt traunstein zulassung", "musikschule dresden anmeldung",
        "tierheim nürnberg hunde", "schwimmbad oeffnungszeiten lünen",
        "theater bremen spielplan", "waldkindergarten freiburg verein",
        "fahrschule meyer kiel", "bibliothek jena ausleihe",
    ],
}

OTHER_QUERIES = {
    1: [("gratis spiele", "transactional")],
    2: [("mp3 download kostenlos", "transactional"), ("asdf", "other")],
    3: [
        ("klingelton kaufen android", "transactional"),
        ("gutschein code versand", "transactional"),
        ("jfkdls", "other"),
        ("was", "other"),
    ],
}

SEGMENT_FREQ = {1: 88, 2: 84, 3: 77}


def slugify(query: str) -> str:
    out = query
    for src, dst in (("ä", "ae"), ("ö", "oe"), ("ü", "ue"), ("ß", "ss"), (" ", "-")):
        out = out.replace(src, dst)
    return out


# -- SERP construction -------------------------------------------------------------
#
# Per informational query: three shared URLs plus seven engine-specific
# ones each, with special cases planted on specific queries (keyed by the
# query's position in the flat informational list):
#
#   index  3: one shared URL's snapshot times out (jurors skip it)
#   index  5: a voluntary juror skip on one of B's URLs
#   index  7: one of A's URLs returns http-500 (skipped)
#   index  9: one of A's URLs gets a binary judgment but no grade
#   index 11: one of B's URLs gets a grade but no binary judgment
#   index 13: B wraps one URL in a resolvable redirector and returns one
#             unresolvable redirector (dropped from pooling, counted)
#   index 15: A returns only 7 results (short capture)
#   index 17: the first shared URL's page carries external subresources
#             (sandbox test bait for the juror UI)
#   index 21: both engines return nothing (unanswered query)

EXTERNAL_BAIT = (
    "<script src=\"https://evil-extern.example.com/x.js\"></script>"
    "<img src=\"https://evil-extern.example.com/pixel.gif\">"
)


def build_serps():
    """Returns (serps, pages, plan, special) keyed by query."""
    flat_info = [q for seg in (1, 2, 3) for q in INFO_QUERIES[seg]]
    serps: dict[str, dict[str, list[dict]]] = {}
    pages: dict[str, dict] = {}
    plan: dict[str, dict[str, dict]] = {}

    for index, query in enumerate(flat_info, start=1):
        slug = slugify(query)
        shared = [
            f"https://www.{slug}-portal.example.de/",
            f"https://{slug}.example.de/info",
            f"https://www.lexikon.example.de/artikel/{slug}",
        ]
        a_only = [f"https://site-{i}.{slug}.example.de/seite" for i in range(1, 8)]
        b_only = [f"https://dienst-{i}.{slug}.example.org/beitrag" for i in range(1, 8)]

        if index == 21:
            serps[query] = {ENGINE_A: [], ENGINE_B: []}
            plan[query] = {}
            continue

        # interleave shared URLs at rotating positions
        rotation = index % 3
        a_ranked = list(a_only)
        b_ranked = list(b_only)
        a_positions = [(0 + rotation) % 10, (3 + rotation) % 10, (7 + rotation) % 10]
        b_positions = [(1 + rotation) % 10, (4 + rotation) % 10, (8 + rotation) % 10]
        for url, pos in zip(shared, sorted(a_positions)):
            a_ranked.insert(pos, url)
        for url, pos in zip(shared, sorted(b_positions)):
            b_ranked.insert(pos, url)
        a_ranked = a_ranked[:10]
        b_ranked = b_ranked[:10]

        if index == 15:
            a_ranked = a_ranked[:7]
            for url in shared:
                if url not in a_ranked:
                    a_ranked[6] = url  # keep all three shared URLs in play

        raw_b = {url: url for url in b_ranked}
        if index == 13:
            # rank 4 arrives wrapped in a working redirector; the last rank
            # is an unresolvable one (the tracking-URL failure mode)
            target = b_ranked[3]
            raw_b[target] = (
                f"https://{REDIRECTOR_HOST}/r?sig=x&{REDIRECTOR_PARAM}="
                + quote(target, safe="")
            )
            broken = f"https://{REDIRECTOR_HOST}/r?sig=only"
            raw_b[broken] = broken
            b_ranked = b_ranked[:9] + [broken]

        serps[query] = {
            ENGINE_A: [
                {"rank": r, "raw_url": url, "resolved": url}
                for r, url in enumerate(a_ranked, start=1)
            ],
            ENGINE_B: [
                {
                    "rank": r,
                    "raw_url": raw_b[url],
                    "resolved": None if url.startswith(f"https://{REDIRECTOR_HOST}") else url,
                }
                for r, url in enumerate(b_ranked, start=1)
            ],
        }

        # page bodies (identical in both engine fixtures)
        for url in set(a_ranked) | set(b_ranked):
            if url.startswith(f"https://{REDIRECTOR_HOST}"):
                continue
            bait = EXTERNAL_BAIT if (index == 17 and url == shared[0]) else ""
            pages[url] = {
                "body": (
                    f"<html><head><title>{slug}</title></head>"
                    f"<body><h1>{slug}</h1><p>inhalt zu {query}</p>{bait}</body></html>"
                ),
                "content_type": "text/html; charset=utf-8",
                "status": "ok",
            }
        if index == 3:
            pages[shared[1]] = {"status": "timeout"}
        if index == 7:
            pages[a_only[2]] = {"status": "http-500"}

        # the judgment plan, per pooled URL
        query_plan: dict[str, dict] = {}
        for pos, url in enumerate(shared):
            query_plan[url] = {"binary": "relevant", "graded": [4, 3, 2][pos]}
        for pos, url in enumerate(a_only):
            relevant = pos < 5  # 5 of 7 engine-specific results relevant
            query_plan[url] = {
                "binary": "relevant" if relevant else "not-relevant",
                "graded": [4, 3, 3, 2, 2, 1, 0][pos],
            }
        for pos, url in enumerate(b_only):
            relevant = pos < (5 if index % 2 else 4)
            query_plan[url] = {
                "binary": "relevant" if relevant else "not-relevant",
                "graded": [4, 3, 2, 2, 1, 1, 0][pos],
            }
        if index == 3:
            query_plan[shared[1]] = {"skipped": True}
        if index == 7:
            query_plan[a_only[2]] = {"skipped": True}
        if index == 5:
            query_plan[b_only[1]] = {"skipped": True}
        if index == 9:
            query_plan[a_only[0]] = {"binary": "relevant", "graded": None}
        if index == 11:
            query_plan[b_only[3]] = {"binary": None, "graded": 3}
        plan[query] = query_plan

    return serps, pages, plan


def build_navigational():
    """Returns (serps, pages, key, wrong) for the navigational half."""
    flat_nav = [q for seg in (1, 2, 3) for q in NAV_QUERIES[seg]]
    a_wrong = {flat_nav[4], flat_nav[11], flat_nav[18]}  # 3 misses
    b_wrong = {flat_nav[2], flat_nav[10], flat_nav[16], flat_nav[21], flat_nav[27], flat_nav[29]}
    b_missing = {flat_nav[6]}  # engine B returns nothing at all

    serps = {}
    pages = {}
    key = {}
    for query in flat_nav:
        slug = slugify(query)
        target = f"https://www.{slug}.example.de/"
        decoy = f"https://verzeichnis.example.org/{slug}"
        key[query] = target
        for url, title in ((target, slug), (decoy, f"{slug} eintrag")):
            pages[url] = {
                "body": f"<html><head><title>{title}</title></head>"
                f"<body><h1>{title}</h1></body></html>",
                "content_type": "text/html; charset=utf-8",
                "status": "ok",
            }
        a_url = decoy if query in a_wrong else target
        b_url = decoy if query in b_wrong else target
        serps[query] = {
            ENGINE_A: [{"rank": 1, "raw_url": a_url, "resolved": a_url}],
            ENGINE_B: []
            if query in b_missing
            else [{"rank": 1, "raw_url": b_url, "resolved": b_url}],
        }
    return serps, pages, key, (a_wrong, b_wrong, b_missing)


# -- answer sheet (independent recomputation) -------------------------------------------


def compute_answer_sheet(info_serps, plan, nav_serps, nav_key, pages):
    flat_info = [q for seg in (1, 2, 3) for q in INFO_QUERIES[seg]]
    engines = sorted([ENGINE_A, ENGINE_B])

    def judgment_for(query, url):
        entry = plan[query].get(url)
        if entry is None:
            return None
        return {
            "binary": entry.get("binary"),
            "graded": entry.get("graded"),
            "skipped": entry.get("skipped", False),
        }

    informational = {}
    url_maps = {}
    for engine in engines:
        queries = []
        url_map = {}
        for query in flat_info:
            entries = []
            urls = []
            for record in info_serps[query][engine]:
                url = record["resolved"]
                if url is None:
                    entries.append(
                        {"rank": record["rank"], "binary": None, "graded": None,
                         "skipped": False, "failed": True}
                    )
                    continue
                urls.append(url)
                judgment = judgment_for(query, url)
                fetch_failed = pages.get(url, {}).get("status", "ok") != "ok"
                if judgment is None:
                    entries.append(
                        {"rank": record["rank"], "binary": None, "graded": None,
                         "skipped": False, "failed": fetch_failed}
                    )
                else:
                    entries.append(
                        {
                            "rank": record["rank"],
                            "binary": judgment["binary"],
                            "graded": judgment["graded"],
                            "skipped": judgment["skipped"],
                            "failed": fetch_failed,
                        }
                    )
            queries.append(entries)
            url_map[query] = urls
        url_maps[engine] = url_map

        def ratio(num, den):
            return float(Fraction(num, den)) if den else None

        judged = [e for q in queries for e in q if not e["skipped"] and e["binary"] is not None]
        overall = ratio(sum(1 for e in judged if e["binary"] == "relevant"), len(judged))

        per_query_ratios = []
        for q in queries:
            qj = [e for e in q if not e["skipped"] and e["binary"] is not None]
            if qj:
                per_query_ratios.append(
                    Fraction(sum(1 for e in qj if e["binary"] == "relevant"), len(qj))
                )
        macro = (
            float(sum(per_query_ratios, Fraction(0)) / len(per_query_ratios))
            if per_query_ratios
            else None
        )

        precision = {}
        macro_precision = {}
        for k in range(1, 11):
            jk = [e for q in queries for e in q
                  if e["rank"] <= k and not e["skipped"] and e["binary"] is not None]
            precision[str(k)] = ratio(
                sum(1 for e in jk if e["binary"] == "relevant"), len(jk)
            )
            per_q = []
            for q in queries:
                qk = [e for e in q if e["rank"] <= k and not e["skipped"]
                      and e["binary"] is not None]
                if qk:
                    per_q.append(
                        Fraction(sum(1 for e in qk if e["binary"] == "relevant"), len(qk))
                    )
            macro_precision[str(k)] = (
                float(sum(per_q, Fraction(0)) / len(per_q)) if per_q else None
            )

        means = {}
        cumulative = {}
        for r in range(1, 11):
            at_r = [e["graded"] for q in queries for e in q
                    if e["rank"] == r and not e["skipped"] and e["graded"] is not None]
            upto = [e["graded"] for q in queries for e in q
                    if e["rank"] <= r and not e["skipped"] and e["graded"] is not None]
            means[str(r)] = float(Fraction(sum(at_r), len(at_r))) if at_r else None
            cumulative[str(r)] = float(Fraction(sum(upto), len(upto))) if upto else None

        histogram = {str(g): 0 for g in range(5)}
        for q in queries:
            for e in q:
                if not e["skipped"] and e["graded"] is not None:
                    histogram[str(e["graded"])] += 1
        graded_total = sum(histogram.values())
        grade_ratios = (
            {g: float(Fraction(c, graded_total)) for g, c in histogram.items()}
            if graded_total
            else None
        )

        coverage = {"judged": 0, "skipped": 0, "failed": 0, "unjudged": 0,
                    "binary_judged": 0, "graded_judged": 0, "total": 0}
        for q in queries:
            for e in q:
                coverage["total"] += 1
                has_binary = not e["skipped"] and e["binary"] is not None
                has_grade = not e["skipped"] and e["graded"] is not None
                coverage["binary_judged"] += has_binary
                coverage["graded_judged"] += has_grade
                if has_binary or has_grade:
                    coverage["judged"] += 1
                elif e["skipped"]:
                    coverage["skipped"] += 1
                elif e["failed"]:
                    coverage["failed"] += 1
                else:
                    coverage["unjudged"] += 1

        informational[engine] = {
            "overall_relevant_ratio": overall,
            "macro_relevant_ratio": macro,
            "precision_at_k": precision,
            "macro_precision_at_k": macro_precision,
            "mean_graded_by_position": means,
            "cumulative_graded_by_position": cumulative,
            "grade_histogram": histogram,
            "grade_ratios": grade_ratios,
            "queries": len(queries),
            "unanswered_queries": sum(1 for q in queries if not q),
            "coverage": coverage,
        }

    navigational = {}
    for engine in engines:
        correct = 0
        total = 0
        targets = []
        for query, by_engine in nav_serps.items():
            records = by_engine[engine]
            total += 1
            if not records:
                targets.append(None)
                continue
            hit = records[0]["resolved"] == nav_key[query]
            correct += hit
            targets.append(1 if hit else None)
        navigational[engine] = {
            "success_rate": float(Fraction(correct, total)),
            "verdicts": total,
            "success_at_n": {"1": float(Fraction(correct, total))},
            "mean_reciprocal_rank": float(
                sum((Fraction(1, t) if t else Fraction(0)) for t in targets)
                / len(targets)
            ),
        }

    jaccards = []
    for query in flat_info:
        a = set(url_maps[ENGINE_A][query][:10])
        b = set(url_maps[ENGINE_B][query][:10])
        if a | b:
            jaccards.append(Fraction(len(a & b), len(a | b)))
    overlap = [
        {
            "engine_a": engines[0],
            "engine_b": engines[1],
            "k": 10,
            "jaccard": float(sum(jaccards, Fraction(0)) / len(jaccards)),
        }
    ]

    return {
        "informational": informational,
        "navigational": navigational,
        "overlap": overlap,
        "expected_vouchers": sum(
            1 for q in flat_info if plan[q]  # every non-empty task completes
        ),
    }


# -- file emission -----------------------------------------------------------------


def write_files():
    OUT.mkdir(parents=True, exist_ok=True)

    info_serps, info_pages, plan = build_serps()
    nav_serps, nav_pages, nav_key, _ = build_navigational()
    pages = {**info_pages, **nav_pages}

    # query log (aggregate format) + labels
    log_lines = []
    label_lines = ["# query<TAB>intent"]
    sample_rows = []
    for segment in (1, 2, 3):
        freq = SEGMENT_FREQ[segment]
        block = (
            [(q, "informational") for q in INFO_QUERIES[segment]]
            + [(q, "navigational") for q in NAV_QUERIES[segment]]
            + [(q, intent) for q, intent in OTHER_QUERIES[segment]]
        )
        for query, intent in block:
            log_lines.append(f"{query}\t{freq}")
            label_lines.append(f"{query}\t{intent}")
            if intent in ("informational", "navigational"):
                sample_rows.append((segment, intent, query))
    (OUT / "query_log.tsv").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    (OUT / "labels.tsv").write_text("\n".join(label_lines) + "\n", encoding="utf-8")

    sample_rows.sort()
    (OUT / "expected_sample.tsv").write_text(
        "\n".join(f"{q}\t{seg}\t{intent}\t{SEED}" for seg, intent, q in sample_rows) + "\n",
        encoding="utf-8",
    )

    # engine fixtures (identical page maps so shared URLs agree)
    for engine in (ENGINE_A, ENGINE_B):
        results = []
        for serp_map in (info_serps, nav_serps):
            for query in serp_map:
                for record in serp_map[query][engine]:
                    results.append(
                        {
                            "query": query,
                            "rank": record["rank"],
                            "raw_url": record["raw_url"],
                            "title": f"treffer {record['rank']}",
                            "snippet": f"auszug zu {query}",
                        }
                    )
        fixture = {"results": results, "pages": pages}
        (OUT / f"{engine}.json").write_text(
            json.dumps(fixture, ensure_ascii=False, indent=1), encoding="utf-8"
        )

    (OUT / "judgment_plan.json").write_text(
        json.dumps(plan, ensure_ascii=False, indent=1, sort_keys=True), encoding="utf-8"
    )
    (OUT / "navigational_key.json").write_text(
        json.dumps(nav_key, ensure_ascii=False, indent=1, sort_keys=True), encoding="utf-8"
    )

    sheet = compute_answer_sheet(info_serps, plan, nav_serps, nav_key, pages)
    (OUT / "answer_sheet.json").write_text(
        json.dumps(sheet, ensure_ascii=False, indent=1, sort_keys=True), encoding="utf-8"
    )

    config = {
        "version": 1,
        "study_id": "demo-study",
        "run_id": "demo-run",
        "seed": SEED,
        "store_dir": "demo-store",
        "log": {"path": "query_log.tsv", "format": "aggregate"},
        "labels_path": "labels.tsv",
        "segments": 3,
        "candidates_per_segment": 360,
        "target_per_intent": 10,
        "depth_policy": {"navigational": 1, "informational": 10},
        "concurrency": 1,
        "failure_threshold": 0.2,
        "tracking_patterns": [
            {"host": REDIRECTOR_HOST, "param": REDIRECTOR_PARAM}
        ],
        "engines": [
            {
                "engine_id": ENGINE_A,
                "display_name": DISPLAY_A,
                "adapter": "replay-fixture",
                "fixture_path": f"{ENGINE_A}.json",
            },
            {
                "engine_id": ENGINE_B,
                "display_name": DISPLAY_B,
                "adapter": "replay-fixture",
                "fixture_path": f"{ENGINE_B}.json",
            },
        ],
        "access_code": ACCESS_CODE,
        "admin_token": ADMIN_TOKEN,
        "lease_minutes": 60,
        "voucher_threshold": 0.9,
        "clock": {"type": "fixed", "at": "2011-06-01T00:00:00Z"},
    }
    (OUT / "config.json").write_text(
        json.dumps(config, ensure_ascii=False, indent=1), encoding="utf-8"
    )

    print(f"wrote demo fixtures to {OUT}")


if __name__ == "__main__":
    write_files()
