"""Shared builders for study-layer tests.

Most study tests need the same scaffolding: a replay collection run in a
temp store and a service on top of it. The builders here construct both
from compact descriptions like {"q1": {"alpha": [urls...], "bravo": [...]}}.
"""

import json

import pytest

from serpeval.clock import FixedClock
from serpeval.collector import DepthPolicy, EngineConfig, run_collection
from serpeval.sampler import Intent, SampledQuery
from serpeval.store import FileStore
from serpeval.study import StudyService

CLOCK = FixedClock("2011-06-01T00:00:00Z")
ACCESS_CODE = "study-code-2011"
ADMIN_TOKEN = "admin-token-2011"


def build_run(
    tmp_path,
    serps,
    intents=None,
    pages=None,
    engine_ids=("srch-alpha", "srch-bravo"),
    run_id="run1",
    store=None,
):
    """serps: {query: {engine_id: [url, ...]}}; pages: {url: status or body}."""
    intents = intents or {}
    store = store or FileStore(tmp_path / "store")
    engines = []
    for engine_id in engine_ids:
        results = []
        for query, by_engine in serps.items():
            for rank, url in enumerate(by_engine.get(engine_id, []), start=1):
                results.append(
                    {
                        "query": query,
                        "rank": rank,
                        "raw_url": url,
                        "title": f"title {rank}",
                        "snippet": f"snippet {rank}",
                    }
                )
        page_map = {}
        for by_engine in serps.values():
            for url in by_engine.get(engine_id, []):
                spec = (pages or {}).get(url, "ok")
                if spec == "ok":
                    page_map[url] = {"body": f"<html>page at {url}</html>", "status": "ok"}
                elif isinstance(spec, dict):
                    page_map[url] = spec
                else:
                    page_map[url] = {"status": spec}
        fixture = tmp_path / f"fixture-{engine_id}.json"
        fixture.write_text(json.dumps({"results": results, "pages": page_map}))
        engines.append(
            EngineConfig(
                engine_id=engine_id,
                display_name=f"Engine {engine_id[-5:].title()}",
                adapter="replay-fixture",
                fixture_path=str(fixture),
            )
        )

    sample = [
        SampledQuery(
            text=query,
            segment_index=1,
            intent=intents.get(query, Intent.INFORMATIONAL),
            draw_seed=0,
        )
        for query in serps
    ]
    run = run_collection(sample, engines, DepthPolicy(), store, run_id, clock=CLOCK)
    return store, run


def build_service(tmp_path, serps, intents=None, pages=None, seed=42, **kwargs):
    store, run = build_run(tmp_path, serps, intents=intents, pages=pages)
    service = StudyService.create(
        store,
        "study1",
        run,
        seed=seed,
        access_code=ACCESS_CODE,
        admin_token=ADMIN_TOKEN,
        clock=CLOCK,
        **kwargs,
    )
    return store, run, service


@pytest.fixture
def urls10():
    return [f"https://site{i:02d}.example.de/page" for i in range(1, 11)]
