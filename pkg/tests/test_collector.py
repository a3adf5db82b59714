import json
from datetime import datetime, timezone

import pytest

from serpeval.clock import FixedClock
from serpeval.collector import (
    DepthPolicy,
    EngineConfig,
    RateLimiter,
    ReplayAdapter,
    SerpParseError,
    TrackingPattern,
    run_collection,
)
from serpeval.collector.engines import LiveAdapter
from serpeval.collector.run import collect_serp, load_run
from serpeval.sampler import Intent, SampledQuery
from serpeval.store import FileStore

CLOCK = FixedClock("2011-06-01T00:00:00Z")


def write_fixture(path, results, pages=None):
    path.write_text(
        json.dumps({"results": results, "pages": pages or {}}), encoding="utf-8"
    )
    return path


def make_engine(tmp_path, engine_id, results, pages=None):
    fixture = write_fixture(tmp_path / f"{engine_id}.json", results, pages)
    return EngineConfig(
        engine_id=engine_id,
        display_name=engine_id.title(),
        adapter="replay-fixture",
        fixture_path=str(fixture),
    )


def results_for(query, n, host="site"):
    return [
        {
            "query": query,
            "rank": i,
            "raw_url": f"https://{host}{i}.example.de/page",
            "title": f"t{i}",
            "snippet": f"s{i}",
        }
        for i in range(1, n + 1)
    ]


def sampled(text, intent=Intent.INFORMATIONAL):
    return SampledQuery(text=text, segment_index=1, intent=intent, draw_seed=0)


def test_replay_identity_ten_results(tmp_path):
    engine = make_engine(tmp_path, "alpha", results_for("q", 10))
    adapter = ReplayAdapter(engine)
    results, short, unresolved = collect_serp(adapter, "alpha", "q", 10, [], "t0")
    assert [r.rank for r in results] == list(range(1, 11))
    assert not short
    assert unresolved == 0


def test_short_capture_noted(tmp_path):
    engine = make_engine(tmp_path, "alpha", results_for("q", 3))
    adapter = ReplayAdapter(engine)
    results, short, _ = collect_serp(adapter, "alpha", "q", 10, [], "t0")
    assert len(results) == 3
    assert short


def test_duplicate_rank_rejected(tmp_path):
    rows = results_for("q", 4)
    rows[2]["rank"] = 2  # ranks 1,2,2,4
    engine = make_engine(tmp_path, "alpha", rows)
    adapter = ReplayAdapter(engine)
    with pytest.raises(SerpParseError, match="duplicate rank 2"):
        adapter.fetch_serp("q")


def test_rank_gap_rejected(tmp_path):
    rows = [results_for("q", 1)[0], dict(results_for("q", 3)[2])]  # ranks 1, 3
    engine = make_engine(tmp_path, "alpha", rows)
    adapter = ReplayAdapter(engine)
    with pytest.raises(SerpParseError, match="rank gap"):
        adapter.fetch_serp("q")


def test_absent_query_is_empty_capture(tmp_path):
    engine = make_engine(tmp_path, "alpha", results_for("q", 2))
    adapter = ReplayAdapter(engine)
    assert adapter.fetch_serp("unknown query") == []


def _two_by_two(tmp_path):
    queries = [sampled("q1"), sampled("q2")]
    engines = [
        make_engine(tmp_path, "alpha", results_for("q1", 10) + results_for("q2", 10)),
        make_engine(
            tmp_path, "bravo",
            results_for("q1", 10, host="other") + results_for("q2", 10, host="other"),
        ),
    ]
    return queries, engines


def test_run_collection_counts(tmp_path):
    queries, engines = _two_by_two(tmp_path)
    store = FileStore(tmp_path / "store")
    run = run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK)
    assert run.attempted == 4
    assert run.succeeded == 4
    assert run.failed == 0
    assert sum(len(c.results) for c in run.captures) == 40
    assert not run.degraded


def test_navigational_depth_one(tmp_path):
    queries = [sampled("q1", Intent.NAVIGATIONAL), sampled("q2", Intent.NAVIGATIONAL)]
    engines = [make_engine(tmp_path, "alpha", results_for("q1", 5) + results_for("q2", 5))]
    store = FileStore(tmp_path / "store")
    run = run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK)
    assert all(len(c.results) <= 1 for c in run.captures)


class CountingAdapter:
    def __init__(self, inner, explode_after=None):
        self.inner = inner
        self.serp_calls = 0
        self.doc_calls = 0
        self.doc_urls = []
        self.explode_after = explode_after

    def fetch_serp(self, query):
        self.serp_calls += 1
        if self.explode_after is not None and self.serp_calls > self.explode_after:
            raise KeyboardInterrupt("simulated kill")
        return self.inner.fetch_serp(query)

    def fetch_document(self, url):
        self.doc_calls += 1
        self.doc_urls.append(url)
        return self.inner.fetch_document(url)


def test_interrupt_and_resume_does_exactly_remaining_work(tmp_path):
    queries, engines = _two_by_two(tmp_path)
    store = FileStore(tmp_path / "store")

    bomb = {
        e.engine_id: CountingAdapter(ReplayAdapter(e), explode_after=None) for e in engines
    }
    # Interrupt after 3 of the 4 captures: make the 4th serp fetch explode.
    total = {"n": 0}

    class GlobalBomb:
        def __init__(self, inner):
            self.inner = inner

        def fetch_serp(self, query):
            total["n"] += 1
            if total["n"] > 3:
                raise KeyboardInterrupt("simulated kill")
            return self.inner.fetch_serp(query)

        def fetch_document(self, url):
            return self.inner.fetch_document(url)

    bombed = {e.engine_id: GlobalBomb(ReplayAdapter(e)) for e in engines}
    with pytest.raises(KeyboardInterrupt):
        run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK, adapters=bombed)

    counting = {e.engine_id: CountingAdapter(ReplayAdapter(e)) for e in engines}
    run = run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK, adapters=counting)
    assert sum(a.serp_calls for a in counting.values()) == 1
    assert run.attempted == 4
    assert run.succeeded == 4


def test_resumed_run_identical_to_uninterrupted(tmp_path):
    queries, engines = _two_by_two(tmp_path)

    store_a = FileStore(tmp_path / "store_a")
    with pytest.raises(KeyboardInterrupt):
        total = {"n": 0}

        class Bomb:
            def __init__(self, inner):
                self.inner = inner

            def fetch_serp(self, query):
                total["n"] += 1
                if total["n"] > 2:
                    raise KeyboardInterrupt()
                return self.inner.fetch_serp(query)

            def fetch_document(self, url):
                return self.inner.fetch_document(url)

        run_collection(
            queries, engines, DepthPolicy(), store_a, "run1", clock=CLOCK,
            adapters={e.engine_id: Bomb(ReplayAdapter(e)) for e in engines},
        )
    resumed = run_collection(queries, engines, DepthPolicy(), store_a, "run1", clock=CLOCK)

    store_b = FileStore(tmp_path / "store_b")
    control = run_collection(queries, engines, DepthPolicy(), store_b, "run1", clock=CLOCK)

    assert resumed.to_record() == control.to_record()


def test_replay_determinism_byte_identical(tmp_path):
    queries, engines = _two_by_two(tmp_path)
    blobs = []
    for name in ("store_x", "store_y"):
        store = FileStore(tmp_path / name)
        run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK)
        blobs.append((tmp_path / name / "runs" / "run1.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_snapshot_fetched_once_per_url(tmp_path):
    # Both queries return the same URL; both engines return it too.
    shared = [
        {"query": q, "rank": 1, "raw_url": "https://shared.example.de/", "title": "t", "snippet": ""}
        for q in ("q1", "q2")
    ]
    pages = {"https://shared.example.de/": {"body": "<html>x</html>", "status": "ok"}}
    engines = [
        make_engine(tmp_path, "alpha", shared, pages),
        make_engine(tmp_path, "bravo", shared, pages),
    ]
    counting = {e.engine_id: CountingAdapter(ReplayAdapter(e)) for e in engines}
    store = FileStore(tmp_path / "store")
    run = run_collection(
        [sampled("q1"), sampled("q2")], engines, DepthPolicy(), store, "run1",
        clock=CLOCK, adapters=counting,
    )
    assert sum(a.doc_calls for a in counting.values()) == 1
    assert len(run.snapshot_index) == 1
    entry = run.snapshot_index["https://shared.example.de/"]
    assert entry["status"] == "ok"
    content, meta = store.get_snapshot(entry["snapshot_id"])
    assert content == b"<html>x</html>"


def test_fetch_failures_recorded_not_fatal(tmp_path):
    rows = results_for("q1", 2)
    pages = {
        "https://site1.example.de/page": {"body": "ok body", "status": "ok"},
        "https://site2.example.de/page": {"status": "timeout"},
    }
    engines = [make_engine(tmp_path, "alpha", rows, pages)]
    store = FileStore(tmp_path / "store")
    run = run_collection([sampled("q1")], engines, DepthPolicy(), store, "run1", clock=CLOCK)
    assert run.snapshot_index["https://site1.example.de/page"]["status"] == "ok"
    assert run.snapshot_index["https://site2.example.de/page"]["status"] == "timeout"
    assert run.snapshot_index["https://site2.example.de/page"]["snapshot_id"] is None

    from serpeval.collector.run import load_snapshot

    ok = load_snapshot(store, run, "https://site1.example.de/page")
    assert ok.fetch_status == "ok" and ok.content == b"ok body"
    failed = load_snapshot(store, run, "https://site2.example.de/page")
    assert failed.fetch_status == "timeout" and failed.content == b""
    with pytest.raises(KeyError):
        load_snapshot(store, run, "https://absent.example.de/")


def test_unresolvable_tracking_urls_counted(tmp_path):
    patterns = [TrackingPattern(host="track.example", param="url")]
    rows = [
        {"query": "q1", "rank": 1, "raw_url": "https://track.example/r?url=https%3A%2F%2Fa.de%2F", "title": "", "snippet": ""},
        {"query": "q1", "rank": 2, "raw_url": "https://track.example/r?sig=only", "title": "", "snippet": ""},
    ]
    engines = [make_engine(tmp_path, "alpha", rows)]
    store = FileStore(tmp_path / "store")
    run = run_collection(
        [sampled("q1")], engines, DepthPolicy(), store, "run1",
        tracking_patterns=patterns, clock=CLOCK,
    )
    assert run.unresolved_total == 1
    capture = run.captures[0]
    assert capture.results[0].normalized_url == "https://a.de/"
    assert capture.results[1].normalized_url is None
    assert capture.results[1].resolved_url is None
    # still present, never dropped
    assert len(capture.results) == 2


def test_failed_captures_mark_run_degraded(tmp_path):
    rows = results_for("q1", 2)
    rows[1]["rank"] = 1  # duplicate rank => parse failure for q1
    engines = [make_engine(tmp_path, "alpha", rows + results_for("q2", 2))]
    store = FileStore(tmp_path / "store")
    run = run_collection(
        [sampled("q1"), sampled("q2")], engines, DepthPolicy(), store, "run1",
        clock=CLOCK, failure_threshold=0.2,
    )
    assert run.failed == 1
    assert run.succeeded == 1
    assert run.degraded
    failed = [c for c in run.captures if c.status == "failed"][0]
    assert "duplicate rank" in failed.reason


def test_run_roundtrip_through_store(tmp_path):
    queries, engines = _two_by_two(tmp_path)
    store = FileStore(tmp_path / "store")
    run = run_collection(queries, engines, DepthPolicy(), store, "run1", clock=CLOCK)
    loaded = load_run(store, "run1")
    assert loaded.to_record() == run.to_record()


class ManualClock:
    """Test clock; timestamps round-trip through datetime just like the
    limiter's own view of time (microsecond resolution)."""

    def __init__(self):
        self.t = 1000.0

    def now(self):
        return datetime.fromtimestamp(self.t, tz=timezone.utc)

    def seconds(self):
        return self.now().timestamp()


def test_rate_limiter_never_exceeds_limit():
    clock = ManualClock()

    def fake_sleep(seconds):
        clock.t += seconds

    limiter = RateLimiter(per_minute=10, clock=clock, sleep=fake_sleep)
    stamps = []
    for _ in range(35):
        limiter.acquire()
        stamps.append(clock.seconds())
        clock.t += 0.5  # requests come in faster than allowed

    for i, t in enumerate(stamps):
        window = [s for s in stamps if t - 60.0 < s <= t]
        assert len(window) <= 10, f"window ending at request {i} holds {len(window)}"


def test_live_adapter_politeness_and_parsing(tmp_path):
    html = (
        '<ol><li class="res"><a href="https://a.de/1">One</a><p>first hit</p></li>'
        '<li class="res"><a href="https://b.de/2">Two</a><p>second hit</p></li></ol>'
    )
    clock = ManualClock()

    calls = []

    def transport(url):
        calls.append((clock.seconds(), url))
        clock.t += 0.1
        return 200, "text/html", html.encode()

    config = EngineConfig(
        engine_id="live1",
        display_name="Live One",
        adapter="live-scrape",
        endpoint_template="https://live.example/search?q={query}",
        rate_limit=2,
        selector={
            "result": r'<li class="res"><a href="(?P<url>[^"]+)">(?P<title>[^<]*)</a><p>(?P<snippet>[^<]*)</p></li>'
        },
    )

    def fake_sleep(seconds):
        clock.t += seconds

    adapter = LiveAdapter(config, clock=clock, sleep=fake_sleep, transport=transport)
    for _ in range(5):
        entries = adapter.fetch_serp("wetter berlin")
    assert [e.rank for e in entries] == [1, 2]
    assert entries[0].raw_url == "https://a.de/1"
    assert entries[0].title == "One"
    assert entries[1].snippet == "second hit"
    assert "wetter+berlin" in calls[0][1]

    times = [t for t, _ in calls]
    for t in times:
        window = [s for s in times if t - 60.0 < s <= t]
        assert len(window) <= 2
