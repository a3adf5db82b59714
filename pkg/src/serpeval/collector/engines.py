"""Engine adapters: where ranked results and page bodies come from.

Two adapters share one interface. ``replay-fixture`` reads pre-recorded
SERPs and page bodies from a JSON file, which is what every test and
acceptance run uses (live SERPs are not reproducible). ``live-scrape``
fetches and screen-scrapes real engines through the same code path, with
per-engine rate limiting.

Fixture format (one JSON file per engine, UTF-8):

    {
      "results": [{"query": ..., "rank": 1, "raw_url": ...,
                   "title": ..., "snippet": ...}, ...],
      "pages": {"<url>": {"body": "...", "content_type": "text/html",
                           "status": "ok" | "timeout" | "http-404" | ...}}
    }

A query absent from "results" is an empty (zero-result) capture. A URL
absent from "pages" is a fetch failure, mirroring a dead link.
"""

from __future__ import annotations

import json
import re
import threading
import time as _time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from ..clock import SystemClock


class AdapterError(RuntimeError):
    """The adapter could not produce a SERP at all (I/O, HTTP failure)."""


class SerpParseError(ValueError):
    """The adapter got a response but could not extract a sane result list."""


@dataclass(frozen=True)
class RawSerpEntry:
    rank: int
    raw_url: str
    title: str = ""
    snippet: str = ""


@dataclass(frozen=True)
class FetchedDocument:
    status: str  # ok | timeout | unresolvable | http-<code>
    content_type: str = ""
    body: bytes = b""


@dataclass
class EngineConfig:
    engine_id: str
    display_name: str
    adapter: str  # "replay-fixture" | "live-scrape"
    fixture_path: str | None = None
    endpoint_template: str | None = None  # e.g. "https://engine.example/search?q={query}"
    rate_limit: int = 10  # max requests per minute (live only)
    # live-scrape extraction rules: regexes with named groups url/title/snippet
    selector: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.engine_id:
            raise ValueError("engine_id must be non-empty")
        if self.adapter not in ("replay-fixture", "live-scrape"):
            raise ValueError(f"unknown adapter {self.adapter!r}")
        if self.adapter == "replay-fixture" and not self.fixture_path:
            raise ValueError(f"engine {self.engine_id}: replay adapter needs fixture_path")
        if self.adapter == "live-scrape":
            if not self.endpoint_template:
                raise ValueError(f"engine {self.engine_id}: live adapter needs endpoint_template")
            if self.rate_limit < 1:
                raise ValueError(f"engine {self.engine_id}: rate_limit must be >= 1")


class EngineAdapter(Protocol):
    def fetch_serp(self, query: str) -> list[RawSerpEntry]: ...

    def fetch_document(self, url: str) -> FetchedDocument: ...


def _validate_ranks(query: str, entries: list[RawSerpEntry]) -> list[RawSerpEntry]:
    """Ranks must be the initial segment 1..m with no gaps or duplicates."""
    entries = sorted(entries, key=lambda e: e.rank)
    seen: set[int] = set()
    for position, entry in enumerate(entries, start=1):
        if entry.rank in seen:
            raise SerpParseError(f"query {query!r}: duplicate rank {entry.rank}")
        seen.add(entry.rank)
        if entry.rank != position:
            raise SerpParseError(
                f"query {query!r}: rank gap, expected {position} got {entry.rank}"
            )
    return entries


def load_fixture(path: Path | str) -> dict:
    with open(path, encoding="utf-8") as fh:
        fixture = json.load(fh)
    if not isinstance(fixture, dict) or "results" not in fixture:
        raise AdapterError(f"fixture {path}: missing 'results'")
    return fixture


class ReplayAdapter:
    """Serves recorded SERPs and page bodies; never touches the network."""

    def __init__(self, config: EngineConfig):
        self.config = config
        fixture = load_fixture(config.fixture_path)
        self._by_query: dict[str, list[RawSerpEntry]] = {}
        for record in fixture["results"]:
            entry = RawSerpEntry(
                rank=int(record["rank"]),
                raw_url=record["raw_url"],
                title=record.get("title", ""),
                snippet=record.get("snippet", ""),
            )
            self._by_query.setdefault(record["query"], []).append(entry)
        self._pages: dict[str, dict] = fixture.get("pages", {})

    def fetch_serp(self, query: str) -> list[RawSerpEntry]:
        return _validate_ranks(query, self._by_query.get(query, []))

    def fetch_document(self, url: str) -> FetchedDocument:
        page = self._pages.get(url)
        if page is None:
            return FetchedDocument(status="http-404")
        status = page.get("status", "ok")
        if status != "ok":
            return FetchedDocument(status=status)
        return FetchedDocument(
            status="ok",
            content_type=page.get("content_type", "text/html; charset=utf-8"),
            body=page.get("body", "").encode("utf-8"),
        )


class RateLimiter:
    """Sliding-window limiter: at most ``per_minute`` acquisitions in any
    60-second window, enforced across threads."""

    def __init__(self, per_minute: int, clock=None, sleep: Callable[[float], None] = _time.sleep):
        self.per_minute = per_minute
        self._clock = clock or SystemClock()
        self._sleep = sleep
        self._lock = threading.Lock()
        self._stamps: list[float] = []

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock.now().timestamp()
                self._stamps = [t for t in self._stamps if now - t < 60.0]
                if len(self._stamps) < self.per_minute:
                    self._stamps.append(now)
                    return
                wait = 60.0 - (now - self._stamps[0])
            self._sleep(max(wait, 0.01))


DEFAULT_TIMEOUT_SECONDS = 10.0
DEFAULT_RETRIES = 1
_USER_AGENT = "serpeval/0.1 (+research; retrieval-effectiveness study)"


class LiveAdapter:
    """Fetches live SERPs over HTTP and extracts organic results.

    Extraction is driven by the engine's selector spec:

        {"result": "<regex with named groups url, title?, snippet?>"}

    Matches are taken in document order and ranked 1..m. The regex is
    expected to target the organic result list only; ads and vertical
    inserts must not match. A ``transport`` callable can replace the HTTP
    client in tests.
    """

    def __init__(
        self,
        config: EngineConfig,
        clock=None,
        sleep: Callable[[float], None] = _time.sleep,
        transport: Callable[[str], tuple[int, str, bytes]] | None = None,
        timeout: float = DEFAULT_TIMEOUT_SECONDS,
        retries: int = DEFAULT_RETRIES,
    ):
        self.config = config
        self._limiter = RateLimiter(config.rate_limit, clock=clock, sleep=sleep)
        self._transport = transport or self._http_get
        self._timeout = timeout
        self._retries = retries
        pattern = config.selector.get("result")
        if not pattern:
            raise ValueError(f"engine {config.engine_id}: live adapter needs selector.result")
        self._result_re = re.compile(pattern, re.DOTALL)

    def _http_get(self, url: str) -> tuple[int, str, bytes]:
        import httpx

        response = httpx.get(
            url,
            timeout=self._timeout,
            headers={"User-Agent": _USER_AGENT},
            follow_redirects=True,
        )
        return response.status_code, response.headers.get("content-type", ""), response.content

    def _get_with_retries(self, url: str) -> tuple[int, str, bytes]:
        last_exc: Exception | None = None
        for _ in range(self._retries + 1):
            self._limiter.acquire()
            try:
                return self._transport(url)
            except Exception as exc:  # noqa: BLE001 - adapter boundary
                last_exc = exc
        raise AdapterError(f"engine {self.config.engine_id}: {last_exc}") from last_exc

    def fetch_serp(self, query: str) -> list[RawSerpEntry]:
        from urllib.parse import quote_plus

        url = self.config.endpoint_template.format(query=quote_plus(query))
        status, _ctype, body = self._get_with_retries(url)
        if status != 200:
            raise AdapterError(f"engine {self.config.engine_id}: HTTP {status} for {query!r}")
        html = body.decode("utf-8", errors="replace")
        entries = []
        for position, match in enumerate(self._result_re.finditer(html), start=1):
            groups = match.groupdict()
            if not groups.get("url"):
                raise SerpParseError(f"query {query!r}: selector matched without a url group")
            entries.append(
                RawSerpEntry(
                    rank=position,
                    raw_url=groups["url"],
                    title=(groups.get("title") or "").strip(),
                    snippet=(groups.get("snippet") or "").strip(),
                )
            )
        return _validate_ranks(query, entries)

    def fetch_document(self, url: str) -> FetchedDocument:
        try:
            status, ctype, body = self._get_with_retries(url)
        except AdapterError as exc:
            cause = str(exc.__cause__ or exc)
            if "timed out" in cause.lower() or "timeout" in cause.lower():
                return FetchedDocument(status="timeout")
            return FetchedDocument(status="unresolvable")
        if status != 200:
            return FetchedDocument(status=f"http-{status}")
        return FetchedDocument(status="ok", content_type=ctype, body=body)


def make_adapter(config: EngineConfig, clock=None, **kwargs) -> EngineAdapter:
    if config.adapter == "replay-fixture":
        return ReplayAdapter(config)
    return LiveAdapter(config, clock=clock, **kwargs)
