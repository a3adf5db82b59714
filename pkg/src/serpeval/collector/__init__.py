from .engines import (
    AdapterError,
    EngineConfig,
    LiveAdapter,
    RateLimiter,
    ReplayAdapter,
    RawSerpEntry,
    SerpParseError,
    load_fixture,
    make_adapter,
)
from .run import (
    CaptureRecord,
    CollectionRun,
    DepthPolicy,
    DocumentSnapshot,
    SerpResult,
    collect_serp,
    load_run,
    run_collection,
)
from .urls import TrackingPattern, UrlError, normalize_url, resolve_url

__all__ = [
    "AdapterError",
    "CaptureRecord",
    "CollectionRun",
    "DepthPolicy",
    "DocumentSnapshot",
    "EngineConfig",
    "LiveAdapter",
    "RateLimiter",
    "RawSerpEntry",
    "ReplayAdapter",
    "SerpParseError",
    "SerpResult",
    "TrackingPattern",
    "UrlError",
    "collect_serp",
    "load_fixture",
    "load_run",
    "make_adapter",
    "normalize_url",
    "resolve_url",
    "run_collection",
]
