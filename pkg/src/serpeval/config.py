"""Study configuration: one versioned JSON file describes a whole study.

Every parameter that affects outputs lives here, seeds included -- a study
must be re-runnable from its archived config alone, so nothing falls back
to implicit entropy. Relative paths resolve against the config file's
directory. Validation collects every problem it can find instead of
stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .clock import FixedClock, SystemClock
from .collector import EngineConfig, TrackingPattern
from .collector.run import DepthPolicy

CONFIG_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class StudyConfig:
    study_id: str
    store_dir: Path
    seed: int
    log_path: Path
    log_format: str
    labels_path: Path
    segments: int
    candidates_per_segment: int
    target_per_intent: int
    depth_policy: DepthPolicy
    engines: list[EngineConfig]
    run_id: str
    access_code: str
    admin_token: str
    tracking_patterns: list[TrackingPattern] = field(default_factory=list)
    concurrency: int = 1
    failure_threshold: float = 0.2
    lease_minutes: int = 60
    voucher_threshold: float = 0.9
    clock_spec: dict = field(default_factory=lambda: {"type": "system"})
    base_dir: Path = Path(".")

    def make_clock(self):
        if self.clock_spec.get("type") == "fixed":
            return FixedClock(self.clock_spec["at"])
        return SystemClock()

    @property
    def sample_path(self) -> Path:
        return self.store_dir / "samples" / f"{self.study_id}.tsv"

    @property
    def report_dir(self) -> Path:
        return self.store_dir / "reports" / self.run_id


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(
    path: Path | str,
    seed_override: int | None = None,
    store_override: str | None = None,
    fixtures_override: str | None = None,
) -> StudyConfig:
    """Parse and validate; raises ConfigError listing every problem."""
    path = Path(path)
    errors: list[str] = []
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None

    base = path.parent

    if raw.get("version") != CONFIG_VERSION:
        errors.append(f"version must be {CONFIG_VERSION}, got {raw.get('version')!r}")

    def need(key: str, kind, default=None):
        value = raw.get(key, default)
        if value is None:
            errors.append(f"missing required field {key!r}")
            return None
        if kind is int and isinstance(value, bool) or not isinstance(value, kind):
            errors.append(f"field {key!r} must be {kind.__name__}")
            return None
        return value

    study_id = need("study_id", str)
    run_id = need("run_id", str)
    access_code = need("access_code", str)
    admin_token = need("admin_token", str)

    seed = seed_override if seed_override is not None else raw.get("seed")
    if seed is None:
        errors.append("missing required field 'seed' (seeds must be explicit)")
    elif not isinstance(seed, int) or isinstance(seed, bool):
        errors.append("field 'seed' must be int")

    segments = need("segments", int, 10)
    candidates = need("candidates_per_segment", int, 360)
    target = need("target_per_intent", int, 100)
    for name, value, minimum in (
        ("segments", segments, 1),
        ("candidates_per_segment", candidates, 1),
        ("target_per_intent", target, 1),
    ):
        if isinstance(value, int) and value < minimum:
            errors.append(f"field {name!r} must be >= {minimum}")

    log_spec = raw.get("log") or {}
    log_path = _resolve(base, log_spec.get("path", "")) if log_spec.get("path") else None
    if log_path is None:
        errors.append("missing required field 'log.path'")
    log_format = log_spec.get("format", "aggregate")
    if log_format not in ("instances", "aggregate"):
        errors.append(f"log.format must be 'instances' or 'aggregate', got {log_format!r}")

    labels_raw = need("labels_path", str)
    labels_path = _resolve(base, labels_raw) if labels_raw else None

    store_dir = _resolve(
        Path.cwd() if store_override else base,
        store_override or raw.get("store_dir", "store"),
    )

    depth = DepthPolicy.from_dict(raw.get("depth_policy") or {})
    if depth.navigational < 1 or depth.informational < 1:
        errors.append("depth_policy values must be >= 1")

    threshold = raw.get("voucher_threshold", 0.9)
    if not isinstance(threshold, (int, float)) or not (0 < threshold <= 1):
        errors.append("voucher_threshold must be in (0, 1]")

    lease_minutes = raw.get("lease_minutes", 60)
    if not isinstance(lease_minutes, int) or lease_minutes < 1:
        errors.append("lease_minutes must be a positive integer")

    concurrency = raw.get("concurrency", 1)
    if not isinstance(concurrency, int) or concurrency < 1:
        errors.append("concurrency must be a positive integer")

    failure_threshold = raw.get("failure_threshold", 0.2)
    if not isinstance(failure_threshold, (int, float)) or not (0 <= failure_threshold <= 1):
        errors.append("failure_threshold must be in [0, 1]")

    clock_spec = raw.get("clock") or {"type": "system"}
    if clock_spec.get("type") not in ("system", "fixed"):
        errors.append("clock.type must be 'system' or 'fixed'")
    elif clock_spec["type"] == "fixed" and not clock_spec.get("at"):
        errors.append("clock.type 'fixed' needs an 'at' timestamp")

    patterns = []
    for i, spec in enumerate(raw.get("tracking_patterns", [])):
        host, param = spec.get("host"), spec.get("param")
        if not host or not param:
            errors.append(f"tracking_patterns[{i}] needs 'host' and 'param'")
            continue
        patterns.append(
            TrackingPattern(host=host, param=param, path_prefix=spec.get("path_prefix", ""))
        )

    engines: list[EngineConfig] = []
    engine_specs = raw.get("engines") or []
    if not engine_specs:
        errors.append("at least one engine required")
    seen_ids: set[str] = set()
    for i, spec in enumerate(engine_specs):
        engine_id = spec.get("engine_id", "")
        if engine_id in seen_ids:
            errors.append(f"engines[{i}]: duplicate engine_id {engine_id!r}")
        seen_ids.add(engine_id)
        fixture = spec.get("fixture_path")
        if fixture is not None:
            fixture_base = Path(fixtures_override) if fixtures_override else base
            fixture = str(_resolve(fixture_base, fixture))
        try:
            engines.append(
                EngineConfig(
                    engine_id=engine_id,
                    display_name=spec.get("display_name", engine_id),
                    adapter=spec.get("adapter", "replay-fixture"),
                    fixture_path=fixture,
                    endpoint_template=spec.get("endpoint_template"),
                    rate_limit=spec.get("rate_limit", 10),
                    selector=spec.get("selector", {}),
                )
            )
        except ValueError as exc:
            errors.append(f"engines[{i}]: {exc}")

    if access_code is not None and admin_token is not None and access_code == admin_token:
        errors.append("access_code and admin_token must differ")

    if errors:
        raise ConfigError(errors)

    return StudyConfig(
        study_id=study_id,
        store_dir=store_dir,
        seed=seed,
        log_path=log_path,
        log_format=log_format,
        labels_path=labels_path,
        segments=segments,
        candidates_per_segment=candidates,
        target_per_intent=target,
        depth_policy=depth,
        engines=engines,
        run_id=run_id,
        access_code=access_code,
        admin_token=admin_token,
        tracking_patterns=patterns,
        concurrency=concurrency,
        failure_threshold=failure_threshold,
        lease_minutes=lease_minutes,
        voucher_threshold=threshold,
        clock_spec=clock_spec,
        base_dir=base,
    )
