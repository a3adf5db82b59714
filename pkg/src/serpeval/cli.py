"""Pipeline orchestration: sample -> collect -> serve -> report.

All human-readable progress goes to stderr; machine-readable output goes
to files under the configured store directory only. Exit codes: 0 ok,
1 usage, 2 validation, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .collector import load_fixture, run_collection
from .collector.engines import ReplayAdapter
from .config import ConfigError, StudyConfig, load_config
from .metrics import build_report, write_exports
from .sampler import (
    IngestError,
    LabelFileError,
    apply_intent_labels,
    build_sample,
    draw_candidates,
    ingest_log,
    load_intent_labels,
    read_sample_file,
    segment_by_popularity,
    write_sample_file,
)
from .sampler.intents import LabelGapError
from .store import FileStore
from .study import StudyService
from .study.api import create_app

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def log(message: str) -> None:
    print(message, file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="serpeval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, summary in (
        ("sample", "build the stratified query sample"),
        ("collect", "capture engine results for the sample"),
        ("serve", "run the judgment study HTTP service"),
        ("report", "compute metrics and write exports"),
        ("validate", "dry-run check of config, inputs and invariants"),
    ):
        cmd = sub.add_parser(name, help=summary)
        cmd.add_argument("--config", required=True, help="study config JSON")
        cmd.add_argument("--seed", type=int, default=None, help="override the study seed")
        cmd.add_argument("--store", default=None, help="override the store directory")
        cmd.add_argument("--fixtures", default=None, help="base directory for replay fixtures")
        if name == "serve":
            cmd.add_argument("--listen", default="127.0.0.1:8000", help="host:port to bind")
    return parser


def _load(args) -> StudyConfig:
    return load_config(
        args.config,
        seed_override=args.seed,
        store_override=args.store,
        fixtures_override=args.fixtures,
    )


def cmd_sample(config: StudyConfig) -> int:
    with open(config.log_path, encoding="utf-8") as fh:
        result = ingest_log(fh, fmt=config.log_format)
    if result.rejected_lines:
        log(f"sample: rejected {result.rejected_lines} malformed log lines")
    log(
        f"sample: {len(result.entries)} distinct queries, "
        f"{result.total_instances} instances"
    )

    segments = segment_by_popularity(result.entries, config.segments)
    labels = load_intent_labels(config.labels_path)
    labeled_segments = []
    for segment in segments:
        candidates = draw_candidates(segment, config.candidates_per_segment, config.seed)
        labeling = apply_intent_labels(candidates, labels)
        labeled_segments.append((segment.index, labeling.labeled))

    sample = build_sample(labeled_segments, config.target_per_intent, config.seed)
    for segment_index, intent, available, target in sample.shortfalls:
        log(
            f"sample: segment {segment_index} has only {available} "
            f"{intent.value} candidates (target {target})"
        )

    config.sample_path.parent.mkdir(parents=True, exist_ok=True)
    write_sample_file(sample.queries, config.sample_path)
    log(f"sample: wrote {len(sample.queries)} queries to {config.sample_path}")
    return EXIT_OK


def cmd_collect(config: StudyConfig) -> int:
    sample = read_sample_file(config.sample_path)
    store = FileStore(config.store_dir)
    run = run_collection(
        sample,
        config.engines,
        config.depth_policy,
        store,
        config.run_id,
        sample_ref=str(config.sample_path.name),
        tracking_patterns=config.tracking_patterns,
        concurrency=config.concurrency,
        failure_threshold=config.failure_threshold,
        clock=config.make_clock(),
    )
    log(
        f"collect: {run.attempted} captures ({run.succeeded} ok, {run.failed} failed, "
        f"{run.unresolved_total} unresolved urls)"
        + (" [degraded]" if run.degraded else "")
    )
    return EXIT_OK


def _study_service(config: StudyConfig, store: FileStore) -> StudyService:
    """Load the study, pooling it first if this is the first touch."""
    from .collector.run import load_run

    if store.exists("studies", config.study_id):
        return StudyService(store, config.study_id, clock=config.make_clock())
    run = load_run(store, config.run_id)
    return StudyService.create(
        store,
        config.study_id,
        run,
        seed=config.seed,
        access_code=config.access_code,
        admin_token=config.admin_token,
        lease_minutes=config.lease_minutes,
        voucher_threshold=config.voucher_threshold,
        clock=config.make_clock(),
    )


def cmd_serve(config: StudyConfig, listen: str) -> int:
    import uvicorn

    store = FileStore(config.store_dir)
    service = _study_service(config, store)
    app = create_app(service, store)
    host, _, port = listen.rpartition(":")
    log(f"serve: study {config.study_id} on {listen}")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


def cmd_report(config: StudyConfig) -> int:
    from .collector.run import load_run

    store = FileStore(config.store_dir)
    service = _study_service(config, store)
    run = load_run(store, config.run_id)
    tasks = [store.get_record("tasks", task_id) for task_id in store.keys("tasks")]
    tasks = [t for t in tasks if t["study_id"] == config.study_id]
    report = build_report(
        run,
        tasks,
        service.judgments(),
        service.verdicts(),
        config.study_id,
        config.seed,
    )
    for warning in report.warnings:
        log(f"report: warning: {warning}")
    written = write_exports(report, config.report_dir)
    log(f"report: wrote {len(written)} files to {config.report_dir}")
    return EXIT_OK


def cmd_validate(config: StudyConfig) -> int:
    """Dry-run: config parsed already; now check inputs and invariants."""
    problems: list[str] = []
    warnings: list[str] = []

    if not config.log_path.exists():
        problems.append(f"log file not found: {config.log_path}")
    else:
        try:
            with open(config.log_path, encoding="utf-8") as fh:
                result = ingest_log(fh, fmt=config.log_format)
            if result.rejected_lines:
                warnings.append(f"{result.rejected_lines} malformed log lines")
            if len(result.entries) < config.segments:
                problems.append(
                    f"only {len(result.entries)} distinct queries for "
                    f"{config.segments} segments"
                )
        except IngestError as exc:
            problems.append(f"log: {exc}")

    if not config.labels_path.exists():
        problems.append(f"label file not found: {config.labels_path}")
    else:
        try:
            load_intent_labels(config.labels_path)
        except LabelFileError as exc:
            problems.append(f"labels: {exc}")

    for engine in config.engines:
        if engine.adapter != "replay-fixture":
            continue
        if not Path(engine.fixture_path).exists():
            problems.append(f"{engine.engine_id}: fixture not found: {engine.fixture_path}")
            continue
        try:
            fixture = load_fixture(engine.fixture_path)
            adapter = ReplayAdapter(engine)
            for query in {r["query"] for r in fixture["results"]}:
                adapter.fetch_serp(query)
        except Exception as exc:  # noqa: BLE001 - report whatever is broken
            problems.append(f"{engine.engine_id}: fixture invalid: {exc}")

    for problem in problems:
        log(f"validate: error: {problem}")
    for warning in warnings:
        log(f"validate: warning: {warning}")
    if problems:
        return EXIT_VALIDATION
    log(f"validate: ok ({len(warnings)} warnings)")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
    except ConfigError as exc:
        for error in exc.errors:
            log(f"config: error: {error}")
        return EXIT_VALIDATION

    try:
        if args.command == "sample":
            return cmd_sample(config)
        if args.command == "collect":
            return cmd_collect(config)
        if args.command == "serve":
            return cmd_serve(config, args.listen)
        if args.command == "report":
            return cmd_report(config)
        if args.command == "validate":
            return cmd_validate(config)
    except (IngestError, LabelFileError, LabelGapError) as exc:
        log(f"{args.command}: invalid input: {exc}")
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        log(f"{args.command}: missing file: {exc}")
        return EXIT_VALIDATION
    except KeyError as exc:
        log(f"{args.command}: missing record: {exc}")
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log(f"{args.command}: failed: {exc}")
        return EXIT_RUNTIME
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
