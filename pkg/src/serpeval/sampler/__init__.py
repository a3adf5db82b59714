from .ingest import IngestError, IngestResult, QueryLogEntry, ingest_log, normalize_query
from .intents import (
    Intent,
    LabeledQuery,
    LabelFileError,
    LabelingResult,
    apply_intent_labels,
    load_intent_labels,
)
from .sampling import (
    SampledQuery,
    SampleResult,
    build_sample,
    draw_candidates,
    read_sample_file,
    write_sample_file,
)
from .segmentation import PopularitySegment, SegmentationError, segment_by_popularity
from .synthetic import zipf_frequency_table, zipf_instance_lines

__all__ = [
    "IngestError",
    "IngestResult",
    "Intent",
    "LabeledQuery",
    "LabelFileError",
    "LabelingResult",
    "PopularitySegment",
    "QueryLogEntry",
    "SampledQuery",
    "SampleResult",
    "SegmentationError",
    "apply_intent_labels",
    "build_sample",
    "draw_candidates",
    "ingest_log",
    "load_intent_labels",
    "normalize_query",
    "read_sample_file",
    "write_sample_file",
    "segment_by_popularity",
    "zipf_frequency_table",
    "zipf_instance_lines",
]
