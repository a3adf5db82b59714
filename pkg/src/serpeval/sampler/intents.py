"""Query intent labels and the human label-file round trip.

Intent classification is a human artifact: candidates are exported, labeled
by people, and read back from a tab-separated file. The closed vocabulary
is informational / navigational / transactional / other. A rule-based
pre-labeler exists only to pre-fill a file for the humans; it never
overrides what they return.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .ingest import normalize_query


class Intent(enum.Enum):
    INFORMATIONAL = "informational"
    NAVIGATIONAL = "navigational"
    TRANSACTIONAL = "transactional"
    OTHER = "other"


STUDY_INTENTS = (Intent.INFORMATIONAL, Intent.NAVIGATIONAL)

_INTENT_TOKENS = {i.value: i for i in Intent}


class LabelFileError(ValueError):
    pass


class LabelGapError(ValueError):
    """Raised in strict mode when candidates are missing from the label file."""

    def __init__(self, missing: list[str]):
        self.missing = missing
        preview = ", ".join(missing[:5])
        suffix = "..." if len(missing) > 5 else ""
        super().__init__(f"{len(missing)} candidates unlabeled: {preview}{suffix}")


@dataclass(frozen=True)
class LabeledQuery:
    text: str
    intent: Intent


@dataclass
class LabelingResult:
    labeled: list[LabeledQuery]
    missing: list[str] = field(default_factory=list)


def parse_intent(token: str) -> Intent:
    try:
        return _INTENT_TOKENS[token.strip().casefold()]
    except KeyError:
        raise LabelFileError(
            f"unknown label {token.strip()!r}; expected one of "
            f"{', '.join(sorted(_INTENT_TOKENS))}"
        ) from None


def load_intent_labels(source: Path | Iterable[str]) -> dict[str, Intent]:
    """Read a ``query<TAB>intent`` file; ``#`` comment lines are ignored."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in source]

    labels: dict[str, Intent] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LabelFileError(f"line {lineno}: expected query<TAB>intent, got {line!r}")
        text = normalize_query(parts[0])
        if not text:
            raise LabelFileError(f"line {lineno}: empty query")
        try:
            intent = parse_intent(parts[1])
        except LabelFileError as exc:
            raise LabelFileError(f"line {lineno}: {exc}") from None
        labels[text] = intent
    return labels


def apply_intent_labels(
    candidates: list[str],
    labels: Mapping[str, Intent],
    strict: bool = True,
) -> LabelingResult:
    """Attach intents to candidates.

    Every candidate must appear in the labels; missing ones go into the
    gap report and, in strict mode, abort the operation.
    """
    labeled: list[LabeledQuery] = []
    missing: list[str] = []
    for text in candidates:
        intent = labels.get(text)
        if intent is None:
            missing.append(text)
        else:
            labeled.append(LabeledQuery(text=text, intent=intent))
    if missing and strict:
        raise LabelGapError(missing)
    return LabelingResult(labeled=labeled, missing=missing)


_URL_SHAPED = re.compile(
    r"^(https?://|www\.)|(\.(de|com|org|net|at|ch|eu|info))(/|$)", re.IGNORECASE
)


def prelabel_hint(text: str) -> Intent | None:
    """Heuristic pre-fill for the label file: URL-shaped queries look
    navigational. Advisory only; human labels always win."""
    if _URL_SHAPED.search(text) and " " not in text:
        return Intent.NAVIGATIONAL
    return None


def write_label_template(
    candidates: Iterable[str], path: Path, prefill: bool = False
) -> None:
    """Write a label-file skeleton for human annotators."""
    lines = ["# query<TAB>intent  (informational|navigational|transactional|other)"]
    for text in candidates:
        hint = prelabel_hint(text) if prefill else None
        lines.append(f"{text}\t{hint.value if hint else ''}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
