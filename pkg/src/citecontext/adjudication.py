"""Disagreement queues and human resolutions for the discussion phase.

A session is built from one or more runsets over the same schema: its
queue holds exactly the contexts where the configured annotators disagree
or any label is Unresolvable. Resolutions are append-only; a newer
resolution supersedes an older one but both stay in the log. The export is
a pure function of (records, resolutions).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .engine import AnnotationRecord, AnnotatorId
from .errors import InvalidLabel, SchemaMismatch, UnknownContext
from .jats import CitationContext
from .metrics import LabelVector
from .schemas import UNRESOLVABLE, AnnotationSchema
from .store import AnnotatorSelector, ResultStore


def annotator_key(annotator: AnnotatorId) -> str:
    if annotator.kind == "Human":
        return f"Human:{annotator.name}"
    spec = annotator.prompt_spec
    return f"LLM:{annotator.name}#{spec.tier.value},{spec.language.value}#run{annotator.run_index}"


@dataclass(frozen=True)
class Resolution:
    context_id: str
    label: str
    resolver: str
    note: str = ""
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "context_id": self.context_id,
            "label": self.label,
            "resolver": self.resolver,
            "note": self.note,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Resolution":
        return cls(
            context_id=data["context_id"],
            label=data["label"],
            resolver=data["resolver"],
            note=data.get("note", ""),
            timestamp=data.get("timestamp", ""),
        )


@dataclass
class DisagreementItem:
    context_id: str
    target_label: str
    text: str
    labels: dict[str, str]  # annotator key -> class code
    rationales: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "context_id": self.context_id,
            "target_label": self.target_label,
            "text": self.text,
            "labels": self.labels,
            "rationales": self.rationales,
        }


def _is_disagreement(labels: dict[str, str]) -> bool:
    values = list(labels.values())
    return len(set(values)) > 1 or UNRESOLVABLE in values


@dataclass
class AdjudicationSession:
    session_id: str
    schema_id: str
    queue: list[DisagreementItem]
    records: list[AnnotationRecord]
    resolutions: dict[str, Resolution] = field(default_factory=dict)
    resolution_log: list[Resolution] = field(default_factory=list)

    @property
    def resolved_count(self) -> int:
        return sum(1 for item in self.queue if item.context_id in self.resolutions)

    def next_item(self) -> DisagreementItem | None:
        """First unresolved queue item in context order; None when done."""
        for item in self.queue:
            if item.context_id not in self.resolutions:
                return item
        return None


def create_session(
    session_id: str,
    records: list[AnnotationRecord],
    schema: AnnotationSchema,
    contexts: dict[str, CitationContext] | None = None,
    annotator_filter: AnnotatorSelector | None = None,
) -> AdjudicationSession:
    """Build a session whose queue is exactly the disagreeing contexts,
    ordered by context_id."""
    schema_ids = {record.schema_id for record in records}
    if schema_ids - {schema.schema_id}:
        raise SchemaMismatch(
            f"records cover schemas {sorted(schema_ids)}, session is {schema.schema_id}"
        )
    if annotator_filter is not None:
        records = [r for r in records if annotator_filter.matches(r.annotator)]

    contexts = contexts or {}
    by_context: dict[str, list[AnnotationRecord]] = {}
    for record in records:
        by_context.setdefault(record.context_id, []).append(record)

    queue: list[DisagreementItem] = []
    for context_id in sorted(by_context):
        group = by_context[context_id]
        labels = {annotator_key(r.annotator): r.label for r in group}
        if not _is_disagreement(labels):
            continue
        ctx = contexts.get(context_id)
        rationales = {
            annotator_key(r.annotator): r.rationale for r in group if r.rationale
        }
        queue.append(
            DisagreementItem(
                context_id=context_id,
                target_label=ctx.target_label if ctx else "",
                text=ctx.text if ctx else "",
                labels=labels,
                rationales=rationales,
            )
        )
    return AdjudicationSession(
        session_id=session_id,
        schema_id=schema.schema_id,
        queue=queue,
        records=list(records),
    )


def resolve(
    session: AdjudicationSession,
    schema: AnnotationSchema,
    context_id: str,
    label: str,
    resolver: str,
    note: str = "",
    store: ResultStore | None = None,
) -> Resolution:
    """Record a resolution; a later one supersedes without erasing the log."""
    if not any(item.context_id == context_id for item in session.queue):
        raise UnknownContext(f"{context_id!r} is not in the session queue")
    if label not in schema.codes:
        raise InvalidLabel(f"{label!r} is not a class of schema {schema.schema_id}")
    resolution = Resolution(
        context_id=context_id,
        label=label,
        resolver=resolver,
        note=note,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
    session.resolution_log.append(resolution)
    session.resolutions[context_id] = resolution
    if store is not None:
        store.append_log(
            f"sessions/{session.session_id}/resolutions.jsonl", [resolution.to_dict()]
        )
    return resolution


def load_resolutions(session: AdjudicationSession, store: ResultStore) -> None:
    """Replay the persisted resolution log into a freshly built session."""
    for entry in store.read_log(f"sessions/{session.session_id}/resolutions.jsonl"):
        resolution = Resolution.from_dict(entry)
        session.resolution_log.append(resolution)
        session.resolutions[resolution.context_id] = resolution


def export_resolved(session: AdjudicationSession) -> LabelVector:
    """Adjudicated labels: resolution if present, else the unanimous label,
    else Unresolvable."""
    by_context: dict[str, set[str]] = {}
    for record in session.records:
        by_context.setdefault(record.context_id, set()).add(record.label)

    entries: list[tuple[str, str]] = []
    for context_id in sorted(by_context):
        if context_id in session.resolutions:
            entries.append((context_id, session.resolutions[context_id].label))
            continue
        labels = by_context[context_id]
        if len(labels) == 1 and UNRESOLVABLE not in labels:
            entries.append((context_id, next(iter(labels))))
        else:
            entries.append((context_id, UNRESOLVABLE))
    return LabelVector(schema_id=session.schema_id, entries=tuple(entries))


def modification_counts(session: AdjudicationSession) -> dict[str, int]:
    """Per annotator, how many of their labels differ from the adjudicated
    export. Lets the "fewest modifications" selection rule be applied by
    hand."""
    final = export_resolved(session).labels
    counts: dict[str, int] = {}
    for record in session.records:
        key = annotator_key(record.annotator)
        counts.setdefault(key, 0)
        if final.get(record.context_id) != record.label:
            counts[key] += 1
    return counts
