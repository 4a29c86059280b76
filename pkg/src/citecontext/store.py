"""File-backed result store: runsets of annotation records, gold standards,
and adjudication resolutions.

Layout under the store root:

    runsets/<runset_id>/manifest.json   runset metadata + integrity info
    runsets/<runset_id>/records.jsonl   append-only annotation records
    sessions/<session_id>/session.json  adjudication session metadata
    sessions/<session_id>/resolutions.jsonl  append-only resolution log

Records are line-delimited JSON: diffable, greppable, no database needed.
The manifest carries a record count and SHA-256 of the record file; a
truncated or edited file fails closed with StoreCorrupt.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from filelock import FileLock

from .engine import AnnotationRecord, AnnotatorId
from .errors import EmptySelection, NotFound, StoreCorrupt
from .metrics import LabelVector
from .prompts import Language, Tier

STORE_VERSION = 1


@dataclass(frozen=True)
class GoldStandard:
    schema_id: str
    entries: LabelVector
    source: str = ""


@dataclass(frozen=True)
class AnnotatorSelector:
    """Filter over annotator identity fields; None means "any"."""

    kind: str | None = None
    name: str | None = None
    tier: Tier | None = None
    language: Language | None = None
    run_index: int | None = None

    def matches(self, annotator: AnnotatorId) -> bool:
        if self.kind is not None and annotator.kind != self.kind:
            return False
        if self.name is not None and annotator.name != self.name:
            return False
        if self.tier is not None:
            if annotator.prompt_spec is None or annotator.prompt_spec.tier != self.tier:
                return False
        if self.language is not None:
            if annotator.prompt_spec is None or annotator.prompt_spec.language != self.language:
                return False
        if self.run_index is not None and annotator.run_index != self.run_index:
            return False
        return True


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ResultStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- runsets ----------------------------------------------------------

    def _runset_dir(self, runset_id: str) -> Path:
        return self.root / "runsets" / runset_id

    def runset_ids(self) -> list[str]:
        base = self.root / "runsets"
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "manifest.json").is_file())

    def manifest(self, runset_id: str) -> dict:
        path = self._runset_dir(runset_id) / "manifest.json"
        if not path.is_file():
            raise NotFound(f"runset {runset_id!r} does not exist")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StoreCorrupt(f"manifest of {runset_id!r} unreadable: {exc}") from exc

    def save_records(
        self,
        runset_id: str,
        records: Sequence[AnnotationRecord],
        schema_id: str | None = None,
    ) -> dict:
        """Append records to a runset (creating it on first save) and
        refresh the manifest. Prior records are never rewritten."""
        directory = self._runset_dir(runset_id)
        directory.mkdir(parents=True, exist_ok=True)
        records_path = directory / "records.jsonl"
        manifest_path = directory / "manifest.json"

        with FileLock(str(directory / ".lock")):
            existing: dict = {}
            if manifest_path.is_file():
                existing = json.loads(manifest_path.read_text(encoding="utf-8"))
            if schema_id is None:
                schema_id = existing.get("schema_id") or (records[0].schema_id if records else "")
            with records_path.open("a", encoding="utf-8") as stream:
                for record in records:
                    stream.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            count = existing.get("record_count", 0) + len(records)
            manifest = {
                "version": STORE_VERSION,
                "runset_id": runset_id,
                "schema_id": schema_id,
                "record_count": count,
                "records_sha256": _sha256(records_path),
                "created_at": existing.get(
                    "created_at", datetime.now(timezone.utc).isoformat()
                ),
            }
            manifest_path.write_text(
                json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
            )
        return manifest

    def load_records(self, runset_id: str) -> list[AnnotationRecord]:
        """Load a runset, verifying count and checksum; raises StoreCorrupt
        rather than returning partial data."""
        manifest = self.manifest(runset_id)
        records_path = self._runset_dir(runset_id) / "records.jsonl"
        if not records_path.is_file():
            raise StoreCorrupt(f"runset {runset_id!r} has a manifest but no record file")
        if _sha256(records_path) != manifest.get("records_sha256"):
            raise StoreCorrupt(f"runset {runset_id!r} fails its checksum")
        records: list[AnnotationRecord] = []
        for line_number, line in enumerate(
            records_path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                records.append(AnnotationRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise StoreCorrupt(
                    f"runset {runset_id!r} line {line_number} unreadable: {exc}"
                ) from exc
        if len(records) != manifest.get("record_count"):
            raise StoreCorrupt(
                f"runset {runset_id!r} holds {len(records)} records, manifest says "
                f"{manifest.get('record_count')}"
            )
        return records

    # -- generic append-only logs (used by adjudication sessions) ---------

    def append_log(self, relative: str, entries: Iterable[dict]) -> None:
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(path.parent / ".lock")):
            with path.open("a", encoding="utf-8") as stream:
                for entry in entries:
                    stream.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def read_log(self, relative: str) -> list[dict]:
        path = self.root / relative
        if not path.is_file():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def write_json(self, relative: str, payload: dict) -> None:
        path = self.root / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")

    def read_json(self, relative: str) -> dict:
        path = self.root / relative
        if not path.is_file():
            raise NotFound(f"{relative} does not exist in the store")
        return json.loads(path.read_text(encoding="utf-8"))


def load_gold_csv(
    data: bytes,
    schema_id: str,
    column_map: dict[str, str],
    label_map: dict[str, str] | None = None,
    source: str = "",
) -> GoldStandard:
    """Ingest a delimiter-separated gold-standard export.

    ``column_map`` names the context-id and label columns, e.g.
    {"context_id": "pair_id", "label": "purpose"}; ``label_map`` optionally
    translates the file's label surface to schema class codes.
    """
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    entries: list[tuple[str, str]] = []
    for row in reader:
        cid = row[column_map["context_id"]]
        label = row[column_map["label"]]
        if label_map:
            label = label_map.get(label, label)
        entries.append((cid, label))
    return GoldStandard(
        schema_id=schema_id,
        entries=LabelVector(schema_id=schema_id, entries=tuple(entries)),
        source=source,
    )


def align(
    records: Sequence[AnnotationRecord],
    gold: GoldStandard,
    selector: AnnotatorSelector,
) -> tuple[LabelVector, LabelVector]:
    """Restrict one annotator's records and the gold standard to their
    shared contexts, in matching (sorted) order."""
    selected = [r for r in records if selector.matches(r.annotator)]
    identities = {json.dumps(r.annotator.to_dict(), sort_keys=True) for r in selected}
    if len(identities) > 1:
        raise EmptySelection(
            f"selector matches {len(identities)} annotator identities; narrow it to one"
        )
    gold_labels = gold.entries.labels
    common = sorted({r.context_id for r in selected} & set(gold_labels))
    if not common:
        raise EmptySelection("no overlap between selected records and the gold standard")
    by_context = {r.context_id: r.label for r in selected}
    pred = LabelVector(
        schema_id=gold.schema_id,
        entries=tuple((cid, by_context[cid]) for cid in common),
    )
    gold_vector = LabelVector(
        schema_id=gold.schema_id,
        entries=tuple((cid, gold_labels[cid]) for cid in common),
    )
    return pred, gold_vector
