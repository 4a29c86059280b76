"""Annotation runs against a chat-completion backend.

Backends are pluggable: an HTTP client for real chat-completion endpoints
(request keys: model, temperature, messages; reply read from the first
choice's message content) and a deterministic mock that serves replies from
a fixture mapping context_id to reply text. Unparseable replies become the
Unresolvable label, never a dropped record.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, IO, Protocol, Sequence

from .errors import BackendUnavailable, RecordInvalid
from .jats import CitationContext
from .prompts import Language, PromptSpec, RenderedPrompt, Tier, render
from .schemas import UNRESOLVABLE, AnnotationSchema

API_KEY_ENV = "CITECONTEXT_API_KEY"

RATIONALE_SUFFIX = "\nAnd briefly explain your reasoning."


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 1.0  # seconds; doubles per attempt


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str
    model_name: str
    temperature: float = 0.5
    max_parallel: int = 4
    retry_policy: RetryPolicy = RetryPolicy()
    timeout: float = 60.0
    requests_per_second: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


@dataclass(frozen=True)
class AnnotatorId:
    kind: str  # "Human" | "LLM"
    name: str
    prompt_spec: PromptSpec | None = None
    run_index: int | None = None

    def __post_init__(self):
        if self.kind not in ("Human", "LLM"):
            raise ValueError(f"unknown annotator kind: {self.kind!r}")
        if self.kind == "LLM" and (self.prompt_spec is None or self.run_index is None):
            raise ValueError("LLM annotators carry a prompt spec and run index")
        if self.kind == "Human" and (self.prompt_spec is not None or self.run_index is not None):
            raise ValueError("Human annotators carry neither prompt spec nor run index")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "name": self.name}
        if self.prompt_spec is not None:
            out["prompt_spec"] = {
                "schema_id": self.prompt_spec.schema_id,
                "tier": self.prompt_spec.tier.value,
                "language": self.prompt_spec.language.value,
                "template_version": self.prompt_spec.template_version,
            }
        if self.run_index is not None:
            out["run_index"] = self.run_index
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotatorId":
        spec = None
        if "prompt_spec" in data:
            raw = data["prompt_spec"]
            spec = PromptSpec(
                schema_id=raw["schema_id"],
                tier=Tier(raw["tier"]),
                language=Language(raw["language"]),
                template_version=raw.get("template_version", ""),
            )
        return cls(
            kind=data["kind"],
            name=data["name"],
            prompt_spec=spec,
            run_index=data.get("run_index"),
        )


@dataclass
class AnnotationRecord:
    context_id: str
    annotator: AnnotatorId
    label: str
    raw_response: str
    schema_id: str
    rationale: str | None = None
    timestamp: str = ""

    def to_dict(self) -> dict:
        out = {
            "context_id": self.context_id,
            "annotator": self.annotator.to_dict(),
            "label": self.label,
            "raw_response": self.raw_response,
            "schema_id": self.schema_id,
            "timestamp": self.timestamp,
        }
        if self.rationale is not None:
            out["rationale"] = self.rationale
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AnnotationRecord":
        return cls(
            context_id=data["context_id"],
            annotator=AnnotatorId.from_dict(data["annotator"]),
            label=data["label"],
            raw_response=data["raw_response"],
            schema_id=data["schema_id"],
            rationale=data.get("rationale"),
            timestamp=data.get("timestamp", ""),
        )


def normalize_response(raw: str, schema: AnnotationSchema) -> str:
    """Map a free-text reply to a class code.

    Matching is case-insensitive over whole-word occurrences of class names
    and codes. Exactly one matching class wins; zero or several distinct
    matches yield Unresolvable.
    """
    matched: set[str] = set()
    for cls in schema.classes:
        for surface in {cls.name, cls.code}:
            if re.search(rf"(?<![\w]){re.escape(surface)}(?![\w])", raw, re.IGNORECASE):
                matched.add(cls.code)
                break
    if len(matched) == 1:
        return matched.pop()
    return UNRESOLVABLE


class Backend(Protocol):
    def complete(self, prompt: str, context_id: str) -> str: ...


class MockBackend:
    """Deterministic fixture-driven backend: context_id -> reply text."""

    def __init__(self, replies: dict[str, str] | None = None, default: str | None = None):
        self.replies = dict(replies or {})
        self.default = default
        self.calls = 0

    @classmethod
    def from_fixture(cls, stream: IO[str], default: str | None = None) -> "MockBackend":
        return cls(json.load(stream), default=default)

    def complete(self, prompt: str, context_id: str) -> str:
        self.calls += 1
        if context_id in self.replies:
            return self.replies[context_id]
        if self.default is not None:
            return self.default
        raise KeyError(f"mock backend has no reply for {context_id!r}")


class _TokenBucket:
    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity or rate
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1:
                    self.tokens -= 1
                    return
                wait = (1 - self.tokens) / self.rate
            time.sleep(wait)


class HttpBackend:
    """Chat-completion HTTP client with retries and rate limiting.

    Request body: {"model": ..., "temperature": ..., "messages":
    [{"role": "user", "content": prompt}]}. Reply text is read from
    choices[0].message.content. The API key comes from the environment.
    """

    def __init__(self, config: BackendConfig, api_key_env: str = API_KEY_ENV):
        import requests

        self.config = config
        self.api_key_env = api_key_env
        self._session = requests.Session()
        self._bucket = (
            _TokenBucket(config.requests_per_second)
            if config.requests_per_second
            else None
        )

    def complete(self, prompt: str, context_id: str) -> str:
        config = self.config
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": config.model_name,
            "temperature": config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for attempt in range(config.retry_policy.max_attempts):
            if self._bucket is not None:
                self._bucket.acquire()
            try:
                response = self._session.post(
                    config.endpoint, json=body, headers=headers, timeout=config.timeout
                )
                response.raise_for_status()
                payload = response.json()
                return payload["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - every failure is retryable here
                last_error = exc
                if attempt + 1 < config.retry_policy.max_attempts:
                    time.sleep(config.retry_policy.backoff_base * (2**attempt))
        raise RuntimeError(f"backend request failed after retries: {last_error}")


def run_annotation(
    contexts: Sequence[CitationContext],
    spec: PromptSpec,
    schema: AnnotationSchema,
    backend: Backend,
    runs: int,
    annotator_name: str | None = None,
    max_parallel: int = 1,
    capture_rationale: bool = False,
    clock: Callable[[], float] = time.time,
) -> list[AnnotationRecord]:
    """Annotate every context ``runs`` times with one prompt spec.

    Always returns exactly len(contexts) * runs records, canonically sorted
    by (context_id, run_index); request failures surface as Unresolvable
    records carrying the error text.
    """
    if runs < 1:
        raise ValueError("runs must be a positive integer")
    if not contexts:
        return []

    name = annotator_name or f"llm:{spec.key}"
    prompts: dict[str, RenderedPrompt] = {
        ctx.context_id: render(spec, schema, ctx) for ctx in contexts
    }

    def annotate_one(ctx: CitationContext, run_index: int) -> tuple[AnnotationRecord, bool]:
        prompt_text = prompts[ctx.context_id].text
        if capture_rationale:
            prompt_text += RATIONALE_SUFFIX
        timestamp = datetime.fromtimestamp(clock(), tz=timezone.utc).isoformat()
        annotator = AnnotatorId(
            kind="LLM",
            name=name,
            prompt_spec=PromptSpec(spec.schema_id, spec.tier, spec.language, spec.template_version),
            run_index=run_index,
        )
        try:
            reply = backend.complete(prompt_text, ctx.context_id)
        except Exception as exc:  # noqa: BLE001
            record = AnnotationRecord(
                context_id=ctx.context_id,
                annotator=annotator,
                label=UNRESOLVABLE,
                raw_response=f"ERROR: {exc}",
                schema_id=schema.schema_id,
                timestamp=timestamp,
            )
            return record, False
        record = AnnotationRecord(
            context_id=ctx.context_id,
            annotator=annotator,
            label=normalize_response(reply, schema),
            raw_response=reply,
            schema_id=schema.schema_id,
            rationale=reply if capture_rationale else None,
            timestamp=timestamp,
        )
        return record, True

    tasks = [(ctx, run_index) for run_index in range(1, runs + 1) for ctx in contexts]
    if max_parallel > 1:
        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            results = list(pool.map(lambda t: annotate_one(*t), tasks))
    else:
        results = [annotate_one(ctx, run_index) for ctx, run_index in tasks]

    if not any(ok for _, ok in results):
        raise BackendUnavailable("every annotation request failed")

    records = [record for record, _ in results]
    records.sort(key=lambda r: (r.context_id, r.annotator.run_index or 0))
    return records


def import_human(records_file: bytes, schema: AnnotationSchema) -> list[AnnotationRecord]:
    """Read human annotations from UTF-8 JSON lines.

    Each line: {"context_id": ..., "label": ..., "annotator": ...} with
    optional "raw_response" and "timestamp". Labels may be class names or
    codes and are stored as codes.
    """
    by_name = {cls.name: cls.code for cls in schema.classes}
    codes = set(schema.codes)
    records: list[AnnotationRecord] = []
    for line_number, line in enumerate(records_file.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordInvalid(f"not valid JSON: {exc}", line_number)
        for key in ("context_id", "label", "annotator"):
            if key not in data:
                raise RecordInvalid(f"missing key {key!r}", line_number)
        label = data["label"]
        if label in by_name:
            label = by_name[label]
        elif label not in codes:
            raise RecordInvalid(
                f"label {data['label']!r} is not a class of schema {schema.schema_id}",
                line_number,
            )
        records.append(
            AnnotationRecord(
                context_id=str(data["context_id"]),
                annotator=AnnotatorId(kind="Human", name=str(data["annotator"])),
                label=label,
                raw_response=str(data.get("raw_response", data["label"])),
                schema_id=schema.schema_id,
                timestamp=str(data.get("timestamp", "")),
            )
        )
    return records
