"""JATS-XML ingestion: body paragraphs, citation anchors, windowed contexts.

Only the article body is read; section titles, figure and table captions
are excluded from paragraph text. Cross-references of bibliographic type
(``<xref ref-type="bibr">``) become citation anchors, one anchor per
referenced id (grouped citations share coordinates).
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Iterator

from .errors import DanglingAnchor, MalformedXml, NoBody
from .segment import segment_sentences

DISCIPLINE_PATTERNS = frozenset({"NS-NS", "NS-SSH", "SSH-SSH", "SSH-NS"})
TOPIC_TAGS = frozenset({"SDG7", "SDG13"})

# Paragraphs nested inside these elements are not running body text.
_EXCLUDED_ANCESTORS = frozenset({"fig", "table-wrap", "caption", "boxed-text", "title"})


class WindowPolicy(str, Enum):
    """How much text around the anchor goes into a citation context."""

    SENTENCE = "Sentence"
    SENTENCE_PLUS_MINUS_ONE = "SentencePlusMinusOne"
    PARAGRAPH = "Paragraph"


@dataclass(frozen=True)
class CitationAnchor:
    ref_id: str
    paragraph_index: int
    sentence_index: int
    marker: str
    dangling: bool = False


@dataclass
class Paragraph:
    index: int
    sentences: list[str]
    anchors: list[CitationAnchor] = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(self.sentences)


@dataclass
class Document:
    doc_id: str
    paragraphs: list[Paragraph]
    ref_list: dict[str, str]

    @property
    def anchors(self) -> Iterator[CitationAnchor]:
        for paragraph in self.paragraphs:
            yield from paragraph.anchors


@dataclass
class CitationContext:
    """One citation pair's annotation unit: target label plus windowed text."""

    context_id: str
    target_label: str
    window: WindowPolicy
    text: str
    provenance: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.text:
            raise ValueError("context text must be non-empty")
        self.window = WindowPolicy(self.window)
        pattern = self.meta.get("discipline_pattern")
        if pattern is not None and pattern not in DISCIPLINE_PATTERNS:
            raise ValueError(f"unknown discipline pattern: {pattern!r}")
        topic = self.meta.get("topic")
        if topic is not None and topic not in TOPIC_TAGS:
            raise ValueError(f"unknown topic tag: {topic!r}")

    def to_dict(self) -> dict:
        record = {
            "context_id": self.context_id,
            "target_label": self.target_label,
            "window": self.window.value,
            "text": self.text,
            "provenance": self.provenance,
        }
        if self.meta:
            record["meta"] = self.meta
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "CitationContext":
        return cls(
            context_id=record["context_id"],
            target_label=record["target_label"],
            window=WindowPolicy(record["window"]),
            text=record["text"],
            provenance=record.get("provenance", {}),
            meta=record.get("meta", {}),
        )


def _localname(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _normalized_itertext(element: ET.Element) -> str:
    return " ".join("".join(element.itertext()).split())


class _ParagraphBuilder:
    """Accumulates raw paragraph text plus anchor character offsets, then
    whitespace-normalizes while remapping the offsets."""

    def __init__(self):
        self.parts: list[str] = []
        self.raw_length = 0
        self.raw_anchors: list[tuple[str, int, str]] = []  # (ref_id, raw offset, marker)

    def append(self, chunk: str) -> None:
        if not chunk:
            return
        self.parts.append(chunk)
        self.raw_length += len(chunk)

    def add_anchor(self, rids: list[str], marker: str) -> None:
        for rid in rids:
            self.raw_anchors.append((rid, self.raw_length, marker))
        self.append(marker)

    def normalized(self) -> tuple[str, list[tuple[str, int, str]]]:
        """Collapse whitespace runs to single spaces; anchors keep pointing
        at the first character of their marker."""
        raw = "".join(self.parts)
        out: list[str] = []
        offset_map: dict[int, int] = {}
        pending_space = False
        for i, char in enumerate(raw):
            if char.isspace():
                if out:
                    pending_space = True
                continue
            if pending_space:
                out.append(" ")
                pending_space = False
            offset_map[i] = len(out)
            out.append(char)
        anchors = [
            (rid, offset_map.get(offset, len(out)), marker)
            for rid, offset, marker in self.raw_anchors
        ]
        return "".join(out), anchors

    @property
    def text(self) -> str:
        return self.normalized()[0]


def _walk_paragraph(element: ET.Element, builder: _ParagraphBuilder) -> None:
    if element.text:
        builder.append(element.text)
    for child in element:
        name = _localname(child.tag)
        if name == "xref" and child.get("ref-type") == "bibr":
            rids = (child.get("rid") or "").split()
            marker = _normalized_itertext(child) or f"[{' '.join(rids)}]"
            builder.add_anchor(rids, marker)
        elif name in _EXCLUDED_ANCESTORS:
            pass  # skip captions/titles nested inside the paragraph
        else:
            _walk_paragraph(child, builder)
        if child.tail:
            builder.append(child.tail)


def _sentence_index_at(sentences: list[str], offset: int) -> int:
    """Index of the sentence that contains character ``offset`` of the
    space-joined sentence text."""
    start = 0
    for i, sentence in enumerate(sentences):
        end = start + len(sentence)
        if offset < end + 1:  # +1 covers the joining space
            return i
        start = end + 1
    return max(len(sentences) - 1, 0)


def _extract_doc_id(root: ET.Element) -> str:
    candidates = [el for el in root.iter() if _localname(el.tag) == "article-id"]
    for el in candidates:
        if el.get("pub-id-type") == "doi" and el.text:
            return el.text.strip()
    for el in candidates:
        if el.text and el.text.strip():
            return el.text.strip()
    return ""


def parse_jats(xml: bytes, doc_id: str | None = None) -> Document:
    """Parse one JATS-XML article into a :class:`Document`.

    Raises :class:`MalformedXml` for unparseable input and :class:`NoBody`
    when the article carries no body element.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    body = next((el for el in root.iter() if _localname(el.tag) == "body"), None)
    if body is None:
        raise NoBody("article has no <body> element")

    ref_list: dict[str, str] = {}
    for ref in (el for el in root.iter() if _localname(el.tag) == "ref"):
        rid = ref.get("id")
        if rid:
            ref_list[rid] = _normalized_itertext(ref)

    parent_of = {child: parent for parent in body.iter() for child in parent}

    def _excluded(p: ET.Element) -> bool:
        node = parent_of.get(p)
        while node is not None:
            if _localname(node.tag) in _EXCLUDED_ANCESTORS:
                return True
            node = parent_of.get(node)
        return False

    paragraphs: list[Paragraph] = []
    for p in (el for el in body.iter() if _localname(el.tag) == "p"):
        if _excluded(p):
            continue
        builder = _ParagraphBuilder()
        _walk_paragraph(p, builder)
        text, raw_anchors = builder.normalized()
        if not text:
            continue
        index = len(paragraphs)
        sentences = segment_sentences(text)
        anchors = [
            CitationAnchor(
                ref_id=rid,
                paragraph_index=index,
                sentence_index=_sentence_index_at(sentences, offset),
                marker=marker,
                dangling=rid not in ref_list,
            )
            for rid, offset, marker in raw_anchors
        ]
        paragraphs.append(Paragraph(index=index, sentences=sentences, anchors=anchors))

    return Document(
        doc_id=doc_id or _extract_doc_id(root),
        paragraphs=paragraphs,
        ref_list=ref_list,
    )


def build_context(
    doc: Document,
    anchor: CitationAnchor,
    window: WindowPolicy,
    fallback_label: str | None = None,
) -> CitationContext:
    """Extract the windowed text around one anchor.

    ``SENTENCE_PLUS_MINUS_ONE`` clamps at paragraph edges; contexts never
    span paragraph boundaries.
    """
    window = WindowPolicy(window)
    paragraph = doc.paragraphs[anchor.paragraph_index]
    if anchor.dangling or anchor.ref_id not in doc.ref_list:
        if fallback_label is None:
            raise DanglingAnchor(f"unresolvable ref-id {anchor.ref_id!r} in {doc.doc_id!r}")
        target_label = fallback_label
    else:
        target_label = doc.ref_list[anchor.ref_id]

    if window is WindowPolicy.SENTENCE:
        text = paragraph.sentences[anchor.sentence_index]
    elif window is WindowPolicy.SENTENCE_PLUS_MINUS_ONE:
        lo = max(anchor.sentence_index - 1, 0)
        hi = min(anchor.sentence_index + 1, len(paragraph.sentences) - 1)
        text = " ".join(paragraph.sentences[lo : hi + 1])
    else:
        text = paragraph.text

    context_id = (
        f"{doc.doc_id or 'doc'}:p{anchor.paragraph_index}"
        f":s{anchor.sentence_index}:{anchor.ref_id}"
    )
    return CitationContext(
        context_id=context_id,
        target_label=target_label,
        window=window,
        text=text,
        provenance={
            "doc_id": doc.doc_id,
            "ref_id": anchor.ref_id,
            "paragraph_index": anchor.paragraph_index,
            "sentence_index": anchor.sentence_index,
        },
    )


def write_contexts(contexts: Iterable[CitationContext], stream: IO[str]) -> int:
    """Serialize contexts as UTF-8 JSON lines; returns the count written."""
    count = 0
    for context in contexts:
        stream.write(json.dumps(context.to_dict(), ensure_ascii=False) + "\n")
        count += 1
    return count


def read_contexts(stream: IO[str]) -> list[CitationContext]:
    return [
        CitationContext.from_dict(json.loads(line))
        for line in stream
        if line.strip()
    ]
