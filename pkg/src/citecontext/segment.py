"""Rule-based sentence segmentation with an abbreviation guard list.

Deterministic by construction: a terminal punctuation run ends a sentence
unless the token before it is a known abbreviation or a single initial, or
the following text does not look like a sentence opening.
"""

from __future__ import annotations

import re

# Lowercased abbreviations that never terminate a sentence, stored without
# the trailing period.
_ABBREVIATIONS = frozenset({
    "e.g", "i.e", "cf", "vs", "etc", "al", "et al", "viz", "ca", "approx",
    "fig", "figs", "eq", "eqs", "sec", "secs", "ref", "refs", "no", "nos",
    "vol", "vols", "pp", "p", "ed", "eds", "dr", "mr", "mrs", "ms", "prof",
    "jr", "sr", "st", "inc", "ltd", "co", "corp", "dept", "univ",
})

_TERMINAL = re.compile(r"[.!?]+")
# What may follow a sentence boundary: upper-case letter, digit, or an
# opening quote/bracket leading into one.
_OPENER = re.compile(r"[\"'\(\[“]*[A-Z0-9]")


def _token_before(text: str, end: int) -> str:
    """Word immediately preceding ``text[end]``, lowercased, no final dot."""
    i = end
    while i > 0 and not text[i - 1].isspace():
        i -= 1
    return text[i:end].rstrip(".").lower().lstrip("(\"'[")


def _is_guarded(text: str, punct_start: int) -> bool:
    token = _token_before(text, punct_start)
    if not token:
        return True
    if token in _ABBREVIATIONS:
        return True
    # "et al." style two-word abbreviation
    if token == "al" or text[:punct_start].lower().endswith("et al"):
        return True
    # Dotted acronyms ("U.S.") keep their final period inside the sentence.
    if "." in token:
        return True
    return False


def segment_sentences(paragraph_text: str) -> list[str]:
    """Split a paragraph into sentences.

    Empty or whitespace-only input yields an empty list. Concatenating the
    result with single spaces reproduces the whitespace-normalized input.
    """
    text = " ".join(paragraph_text.split())
    if not text:
        return []

    boundaries: list[int] = []
    for match in _TERMINAL.finditer(text):
        end = match.end()
        if end >= len(text):
            break
        # Require whitespace after the punctuation run.
        if not text[end].isspace():
            continue
        follow = text[end:].lstrip()
        if not follow or not _OPENER.match(follow):
            continue
        # Abbreviation guards only apply to periods; "!" and "?" always split.
        if "." in match.group() and _is_guarded(text, match.start()):
            continue
        boundaries.append(end)

    sentences: list[str] = []
    start = 0
    for end in boundaries:
        sentence = text[start:end].strip()
        if sentence:
            sentences.append(sentence)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
