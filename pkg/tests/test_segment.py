from hypothesis import given
from hypothesis import strategies as st

from citecontext.segment import segment_sentences


def test_empty_input():
    assert segment_sentences("") == []
    assert segment_sentences("   \t\n ") == []


def test_single_sentence():
    assert segment_sentences("Just one sentence.") == ["Just one sentence."]


def test_two_plain_sentences():
    assert segment_sentences("First thing. Second thing.") == [
        "First thing.",
        "Second thing.",
    ]


def test_initials_split():
    # No abbreviation guard for bare initials: each period ends a sentence.
    assert segment_sentences("A. B. C.") == ["A.", "B.", "C."]


def test_eg_citation_does_not_split():
    text = (
        "This use of technical devices in an attempt to suppress political "
        "debates has been widely documented elsewhere (e.g. Latour, 2004; "
        "Lupton and Mather, 1997). At an extreme this use of GIS and mapping "
        "reinforces and aggravates existing divides and inequalities."
    )
    sentences = segment_sentences(text)
    assert len(sentences) == 2
    assert sentences[0].endswith("1997).")


def test_et_al_guard():
    text = "Results follow Smith et al. 2020 closely. A second point."
    assert len(segment_sentences(text)) == 2


def test_dotted_acronym_guard():
    text = "Policy in the U.S. Senate shifted. It shifted fast."
    assert segment_sentences(text) == [
        "Policy in the U.S. Senate shifted.",
        "It shifted fast.",
    ]


def test_question_and_exclamation_always_split():
    text = "Why now? Because costs fell! That is all."
    assert segment_sentences(text) == [
        "Why now?",
        "Because costs fell!",
        "That is all.",
    ]


def test_decimal_number_not_split():
    text = "Growth was 3.5 percent annually. It later slowed."
    assert len(segment_sentences(text)) == 2


def test_lowercase_continuation_not_split():
    text = "See ref. above for details."
    assert segment_sentences(text) == [text]


def test_whitespace_normalized():
    assert segment_sentences("One  thing.\n  Another  thing.") == [
        "One thing.",
        "Another thing.",
    ]


@given(st.text(max_size=300))
def test_join_reproduces_normalized_input(text):
    sentences = segment_sentences(text)
    assert " ".join(sentences) == " ".join(text.split())


@given(st.text(max_size=300))
def test_deterministic(text):
    assert segment_sentences(text) == segment_sentences(text)
