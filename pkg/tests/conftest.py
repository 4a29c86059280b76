from pathlib import Path

import pytest

from citecontext.jats import CitationContext, WindowPolicy

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
GOLDEN = Path(__file__).parent / "golden"

DUMMY_TARGET = "Smith and Jones (2020)"
DUMMY_TEXT = (
    "The framework has been widely adopted in prior studies "
    "(Smith and Jones, 2020). It remains the standard approach."
)


@pytest.fixture
def dummy_context() -> CitationContext:
    return CitationContext(
        context_id="ctx-dummy",
        target_label=DUMMY_TARGET,
        window=WindowPolicy.PARAGRAPH,
        text=DUMMY_TEXT,
        provenance={"doc_id": "dummy", "ref_id": "r1", "paragraph_index": 0, "sentence_index": 0},
    )
