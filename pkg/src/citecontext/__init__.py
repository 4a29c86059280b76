"""Citation context toolkit: JATS extraction, prompt-driven LLM annotation,
consistency/performance evaluation, and human adjudication support."""

from .jats import (
    CitationAnchor,
    CitationContext,
    Document,
    Paragraph,
    WindowPolicy,
    build_context,
    parse_jats,
)
from .schemas import AnnotationSchema, ClassDef, UNRESOLVABLE, builtin_schemas, get_schema, load_schema
from .prompts import Language, PromptSpec, RenderedPrompt, Tier, enumerate_specs, render
from .engine import (
    AnnotationRecord,
    AnnotatorId,
    BackendConfig,
    HttpBackend,
    MockBackend,
    import_human,
    normalize_response,
    run_annotation,
)
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    LabelVector,
    agreement,
    cohens_kappa,
    confusion,
    consistency_table,
    majority_vote,
    report,
)
from .store import AnnotatorSelector, GoldStandard, ResultStore, align, load_gold_csv
from .segment import segment_sentences

__version__ = "0.1.0"
