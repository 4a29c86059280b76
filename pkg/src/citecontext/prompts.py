"""Prompt rendering from stored template files.

One template file per (schema, tier, language), UTF-8 with LF endings.
The files are authoritative: rendering only fills the {target} and {text}
slots and changes nothing else, so rendered output stays diffable against
the published prompt texts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import MissingTemplate, TierUnsupported
from .jats import CitationContext
from .schemas import AnnotationSchema

TEMPLATE_VERSION = "or-2024"

TARGET_SLOT = "{target}"
TEXT_SLOT = "{text}"


class Tier(str, Enum):
    SIMPLE = "Simple"
    BASIC = "Basic"
    PRECISE = "Precise"
    FULL = "Full"


class Language(str, Enum):
    EN = "EN"
    JP = "JP"


_TIER_ORDER = [Tier.SIMPLE, Tier.BASIC, Tier.PRECISE, Tier.FULL]


@dataclass(frozen=True)
class PromptSpec:
    schema_id: str
    tier: Tier
    language: Language
    template_version: str = TEMPLATE_VERSION

    @property
    def key(self) -> str:
        return f"{self.schema_id}/{self.tier.value}/{self.language.value}"


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    spec: PromptSpec
    context_id: str


def template_text(schema_id: str, tier: Tier, language: Language) -> str:
    """Raw template content, or MissingTemplate if not shipped."""
    name = f"{tier.value.lower()}.{language.value.lower()}.txt"
    path = resources.files("citecontext") / "templates" / schema_id / name
    try:
        return path.read_text(encoding="utf-8")
    except (FileNotFoundError, NotADirectoryError):
        raise MissingTemplate(f"no template for {schema_id}/{tier.value}/{language.value}")


def render(spec: PromptSpec, schema: AnnotationSchema, ctx: CitationContext) -> RenderedPrompt:
    """Fill the two slots of the template named by ``spec`` with the
    context's target label and window text."""
    if spec.schema_id != schema.schema_id:
        raise ValueError(f"spec is for {spec.schema_id!r}, schema is {schema.schema_id!r}")
    if spec.tier is Tier.PRECISE and not schema.procedure:
        raise TierUnsupported(
            f"{schema.schema_id} has no annotation procedure; Precise tier is invalid"
        )
    template = template_text(spec.schema_id, spec.tier, spec.language)
    if template.count(TARGET_SLOT) != 1 or template.count(TEXT_SLOT) != 1:
        raise MissingTemplate(f"template {spec.key} must contain exactly one target and one text slot")
    text = template.replace(TARGET_SLOT, ctx.target_label).replace(TEXT_SLOT, ctx.text)
    return RenderedPrompt(text=text, spec=spec, context_id=ctx.context_id)


def tiers_for(schema: AnnotationSchema) -> list[Tier]:
    """Valid tiers: all four when the schema carries a procedure, otherwise
    Simple/Basic/Full."""
    if schema.procedure:
        return list(_TIER_ORDER)
    return [Tier.SIMPLE, Tier.BASIC, Tier.FULL]


def enumerate_specs(
    schema: AnnotationSchema,
    languages: set[Language] | frozenset[Language],
) -> list[PromptSpec]:
    """All prompt specs for a schema over the requested languages, in
    (tier, language) order."""
    ordered_languages = [lang for lang in Language if lang in languages]
    return [
        PromptSpec(schema_id=schema.schema_id, tier=tier, language=lang)
        for tier in tiers_for(schema)
        for lang in ordered_languages
    ]
