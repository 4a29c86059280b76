"""Annotation schema registry.

Schemas are declarative YAML files with explicit keys (name, code,
definition, keywords, criteria, example_sentences, procedure) so annotators
can audit prompts against them. The builtin set covers the two main
category schemas plus every reduced/renamed variant studied alongside them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources

import yaml

from .errors import SchemaInvalid

UNRESOLVABLE = "Unresolvable"

_BUILTIN_IDS = [
    "purpose-5",
    "sentiment-3",
    "purpose-3-other",
    "purpose-3-general",
    "purpose-3-pending",
    "purpose-3-ukn",
    "purpose-binary-bkg",
    "purpose-binary-evs",
    "purpose-binary",
    "sentiment-4-pending",
    "sentiment-3-ukn",
]


@dataclass(frozen=True)
class ClassDef:
    name: str
    code: str
    definition: str = ""
    keywords: tuple[str, ...] = ()
    criteria: tuple[str, ...] = ()
    example_sentences: tuple[str, ...] = ()


@dataclass(frozen=True)
class AnnotationSchema:
    schema_id: str
    category_name: str
    classes: tuple[ClassDef, ...]
    procedure: tuple[str, ...] = ()

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(c.code for c in self.classes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes)

    def class_by_code(self, code: str) -> ClassDef:
        for cls in self.classes:
            if cls.code == code:
                return cls
        raise KeyError(code)

    def to_dict(self) -> dict:
        out = {
            "schema_id": self.schema_id,
            "category_name": self.category_name,
            "classes": [
                {
                    "name": c.name,
                    "code": c.code,
                    "definition": c.definition,
                    "keywords": list(c.keywords),
                    "criteria": list(c.criteria),
                    "example_sentences": list(c.example_sentences),
                }
                for c in self.classes
            ],
        }
        if self.procedure:
            out["procedure"] = list(self.procedure)
        return out


def serialize_schema(schema: AnnotationSchema) -> bytes:
    return yaml.safe_dump(schema.to_dict(), sort_keys=False, allow_unicode=True).encode("utf-8")


def _build(data: dict) -> AnnotationSchema:
    if not isinstance(data, dict):
        raise SchemaInvalid("schema file must contain a mapping at top level")
    for key in ("schema_id", "category_name", "classes"):
        if key not in data:
            raise SchemaInvalid(f"missing required key: {key}")
    raw_classes = data["classes"]
    if not isinstance(raw_classes, list) or len(raw_classes) < 2:
        raise SchemaInvalid("classes: at least 2 classes are required")

    classes: list[ClassDef] = []
    seen_codes: set[str] = set()
    seen_names: set[str] = set()
    for i, raw in enumerate(raw_classes):
        if not isinstance(raw, dict) or "name" not in raw or "code" not in raw:
            raise SchemaInvalid(f"classes[{i}]: each class needs name and code")
        code = str(raw["code"])
        name = str(raw["name"])
        if not code:
            raise SchemaInvalid(f"classes[{i}].code: must be non-empty")
        if code in seen_codes:
            raise SchemaInvalid(f"classes[{i}].code: duplicate code {code!r}")
        if name in seen_names:
            raise SchemaInvalid(f"classes[{i}].name: duplicate name {name!r}")
        seen_codes.add(code)
        seen_names.add(name)
        classes.append(
            ClassDef(
                name=name,
                code=code,
                definition=str(raw.get("definition", "") or ""),
                keywords=tuple(raw.get("keywords") or ()),
                criteria=tuple(raw.get("criteria") or ()),
                example_sentences=tuple(raw.get("example_sentences") or ()),
            )
        )

    return AnnotationSchema(
        schema_id=str(data["schema_id"]),
        category_name=str(data["category_name"]),
        classes=tuple(classes),
        procedure=tuple(data.get("procedure") or ()),
    )


def load_schema(definition_file: bytes) -> AnnotationSchema:
    """Parse and validate one schema definition file (UTF-8 YAML)."""
    try:
        data = yaml.safe_load(io.BytesIO(definition_file))
    except yaml.YAMLError as exc:
        raise SchemaInvalid(f"not valid YAML: {exc}") from exc
    return _build(data)


def builtin_schemas() -> list[AnnotationSchema]:
    """All schemas shipped with the package, main categories first."""
    return [_load_builtin(schema_id) for schema_id in _BUILTIN_IDS]


def _load_builtin(schema_id: str) -> AnnotationSchema:
    data_dir = resources.files("citecontext") / "schema_data"
    return load_schema((data_dir / f"{schema_id}.yaml").read_bytes())


def get_schema(schema_id: str) -> AnnotationSchema:
    """Look up a builtin schema by id."""
    if schema_id not in _BUILTIN_IDS:
        raise SchemaInvalid(f"unknown builtin schema: {schema_id!r}")
    return _load_builtin(schema_id)
