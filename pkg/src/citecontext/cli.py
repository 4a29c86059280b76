"""Command-line front door: extract | annotate | evaluate | merge | serve | schemas."""

from __future__ import annotations

import json
from pathlib import Path

import click
import yaml

from . import adjudication
from .api import AdjudicationService, create_app
from .engine import (
    BackendConfig,
    HttpBackend,
    MockBackend,
    run_annotation,
)
from .errors import CiteContextError
from .jats import WindowPolicy, build_context, parse_jats, read_contexts, write_contexts
from .metrics import (
    LabelVector,
    confusion,
    consistency_table,
    format_consistency,
    format_report,
    majority_vote,
    report,
)
from .prompts import Language, PromptSpec, Tier, enumerate_specs, tiers_for
from .schemas import UNRESOLVABLE, builtin_schemas, get_schema, serialize_schema
from .store import AnnotatorSelector, GoldStandard, ResultStore, align, load_gold_csv

WINDOW_CHOICES = [w.value for w in WindowPolicy]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as stream:
        return yaml.safe_load(stream) or {}


@click.group()
@click.option("--store", "store_root", default=".citecontext-store", show_default=True,
              envvar="CITECONTEXT_STORE", help="Result store root directory.")
@click.option("--config", "config_path", default=None, help="Optional YAML config file.")
@click.option("--quiet", is_flag=True, default=False)
@click.pass_context
def main(ctx, store_root, config_path, quiet):
    """Citation context extraction, annotation, evaluation, and adjudication."""
    config = _load_config(config_path)
    store_root = config.get("store", store_root)
    ctx.obj = {
        "store": ResultStore(store_root),
        "config": config,
        "quiet": quiet,
    }


def _echo(ctx, message: str) -> None:
    if not ctx.obj["quiet"]:
        click.echo(message)


@main.command()
@click.argument("input_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--window", type=click.Choice(WINDOW_CHOICES), default=WindowPolicy.SENTENCE_PLUS_MINUS_ONE.value,
              show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True,
              help="Context file to write (JSON lines).")
@click.option("--fallback-label", default=None,
              help="Target label for anchors whose ref-id does not resolve.")
@click.pass_context
def extract(ctx, input_dir, window, output, fallback_label):
    """Extract citation contexts from a directory of JATS-XML files."""
    window = WindowPolicy(window)
    files = sorted(Path(input_dir).glob("*.xml"))
    contexts = []
    seen_ids: set[str] = set()
    parsed = 0
    dangling = 0
    failures: list[tuple[str, str]] = []
    for path in files:
        try:
            doc = parse_jats(path.read_bytes(), doc_id=path.stem)
        except CiteContextError as exc:
            failures.append((path.name, str(exc)))
            continue
        parsed += 1
        for anchor in doc.anchors:
            if anchor.dangling:
                dangling += 1
                if fallback_label is None:
                    continue
            context = build_context(doc, anchor, window, fallback_label=fallback_label)
            # grouped or repeated citations can collide on coordinates
            context_id = context.context_id
            n = 2
            while context_id in seen_ids:
                context_id = f"{context.context_id}#{n}"
                n += 1
            context.context_id = context_id
            seen_ids.add(context_id)
            contexts.append(context)

    if parsed == 0:
        raise click.ClickException("no documents parsed from the input directory")

    with open(output, "w", encoding="utf-8") as stream:
        count = write_contexts(contexts, stream)
    _echo(ctx, f"documents: {parsed}  anchors: {count}  dangling: {dangling}")
    for name, error in failures:
        _echo(ctx, f"skipped {name}: {error}")


def _parse_tiers(value: str, schema) -> list[Tier]:
    if value == "all":
        return tiers_for(schema)
    return [Tier(t.strip()) for t in value.split(",") if t.strip()]


@main.command()
@click.argument("contexts_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", "schema_id", default="purpose-5", show_default=True)
@click.option("--tiers", default="all", show_default=True,
              help='Comma-separated tiers or "all".')
@click.option("--languages", default="EN", show_default=True)
@click.option("--runs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--runset-id", default=None, help="Defaults to a generated id.")
@click.option("--mock", "mock_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Mock backend fixture (JSON: context_id -> reply).")
@click.option("--mock-default", default=None, help="Mock reply for unmapped contexts.")
@click.option("--endpoint", default=None, help="Chat-completion endpoint URL.")
@click.option("--model", default="gpt-3.5-turbo", show_default=True)
@click.option("--temperature", type=click.FloatRange(0.0, 2.0), default=0.5, show_default=True)
@click.option("--max-parallel", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--rationale", is_flag=True, default=False,
              help="Ask the model to also explain its decision.")
@click.pass_context
def annotate(ctx, contexts_file, schema_id, tiers, languages, runs, runset_id,
             mock_file, mock_default, endpoint, model, temperature, max_parallel, rationale):
    """Annotate contexts with every enumerated prompt spec."""
    schema = get_schema(schema_id)
    with open(contexts_file, encoding="utf-8") as stream:
        contexts = read_contexts(stream)

    language_set = {Language(lang.strip()) for lang in languages.split(",") if lang.strip()}
    tier_list = _parse_tiers(tiers, schema)
    specs = [
        spec for spec in enumerate_specs(schema, language_set) if spec.tier in tier_list
    ]
    if not specs:
        raise click.ClickException("no prompt specs enumerated; check --tiers/--languages")

    if mock_file is not None:
        with open(mock_file, encoding="utf-8") as stream:
            backend = MockBackend.from_fixture(stream, default=mock_default)
        clock = lambda: 0.0  # deterministic timestamps for reproducible runs
    elif mock_default is not None:
        backend = MockBackend(default=mock_default)
        clock = lambda: 0.0
    elif endpoint is not None:
        backend = HttpBackend(BackendConfig(
            endpoint=endpoint, model_name=model, temperature=temperature,
            max_parallel=max_parallel,
        ))
        import time
        clock = time.time
    else:
        raise click.ClickException("configure either --mock/--mock-default or --endpoint")

    store: ResultStore = ctx.obj["store"]
    runset_id = runset_id or f"{schema_id}-{len(store.runset_ids()) + 1:03d}"
    total = 0
    try:
        for spec in specs:
            records = run_annotation(
                contexts, spec, schema, backend, runs,
                max_parallel=max_parallel, capture_rationale=rationale, clock=clock,
            )
            store.save_records(runset_id, records, schema_id=schema_id)
            unresolvable = sum(1 for r in records if r.label == UNRESOLVABLE)
            total += len(records)
            _echo(ctx, f"{spec.key}: {len(records)} records, {unresolvable} unresolvable")
    except CiteContextError as exc:
        raise click.ClickException(str(exc))
    _echo(ctx, f"runset {runset_id}: {total} records")
    click.echo(runset_id)


def _load_gold(gold_file: str, gold_map: str | None, schema_id: str) -> GoldStandard:
    path = Path(gold_file)
    if path.suffix == ".csv":
        if gold_map is None:
            raise click.ClickException("--gold-map is required for CSV gold files")
        mapping = json.loads(Path(gold_map).read_text(encoding="utf-8"))
        return load_gold_csv(
            path.read_bytes(), schema_id,
            column_map=mapping["columns"],
            label_map=mapping.get("labels"),
            source=path.name,
        )
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            data = json.loads(line)
            entries.append((data["context_id"], data["label"]))
    return GoldStandard(
        schema_id=schema_id,
        entries=LabelVector(schema_id=schema_id, entries=tuple(entries)),
        source=path.name,
    )


@main.command()
@click.argument("runset_id")
@click.option("--gold", "gold_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Gold standard (JSON lines, or CSV with --gold-map).")
@click.option("--gold-map", default=None, help="Column mapping JSON for CSV gold files.")
@click.option("--tier", type=click.Choice([t.value for t in Tier]), default=None)
@click.option("--language", type=click.Choice([lang.value for lang in Language]), default=None)
@click.option("--run", "run_index", type=int, default=1, show_default=True)
@click.pass_context
def evaluate(ctx, runset_id, gold_file, gold_map, tier, language, run_index):
    """Evaluate one runset against a gold standard."""
    store: ResultStore = ctx.obj["store"]
    try:
        records = store.load_records(runset_id)
        schema = get_schema(store.manifest(runset_id)["schema_id"])
        gold = _load_gold(gold_file, gold_map, schema.schema_id)
        selector = AnnotatorSelector(
            kind="LLM",
            tier=Tier(tier) if tier else None,
            language=Language(language) if language else None,
            run_index=run_index,
        )
        pred, gold_vector = align(records, gold, selector)
        matrix = confusion(pred, gold_vector, schema)
        rep = report(matrix)
    except CiteContextError as exc:
        raise click.ClickException(str(exc))

    # run-1 vs run-2 consistency per prompt spec present in the runset
    pairs = []
    specs = sorted({
        (r.annotator.prompt_spec.tier, r.annotator.prompt_spec.language)
        for r in records if r.annotator.prompt_spec is not None
    }, key=lambda tl: (tl[0].value, tl[1].value))
    for spec_tier, spec_language in specs:
        vectors = []
        for run in (1, 2):
            run_records = [
                r for r in records
                if r.annotator.prompt_spec is not None
                and r.annotator.prompt_spec.tier == spec_tier
                and r.annotator.prompt_spec.language == spec_language
                and r.annotator.run_index == run
            ]
            vectors.append(LabelVector(
                schema_id=schema.schema_id,
                entries=tuple(sorted((r.context_id, r.label) for r in run_records)),
            ))
        if all(len(v) > 0 for v in vectors):
            pairs.append((f"{spec_tier.value},{spec_language.value}", vectors[0], vectors[1]))

    payload = rep.to_dict()
    if pairs:
        rows = consistency_table(pairs)
        payload["consistency"] = [
            {"prompt": row.label, "mismatches": row.mismatches,
             "agreement": row.agreement, "kappa": row.kappa}
            for row in rows
        ]
    store.write_json(f"runsets/{runset_id}/report.json", payload)
    click.echo(format_report(rep))
    if pairs:
        click.echo("")
        click.echo(format_consistency(consistency_table(pairs)))


@main.command()
@click.argument("runset_id")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True,
              help="Merged label file (JSON lines).")
@click.option("--method", type=click.Choice(["majority"]), default="majority", show_default=True)
@click.pass_context
def merge(ctx, runset_id, output, method):
    """Merge a runset's multi-annotator records by majority vote."""
    store: ResultStore = ctx.obj["store"]
    try:
        records = store.load_records(runset_id)
        schema_id = store.manifest(runset_id)["schema_id"]
    except CiteContextError as exc:
        raise click.ClickException(str(exc))
    merged, ties = majority_vote(records, schema_id)
    with open(output, "w", encoding="utf-8") as stream:
        for context_id, label in merged.entries:
            stream.write(json.dumps({"context_id": context_id, "label": label}) + "\n")
    store.write_json(f"runsets/{runset_id}/ties.json", {"ties": ties})
    _echo(ctx, f"merged {len(merged)} contexts, {len(ties)} ties")


@main.command()
@click.argument("runset_ids", nargs=-1, required=True)
@click.option("--contexts", "contexts_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Context file so the UI can show text and targets.")
@click.option("--combine", is_flag=True, default=False,
              help="One session over all runsets instead of one per runset.")
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--token", default=None, envvar="CITECONTEXT_API_TOKEN",
              help="Shared token required in X-Api-Token.")
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Static frontend assets to serve at /.")
@click.pass_context
def serve(ctx, runset_ids, contexts_file, combine, port, host, token, ui_dir):
    """Serve the adjudication API over the given runsets."""
    import uvicorn

    store: ResultStore = ctx.obj["store"]
    contexts = {}
    if contexts_file:
        with open(contexts_file, encoding="utf-8") as stream:
            contexts = {c.context_id: c for c in read_contexts(stream)}

    try:
        groups = [list(runset_ids)] if combine else [[rid] for rid in runset_ids]
        schemas = {}
        service = AdjudicationService(store=store, schemas=schemas, contexts=contexts)
        for group in groups:
            records = []
            schema_id = None
            for rid in group:
                records.extend(store.load_records(rid))
                schema_id = store.manifest(rid)["schema_id"]
            schema = get_schema(schema_id)
            schemas[schema.schema_id] = schema
            session = adjudication.create_session(
                session_id="+".join(group), records=records, schema=schema,
                contexts=contexts,
            )
            service.add_session(session)
    except CiteContextError as exc:
        raise click.ClickException(str(exc))

    app = create_app(service, token=token, static_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port)
    except (OSError, SystemExit) as exc:
        raise click.ClickException(f"server failed to start: {exc}")


@main.command()
@click.argument("schema_id", required=False)
def schemas(schema_id):
    """List builtin schemas, or print one as YAML."""
    if schema_id:
        click.echo(serialize_schema(get_schema(schema_id)).decode("utf-8"))
        return
    for schema in builtin_schemas():
        codes = ", ".join(schema.codes)
        click.echo(f"{schema.schema_id}: {schema.category_name} [{codes}]")


if __name__ == "__main__":
    main()
