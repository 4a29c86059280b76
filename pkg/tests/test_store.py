import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citecontext.engine import AnnotationRecord, AnnotatorId
from citecontext.errors import EmptySelection, NotFound, StoreCorrupt
from citecontext.metrics import LabelVector
from citecontext.prompts import Language, PromptSpec, Tier
from citecontext.store import (
    AnnotatorSelector,
    GoldStandard,
    ResultStore,
    align,
    load_gold_csv,
)

SPEC = PromptSpec("purpose-5", Tier.SIMPLE, Language.EN)


def _llm_record(context_id, label, run_index=1, tier=Tier.SIMPLE):
    return AnnotationRecord(
        context_id=context_id,
        annotator=AnnotatorId(
            kind="LLM",
            name="mock",
            prompt_spec=PromptSpec("purpose-5", tier, Language.EN),
            run_index=run_index,
        ),
        label=label,
        raw_response=label,
        schema_id="purpose-5",
        timestamp="1970-01-01T00:00:00+00:00",
    )


def _human_record(context_id, label, annotator="alice"):
    return AnnotationRecord(
        context_id=context_id,
        annotator=AnnotatorId(kind="Human", name=annotator),
        label=label,
        raw_response=label,
        schema_id="purpose-5",
    )


# -- runsets ----------------------------------------------------------------


def test_roundtrip(tmp_path):
    store = ResultStore(tmp_path)
    records = [_llm_record(f"c{i:03d}", "BKG") for i in range(10)]
    manifest = store.save_records("rs1", records)
    assert manifest["record_count"] == 10
    assert store.load_records("rs1") == records
    assert store.runset_ids() == ["rs1"]
    assert store.manifest("rs1")["schema_id"] == "purpose-5"


def test_append_only(tmp_path):
    store = ResultStore(tmp_path)
    first = [_llm_record("c1", "BKG")]
    second = [_llm_record("c2", "EVS")]
    store.save_records("rs1", first)
    store.save_records("rs1", second)
    assert store.load_records("rs1") == first + second


def test_missing_runset(tmp_path):
    store = ResultStore(tmp_path)
    with pytest.raises(NotFound):
        store.load_records("absent")
    with pytest.raises(NotFound):
        store.manifest("absent")


def test_truncated_records_fail_closed(tmp_path):
    store = ResultStore(tmp_path)
    store.save_records("rs1", [_llm_record(f"c{i}", "BKG") for i in range(5)])
    path = tmp_path / "runsets" / "rs1" / "records.jsonl"
    lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
    path.write_text("".join(lines[:3]), encoding="utf-8")
    with pytest.raises(StoreCorrupt):
        store.load_records("rs1")


def test_edited_records_fail_closed(tmp_path):
    store = ResultStore(tmp_path)
    store.save_records("rs1", [_llm_record("c1", "BKG")])
    path = tmp_path / "runsets" / "rs1" / "records.jsonl"
    path.write_text(path.read_text(encoding="utf-8").replace("BKG", "EVS"),
                    encoding="utf-8")
    with pytest.raises(StoreCorrupt):
        store.load_records("rs1")


def test_bad_manifest_fails_closed(tmp_path):
    store = ResultStore(tmp_path)
    store.save_records("rs1", [_llm_record("c1", "BKG")])
    (tmp_path / "runsets" / "rs1" / "manifest.json").write_text("{oops", encoding="utf-8")
    with pytest.raises(StoreCorrupt):
        store.load_records("rs1")


def test_missing_record_file_fails_closed(tmp_path):
    store = ResultStore(tmp_path)
    store.save_records("rs1", [_llm_record("c1", "BKG")])
    (tmp_path / "runsets" / "rs1" / "records.jsonl").unlink()
    with pytest.raises(StoreCorrupt):
        store.load_records("rs1")


_labels = st.sampled_from(["BKG", "EVS", "CMP", "Unresolvable"])
_records = st.lists(
    st.tuples(st.integers(min_value=0, max_value=50), _labels, st.integers(1, 3)),
    min_size=0,
    max_size=30,
).map(lambda rows: [
    _llm_record(f"c{i:03d}", label, run_index=run)
    for i, label, run in rows
])


@settings(max_examples=25, deadline=None)
@given(_records)
def test_roundtrip_property(tmp_path_factory, records):
    store = ResultStore(tmp_path_factory.mktemp("store"))
    store.save_records("rs", records, schema_id="purpose-5")
    assert store.load_records("rs") == records


# -- logs and json ------------------------------------------------------------


def test_append_log_roundtrip(tmp_path):
    store = ResultStore(tmp_path)
    assert store.read_log("sessions/s1/resolutions.jsonl") == []
    store.append_log("sessions/s1/resolutions.jsonl", [{"a": 1}])
    store.append_log("sessions/s1/resolutions.jsonl", [{"b": 2}])
    assert store.read_log("sessions/s1/resolutions.jsonl") == [{"a": 1}, {"b": 2}]


def test_write_read_json(tmp_path):
    store = ResultStore(tmp_path)
    store.write_json("runsets/rs/report.json", {"accuracy": 0.5})
    assert store.read_json("runsets/rs/report.json") == {"accuracy": 0.5}
    with pytest.raises(NotFound):
        store.read_json("missing.json")


# -- gold standards and alignment ---------------------------------------------


def test_load_gold_csv():
    data = b"pair_id,purpose\nc1,Background\nc2,EVS\n"
    gold = load_gold_csv(
        data,
        "purpose-5",
        column_map={"context_id": "pair_id", "label": "purpose"},
        label_map={"Background": "BKG"},
        source="gold.csv",
    )
    assert gold.entries.labels == {"c1": "BKG", "c2": "EVS"}
    assert gold.source == "gold.csv"


def test_selector_matching():
    llm = _llm_record("c1", "BKG", run_index=2, tier=Tier.FULL).annotator
    human = _human_record("c1", "BKG").annotator
    assert AnnotatorSelector().matches(llm)
    assert AnnotatorSelector(kind="LLM", tier=Tier.FULL, run_index=2).matches(llm)
    assert not AnnotatorSelector(tier=Tier.SIMPLE).matches(llm)
    assert not AnnotatorSelector(run_index=1).matches(llm)
    assert not AnnotatorSelector(tier=Tier.FULL).matches(human)
    assert AnnotatorSelector(kind="Human", name="alice").matches(human)


def test_align():
    records = [
        _llm_record("c1", "BKG"),
        _llm_record("c2", "EVS"),
        _llm_record("c3", "CMP"),
    ]
    gold = GoldStandard(
        schema_id="purpose-5",
        entries=LabelVector("purpose-5", (("c2", "EVS"), ("c1", "EVS"), ("c9", "BKG"))),
    )
    pred, gold_vector = align(records, gold, AnnotatorSelector(kind="LLM"))
    assert pred.entries == (("c1", "BKG"), ("c2", "EVS"))
    assert gold_vector.entries == (("c1", "EVS"), ("c2", "EVS"))


def test_align_requires_single_identity():
    records = [_llm_record("c1", "BKG", run_index=1), _llm_record("c1", "BKG", run_index=2)]
    gold = GoldStandard(
        schema_id="purpose-5",
        entries=LabelVector("purpose-5", (("c1", "BKG"),)),
    )
    with pytest.raises(EmptySelection):
        align(records, gold, AnnotatorSelector(kind="LLM"))
    pred, _ = align(records, gold, AnnotatorSelector(kind="LLM", run_index=2))
    assert pred.entries == (("c1", "BKG"),)


def test_align_no_overlap():
    gold = GoldStandard(
        schema_id="purpose-5",
        entries=LabelVector("purpose-5", (("zz", "BKG"),)),
    )
    with pytest.raises(EmptySelection):
        align([_llm_record("c1", "BKG")], gold, AnnotatorSelector())
