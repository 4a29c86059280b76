import itertools

import pytest
from fastapi.testclient import TestClient

from citecontext import adjudication
from citecontext.adjudication import create_session, export_resolved, modification_counts
from citecontext.api import AdjudicationService, create_app
from citecontext.engine import AnnotationRecord, AnnotatorId
from citecontext.errors import InvalidLabel, SchemaMismatch, UnknownContext
from citecontext.jats import CitationContext, WindowPolicy
from citecontext.metrics import LabelVector
from citecontext.schemas import UNRESOLVABLE, get_schema
from citecontext.store import ResultStore

PURPOSE = get_schema("purpose-5")


def _record(context_id, label, annotator, rationale=None):
    return AnnotationRecord(
        context_id=context_id,
        annotator=AnnotatorId(kind="Human", name=annotator),
        label=label,
        raw_response=label,
        schema_id="purpose-5",
        rationale=rationale,
    )


def _context(context_id, text="Some sentence citing work."):
    return CitationContext(
        context_id=context_id,
        target_label="Doe (2021)",
        window=WindowPolicy.SENTENCE,
        text=text,
        provenance={},
    )


def _fixture_records():
    """10 contexts: c00/c01 unanimous, c02..c07 two-way disagreements,
    c08 unanimous-but-unresolvable, c09 one unresolvable vote."""
    rows = {
        "c00": ("BKG", "BKG"),
        "c01": ("EVS", "EVS"),
        "c02": ("BKG", "EVS"),
        "c03": ("BKG", "CMP"),
        "c04": ("EVS", "USE"),
        "c05": ("CRT", "BKG"),
        "c06": ("CMP", "EVS"),
        "c07": ("USE", "BKG"),
        "c08": (UNRESOLVABLE, UNRESOLVABLE),
        "c09": ("BKG", UNRESOLVABLE),
    }
    records = []
    for cid, (a, b) in rows.items():
        records.append(_record(cid, a, "alice"))
        records.append(_record(cid, b, "bob"))
    return rows, records


# -- session construction -------------------------------------------------------


def test_queue_is_exactly_the_disagreements():
    rows, records = _fixture_records()
    session = create_session("s1", records, PURPOSE)
    expected = sorted(
        cid for cid, labels in rows.items()
        if len(set(labels)) > 1 or UNRESOLVABLE in labels
    )
    assert [item.context_id for item in session.queue] == expected
    assert len(session.queue) == 8


def test_queue_membership_matches_bruteforce_predicate():
    labels = ["BKG", "EVS", UNRESOLVABLE]
    for combo in itertools.product(labels, repeat=3):
        records = [
            _record("c1", label, f"ann{i}") for i, label in enumerate(combo)
        ]
        session = create_session("s", records, PURPOSE)
        should_queue = len(set(combo)) > 1 or UNRESOLVABLE in combo
        assert (len(session.queue) == 1) == should_queue, combo


def test_unanimous_records_yield_empty_queue():
    records = [_record("c1", "BKG", "alice"), _record("c1", "BKG", "bob")]
    session = create_session("s1", records, PURPOSE)
    assert session.queue == []
    assert session.next_item() is None


def test_schema_mismatch():
    record = _record("c1", "BKG", "alice")
    with pytest.raises(SchemaMismatch):
        create_session("s1", [record], get_schema("sentiment-3"))


def test_queue_items_carry_context_and_rationales():
    records = [
        _record("c1", "BKG", "alice", rationale="sets the scene"),
        _record("c1", "EVS", "bob"),
    ]
    contexts = {"c1": _context("c1", text="The cited work is used as proof.")}
    session = create_session("s1", records, PURPOSE, contexts=contexts)
    item = session.queue[0]
    assert item.text == "The cited work is used as proof."
    assert item.target_label == "Doe (2021)"
    assert item.labels == {"Human:alice": "BKG", "Human:bob": "EVS"}
    assert item.rationales == {"Human:alice": "sets the scene"}


# -- resolution and export -------------------------------------------------------


def test_resolve_and_export(tmp_path):
    store = ResultStore(tmp_path)
    rows, records = _fixture_records()
    session = create_session("s1", records, PURPOSE)

    resolutions = {
        "c02": "BKG", "c03": "CMP", "c04": "EVS", "c05": "CRT",
        "c06": "CMP", "c07": "USE", "c08": "BKG", "c09": "BKG",
    }
    for cid, label in resolutions.items():
        adjudication.resolve(session, PURPOSE, cid, label, resolver="carol", store=store)
    assert session.resolved_count == 8
    assert session.next_item() is None

    expected = LabelVector(
        "purpose-5",
        tuple(sorted({"c00": "BKG", "c01": "EVS", **resolutions}.items())),
    )
    assert export_resolved(session) == expected

    # the log is replayable into a fresh session
    fresh = create_session("s1", records, PURPOSE)
    adjudication.load_resolutions(fresh, store)
    assert export_resolved(fresh) == expected


def test_export_without_resolutions():
    _, records = _fixture_records()
    session = create_session("s1", records, PURPOSE)
    labels = export_resolved(session).labels
    assert labels["c00"] == "BKG"
    assert labels["c01"] == "EVS"
    for cid in ("c02", "c03", "c04", "c05", "c06", "c07", "c08", "c09"):
        assert labels[cid] == UNRESOLVABLE


def test_resolution_supersedence():
    _, records = _fixture_records()
    session = create_session("s1", records, PURPOSE)
    adjudication.resolve(session, PURPOSE, "c02", "BKG", resolver="carol")
    adjudication.resolve(session, PURPOSE, "c02", "EVS", resolver="carol")
    assert len(session.resolution_log) == 2  # both stay in the log
    assert session.resolutions["c02"].label == "EVS"  # newest wins
    assert session.resolved_count == 1
    assert export_resolved(session).labels["c02"] == "EVS"


def test_resolve_rejects_bad_input():
    _, records = _fixture_records()
    session = create_session("s1", records, PURPOSE)
    with pytest.raises(UnknownContext):
        adjudication.resolve(session, PURPOSE, "c00", "BKG", resolver="x")  # not queued
    with pytest.raises(UnknownContext):
        adjudication.resolve(session, PURPOSE, "nope", "BKG", resolver="x")
    with pytest.raises(InvalidLabel):
        adjudication.resolve(session, PURPOSE, "c02", "Sideways", resolver="x")
    with pytest.raises(InvalidLabel):
        adjudication.resolve(session, PURPOSE, "c02", UNRESOLVABLE, resolver="x")


def test_modification_counts():
    records = [
        _record("c1", "BKG", "alice"), _record("c1", "EVS", "bob"),
        _record("c2", "BKG", "alice"), _record("c2", "BKG", "bob"),
    ]
    session = create_session("s1", records, PURPOSE)
    adjudication.resolve(session, PURPOSE, "c1", "BKG", resolver="carol")
    assert modification_counts(session) == {"Human:alice": 0, "Human:bob": 1}


# -- HTTP API ---------------------------------------------------------------------


@pytest.fixture
def client(tmp_path):
    store = ResultStore(tmp_path)
    _, records = _fixture_records()
    contexts = {f"c{i:02d}": _context(f"c{i:02d}") for i in range(10)}
    service = AdjudicationService(
        store=store, schemas={"purpose-5": PURPOSE}, contexts=contexts
    )
    service.add_session(create_session("s1", records, PURPOSE, contexts=contexts))
    return TestClient(create_app(service))


def test_api_sessions(client):
    body = client.get("/v1/sessions").json()
    assert body == {
        "sessions": [
            {"session_id": "s1", "schema_id": "purpose-5", "total": 8, "resolved": 0}
        ]
    }
    detail = client.get("/v1/sessions/s1").json()
    assert len(detail["queue"]) == 8
    assert [c["code"] for c in detail["classes"]] == list(PURPOSE.codes)


def test_api_unknown_session(client):
    response = client.get("/v1/sessions/nope")
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "unknown_session"


def test_api_next_and_resolve_walkthrough(client):
    for _ in range(8):
        body = client.get("/v1/sessions/s1/next").json()
        assert body["done"] is False
        cid = body["item"]["context_id"]
        response = client.post(
            "/v1/sessions/s1/resolutions",
            json={"context_id": cid, "label": "BKG", "resolver": "carol"},
        )
        assert response.status_code == 200
        assert response.json()["resolution"]["label"] == "BKG"
    assert client.get("/v1/sessions/s1/next").json() == {"done": True, "item": None}

    export = client.get("/v1/sessions/s1/export").json()
    labels = {e["context_id"]: e["label"] for e in export["entries"]}
    assert len(labels) == 10
    assert labels["c01"] == "EVS"  # unanimous, untouched
    assert all(labels[f"c{i:02d}"] == "BKG" for i in range(2, 10))

    counts = client.get("/v1/sessions/s1/modifications").json()["modification_counts"]
    assert set(counts) == {"Human:alice", "Human:bob"}


def test_api_resolution_errors(client):
    response = client.post(
        "/v1/sessions/s1/resolutions",
        json={"context_id": "c02", "label": "Sideways", "resolver": "x"},
    )
    assert response.status_code == 422
    assert response.json()["error"]["code"] == "invalid_label"
    response = client.post(
        "/v1/sessions/s1/resolutions",
        json={"context_id": "zz", "label": "BKG", "resolver": "x"},
    )
    assert response.status_code == 404


def test_api_double_submit_one_effective_resolution(client):
    payload = {"context_id": "c02", "label": "EVS", "resolver": "carol"}
    client.post("/v1/sessions/s1/resolutions", json=payload)
    client.post("/v1/sessions/s1/resolutions", json=payload)
    detail = client.get("/v1/sessions/s1").json()
    assert detail["resolved"] == 1
    export = client.get("/v1/sessions/s1/export").json()
    labels = {e["context_id"]: e["label"] for e in export["entries"]}
    assert labels["c02"] == "EVS"


def test_api_contexts_and_reports(client, tmp_path):
    assert client.get("/v1/contexts/c03").json()["context_id"] == "c03"
    assert client.get("/v1/contexts/zz").status_code == 404
    assert client.get("/v1/reports/zz").status_code == 404


def test_api_token(tmp_path):
    store = ResultStore(tmp_path)
    service = AdjudicationService(store=store, schemas={"purpose-5": PURPOSE})
    client = TestClient(create_app(service, token="sekrit"))
    assert client.get("/v1/sessions").status_code == 401
    assert client.get("/v1/sessions", headers={"X-Api-Token": "wrong"}).status_code == 401
    assert client.get("/v1/sessions", headers={"X-Api-Token": "sekrit"}).status_code == 200


def test_service_flush_persists_session_summary(tmp_path):
    store = ResultStore(tmp_path)
    _, records = _fixture_records()
    service = AdjudicationService(store=store, schemas={"purpose-5": PURPOSE})
    service.add_session(create_session("s1", records, PURPOSE))
    service.flush()
    summary = store.read_json("sessions/s1/session.json")
    assert summary["session_id"] == "s1"
    assert len(summary["queue"]) == 8
