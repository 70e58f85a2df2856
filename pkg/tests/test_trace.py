import pytest

from glassflow.trace import AUDIT_RUN_ID, EventKind, TraceStore


def test_events_keep_append_order_and_sequence():
    store = TraceStore()
    store.append("r1", None, EventKind.RUN_STARTED, {"input": {}})
    store.append("r1", "blk", EventKind.BLOCK_ENTERED)
    store.append("r1", "blk", EventKind.BLOCK_OUTPUT, {"payload": 1})
    events = store.events("r1")
    assert [e.seq for e in events] == [0, 1, 2]
    assert [e.event for e in events] == [
        EventKind.RUN_STARTED, EventKind.BLOCK_ENTERED, EventKind.BLOCK_OUTPUT]
    assert events[1].payload_snapshot == {}


def test_terminal_event_seals_a_run():
    store = TraceStore()
    store.append("r1", None, EventKind.RUN_STARTED)
    store.append("r1", None, EventKind.RUN_FINISHED)
    with pytest.raises(ValueError):
        store.append("r1", "blk", EventKind.BLOCK_ENTERED)
    store.append("r2", None, EventKind.HALTED)
    with pytest.raises(ValueError):
        store.append("r2", None, EventKind.RUN_FINISHED)


def test_audit_stream_is_never_sealed():
    store = TraceStore()
    store.append(AUDIT_RUN_ID, None, EventKind.CONTROL_UPDATED, {"action": "a"})
    store.append(AUDIT_RUN_ID, None, EventKind.TOOL_INVOKED, {"tool": "t"})
    assert len(store.events(AUDIT_RUN_ID)) == 2


def test_ring_buffer_evicts_oldest_non_audit_run():
    store = TraceStore(capacity=3)
    store.append(AUDIT_RUN_ID, None, EventKind.CONTROL_UPDATED)
    store.append("r1", None, EventKind.RUN_STARTED)
    store.append("r2", None, EventKind.RUN_STARTED)
    assert set(store.run_ids()) == {AUDIT_RUN_ID, "r1", "r2"}
    store.append("r3", None, EventKind.RUN_STARTED)
    assert "r1" not in store
    assert AUDIT_RUN_ID in store and "r2" in store and "r3" in store


def test_capacity_one_keeps_audit_alive():
    store = TraceStore(capacity=1)
    store.append(AUDIT_RUN_ID, None, EventKind.CONTROL_UPDATED)
    store.append("r1", None, EventKind.RUN_STARTED)
    store.append("r2", None, EventKind.RUN_STARTED)
    assert AUDIT_RUN_ID in store and "r2" in store and "r1" not in store
    with pytest.raises(ValueError):
        TraceStore(capacity=0)


def test_runs_summary_reports_last_event_and_dry_run():
    store = TraceStore()
    store.append("r1", None, EventKind.RUN_STARTED, {"dry_run": True})
    store.append("r1", None, EventKind.RUN_FINISHED)
    summary = store.runs_summary()
    assert summary == [{
        "run_id": "r1", "events": 2, "started": summary[0]["started"],
        "last_event": "RunFinished", "dry_run": True,
    }]


def test_event_doc_shape():
    store = TraceStore()
    ev = store.append("r", "b", EventKind.BIAS_APPLIED, {"before": {}})
    doc = ev.to_doc()
    assert doc["event"] == "BiasApplied"
    assert doc["run_id"] == "r" and doc["block_id"] == "b" and doc["seq"] == 0
    assert "timestamp" in doc
