"""Append-only audit trace.

Every engine step and every control-plane write lands here as a TraceEvent.
Events are keyed by run id with a strictly increasing per-run sequence
number; the store is an in-memory ring buffer over whole runs with a
configurable capacity. Control-plane writes and agent tool calls, which
happen outside any run, share the reserved ``audit`` stream.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

AUDIT_RUN_ID = "audit"


class EventKind(str, Enum):
    RUN_STARTED = "RunStarted"
    BLOCK_ENTERED = "BlockEntered"
    BLOCK_OUTPUT = "BlockOutput"
    INPUT_REJECTED = "InputRejected"
    OUTPUT_OVERRIDDEN = "OutputOverridden"
    BIAS_APPLIED = "BiasApplied"
    HALTED = "Halted"
    RESET = "Reset"
    AGGREGATED = "Aggregated"
    RUN_FINISHED = "RunFinished"
    # audit stream only: control-plane writes and agent tool executions
    CONTROL_UPDATED = "ControlUpdated"
    TOOL_INVOKED = "ToolInvoked"


TERMINAL_KINDS = (EventKind.HALTED, EventKind.RUN_FINISHED)


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    run_id: str
    block_id: str | None
    event: EventKind
    payload_snapshot: dict
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def to_doc(self) -> dict:
        return {
            "seq": self.seq,
            "run_id": self.run_id,
            "block_id": self.block_id,
            "event": self.event.value,
            "payload_snapshot": self.payload_snapshot,
            "timestamp": self.timestamp.isoformat(),
        }


class TraceStore:
    """Per-run append-only logs with oldest-run eviction.

    The audit stream is never evicted. Appends serialize on one lock; reads
    return immutable snapshots so callers can iterate without holding it.
    """

    def __init__(self, capacity: int = 1024):
        if capacity < 1:
            raise ValueError("trace capacity must be >= 1")
        self._capacity = capacity
        self._runs: OrderedDict[str, list[TraceEvent]] = OrderedDict()
        self._lock = threading.Lock()

    def append(self, run_id: str, block_id: str | None, event: EventKind,
               payload_snapshot: dict | None = None) -> TraceEvent:
        with self._lock:
            log = self._runs.get(run_id)
            if log is None:
                log = []
                self._runs[run_id] = log
                self._evict(keep=run_id)
            if log and log[-1].event in TERMINAL_KINDS and run_id != AUDIT_RUN_ID:
                raise ValueError(f"run '{run_id}' already has a terminal event")
            ev = TraceEvent(seq=len(log), run_id=run_id, block_id=block_id,
                            event=event, payload_snapshot=payload_snapshot or {})
            log.append(ev)
            return ev

    def _evict(self, keep: str) -> None:
        # The audit stream and the run being appended to are both pinned, so
        # the store may briefly exceed capacity rather than drop live events.
        while len(self._runs) > self._capacity:
            for rid in self._runs:
                if rid != AUDIT_RUN_ID and rid != keep:
                    del self._runs[rid]
                    break
            else:
                break

    def events(self, run_id: str) -> tuple[TraceEvent, ...]:
        with self._lock:
            return tuple(self._runs.get(run_id, ()))

    def run_ids(self) -> tuple[str, ...]:
        with self._lock:
            return tuple(self._runs.keys())

    def runs_summary(self) -> list[dict]:
        with self._lock:
            out = []
            for rid, log in self._runs.items():
                if not log:
                    continue
                last = log[-1]
                out.append({
                    "run_id": rid,
                    "events": len(log),
                    "started": log[0].timestamp.isoformat(),
                    "last_event": last.event.value,
                    "dry_run": bool(log[0].payload_snapshot.get("dry_run")),
                })
            return out

    def __contains__(self, run_id: str) -> bool:
        with self._lock:
            return run_id in self._runs
