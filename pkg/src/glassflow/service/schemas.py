"""Request and response bodies for the REST layer."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class InstanceBody(BaseModel):
    features: dict[str, float]
    run_id: str | None = None
    dry_run: bool = False


class WhatIfBody(BaseModel):
    base: dict[str, float]
    overrides: dict[str, float] = Field(default_factory=dict)


class ExplainBody(BaseModel):
    features: dict[str, float]
    target_class: str | None = None
    n_samples: int | Literal["exhaustive"] | None = None
    seed: int = 0
    kernel_width: float | None = None
    ridge_lambda: float = 1e-3


class RelabelItem(BaseModel):
    row_index: int
    new_label: str
    old_label: str = ""
    author: str | None = None


class RetrainBody(BaseModel):
    relabels: list[RelabelItem] = Field(default_factory=list)
    author: str = "api"


class ShutdownBody(BaseModel):
    reason: str = "manual emergency stop"
    author: str = "api"


class ClearBody(BaseModel):
    author: str = "api"


class ChatBody(BaseModel):
    message: str
    conversation_id: str | None = None


class ExecuteResponse(BaseModel):
    run_id: str
    status: Literal["completed", "rejected", "halted"]
    decision: dict | None
    reason: str | None
    block: str | None
    dry_run: bool
    trace_ref: str


class PredictResponse(BaseModel):
    block_id: str
    scores: dict[str, float]
    argmax: str


class RetrainResponse(BaseModel):
    block_id: str
    applied: int
    model: dict


class AckResponse(BaseModel):
    active: bool
    changed: bool
    reason: str | None = None
    author: str | None = None
