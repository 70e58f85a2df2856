"""REST service generated from the block registry.

Every block kind contributes a fixed endpoint family; pipeline-level routes
are always present. Domain outcomes (a rejected input, a halted run) are
200-level payloads; only infrastructure problems become 4xx/5xx, and those
always use the one error envelope {status, code, message, detail}.
"""

from __future__ import annotations

import os
import secrets
import socket
import threading
from typing import Any

import httpx
import uvicorn
from fastapi import APIRouter, FastAPI
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..agent import AgentConfig, HttpChatEndpoint, ToolExecutor, run_conversation
from ..errors import BindFailureError, GlassflowError
from ..graph import BlockKind
from ..registry import PIPELINE_TARGET, Registry
from .schemas import (
    ChatBody,
    ClearBody,
    ExplainBody,
    InstanceBody,
    RetrainBody,
    ShutdownBody,
    WhatIfBody,
)
from .tools import API_PREFIX, generate_tool_manifest

EXPLAIN_METHODS = ("lime", "shap", "exact_shapley")

# HTTP status per error code; anything unlisted is a 400 (caller mistake)
_STATUS_BY_CODE = {
    "unknown_block": 404,
    "unknown_rule": 404,
    "duplicate_id": 409,
    "singular_system": 422,
    "handler_failure": 500,
    "bind_failure": 500,
    "endpoint_unreachable": 503,
    "script_exhausted": 503,
}


class _Fault(Exception):
    """Route-level error that is not worth a dedicated exception class."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _envelope(status: int, code: str, message: str, detail: Any = None) -> JSONResponse:
    return JSONResponse(status_code=status, content={
        "status": status, "code": code, "message": message,
        "detail": jsonable_encoder(detail) if detail is not None else {},
    })


def _strict_features(registry: Registry, mapping: dict) -> None:
    names = registry.entry_feature_names()
    if names is None:
        return
    extra = sorted(set(mapping) - set(names))
    if extra:
        raise _Fault(400, "unknown_feature", f"unknown features: {extra}")


def generate_routes(registry: Registry) -> APIRouter:
    """One concrete route per block endpoint, plus the pipeline family.

    Regenerating after registry changes is idempotent because the graph is
    immutable; rule edits change state behind existing routes, never the
    route table itself.
    """
    router = APIRouter()

    # -- pipeline-level routes -------------------------------------------------

    @router.get("/graph")
    def get_graph() -> dict:
        return registry.graph_doc()

    @router.post("/pipeline/execute")
    def execute_pipeline(body: InstanceBody) -> dict:
        _strict_features(registry, body.features)
        fv = registry.instance_vector(body.features)
        result = registry.execute(fv, run_id=body.run_id, dry_run=body.dry_run)
        doc = result.to_doc()
        doc["trace_ref"] = f"{API_PREFIX}/trace?run_id={result.run_id}"
        return doc

    @router.post("/pipeline/whatif")
    def whatif_pipeline(body: WhatIfBody) -> dict:
        _strict_features(registry, body.base)
        doc = registry.what_if_pipeline(body.base, body.overrides)
        doc["trace_ref"] = f"{API_PREFIX}/trace?run_id={doc['run_id']}"
        return doc

    @router.get("/trace")
    def list_trace(run_id: str | None = None) -> dict:
        if run_id is None:
            return {"runs": registry.trace.runs_summary()}
        if run_id not in registry.trace:
            raise _Fault(404, "unknown_run", f"no recorded run '{run_id}'")
        return {"run_id": run_id,
                "events": [e.to_doc() for e in registry.trace.events(run_id)]}

    @router.get("/tools")
    def list_tools() -> list[dict]:
        return [t.to_doc() for t in generate_tool_manifest(registry)]

    @router.get("/control/shutdown")
    def shutdown_state() -> dict:
        state = registry.shutdown.state
        return {"active": state.active, "reason": state.reason,
                "author": state.author}

    @router.post("/control/shutdown")
    def trigger_shutdown(body: ShutdownBody) -> dict:
        return registry.trigger_shutdown(body.reason, body.author)

    @router.post("/control/clear")
    def clear_shutdown(body: ClearBody) -> dict:
        return registry.clear_shutdown(body.author)

    def explain_endpoint(target: str, method: str):
        def explain(body: ExplainBody) -> JSONResponse:
            expl = registry.explain(
                target, method, body.features,
                target_class=body.target_class, n_samples=body.n_samples,
                seed=body.seed, kernel_width=body.kernel_width,
                ridge_lambda=body.ridge_lambda)
            # raw JSONResponse keeps the bytes identical to the in-process doc
            return JSONResponse(content=expl.to_doc())
        return explain

    for method in EXPLAIN_METHODS:
        router.add_api_route(f"/pipeline/explain/{method}",
                             explain_endpoint(PIPELINE_TARGET, method),
                             methods=["POST"],
                             name=f"explain_{method}_pipeline")

    # -- per-block families ------------------------------------------------------

    def predict_endpoint(block_id: str):
        def predict(body: InstanceBody) -> dict:
            fv = registry.instance_vector(
                body.features,
                registry.model_slot(block_id).current.schema.feature_names)
            scores = registry.predict(block_id, fv)
            return {"block_id": block_id, "scores": scores.to_dict(),
                    "argmax": scores.argmax_label()}
        return predict

    def retrain_endpoint(block_id: str):
        def retrain(body: RetrainBody) -> dict:
            docs = [item.model_dump() for item in body.relabels]
            return registry.retrain(block_id, docs, body.author)
        return retrain

    def training_endpoint(block_id: str):
        def training(offset: int = 0, limit: int = 20) -> dict:
            return registry.training_rows(block_id, offset=offset, limit=limit)
        return training

    for spec in registry.graph.blocks_of_kind(BlockKind.MODEL):
        base = f"/blocks/{spec.id}"
        router.add_api_route(f"{base}/predict", predict_endpoint(spec.id),
                             methods=["POST"], name=f"predict_{spec.id}")
        for method in EXPLAIN_METHODS:
            router.add_api_route(f"{base}/explain/{method}",
                                 explain_endpoint(spec.id, method),
                                 methods=["POST"],
                                 name=f"explain_{method}_{spec.id}")
        router.add_api_route(f"{base}/retrain", retrain_endpoint(spec.id),
                             methods=["POST"], name=f"retrain_{spec.id}")
        router.add_api_route(f"{base}/training", training_endpoint(spec.id),
                             methods=["GET"], name=f"training_{spec.id}")

    def rules_endpoints(block_id: str):
        def list_rules() -> list[dict]:
            return registry.list_rules(block_id)

        def add_rule(body: dict) -> dict:
            return registry.add_rule(block_id, body, body.get("author", "api"))

        def put_rule(rule_id: str, body: dict) -> dict:
            return registry.put_rule(block_id, rule_id, body,
                                     body.get("author", "api"))

        def delete_rule(rule_id: str) -> dict:
            return registry.delete_rule(block_id, rule_id, "api")

        return list_rules, add_rule, put_rule, delete_rule

    for kind in (BlockKind.NONGOAL_FILTER, BlockKind.DIVINE_RULE_GUARD):
        for spec in registry.graph.blocks_of_kind(kind):
            base = f"/blocks/{spec.id}/rules"
            list_rules, add_rule, put_rule, delete_rule = rules_endpoints(spec.id)
            router.add_api_route(base, list_rules, methods=["GET"],
                                 name=f"list_rules_{spec.id}")
            router.add_api_route(base, add_rule, methods=["POST"],
                                 name=f"add_rule_{spec.id}")
            router.add_api_route(base + "/{rule_id}", put_rule, methods=["PUT"],
                                 name=f"put_rule_{spec.id}")
            router.add_api_route(base + "/{rule_id}", delete_rule,
                                 methods=["DELETE"],
                                 name=f"delete_rule_{spec.id}")

    def bias_endpoints(block_id: str):
        def get_offsets() -> dict:
            return registry.get_bias(block_id)

        def set_offsets(body: dict) -> dict:
            return registry.set_bias(block_id, body, body.get("author", "api"))

        return get_offsets, set_offsets

    for spec in registry.graph.blocks_of_kind(BlockKind.BIAS_INJECTOR):
        get_offsets, set_offsets = bias_endpoints(spec.id)
        base = f"/blocks/{spec.id}/offsets"
        router.add_api_route(base, get_offsets, methods=["GET"],
                             name=f"get_offsets_{spec.id}")
        router.add_api_route(base, set_offsets, methods=["PUT"],
                             name=f"set_offsets_{spec.id}")

    def predicate_endpoints(block_id: str):
        def get_predicate() -> dict:
            return registry.get_predicate(block_id)

        def set_predicate(body: dict) -> dict:
            return registry.set_predicate(block_id, body,
                                          body.get("author", "api"))

        return get_predicate, set_predicate

    for spec in registry.graph.blocks_of_kind(BlockKind.LOGIC_BOMB):
        get_predicate, set_predicate = predicate_endpoints(spec.id)
        base = f"/blocks/{spec.id}/predicate"
        router.add_api_route(base, get_predicate, methods=["GET"],
                             name=f"get_predicate_{spec.id}")
        router.add_api_route(base, set_predicate, methods=["PUT"],
                             name=f"set_predicate_{spec.id}")

    def strategy_endpoints(block_id: str):
        def get_strategy() -> dict:
            return registry.get_strategy(block_id)

        def set_strategy(body: dict) -> dict:
            return registry.set_strategy(block_id, body,
                                         body.get("author", "api"))

        return get_strategy, set_strategy

    for spec in registry.graph.blocks_of_kind(BlockKind.AGGREGATOR):
        get_strategy, set_strategy = strategy_endpoints(spec.id)
        base = f"/blocks/{spec.id}/strategy"
        router.add_api_route(base, get_strategy, methods=["GET"],
                             name=f"get_strategy_{spec.id}")
        router.add_api_route(base, set_strategy, methods=["PUT"],
                             name=f"set_strategy_{spec.id}")

    return router


def create_app(registry: Registry, *, ui_dir: str | None = None,
               token: str | None = None, agent_endpoint=None,
               max_tool_rounds: int = 8) -> FastAPI:
    if token is None:
        token = os.environ.get("GLASSFLOW_API_TOKEN") or None
    if agent_endpoint is None:
        cfg = AgentConfig.from_env()
        if cfg is not None:
            agent_endpoint = HttpChatEndpoint(cfg.endpoint_url, cfg.api_key,
                                              cfg.model_name, cfg.temperature)
            max_tool_rounds = cfg.max_tool_rounds

    app = FastAPI(title="glassflow", version="0.1.0",
                  openapi_url=f"{API_PREFIX}/openapi")
    app.state.registry = registry

    router = generate_routes(registry)

    conversations: dict[str, list] = {}
    conv_lock = threading.Lock()
    loopback: dict = {"client": None}

    def _loopback_client() -> httpx.AsyncClient:
        if loopback["client"] is None:
            transport = httpx.ASGITransport(app=app)
            loopback["client"] = httpx.AsyncClient(transport=transport,
                                                   base_url="http://glassflow.local")
        return loopback["client"]

    @router.post("/chat")
    async def chat(body: ChatBody) -> dict:
        if agent_endpoint is None:
            raise _Fault(503, "endpoint_unreachable",
                         "no chat endpoint configured; set GLASSFLOW_AGENT_URL")
        conversation_id = body.conversation_id or secrets.token_hex(8)
        with conv_lock:
            history = tuple(conversations.get(conversation_id, ()))
        headers = {"Authorization": f"Bearer {token}"} if token else {}
        executor = ToolExecutor(_loopback_client(), headers=headers)

        def on_tool(name: str, arguments: dict, status: int) -> None:
            registry.record_tool_call(name, arguments, status, conversation_id)

        result = await run_conversation(
            agent_endpoint, generate_tool_manifest(registry), body.message,
            history, max_tool_rounds=max_tool_rounds, executor=executor,
            on_tool=on_tool)
        with conv_lock:
            conversations[conversation_id] = list(result.turns)
        return {"conversation_id": conversation_id,
                "turns": [t.to_doc() for t in result.turns],
                "truncated": result.truncated}

    app.include_router(router, prefix=API_PREFIX)

    @app.exception_handler(GlassflowError)
    async def on_domain_error(_, exc: GlassflowError):
        return _envelope(_STATUS_BY_CODE.get(exc.code, 400), exc.code,
                         exc.message, detail=exc.detail)

    @app.exception_handler(_Fault)
    async def on_fault(_, exc: _Fault):
        return _envelope(exc.status, exc.code, exc.message)

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(_, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return _envelope(exc.status_code, code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_, exc: RequestValidationError):
        return _envelope(422, "validation_error",
                         "request failed validation", detail=exc.errors())

    if token:
        expected = f"Bearer {token}"

        @app.middleware("http")
        async def check_token(request, call_next):
            if request.url.path.startswith(API_PREFIX):
                if request.headers.get("authorization") != expected:
                    return _envelope(401, "unauthorized",
                                     "missing or invalid bearer token")
            return await call_next(request)

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(registry: Registry, host: str = "127.0.0.1", port: int = 8080, *,
          ui_dir: str | None = None, token: str | None = None,
          log_level: str = "info") -> None:
    """Bind, then serve until interrupted. Raises BindFailure, never exits."""
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        raise BindFailureError(f"cannot bind {host}:{port}: {exc}") from exc
    app = create_app(registry, ui_dir=ui_dir, token=token)
    config = uvicorn.Config(app, log_level=log_level)
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
