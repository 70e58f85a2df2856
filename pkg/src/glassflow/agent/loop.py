"""The tool-calling loop and the HTTP executor behind it.

The agent can only act through manifest tools, and every execution goes over
the service's real HTTP stack, so the agent sees byte-identical JSON to any
other API client.
"""

from __future__ import annotations

import json
from typing import Callable, Protocol, Sequence

import httpx

from ..errors import EndpointUnreachableError
from .types import ChatTurn, ConversationResult, ToolCall, ToolResult

SYSTEM_PROMPT = (
    "You operate a transparent ML pipeline. Answer questions about its "
    "behavior by calling the provided tools; cite tool results rather than "
    "guessing. Finish with a plain-text answer."
)


class ChatEndpoint(Protocol):
    async def complete(self, messages: list[dict], tools: list[dict]) -> dict: ...


class ToolExecutor:
    """Executes one manifest tool over HTTP: path placeholders come from the
    arguments, the rest ride as JSON body (POST/PUT) or query (GET/DELETE)."""

    def __init__(self, client: httpx.AsyncClient, headers: dict | None = None):
        self._client = client
        self._headers = headers or {}

    async def call(self, descriptor, arguments: dict) -> tuple[int, dict]:
        method = descriptor.http["method"].upper()
        path = descriptor.http["path"]
        remaining = dict(arguments)
        for key in list(remaining):
            placeholder = "{%s}" % key
            if placeholder in path:
                path = path.replace(placeholder, str(remaining.pop(key)))
        kwargs: dict = {"headers": self._headers}
        if method in ("POST", "PUT"):
            kwargs["json"] = remaining
        elif remaining:
            kwargs["params"] = remaining
        try:
            resp = await self._client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            return 599, {"code": "tool_execution_failed", "message": str(exc)}
        try:
            body = resp.json()
        except ValueError:
            body = {"code": "tool_execution_failed",
                    "message": "tool returned a non-JSON response"}
        if not isinstance(body, dict):
            body = {"result": body}
        return resp.status_code, body


def _wire_messages(turns: Sequence[ChatTurn]) -> list[dict]:
    messages: list[dict] = [{"role": "system", "content": SYSTEM_PROMPT}]
    for t in turns:
        if t.role == "assistant" and t.tool_call is not None:
            messages.append({
                "role": "assistant",
                "content": t.content or None,
                "tool_calls": [{
                    "id": t.tool_call.call_id,
                    "type": "function",
                    "function": {"name": t.tool_call.tool_name,
                                 "arguments": json.dumps(dict(t.tool_call.arguments))},
                }],
            })
        elif t.role == "tool" and t.tool_result is not None:
            messages.append({"role": "tool",
                             "tool_call_id": t.tool_result.call_id,
                             "content": json.dumps(dict(t.tool_result.result))})
        else:
            messages.append({"role": t.role, "content": t.content})
    return messages


def _wire_tools(manifest) -> list[dict]:
    return [{"type": "function",
             "function": {"name": t.name, "description": t.description,
                          "parameters": t.parameters}}
            for t in manifest]


async def run_conversation(endpoint: ChatEndpoint, manifest, user_message: str,
                           history: Sequence[ChatTurn] = (), *,
                           max_tool_rounds: int = 8,
                           executor: ToolExecutor | None = None,
                           on_tool: Callable[[str, dict, int], None] | None = None,
                           ) -> ConversationResult:
    """Drive the endpoint until it answers in plain text or the round limit
    hits; each tool call is executed through ``executor`` and its result fed
    back as a tool turn. A hit round limit returns the partial history with
    ``truncated`` set instead of raising."""
    if not manifest:
        raise EndpointUnreachableError("tool manifest is empty")
    by_name = {t.name: t for t in manifest}
    turns: list[ChatTurn] = list(history)
    turns.append(ChatTurn(role="user", content=user_message))
    tools_wire = _wire_tools(manifest)

    for _ in range(max_tool_rounds):
        message = await endpoint.complete(_wire_messages(turns), tools_wire)
        calls = message.get("tool_calls") or []
        if not calls:
            turns.append(ChatTurn(role="assistant", content=message.get("content", "")))
            return ConversationResult(turns=tuple(turns), truncated=False)
        for call in calls:
            tc = ToolCall(call_id=call["id"], tool_name=call["name"],
                          arguments=call.get("arguments", {}))
            turns.append(ChatTurn(role="assistant",
                                  content=message.get("content", ""), tool_call=tc))
            descriptor = by_name.get(tc.tool_name)
            if descriptor is None:
                result: dict = {"code": "unknown_tool",
                                "message": f"no tool named '{tc.tool_name}'"}
            elif executor is None:
                result = {"code": "tool_execution_failed",
                          "message": "no tool executor configured"}
            else:
                status, result = await executor.call(descriptor, dict(tc.arguments))
                if on_tool is not None:
                    on_tool(tc.tool_name, dict(tc.arguments), status)
            turns.append(ChatTurn(role="tool",
                                  tool_result=ToolResult(call_id=tc.call_id,
                                                         result=result)))
    return ConversationResult(turns=tuple(turns), truncated=True)
