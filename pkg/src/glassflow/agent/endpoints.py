"""Chat-completion endpoints: the live HTTP adapter and the scripted mock.

Both return the same normalized assistant message shape:
``{"content": str | None, "tool_calls": [{"id", "name", "arguments": dict}]}``.
The exact wire JSON of the live adapter is documented in docs/agent.md and
kept behind this one seam.
"""

from __future__ import annotations

import json
import threading
from typing import Sequence

import httpx

from ..errors import EndpointUnreachableError, ScriptExhaustedError


class MockScriptEndpoint:
    """Replays scripted assistant turns verbatim, in order.

    Script items: ``{"content": "..."}`` for a text answer or
    ``{"tool": name, "arguments": {...}}`` for a tool call.
    """

    def __init__(self, script: Sequence[dict]):
        self._script = list(script)
        self._served = 0
        self._lock = threading.Lock()

    async def complete(self, messages: list[dict], tools: list[dict]) -> dict:
        with self._lock:
            if not self._script:
                raise ScriptExhaustedError("mock script has no responses left")
            item = self._script.pop(0)
            self._served += 1
            serial = self._served
        if "tool" in item:
            return {"content": item.get("content", ""),
                    "tool_calls": [{"id": f"call_{serial}",
                                    "name": item["tool"],
                                    "arguments": dict(item.get("arguments", {}))}]}
        return {"content": item.get("content", ""), "tool_calls": []}


class HttpChatEndpoint:
    """Adapter for a hosted or local chat-completion server."""

    def __init__(self, url: str, api_key: str = "", model_name: str = "",
                 temperature: float = 0.0, timeout: float = 60.0):
        self._url = url
        self._api_key = api_key
        self._model = model_name
        self._temperature = temperature
        self._timeout = timeout

    async def complete(self, messages: list[dict], tools: list[dict]) -> dict:
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        body = {"model": self._model, "messages": messages,
                "temperature": self._temperature}
        if tools:
            body["tools"] = tools
        try:
            async with httpx.AsyncClient(timeout=self._timeout) as client:
                resp = await client.post(self._url, json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise EndpointUnreachableError(f"chat endpoint unreachable: {exc}") from exc
        if resp.status_code >= 400:
            raise EndpointUnreachableError(
                f"chat endpoint answered {resp.status_code}")
        try:
            message = resp.json()["choices"][0]["message"]
        except (KeyError, IndexError, ValueError) as exc:
            raise EndpointUnreachableError(
                f"chat endpoint returned an unexpected shape: {exc}") from exc
        calls = []
        for tc in message.get("tool_calls") or []:
            fn = tc.get("function", {})
            try:
                arguments = json.loads(fn.get("arguments") or "{}")
            except ValueError:
                arguments = {}
            calls.append({"id": tc.get("id", f"call_{len(calls) + 1}"),
                          "name": fn.get("name", ""), "arguments": arguments})
        return {"content": message.get("content") or "", "tool_calls": calls}
