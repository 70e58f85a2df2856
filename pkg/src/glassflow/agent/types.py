"""Conversation data model for the tool-calling agent."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Mapping


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    tool_name: str
    arguments: Mapping

    def to_doc(self) -> dict:
        return {"call_id": self.call_id, "tool_name": self.tool_name,
                "arguments": dict(self.arguments)}


@dataclass(frozen=True)
class ToolResult:
    call_id: str
    result: Mapping

    def to_doc(self) -> dict:
        return {"call_id": self.call_id, "result": dict(self.result)}


@dataclass(frozen=True)
class ChatTurn:
    role: str  # user | assistant | tool
    content: str = ""
    tool_call: ToolCall | None = None
    tool_result: ToolResult | None = None

    def to_doc(self) -> dict:
        return {
            "role": self.role,
            "content": self.content,
            "tool_call": self.tool_call.to_doc() if self.tool_call else None,
            "tool_result": self.tool_result.to_doc() if self.tool_result else None,
        }


@dataclass(frozen=True)
class ConversationResult:
    turns: tuple[ChatTurn, ...]
    truncated: bool = False  # round limit hit before a final text answer


@dataclass(frozen=True)
class AgentConfig:
    endpoint_url: str
    api_key: str = ""
    model_name: str = ""
    max_tool_rounds: int = 8
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_tool_rounds < 1:
            raise ValueError("max_tool_rounds must be >= 1")

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "AgentConfig | None":
        env = os.environ if env is None else env
        url = env.get("GLASSFLOW_AGENT_URL", "")
        if not url:
            return None
        return cls(endpoint_url=url,
                   api_key=env.get("GLASSFLOW_AGENT_KEY", ""),
                   model_name=env.get("GLASSFLOW_AGENT_MODEL", ""))
