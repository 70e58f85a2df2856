"""Tool-calling chat agent over the generated tool manifest."""

from .endpoints import HttpChatEndpoint, MockScriptEndpoint
from .loop import SYSTEM_PROMPT, ChatEndpoint, ToolExecutor, run_conversation
from .types import AgentConfig, ChatTurn, ConversationResult, ToolCall, ToolResult

__all__ = [
    "AgentConfig",
    "ChatEndpoint",
    "ChatTurn",
    "ConversationResult",
    "HttpChatEndpoint",
    "MockScriptEndpoint",
    "SYSTEM_PROMPT",
    "ToolCall",
    "ToolExecutor",
    "ToolResult",
    "run_conversation",
]
