"""HTTP service layer: generated routes, tool manifest, request schemas."""

from .app import create_app, generate_routes, serve
from .tools import API_PREFIX, PROBE_RULE_ID, ToolDescriptor, generate_tool_manifest

__all__ = [
    "API_PREFIX",
    "PROBE_RULE_ID",
    "ToolDescriptor",
    "create_app",
    "generate_routes",
    "generate_tool_manifest",
    "serve",
]
