"""Composable building blocks for transparent, controllable model pipelines.

A validated block graph runs instances through models and control mechanisms
(input filters, output guards, score biasing, kill switch, boundary
fail-safe), records every step in an audit trace, answers feature-attribution
queries (Shapley, LIME, what-if), and exposes all of it over a REST API whose
tool manifest a chat agent can drive.
"""

from .demo import DemoBundle, build_demo, demo_topology
from .engine import COMPLETED, HALTED, REJECTED, RunResult, execute
from .errors import GlassflowError
from .graph import (
    BlockKind,
    BlockSpec,
    GraphBuilder,
    HandlerBinding,
    PipelineGraph,
    export_topology,
    import_topology,
)
from .payloads import (
    ClassScores,
    Decision,
    FeatureSchema,
    FeatureVector,
    PayloadKind,
)
from .registry import Registry, build_background, build_runtime
from .trace import AUDIT_RUN_ID, EventKind, TraceEvent, TraceStore

__version__ = "0.1.0"

__all__ = [
    "AUDIT_RUN_ID",
    "BlockKind",
    "BlockSpec",
    "COMPLETED",
    "ClassScores",
    "Decision",
    "DemoBundle",
    "EventKind",
    "FeatureSchema",
    "FeatureVector",
    "GlassflowError",
    "GraphBuilder",
    "HALTED",
    "HandlerBinding",
    "PayloadKind",
    "PipelineGraph",
    "REJECTED",
    "Registry",
    "RunResult",
    "TraceEvent",
    "TraceStore",
    "build_background",
    "build_demo",
    "build_runtime",
    "demo_topology",
    "execute",
    "export_topology",
    "import_topology",
    "__version__",
]
