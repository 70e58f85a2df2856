"""Exception hierarchy.

Every error raised by the package derives from GlassflowError and carries a
stable machine-readable ``code`` so the service layer can map them onto the
single API error envelope without string matching.
"""

from __future__ import annotations


class GlassflowError(Exception):
    """Base class; ``code`` is the machine-readable identifier."""

    code = "error"

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.message = message
        self.detail = detail


# --- registry / graph construction -----------------------------------------

class DuplicateIdError(GlassflowError):
    code = "duplicate_id"


class UnknownBlockError(GlassflowError):
    code = "unknown_block"


class PayloadMismatchError(GlassflowError):
    code = "payload_mismatch"


class GraphValidationError(GlassflowError):
    code = "invalid_graph"


class CycleDetectedError(GraphValidationError):
    code = "cycle_detected"

    def __init__(self, cycle):
        super().__init__(f"cycle detected: {' -> '.join(cycle)}", cycle=list(cycle))
        self.cycle = list(cycle)


class UnreachableError(GraphValidationError):
    code = "unreachable_blocks"

    def __init__(self, block_ids):
        super().__init__(f"blocks not on an entry->exit path: {sorted(block_ids)}",
                         block_ids=sorted(block_ids))
        self.block_ids = sorted(block_ids)


class SplitterFanoutError(GraphValidationError):
    code = "splitter_fanout_too_small"


class AggregatorFaninError(GraphValidationError):
    code = "aggregator_fanin_too_small"


class SchemaDocumentError(GlassflowError):
    """Malformed topology/config document."""

    code = "schema_error"


class MissingHandlerError(GlassflowError):
    code = "missing_handler"


# --- execution ---------------------------------------------------------------

class ShutdownActiveError(GlassflowError):
    code = "shutdown_active"


class HandlerFailureError(GlassflowError):
    code = "handler_failure"

    def __init__(self, block_id: str, message: str):
        super().__init__(f"handler for block '{block_id}' failed: {message}",
                         block_id=block_id)
        self.block_id = block_id


# --- payloads / data ---------------------------------------------------------

class SchemaMismatchError(GlassflowError):
    code = "schema_mismatch"


class ParseError(GlassflowError):
    code = "parse_error"

    def __init__(self, message: str, line: int, column: str | None = None):
        super().__init__(message, line=line, column=column)
        self.line = line
        self.column = column


class EmptyDatasetError(GlassflowError):
    code = "empty_dataset"


class NotBinaryError(GlassflowError):
    code = "not_binary"


class IndexOutOfRangeError(GlassflowError):
    code = "index_out_of_range"


class UnknownLabelError(GlassflowError):
    code = "unknown_label"


# --- control -----------------------------------------------------------------

class UnknownFeatureError(GlassflowError):
    code = "unknown_feature"


class RuleDocumentError(GlassflowError):
    code = "invalid_rule"


class UnknownRuleError(GlassflowError):
    code = "unknown_rule"


class ClassSetMismatchError(GlassflowError):
    code = "class_set_mismatch"


class EmptyBranchesError(GlassflowError):
    code = "empty_branches"


class OverlappingPartitionsError(GlassflowError):
    code = "overlapping_partitions"


class MissingFeatureError(GlassflowError):
    code = "missing_feature"


# --- xai ----------------------------------------------------------------------

class TooManyFeaturesError(GlassflowError):
    code = "too_many_features"


class EmptyBackgroundError(GlassflowError):
    code = "empty_background"


class OutOfRangeError(GlassflowError):
    code = "out_of_range"


class SingularSystemError(GlassflowError):
    code = "singular_system"


class DegenerateKernelError(GlassflowError):
    code = "degenerate_kernel"


class NonFiniteValueError(GlassflowError):
    code = "non_finite_value"


# --- service / agent -------------------------------------------------------------

class BindFailureError(GlassflowError):
    code = "bind_failure"


class EndpointUnreachableError(GlassflowError):
    code = "endpoint_unreachable"


class ScriptExhaustedError(GlassflowError):
    code = "script_exhausted"
