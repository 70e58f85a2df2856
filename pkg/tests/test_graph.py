import pytest

from glassflow.errors import (
    AggregatorFaninError,
    CycleDetectedError,
    DuplicateIdError,
    GraphValidationError,
    MissingHandlerError,
    PayloadMismatchError,
    SchemaDocumentError,
    SplitterFanoutError,
    UnknownBlockError,
    UnreachableError,
)
from glassflow.graph import (
    BlockKind,
    BlockSpec,
    GraphBuilder,
    HandlerBinding,
    PayloadKind,
    export_topology,
    import_topology,
)

FV = PayloadKind.FEATURE_VECTOR
CS = PayloadKind.CLASS_SCORES
DEC = PayloadKind.DECISION


def block(block_id, kind, inp=FV, outp=FV, **config):
    return BlockSpec(id=block_id, kind=kind, display_name=block_id,
                     description="", input_payload=inp, output_payload=outp,
                     config=dict(config))


def model_binding():
    return HandlerBinding(FV, CS, fn=lambda fv: fv)


def linear_builder():
    """filter -> model, the smallest legal pipeline (exit emits ClassScores)."""
    b = GraphBuilder()
    b.register(block("f", BlockKind.NONGOAL_FILTER))
    b.register(block("m", BlockKind.MODEL, FV, CS), model_binding())
    b.connect("f", "m")
    b.set_entry("f")
    b.set_exit("m")
    return b


def test_block_kind_payload_contracts_enforced():
    with pytest.raises(PayloadMismatchError):
        block("g", BlockKind.DIVINE_RULE_GUARD, CS, DEC)  # guard is Decision-only
    with pytest.raises(PayloadMismatchError):
        block("m", BlockKind.MODEL, FV, FV)  # a model must emit scores
    block("g", BlockKind.DIVINE_RULE_GUARD, DEC, DEC)
    block("s", BlockKind.SHUTDOWN_TRIGGER, CS, CS)  # pass-through, any kind


def test_linear_graph_validates_with_sorted_topo_order():
    graph = linear_builder().validate()
    assert graph.topo_order == ("f", "m")
    assert graph.entry == "f" and graph.exit == "m"
    assert graph.inbound("m") == ("f",) and graph.outbound("f") == ("m",)


def test_duplicate_block_id_rejected():
    b = GraphBuilder()
    b.register(block("x", BlockKind.NONGOAL_FILTER))
    with pytest.raises(DuplicateIdError):
        b.register(block("x", BlockKind.SHUTDOWN_TRIGGER))


def test_edge_to_unknown_block_rejected():
    b = GraphBuilder()
    b.register(block("x", BlockKind.NONGOAL_FILTER))
    with pytest.raises(UnknownBlockError):
        b.connect("x", "ghost")


def test_edge_payload_mismatch_rejected_at_connect():
    b = GraphBuilder()
    b.register(block("f", BlockKind.NONGOAL_FILTER))  # emits FeatureVector
    b.register(block("bias", BlockKind.BIAS_INJECTOR, CS, CS))  # wants scores
    with pytest.raises(PayloadMismatchError):
        b.connect("f", "bias")


def test_cycle_detected():
    b = GraphBuilder()
    b.register(block("a", BlockKind.NONGOAL_FILTER))
    b.register(block("b", BlockKind.SHUTDOWN_TRIGGER))
    b.connect("a", "b")
    b.connect("b", "a")
    b.set_entry("a")
    b.set_exit("b")
    with pytest.raises(CycleDetectedError) as err:
        b.validate()
    assert set(err.value.cycle) >= {"a", "b"}


def test_unreachable_block_rejected():
    b = linear_builder()
    b.register(block("island", BlockKind.SHUTDOWN_TRIGGER))
    with pytest.raises(UnreachableError) as err:
        b.validate()
    assert "island" in err.value.block_ids


def test_fan_out_restricted_to_splitter():
    b = linear_builder()
    b.register(block("m2", BlockKind.MODEL, FV, CS), model_binding())
    b.connect("f", "m2")  # second outbound edge from a non-splitter
    with pytest.raises(GraphValidationError):
        b.validate()


def test_fan_in_restricted_to_aggregator():
    b = GraphBuilder()
    b.register(block("s", BlockKind.SPLITTER))
    b.register(block("f1", BlockKind.NONGOAL_FILTER))
    b.register(block("f2", BlockKind.NONGOAL_FILTER))
    b.register(block("m", BlockKind.MODEL, FV, CS), model_binding())
    b.connect("s", "f1")
    b.connect("s", "f2")
    b.connect("f1", "m")
    b.connect("f2", "m")  # model gets two parents
    b.set_entry("s")
    b.set_exit("m")
    with pytest.raises(GraphValidationError):
        b.validate()


def test_splitter_needs_two_children_and_aggregator_two_parents():
    b = GraphBuilder()
    b.register(block("s", BlockKind.SPLITTER))
    b.register(block("m", BlockKind.MODEL, FV, CS), model_binding())
    b.connect("s", "m")
    b.set_entry("s")
    b.set_exit("m")
    with pytest.raises(SplitterFanoutError):
        b.validate()

    b2 = GraphBuilder()
    b2.register(block("m", BlockKind.MODEL, FV, CS), model_binding())
    b2.register(block("agg", BlockKind.AGGREGATOR, CS, CS))
    b2.connect("m", "agg")
    b2.set_entry("m")
    b2.set_exit("agg")
    with pytest.raises(AggregatorFaninError):
        b2.validate()


def test_entry_with_inbound_edges_rejected():
    b = linear_builder()
    b.set_entry("m")  # m has an inbound edge from f
    b.set_exit("m")
    with pytest.raises(GraphValidationError):
        b.validate()


def test_exit_payload_must_leave_feature_space():
    b = GraphBuilder()
    b.register(block("f", BlockKind.NONGOAL_FILTER))
    b.register(block("p", BlockKind.PREPROCESSOR),
               HandlerBinding(FV, FV, fn=lambda fv: fv))
    b.connect("f", "p")
    b.set_entry("f")
    b.set_exit("p")  # exit still emits FeatureVector
    with pytest.raises(GraphValidationError):
        b.validate()


def test_model_without_handler_rejected():
    b = GraphBuilder()
    with pytest.raises(MissingHandlerError):
        b.register(block("m", BlockKind.MODEL, FV, CS))


def test_handler_payload_kinds_must_match_spec():
    b = GraphBuilder()
    wrong = HandlerBinding(FV, FV, fn=lambda fv: fv)
    with pytest.raises(PayloadMismatchError):
        b.register(block("m", BlockKind.MODEL, FV, CS), wrong)


def test_topology_export_import_round_trip(registry):
    doc = export_topology(registry.graph)
    assert len(doc["blocks"]) == 6 and len(doc["edges"]) == 6
    clone = import_topology(doc, registry.bindings)
    assert export_topology(clone) == doc
    assert clone.topo_order == registry.graph.topo_order


def test_import_topology_validates_document_shape():
    with pytest.raises(SchemaDocumentError):
        import_topology(["not", "a", "dict"])
    with pytest.raises(SchemaDocumentError):
        import_topology({"blocks": [], "edges": []})  # entry/exit missing
    with pytest.raises(SchemaDocumentError):
        import_topology({"blocks": [{"id": "x", "kind": "NoSuchKind"}],
                         "edges": [], "entry": "x", "exit": "x"})
    with pytest.raises(MissingHandlerError):
        import_topology({"blocks": [{"id": "m", "kind": "Model",
                                     "input_payload": "FeatureVector",
                                     "output_payload": "ClassScores"}],
                         "edges": [], "entry": "m", "exit": "m"})
