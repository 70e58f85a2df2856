"""Operator command line: serve, run, explain, export-graph, gen-data.

Exit codes: 0 success (domain rejections included), 2 usage or configuration
error, 3 runtime failure (occupied port, unreachable endpoint). Logs go to
stderr, machine-readable data to stdout or files, never mixed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .demo import demo_topology
from .errors import GlassflowError, SchemaMismatchError
from .graph import BlockKind, HandlerBinding, PayloadKind, import_topology
from .models import gen_synthetic, load_csv, write_csv
from .registry import PIPELINE_TARGET, Registry, build_runtime
from .service import serve

# error codes that indicate a broken environment rather than a caller mistake
_RUNTIME_CODES = frozenset({
    "bind_failure", "handler_failure", "endpoint_unreachable",
    "script_exhausted", "singular_system",
})

_METHOD_ALIASES = {"lime": "lime", "shap": "shap",
                   "exact": "exact_shapley", "exact_shapley": "exact_shapley"}


class UsageError(Exception):
    """Bad flags or config content; maps to exit code 2."""


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_config_file(path: str | None) -> dict:
    """TOML or JSON file with the same keys as the flags, dashes as underscores."""
    if not path:
        return {}
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    if path.endswith(".json"):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise UsageError(
                f"invalid JSON in {path}: line {exc.lineno} column {exc.colno}: "
                f"{exc.msg}") from exc
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            doc = tomllib.loads(raw.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"invalid TOML in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a table/object at top level")
    return doc


def _setting(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag wins over config file wins over the built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _load_topology(args, config) -> dict:
    path = _setting(args, config, "graph")
    if not path:
        return demo_topology()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"invalid graph JSON in {path}: line {exc.lineno} column "
            f"{exc.colno}: {exc.msg}") from exc


def _load_dataset(args, config):
    data_path = _setting(args, config, "data")
    if data_path:
        return load_csv(data_path)
    synthetic = _setting(args, config, "synthetic") or (1000, 42)
    if len(synthetic) != 2:
        raise UsageError("--synthetic takes exactly two values: ROWS SEED")
    try:
        rows, seed = (int(v) for v in synthetic)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--synthetic values must be integers: {exc}") from exc
    if rows <= 0:
        raise UsageError("--synthetic rows must be positive")
    return gen_synthetic(rows, seed)


def _build_registry(args, config) -> Registry:
    return build_runtime(_load_topology(args, config), _load_dataset(args, config))


def _read_instances(path: str, registry: Registry) -> list[dict[str, float]]:
    """Rows from a header-ed CSV; extra columns (such as a label) are ignored."""
    names = registry.entry_feature_names()
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            if names is not None:
                missing = sorted(set(names) - set(header))
                if missing:
                    raise SchemaMismatchError(
                        f"input CSV is missing feature columns: {missing}")
            wanted = list(names) if names is not None else list(header)
            instances = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    instances.append({k: float(row[k]) for k in wanted})
                except (TypeError, ValueError) as exc:
                    raise UsageError(
                        f"line {lineno}: cannot parse feature value: {exc}")
    except OSError as exc:
        raise UsageError(f"cannot read input CSV: {exc}") from exc
    if not instances:
        raise UsageError("input CSV has no data rows")
    return instances


def _parse_instance(spec_text: str) -> dict[str, float]:
    """Either inline 'name=value,name=value' pairs or a path to a one-row CSV."""
    if "=" in spec_text:
        mapping = {}
        for part in spec_text.split(","):
            name, _, value = part.partition("=")
            if not name.strip() or not _:
                raise UsageError(f"bad inline instance fragment: '{part}'")
            try:
                mapping[name.strip()] = float(value)
            except ValueError:
                raise UsageError(
                    f"instance value for '{name.strip()}' is not a number") from None
        return mapping
    try:
        with open(spec_text, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            row = next(reader, None)
    except OSError as exc:
        raise UsageError(f"cannot read instance CSV: {exc}") from exc
    if row is None:
        raise UsageError("instance CSV has no data row")
    mapping = {}
    for key, value in row.items():
        try:
            mapping[key] = float(value)
        except (TypeError, ValueError):
            continue  # skip non-numeric columns such as a label
    if not mapping:
        raise UsageError("instance CSV row has no numeric columns")
    return mapping


def _write_data(out: str | None, payload: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(payload)
        sys.stdout.flush()
    else:
        Path(out).write_text(payload, encoding="utf-8")


# --- subcommands --------------------------------------------------------------------

def cmd_serve(args, config) -> int:
    registry = _build_registry(args, config)
    host = _setting(args, config, "host", "127.0.0.1")
    port = int(_setting(args, config, "port", 8080))
    ui_dir = _setting(args, config, "ui_dir")
    if ui_dir and not Path(ui_dir).is_dir():
        raise UsageError(f"--ui-dir is not a directory: {ui_dir}")
    token_env = _setting(args, config, "token")
    token = os.environ.get(token_env) if token_env else None
    if token_env and not token:
        raise UsageError(f"--token names env var '{token_env}' but it is unset")
    _log(f"listening on http://{host}:{port}")
    try:
        serve(registry, host, port, ui_dir=ui_dir, token=token)
    except KeyboardInterrupt:
        pass
    return 0


def cmd_run(args, config) -> int:
    registry = _build_registry(args, config)
    input_path = _setting(args, config, "input")
    if not input_path:
        raise UsageError("run requires --input CSV")
    records = []
    for index, mapping in enumerate(_read_instances(input_path, registry)):
        result = registry.execute(registry.instance_vector(mapping))
        records.append({
            "row": index,
            "outcome": result.to_doc(),
            "trace": [e.to_doc() for e in registry.trace.events(result.run_id)],
        })
    _write_data(_setting(args, config, "out", "-"),
                json.dumps(records, indent=2) + "\n")
    _log(f"executed {len(records)} rows")
    return 0


def cmd_explain(args, config) -> int:
    registry = _build_registry(args, config)
    method_word = _setting(args, config, "method", "shap")
    method = _METHOD_ALIASES.get(method_word)
    if method is None:
        raise UsageError(f"unknown method '{method_word}' "
                         f"(choose from lime, shap, exact)")
    block = _setting(args, config, "block", PIPELINE_TARGET)
    instance_text = _setting(args, config, "instance")
    if not instance_text:
        raise UsageError("explain requires --instance")
    mapping = _parse_instance(instance_text)

    samples = _setting(args, config, "samples")
    if samples is not None and samples != "exhaustive":
        try:
            samples = int(samples)
        except ValueError:
            raise UsageError("--samples must be an integer or 'exhaustive'") from None

    explanation = registry.explain(
        block, method, mapping,
        target_class=_setting(args, config, "target_class"),
        n_samples=samples,
        seed=int(_setting(args, config, "seed", 0)),
        kernel_width=_setting(args, config, "kernel_width"),
        ridge_lambda=float(_setting(args, config, "ridge_lambda", 1e-3)))

    # same serialization as the API route, byte for byte
    payload = json.dumps(explanation.to_doc(), separators=(",", ":"),
                         ensure_ascii=False)
    sys.stdout.write(payload + "\n")
    sys.stdout.flush()

    if method == "exact_shapley":
        surface = registry.surface_for(block)
        values = registry.instance_vector(mapping, surface.feature_names).values
        fx = float(surface.predict_one(values)[surface.class_index(explanation.target_class)])
        residual = abs(explanation.base_value + sum(explanation.phi) - fx)
        _log(f"efficiency residual: {residual:.3e}")
    return 0


def cmd_export_graph(args, config) -> int:
    doc = _load_topology(args, config)
    stubs = {}
    for block_doc in doc.get("blocks", []):
        kind = block_doc.get("kind")
        if kind in (BlockKind.MODEL.value, BlockKind.PREPROCESSOR.value):
            inp = PayloadKind(block_doc.get("input_payload", "FeatureVector"))
            outp = PayloadKind(block_doc.get("output_payload", "FeatureVector"))
            stubs[block_doc.get("id", "")] = HandlerBinding(inp, outp, lambda p: p)
    graph = import_topology(doc, stubs)

    fmt = _setting(args, config, "format", "dot")
    if fmt == "json":
        from .graph import export_topology
        payload = json.dumps(export_topology(graph), indent=2) + "\n"
    elif fmt == "dot":
        lines = ["digraph pipeline {"]
        for block_id in graph.topo_order:
            spec = graph.spec(block_id)
            lines.append(f'  "{block_id}" [label="{block_id}\\n{spec.kind.value}"];')
        for src in graph.topo_order:
            for dst in sorted(graph.outbound(src)):
                lines.append(f'  "{src}" -> "{dst}";')
        lines.append("}")
        payload = "\n".join(lines) + "\n"
    else:
        raise UsageError(f"unknown format '{fmt}' (choose from dot, json)")
    _write_data(_setting(args, config, "out", "-"), payload)
    return 0


def cmd_gen_data(args, config) -> int:
    rows = int(_setting(args, config, "rows", 0))
    if rows <= 0:
        raise UsageError("--rows must be a positive integer")
    seed = int(_setting(args, config, "seed", 0))
    dataset = gen_synthetic(rows, seed)
    out = _setting(args, config, "out", "-")
    if out == "-" or out is None:
        write_csv(dataset, sys.stdout)
    else:
        write_csv(dataset, out)
        _log(f"wrote {rows} rows to {out}")
    return 0


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glassflow",
        description="Serve, run, and explain block-flow pipelines.")
    parser.add_argument("--config", help="TOML or JSON config file; flags win")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_builder_flags(p):
        p.add_argument("--graph", help="topology JSON (default: built-in demo)")
        p.add_argument("--data", help="training CSV (last column is the label)")
        p.add_argument("--synthetic", nargs=2, metavar=("ROWS", "SEED"),
                       help="generate training data instead of --data")

    p = sub.add_parser("serve", help="serve the REST API and optional UI")
    add_builder_flags(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui-dir", dest="ui_dir", help="static UI bundle directory")
    p.add_argument("--token", help="env var holding the API bearer token")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="execute CSV rows through the pipeline offline")
    add_builder_flags(p)
    p.add_argument("--input", help="CSV of instances to execute")
    p.add_argument("--out", help="output JSON path, '-' for stdout")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explain", help="print an attribution for one instance")
    add_builder_flags(p)
    p.add_argument("--block", help="model block id or 'pipeline'")
    p.add_argument("--method", choices=sorted(_METHOD_ALIASES))
    p.add_argument("--instance",
                   help="inline 'name=value,...' or path to a one-row CSV")
    p.add_argument("--target-class", dest="target_class")
    p.add_argument("--samples", help="sample count or 'exhaustive'")
    p.add_argument("--seed", type=int)
    p.add_argument("--kernel-width", dest="kernel_width", type=float)
    p.add_argument("--ridge-lambda", dest="ridge_lambda", type=float)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("export-graph", help="emit the topology as dot or JSON")
    p.add_argument("--graph")
    p.add_argument("--format", choices=("dot", "json"))
    p.add_argument("--out", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_export_graph)

    p = sub.add_parser("gen-data", help="write a synthetic training CSV")
    p.add_argument("--rows", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path, '-' for stdout")
    p.set_defaults(func=cmd_gen_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config_file(args.config)
        return args.func(args, config)
    except UsageError as exc:
        _log(f"error: {exc}")
        return 2
    except GlassflowError as exc:
        _log(f"error [{exc.code}]: {exc.message}")
        return 3 if exc.code in _RUNTIME_CODES else 2


if __name__ == "__main__":
    sys.exit(main())
