"""
JSON documents: partitions, network configs and graphs.

Floats are written with Python's shortest round-trip repr (at most 17
significant digits), so parse(serialize(doc)) == doc and serialize is
byte-deterministic.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import networkx as nx
import numpy as np

from core import ModelParams, StateRecord, ValidationError
from network import NetworkConfig, build_graph, canonical_edges
from solver import Partition

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STATE_FIELDS = ("index", "left", "right", "size", "remoteness", "is_polar")


@dataclass(frozen=True)
class PartitionDocument:
    params: dict
    states: tuple[dict, ...]
    truncated_at_accumulation: bool
    h_eff: float
    n_interior: int
    schema_version: int = SCHEMA_VERSION


def partition_document(partition: Partition) -> PartitionDocument:
    return PartitionDocument(
        params=partition.params.to_dict(),
        states=tuple({f: getattr(s, f) for f in STATE_FIELDS} for s in partition.states),
        truncated_at_accumulation=partition.truncated_at_accumulation,
        h_eff=partition.h_eff,
        n_interior=partition.n_interior,
    )


def document_partition(document: PartitionDocument) -> Partition:
    return Partition(
        params=ModelParams(**document.params),
        states=tuple(StateRecord(**s) for s in document.states),
        n_interior=document.n_interior,
        truncated_at_accumulation=document.truncated_at_accumulation,
        h_eff=document.h_eff,
    )


def to_jsonable(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        raise ValidationError(f"cannot serialize non-finite number {value!r}")
    return value


def serialize(document: Any) -> bytes:
    return (json.dumps(to_jsonable(document), indent=2) + "\n").encode("utf-8")


def _load_json(data: bytes | str) -> Any:
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _require(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ValidationError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse(data: bytes | str) -> PartitionDocument:
    raw = _load_json(data)
    if not isinstance(raw, dict):
        raise ValidationError("partition document must be a JSON object")
    version = _require(raw, "schema_version", int, "document")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"document.schema_version: unsupported version {version}")
    params = _require(raw, "params", dict, "document")
    try:
        ModelParams(**params)
    except TypeError as exc:
        raise ValidationError(f"document.params: {exc}") from None

    states = []
    previous = -1.0
    for k, item in enumerate(_require(raw, "states", list, "document")):
        where = f"states[{k}]"
        if not isinstance(item, dict):
            raise ValidationError(f"{where}: expected an object")
        state = {
            "index": _require(item, "index", int, where),
            "left": _require(item, "left", float, where),
            "right": _require(item, "right", float, where),
            "size": _require(item, "size", float, where),
            "remoteness": _require(item, "remoteness", float, where),
            "is_polar": _require(item, "is_polar", bool, where),
        }
        if state["left"] != previous:
            raise ValidationError(f"{where}.left: expected {previous}, got {state['left']} (gap or overlap)")
        if not state["left"] < state["right"]:
            raise ValidationError(f"{where}.right: borders must increase ({state['left']} -> {state['right']})")
        previous = state["right"]
        states.append(state)
    if not states or previous != 1.0:
        raise ValidationError("document.states: states must tile [-1, 1]")

    return PartitionDocument(
        params=params,
        states=tuple(states),
        truncated_at_accumulation=_require(raw, "truncated_at_accumulation", bool, "document"),
        h_eff=_require(raw, "h_eff", float, "document"),
        n_interior=_require(raw, "n_interior", int, "document"),
        schema_version=version,
    )


def parse_network_config(data: bytes | str) -> NetworkConfig:
    """{nodes: [{id, x, y}] | [{id}] with distance_matrix, delta, eta, h, eps_max, seed}"""
    raw = _load_json(data)
    if not isinstance(raw, dict):
        raise ValidationError("network config must be a JSON object")
    nodes = _require(raw, "nodes", list, "config")
    options = {
        "delta": _require(raw, "delta", float, "config"),
        "eta": _require(raw, "eta", float, "config"),
        "h_net": _require(raw, "h", float, "config"),
        "eps_max": _require(raw, "eps_max", float, "config") if "eps_max" in raw else 0.0,
        "seed": _require(raw, "seed", int, "config") if "seed" in raw else 0,
    }
    ids = []
    for k, node in enumerate(nodes):
        if isinstance(node, (str, int)) and not isinstance(node, bool):
            ids.append(str(node))
        elif isinstance(node, dict) and "id" in node:
            ids.append(str(node["id"]))
        else:
            raise ValidationError(f"config.nodes[{k}]: expected an id or an object with 'id'")
    if "distance_matrix" in raw:
        return NetworkConfig.from_distance_matrix(ids, raw["distance_matrix"], **options)
    coords = []
    for k, node in enumerate(nodes):
        where = f"config.nodes[{k}]"
        if not isinstance(node, dict):
            raise ValidationError(f"{where}: positions need objects with x and y")
        coords.append((ids[k], _require(node, "x", float, where), _require(node, "y", float, where)))
    return NetworkConfig.from_positions(coords, **options)


def network_config_document(config: NetworkConfig) -> dict:
    doc: dict[str, Any] = {}
    if config.positions is not None:
        doc["nodes"] = [{"id": i, "x": x, "y": y} for i, (x, y) in zip(config.node_ids, config.positions)]
    else:
        doc["nodes"] = [{"id": i} for i in config.node_ids]
        doc["distance_matrix"] = config.distances.tolist()
    doc.update(delta=config.delta, eta=config.eta, h=config.h_net, eps_max=config.eps_max, seed=config.seed)
    return doc


def parse_graph(data: bytes | str, config: NetworkConfig) -> nx.Graph:
    raw = _load_json(data)
    if not isinstance(raw, dict):
        raise ValidationError("graph document must be a JSON object")
    return build_graph(config, _require(raw, "edges", list, "graph"))


def graph_document(graph: nx.Graph) -> dict:
    return {"edges": [list(edge) for edge in canonical_edges(graph)]}


def read_bytes(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
