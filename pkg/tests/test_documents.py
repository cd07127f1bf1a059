import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import SEVEN_NODES
from core import ValidationError
from documents import (
    document_partition,
    graph_document,
    network_config_document,
    parse,
    parse_graph,
    parse_network_config,
    partition_document,
    read_bytes,
    serialize,
    to_jsonable,
)
from network import build_graph, canonical_edges, simulate_formation


@pytest.fixture
def raw_document(partition):
    return json.loads(serialize(partition_document(partition)))


def test_partition_round_trip(partition):
    document = partition_document(partition)
    parsed = parse(serialize(document))
    assert parsed == document
    assert document_partition(parsed) == partition


def test_serialize_is_byte_deterministic(partition):
    first = serialize(partition_document(partition))
    assert first == serialize(partition_document(partition))
    assert first.endswith(b"\n")
    assert b"NaN" not in first


def test_document_fields(raw_document, partition):
    assert raw_document["schema_version"] == 1
    assert raw_document["n_interior"] == 5
    assert raw_document["truncated_at_accumulation"] is True
    assert raw_document["params"]["h"] == 0.2
    assert len(raw_document["states"]) == len(partition.states)
    assert set(raw_document["states"][0]) == {"index", "left", "right", "size", "remoteness", "is_polar"}


def test_parse_rejects_decreasing_borders(raw_document):
    raw_document["states"][3]["right"] = raw_document["states"][3]["left"] - 0.01
    with pytest.raises(ValidationError, match=r"states\[3\]\.right"):
        parse(json.dumps(raw_document))


def test_parse_rejects_gap(raw_document):
    raw_document["states"][4]["left"] += 1e-3
    with pytest.raises(ValidationError, match=r"states\[4\]\.left"):
        parse(json.dumps(raw_document))


def test_parse_rejects_missing_and_mistyped_fields(raw_document):
    broken = dict(raw_document)
    del broken["h_eff"]
    with pytest.raises(ValidationError, match="h_eff"):
        parse(json.dumps(broken))
    raw_document["states"][0]["is_polar"] = "yes"
    with pytest.raises(ValidationError, match=r"states\[0\]\.is_polar"):
        parse(json.dumps(raw_document))


def test_parse_rejects_bad_params(raw_document):
    raw_document["params"]["tau"] = -1.0
    with pytest.raises(ValidationError, match="tau"):
        parse(json.dumps(raw_document))
    raw_document["params"] = {"tau": 1.0, "bogus": 3}
    with pytest.raises(ValidationError, match="params"):
        parse(json.dumps(raw_document))


def test_parse_rejects_other_versions(raw_document):
    raw_document["schema_version"] = 2
    with pytest.raises(ValidationError, match="unsupported version"):
        parse(json.dumps(raw_document))


def test_malformed_json():
    with pytest.raises(ValidationError, match="line 1"):
        parse(b'{"states": [')
    with pytest.raises(ValidationError):
        parse(b"[]")


def test_to_jsonable():
    assert to_jsonable(Fraction(1, 3)) == "1/3"
    assert to_jsonable(np.float64(0.5)) == 0.5
    assert to_jsonable({("A", "B"): np.arange(2)}) == {"('A', 'B')": [0, 1]}
    with pytest.raises(ValidationError):
        to_jsonable(float("inf"))


def test_network_config_round_trip(seven_nodes):
    document = network_config_document(seven_nodes)
    parsed = parse_network_config(serialize(document))
    assert parsed == seven_nodes
    assert np.array_equal(parsed.distances, seven_nodes.distances)


def test_network_config_from_matrix():
    data = json.dumps({
        "nodes": ["a", "b", "c"],
        "distance_matrix": [[0, 1, 2], [1, 0, 1], [2, 1, 0]],
        "delta": 0.2, "eta": 0.1, "h": 0.05,
    })
    config = parse_network_config(data)
    assert config.distance("a", "c") == 2.0
    assert config.eps_max == 0.0 and config.seed == 0
    assert parse_network_config(serialize(network_config_document(config))) == config


@pytest.mark.parametrize(
    "field, value",
    [("eps_max", "wide"), ("eps_max", None), ("seed", None), ("seed", 1.5), ("seed", True)],
)
def test_network_config_rejects_mistyped_options(field, value):
    raw = {"nodes": ["a", "b"], "distance_matrix": [[0, 1], [1, 0]], "delta": 0.2, "eta": 0.1, "h": 0.05}
    raw[field] = value
    with pytest.raises(ValidationError, match=f"config.{field}: expected"):
        parse_network_config(json.dumps(raw))


def test_network_config_rejects_ragged_matrix():
    data = json.dumps({"nodes": ["a", "b"], "distance_matrix": [[0, 1], [1]], "delta": 0.2, "eta": 0.1, "h": 0.05})
    with pytest.raises(ValidationError, match="distance_matrix"):
        parse_network_config(data)


def test_network_config_requires_positions():
    data = json.dumps({"nodes": [{"id": "a", "x": 0}], "delta": 0.2, "eta": 0.1, "h": 0.05})
    with pytest.raises(ValidationError, match=r"nodes\[0\]: missing field 'y'"):
        parse_network_config(data)


def test_graph_round_trip(seven_nodes):
    graph = simulate_formation(seven_nodes)
    parsed = parse_graph(serialize(graph_document(graph)), seven_nodes)
    assert canonical_edges(parsed) == canonical_edges(graph)
    assert set(parsed.nodes) == {n[0] for n in SEVEN_NODES}
    with pytest.raises(ValidationError):
        parse_graph(b'{"edges": [["A"]]}', seven_nodes)
    assert canonical_edges(build_graph(seven_nodes, [("B", "A")])) == (("A", "B"),)


def test_read_bytes(tmp_path):
    path = tmp_path / "doc.json"
    path.write_bytes(b"{}")
    assert read_bytes(path) == b"{}"
    with pytest.raises(ValidationError, match="cannot read"):
        read_bytes(tmp_path / "missing.json")
