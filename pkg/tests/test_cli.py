import json

import pytest

from cli import run
from documents import graph_document, network_config_document, serialize
from network import build_graph

SQUARE = [("A", "B"), ("A", "C"), ("A", "D"), ("B", "C"), ("B", "D"), ("C", "D")]
TRIANGLE = [("E", "F"), ("E", "G"), ("F", "G")]


@pytest.fixture
def network_files(tmp_path, seven_nodes):
    config = tmp_path / "config.json"
    config.write_bytes(serialize(network_config_document(seven_nodes)))
    graph = tmp_path / "graph.json"
    graph.write_bytes(serialize(graph_document(build_graph(seven_nodes, SQUARE + TRIANGLE))))
    return config, graph


def test_solve_json(capsys):
    assert run(["solve"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_interior"] == 5
    assert doc["truncated_at_accumulation"] is True
    center = next(s for s in doc["states"] if s["index"] == 0)
    assert center["right"] == pytest.approx(0.427912, abs=1e-6)


def test_solve_csv(capsys):
    assert run(["solve", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,left,right,size,remoteness,is_polar"
    assert len(lines) == 1 + 13


def test_solve_output_is_byte_identical(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["solve", "--out", str(first)]) == 0
    assert run(["solve", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_infeasible_central_state(capsys):
    assert run(["solve", "--h", "5"]) == 2
    assert "infeasible central state" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run([]) == 1
    assert run(["solve", "--bogus"]) == 1
    assert run(["solve", "--tau", "-1"]) == 1
    assert run(["migrate", "--from", "1"]) == 1
    assert run(["migrate", "--from", "2", "--to", "1", "--format", "csv"]) == 1
    assert "usage" in capsys.readouterr().err


def test_gravity_and_migrate(capsys):
    assert run(["gravity", "--from", "1", "--to", "2"]) == 0
    flow = json.loads(capsys.readouterr().out)
    assert flow["x_newton"] == pytest.approx(0.0102, abs=1e-4)
    assert flow["x_exact"] is None
    assert run(["migrate", "--from", "2", "--to", "1"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["flow"] == pytest.approx(0.02235, abs=5e-5)
    assert run(["gravity", "--from", "1", "--to", "1"]) == 1


def test_gravity_matrix_csv(capsys):
    assert run(["gravity", "--matrix", "--exact", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "exporter,importer,distance,flow"
    assert len(lines) == 1 + 13 * 13


def test_statics_commands(capsys):
    assert run(["statics", "border-effect", "--b", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["border_effect"] == pytest.approx(3.0)
    assert run(["statics", "opinions"]) == 0
    assert json.loads(capsys.readouterr().out)["mean"] == 0.0
    assert run(["statics", "state0-shock", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("index,db_db0_fd,")
    assert run(["statics", "size-response"]) == 1


def test_decompose_state_count_change(capsys):
    assert run(["decompose", "--param", "h", "--delta", "2", "--from", "-1", "--to", "1"]) == 2
    assert "state count" in capsys.readouterr().err


def test_sweep_json(capsys):
    assert run(["sweep", "--taus", "1", "--hs", "0.2", "5", "--threads", "1"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["feasible"] for r in rows] == [True, False]
    assert rows[0]["n_interior"] == 5
    assert rows[1]["n_interior"] is None


def test_verify(capsys):
    assert run(["verify"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["failing_states"] == []


def test_network_check(capsys, network_files):
    config, graph = network_files
    assert run(["network", "check", "--config", str(config), "--graph", str(graph)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stable"] is False
    (violation,) = doc["between_violations"]
    assert (violation["i"], violation["j"]) == ("D", "E")
    assert violation["margin"] == pytest.approx(0.025736, abs=1e-6)
    assert run(["network", "check", "--config", str(config)]) == 1


def test_network_prob(capsys, network_files):
    config, _ = network_files
    assert run(["network", "prob", "--config", str(config), "--runs", "10"]) == 1
    capsys.readouterr()
    assert run(["network", "prob", "--config", str(config), "--seed", "3", "--runs", "10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["runs"] == 10
    assert [n["frequency"] for n in doc["networks"]] == ["1/1"]


def test_network_missing_config(tmp_path):
    assert run(["network", "simulate", "--config", str(tmp_path / "none.json")]) == 1


@pytest.mark.parametrize(
    "field, value",
    [("eps_max", "wide"), ("seed", None), ("distance_matrix", [[0, 1], [1]])],
)
def test_network_malformed_config(tmp_path, capsys, field, value):
    raw = {"nodes": ["a", "b"], "distance_matrix": [[0, 1], [1, 0]], "delta": 0.2, "eta": 0.1, "h": 0.05}
    raw[field] = value
    config = tmp_path / "config.json"
    config.write_text(json.dumps(raw))
    assert run(["network", "simulate", "--config", str(config)]) == 1
    assert field in capsys.readouterr().err
