"""End-to-end command line behaviour and exit codes."""

import json

import pytest

from loopcorrect.cli import main
from loopcorrect.graph import render_edge_list, two_triangles_graph
from loopcorrect.model import model_from_json


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    rc = main(["gen", "example1", "--seed", "11", "-J", "0.5", "-o", str(path)])
    assert rc == 0
    return path


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text(render_edge_list(two_triangles_graph()))
    return path


def test_gen_topologies(tmp_path):
    out = tmp_path / "m.json"
    assert main(["gen", "example1", "--seed", "1", "-o", str(out)]) == 0
    m = model_from_json(out.read_text())
    assert m.graph == two_triangles_graph()

    assert main(["gen", "tree", "7", "--seed", "1", "-o", str(out)]) == 0
    m = model_from_json(out.read_text())
    assert m.node_count == 7 and len(m.graph.edges) == 6

    assert main(["gen", "cycle", "5", "--seed", "2", "-o", str(out)]) == 0
    m = model_from_json(out.read_text())
    assert len(m.graph.edges) == 5

    assert main(["gen", "grid", "2", "3", "--seed", "3", "-o", str(out)]) == 0
    m = model_from_json(out.read_text())
    assert m.node_count == 6 and len(m.graph.edges) == 7

    assert main(["gen", "random", "6", "9", "--seed", "4", "-o", str(out)]) == 0
    m = model_from_json(out.read_text())
    assert m.node_count == 6 and len(m.graph.edges) == 9


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["gen", "random", "7", "9", "--seed", "99", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_lbp_command(model_file, capsys):
    assert main(["lbp", "--model", str(model_file)]) == 0
    out = capsys.readouterr().out
    assert "log_Z_B" in out and "converged = True" in out


def test_oracle_command(model_file, capsys):
    assert main(["oracle", "--model", str(model_file), "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("node,p_minus,p_plus")
    assert "log_Z" in out


def test_loopseries_command(model_file, capsys):
    rc = main(
        [
            "loopseries",
            "--model",
            str(model_file),
            "--terms",
            "--max-size",
            "3",
            "--target",
            "0",
            "--format",
            "csv",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "subset,size,r,partial_sum" in out
    assert "series_total" in out and "marginal[0]" in out


def test_compare_command_ok(model_file, capsys):
    assert main(["compare", "--model", str(model_file)]) == 0
    out = capsys.readouterr().out
    for needle in (
        "log_Z_exact",
        "log_Z_B",
        "series_total",
        "corrected_rel_error",
        "corrected_error",
    ):
        assert needle in out


def test_compare_identity_failure_exit_code(model_file):
    # an absurdly tight tolerance forces the identity-check exit path
    assert main(["compare", "--model", str(model_file), "--check-tol", "1e-30"]) == 3


def test_non_convergence_exit_code(model_file):
    assert main(["lbp", "--model", str(model_file), "--max-iters", "2"]) == 2
    assert main(["loopseries", "--model", str(model_file), "--max-iters", "2"]) == 2


def test_polynomial_commands(graph_file, capsys):
    assert main(["theta", "--graph", str(graph_file), "--method", "cd", "--check"]) == 0
    out = capsys.readouterr().out
    assert "theta = 1 + 2*b^3 + b^6 + b^7*g^2" in out
    assert "attained = True" in out

    assert main(["omega", "--graph", str(graph_file), "--check"]) == 0
    out = capsys.readouterr().out
    assert "omega = 1 + b + b^2 + 3*b^3 + 3*b^4 + 3*b^5 + 4*b^6" in out

    assert main(["matching", "--graph", str(graph_file)]) == 0
    out = capsys.readouterr().out
    assert "alpha =" in out


def test_usage_errors(tmp_path):
    assert main(["oracle", "--model", str(tmp_path / "missing.json")]) == 1
    assert main(["gen", "tree", "-o", str(tmp_path / "x.json")]) == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("nope")
    assert main(["theta", "--graph", str(bad)]) == 1


def test_thread_cap_env(model_file, monkeypatch):
    monkeypatch.setenv("LOOPCORRECT_THREADS", "4")
    assert main(["oracle", "--model", str(model_file)]) == 0
    monkeypatch.setenv("LOOPCORRECT_THREADS", "zero")
    assert main(["oracle", "--model", str(model_file)]) == 1


def test_factor_model_via_cli(tmp_path, capsys):
    doc = {
        "vars": 3,
        "factors": [
            {"scope": [0, 1], "table": [1.2, 0.8, 0.9, 1.1]},
            {"scope": [1, 2], "table": [1.1, 0.9, 0.7, 1.3]},
            {"scope": [0, 2], "table": [0.9, 1.2, 1.1, 0.8]},
        ],
    }
    path = tmp_path / "factor.json"
    path.write_text(json.dumps(doc))
    assert main(["compare", "--model", str(path)]) == 0
    out = capsys.readouterr().out
    assert "corrected_rel_error" in out
