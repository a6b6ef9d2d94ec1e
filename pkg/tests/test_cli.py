import json
import subprocess
import sys

import pytest

from clusterdesign.cli import main
from clusterdesign.graph_core import OrientedGraph


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def graph_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert run(capsys, "synth", "--clusters", "1,2,3,4", "--path", "4,2,1,3", "--out", str(path))[0] == 0
    return path


def test_synth_to_stdout(capsys):
    code, out, err = run(capsys, "synth", "--clusters", "3,3,3,3,3", "--path", "1,2,3,4,5")
    assert code == 0
    g = OrientedGraph.from_json(out)
    assert (g.node_count, g.edge_count) == (15, 15)
    assert "orbit sizes [3, 3, 3, 3, 3]" in err


def test_synth_default_path_is_optimal(capsys, tmp_path):
    out = tmp_path / "g.json"
    code, _, err = run(capsys, "synth", "--clusters", "1,2,3,4", "--out", str(out), "--dot", str(tmp_path / "g.dot"))
    assert code == 0
    assert OrientedGraph.from_json(out.read_text()).edge_count == 9
    assert "path 3->1->2->4" in err
    assert (tmp_path / "g.dot").read_text().startswith("digraph")


def test_synth_robust(capsys):
    code, out, _ = run(capsys, "synth", "--clusters", "1,2,3,4", "--path", "4,1,2,3", "--robust")
    assert code == 0 and OrientedGraph.from_json(out).edge_count == 12


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--clusters", "1,2,3,4")
    doc = json.loads(out)
    assert code == 0
    assert (doc["m"], doc["M"], doc["m_robust"], doc["M_robust"]) == (9, 10, 9, 12)
    assert doc["global_cap"] == "75/4"
    assert doc["realized_sparse_edges"] == 9


def test_orbits(capsys, graph_file):
    code, out, _ = run(capsys, "orbits", "--graph", str(graph_file))
    assert code == 0
    assert sorted(json.loads(out)["sizes"]) == [1, 2, 3, 4]


def test_verify_exit_codes(capsys, tmp_path, graph_file):
    code, out, _ = run(capsys, "verify", "--graph", str(graph_file), "--clusters", "1,2,3,4")
    assert code == 0 and json.loads(out)["is_os"]
    code, out, _ = run(capsys, "verify", "--graph", str(graph_file), "--clusters", "1,2,3,4", "--s", "1")
    assert code == 1 and json.loads(out)["witnesses"]
    robust = tmp_path / "r.json"
    run(capsys, "synth", "--clusters", "2,3", "--robust", "--out", str(robust))
    assert run(capsys, "verify", "--graph", str(robust), "--clusters", "2,3", "--s", "all")[0] == 0


def test_verify_size_mismatch(capsys, graph_file):
    code, _, err = run(capsys, "verify", "--graph", str(graph_file), "--clusters", "1,2")
    assert code == 2 and "clusters sum to 3" in err


def test_usage_errors(capsys):
    for argv in (["synth", "--clusters", "1,0"], ["synth"], ["verify", "--graph", "x", "--clusters", "1", "--s", "0"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "synth", "--clusters", "1,2,3", "--path", "1,1,2")
    assert code == 2 and err.startswith("error:")


def test_simulate_outputs(capsys, tmp_path, graph_file):
    csv_path = tmp_path / "t.csv"
    code, out, _ = run(
        capsys, "simulate", "--graph", str(graph_file), "--seed", "0", "--csv", str(csv_path), "--tf", "2",
    )
    summary = json.loads(out)
    assert code == 0
    assert summary["config"]["t_final"] == 2.0
    assert csv_path.read_text().splitlines()[0].startswith("t,x_1,")
    assert summary["warnings"] == []


def test_simulate_warns_on_zero_offset(capsys, graph_file):
    code, out, err = run(
        capsys, "simulate", "--graph", str(graph_file), "--seed", "0", "--a1", "-1", "--a2", "1", "--tf", "1",
    )
    assert code == 0
    assert "warning:" in err
    assert json.loads(out)["nonzero_offset"] is False


def test_manifest_and_repro(capsys, tmp_path, graph_file):
    summary = tmp_path / "s.json"
    manifest = tmp_path / "m.json"
    argv = ["simulate", "--graph", str(graph_file), "--seed", "3", "--tf", "1", "--summary", str(summary)]
    assert run(capsys, *argv, "--manifest", str(manifest))[0] == 0
    doc = json.loads(manifest.read_text())
    assert doc["argv"] == argv
    assert doc["seed"] == 3 and doc["command"] == "simulate"
    assert set(doc["inputs"]) == {"graph"} and set(doc["outputs"]) == {"summary"}
    code, out, _ = run(capsys, "repro", str(manifest), "--outdir", str(tmp_path / "replay"))
    assert code == 0 and "MISMATCH" not in out
    assert (tmp_path / "replay" / "summary__s.json").read_bytes() == summary.read_bytes()


def test_repro_detects_changed_input(capsys, tmp_path, graph_file):
    manifest = tmp_path / "m.json"
    run(capsys, "orbits", "--graph", str(graph_file), "--manifest", str(manifest))
    graph_file.write_text(OrientedGraph(10).to_json())
    code, _, err = run(capsys, "repro", str(manifest))
    assert code == 1 and "changed" in err


def test_repeated_runs_are_byte_identical(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.json"
        run(capsys, "bounds", "--clusters", "2,4,1,3", "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "clusterdesign", "bounds", "--clusters", "2,2"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["M_robust"] == 4
