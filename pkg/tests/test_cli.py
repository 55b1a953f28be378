import json
import subprocess
import sys

import pytest

from levellab.cli import main


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


CYCLE = {"vertices": 4, "facets": [[1, 2], [2, 3], [3, 4], [1, 4]]}
POLY_K = {"field": "q", "generators": [{"name": "x", "degree": 2}, {"name": "y", "degree": 2}],
          "module_generators": [{"name": "g", "degree": 0}],
          "module_relations": [[{"gen": 0, "mono": [1, 0]}], [{"gen": 0, "mono": [0, 1]}]]}


def test_dj_level_text(tmp_path, capsys):
    path = write(tmp_path, "c.json", CYCLE)
    assert main(["dj-level", "--complex", path, "--field", "fp:2"]) == 0
    assert "level = 3" in capsys.readouterr().out


def test_tor_with_oracle(tmp_path, capsys):
    path = write(tmp_path, "m.json", POLY_K)
    assert main(["tor", "--module", path, "--oracle", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["command"] == "tor"


def test_json_output_is_byte_identical(tmp_path, capsys):
    path = write(tmp_path, "m.json", POLY_K)
    main(["level", "graded", "--module", path, "--format", "json"])
    first = capsys.readouterr().out
    main(["level", "graded", "--module", path, "--format", "json"])
    assert capsys.readouterr().out == first
    assert '"display": "Exact(3)"' in first


def test_hochster_oracle(tmp_path, capsys):
    path = write(tmp_path, "c.json", CYCLE)
    assert main(["hochster", "--complex", path, "--oracle"]) == 0


def test_schema_error_exit_2(tmp_path, capsys):
    path = write(tmp_path, "bad.json", {"vertices": 3, "facets": [[1, 2]], "colour": "red"})
    assert main(["dj-level", "--complex", path]) == 2
    path = write(tmp_path, "bad2.json", {"vertices": -1, "facets": []})
    assert main(["dj-level", "--complex", path]) == 2
    assert main(["dj-level", "--complex", str(tmp_path / "missing.json")]) == 2


def test_wrong_envelope_command_exit_2(tmp_path):
    env = {"version": 1, "command": "tor", "payload": POLY_K}
    assert main(["dj-level", "--complex", write(tmp_path, "e.json", env)]) == 2


def test_corrupted_filtration_exit_3(tmp_path, capsys):
    main(["catalog", "emit", "remark_2_4", "--param", "a=1", "--out", str(tmp_path / "p.json")])
    problem = json.loads((tmp_path / "p.json").read_text())["payload"]
    path = write(tmp_path, "f.json", {"problem": problem, "stages": [[[]], [[0]]]})
    assert main(["filtration", "check", "--problem", path, "--format", "json"]) == 3
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["check"]["failure"] == "delta-image escapes F^1"


def test_filtration_check_ok(tmp_path, capsys):
    main(["catalog", "emit", "prop_5_5", "--param", "n=3", "--out", str(tmp_path / "p.json")])
    problem = json.loads((tmp_path / "p.json").read_text())["payload"]
    assert main(["filtration", "check", "--problem", write(tmp_path, "f.json", {"problem": problem})]) == 0
    assert "class 2, level <= 3" in capsys.readouterr().out


def test_gamma_outside_kernel_exit_3(tmp_path):
    main(["catalog", "emit", "remark_2_4", "--param", "a=1", "--out", str(tmp_path / "p.json")])
    problem = json.loads((tmp_path / "p.json").read_text())["payload"]
    path = write(tmp_path, "f.json", {"problem": problem, "gamma": [0]})
    assert main(["filtration", "check", "--problem", path]) == 3


def test_scenario_check_mismatch_exit_4(capsys):
    # forcing a smaller n_max than the scenario expects gives a different lower bound
    assert main(["scenario", "remark_7_4", "--bounds", "5,40", "--check"]) == 4
    assert "does NOT match" in capsys.readouterr().out


def test_scenario_check_pass(capsys):
    assert main(["scenario", "prop_5_4", "--n", "2", "--p", "5", "--k", "1", "--check"]) == 0
    assert "Exact(1), matches paper" in capsys.readouterr().out


@pytest.mark.parametrize("name,params", [
    ("remark_2_4", ["a=0"]), ("prop_5_4", ["n=2", "p=3", "k=4"]), ("prop_5_5", ["n=2"]),
    ("example_6_4", ["l=2"]), ("example_6_5", ["l=2"]), ("remark_7_4", ["n_max=4"]),
    ("dj", ["complex=simplex"]), ("torus_su2", ["h=G"]),
])
def test_emit_then_run(tmp_path, capsys, name, params):
    out = tmp_path / "env.json"
    args = ["catalog", "emit", name, "--out", str(out)]
    for p in params:
        args += ["--param", p]
    assert main(args) == 0
    env = json.loads(out.read_text())
    capsys.readouterr()
    assert main(["run", str(out), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    if name == "torus_su2":
        assert report["result"]["report"]["equal"]
    elif name == "dj":
        assert f"Exact({report['result']['level']})" == env["scenario"]["expected"]
    else:
        assert report["result"]["level"]["display"] == env["scenario"]["expected"]


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    assert "torus_su2" in capsys.readouterr().out.split()


def test_console_script_subprocess(tmp_path):
    path = write(tmp_path, "c.json", CYCLE)
    cmd = [sys.executable, "-m", "levellab.cli", "dj-level", "--complex", path, "--format", "json"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b
    assert json.loads(a)["result"]["level"] == 3
