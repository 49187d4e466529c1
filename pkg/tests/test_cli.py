import io
import json
from importlib import resources

import jsonschema
import pytest

from isoglab.cli import main

COMMANDS = {
    "count": ["count", "--p", "101", "--a", "1", "--b", "3"],
    "graph": ["graph", "--p", "97", "--ell", "2"],
    "volcano": ["volcano", "--p", "83", "--a", "1", "--b", "21", "--ell", "3"],
    "spectral": ["spectral", "--p", "97", "--ell", "3"],
    "cgl": ["cgl", "--p", "97", "--start", "-3375", "--bits", "010101"],
    "ecdh": ["ecdh", "--seed", "5"],
    "rs": ["rs", "demo", "--seed", "5"],
    "sidh": ["sidh", "demo", "--eA", "4", "--eB", "3", "--f", "1", "--seed", "42"],
    "zk": ["zk", "demo", "--rounds", "3", "--seed", "7"],
    "ecm": ["ecm", "--n", "455839", "--bound", "15", "--seed", "1"],
    "pminus1": ["pminus1", "--n", "299", "--bound", "4", "--seed", "1"],
    "irred": ["irred", "--q", "7", "--ell", "5", "--seed", "1"],
    "mitm": ["mitm", "--p", "431", "--start", "0", "--end", "1728", "--seed", "2"],
    "schreier": ["schreier", "--n", "13", "--directions", "2,3,5", "--seed", "3"],
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def schema(name):
    return json.loads(resources.files("isoglab").joinpath("schemas", f"{name}.json").read_text())


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_output_matches_schema_and_is_deterministic(name):
    code, out, _ = run(COMMANDS[name])
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema(name))
    assert doc["command"] == name
    # canonical form: sorted keys, no whitespace
    assert out == json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    assert run(COMMANDS[name])[1] == out


def test_every_subcommand_has_a_schema():
    from isoglab.cli import HANDLERS

    assert set(HANDLERS) == set(COMMANDS)
    names = {p.name[:-5] for p in resources.files("isoglab").joinpath("schemas").iterdir() if p.name.endswith(".json")}
    assert names == set(COMMANDS)


def test_graph_dot():
    code, out, _ = run(["graph", "--p", "97", "--ell", "2", "--format", "dot"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "graph G {"
    assert sum(1 for line in lines if line.endswith('";') and " -- " not in line) == 8


def test_sidh_demo_repeatable():
    argv = COMMANDS["sidh"]
    a, b = run(argv)[1], run(argv)[1]
    assert a == b
    doc = json.loads(a)["outputs"]
    assert doc["agree"] and doc["roundtrip"]


@pytest.mark.parametrize("argv", [
    ["count", "--p", "101", "--a", "1", "--b", "3", "--bogus"],
    ["graph", "--p", "97"],
    ["nosuch"],
    ["count", "--p", "101", "--a", "1", "--b", "3", "--method", "bsgs"],
])
def test_usage_errors(argv):
    code, out, err = run(argv)
    assert code == 2 and out == "" and err


@pytest.mark.parametrize("argv", [
    ["count", "--p", "100", "--a", "1", "--b", "3"],
    ["count", "--p", "101", "--a", "0", "--b", "0"],
    ["cgl", "--p", "97", "--start", "5", "--bits", "01"],
    ["schreier", "--n", "13", "--directions", "2,7", "--seed", "1"],
    ["pminus1", "--n", "97", "--bound", "5", "--seed", "1"],
])
def test_precondition_errors(argv):
    code, out, err = run(argv)
    assert code == 2 and out == ""
    assert "isoglab:" in err


def test_stderr_carries_timing_only():
    code, out, err = run(COMMANDS["count"])
    assert code == 0 and "done in" in err and "done" not in out
