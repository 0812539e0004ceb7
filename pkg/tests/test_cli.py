import json

import pytest

from artifact import cli
from artifact import gos as G
from artifact.graphs import Graph

R1 = Graph(1, ((0, 0),))


def write(tmp_path, kind, payload, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps({"formatVersion": 1, "kind": kind, "payload": payload, "seed": 0}))
    return str(p)


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_primitive_text(capsys):
    code, out, _ = run(capsys, "primitive", "abAB", "2")
    assert code == 0 and out.strip() == "not primitive, minimal length 4"
    code, out, _ = run(capsys, "primitive", "ababb", "2")
    assert code == 0 and out.strip().startswith("primitive")


def test_theorem_summary(tmp_path, capsys):
    path = write(tmp_path, "adjoin-root", {"rank": 2, "roots": [{"gamma": "ab", "k": 2}]})
    code, out, _ = run(capsys, "theorem", path)
    assert code == 0
    assert out.strip() == "edge spaces: trees; factor: <ab> primitive"


def test_corollary_summary(tmp_path, capsys):
    path = str(tmp_path / "hnn.json")
    assert cli.run(["gen", "hnn-conjugacy", "--seed", "0", "--json", path]) == 0
    code, out, _ = run(capsys, "corollary", path)
    assert code == 0 and out.strip() == "F = F1 * <a> with F1 = <b>; Z carries a"


def test_validate_malformed_two_cover(tmp_path, capsys):
    inc = G.identity_inc(R1)
    X = G.GoS({0: R1, 1: R1}, {0: G.UEdge(0, 1, R1, (inc, inc))})
    path = write(tmp_path, "raw-gos", X.to_json())
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "invalid graph of spaces" in err


def test_validate_good_space(tmp_path, capsys):
    X = G.mapping_torus(R1, (0,), (0,))
    path = write(tmp_path, "raw-gos", X.to_json())
    code, out, _ = run(capsys, "validate", "--input", path)
    assert code == 0 and "chi(horizontal)=0" in out


def test_parse_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(capsys, "validate", str(p))[0] == 3
    assert run(capsys, "validate")[0] == 3


def test_wrong_kind_is_a_precondition_failure(tmp_path, capsys):
    path = write(tmp_path, "raw-gos", G.mapping_torus(R1, (0,), (0,)).to_json())
    assert run(capsys, "theorem", path)[0] == 2
    assert run(capsys, "corank-search", path)[0] == 2


def test_non_primitive_gamma_needs_images(tmp_path, capsys):
    path = write(tmp_path, "adjoin-root", {"rank": 2, "roots": [{"gamma": "abAB", "k": 2}]})
    code, _, err = run(capsys, "theorem", path)
    assert code == 2 and "not primitive" in err


@pytest.mark.parametrize("kind", cli.KINDS)
def test_gen_is_deterministic_and_versioned(kind, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.run(["gen", kind, "--seed", "7", "--json", str(a)]) == 0
    assert cli.run(["gen", kind, "--seed", "7", "--json", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["formatVersion"] and data["kind"] == kind and data["seed"] == 7
    assert cli.run(["validate", str(a)]) == 0


def test_generated_instance_round_trips(tmp_path):
    inst = cli.generate("raw-gos", 11)
    p = tmp_path / "x.json"
    p.write_text(json.dumps(inst.to_json()))
    again = cli.load_instance(str(p))
    assert again.to_json() == inst.to_json()


def test_json_report_and_dot_files(tmp_path, capsys):
    src = tmp_path / "gos.json"
    assert cli.run(["gen", "raw-gos", "--seed", "3", "--json", str(src)]) == 0
    out = tmp_path / "rep.json"
    dots = tmp_path / "dots"
    assert cli.run(["minimize", str(src), "--json", str(out), "--dot", str(dots)]) == 0
    rep = json.loads(out.read_text())
    assert rep["formatVersion"] and "complexity" in json.dumps(rep)
    assert (dots / "minimized.dot").read_text().startswith(("graph", "digraph"))


def test_uot_report(tmp_path, capsys):
    src = tmp_path / "z.json"
    assert cli.run(["gen", "union-of-trees", "--seed", "2", "--json", str(src)]) == 0
    out = tmp_path / "rep.json"
    assert cli.run(["uot", str(src), "--json", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["balance"]["holds"] and rep["balance"]["lhs"] == rep["balance"]["rhs"]
    assert rep["treelike"] and rep["reassembles"]


def test_corank_search_witness(tmp_path, capsys):
    path = write(tmp_path, "adjoin-root", {"rank": 2, "roots": [{"gamma": "ab", "k": 2}]})
    code, out, _ = run(capsys, "corank-search", path, "--max-length", "2")
    assert code == 0 and out.strip().startswith("witness")
