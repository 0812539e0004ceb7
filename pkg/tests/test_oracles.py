from artifact import cli
from artifact import gos as G
from artifact import oracles as O


def test_quick_suite_is_green():
    res = O.oracle_suite(quick=True)
    assert O.suite_ok(res), O.suite_matrix(res)
    assert all(line.startswith("PASS") for line in O.suite_matrix(res))


def test_module_subset(capsys):
    assert cli.run(["oracles", "--module", "words", "--quick"]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines and all(" words." in l for l in lines)


def test_injected_fault_turns_the_suite_red(capsys):
    code = cli.run(["oracles", "--module", "gos", "--inject-fault", "fold", "--quick"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL gos.fold_round_trip" in out and "first failure" in out


def test_fault_is_removed_afterwards():
    before = G.fold
    with O.inject_fault("fold"):
        assert G.fold is not before
    assert G.fold is before
    assert O.suite_ok(O.oracle_suite(["gos"], quick=True))


def test_exhaustive_search_closes_on_a_tiny_space():
    X = G.mapping_torus(G.point(), (0,), ())
    ex = O.exhaustive_search(X)
    assert ex.closed and ex.states >= 1
