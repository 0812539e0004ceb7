import pytest
from hypothesis import given, settings, strategies as st

from artifact import construct as C
from artifact import gos as G
from artifact import words as W
from artifact.cli import PreconditionError, derived_surjection, presentation


def adjoin(gamma, k, rank=2):
    a = C.AdjoinRootData(rank, [(W.parse_letters(gamma), k)])
    base, roots = derived_surjection(a)
    return a, C.adjoin_root_data_to_gofg(a, base, roots)


def test_corank_bound_examples():
    assert C.corank_bound(C.hnn_conjugacy_instance()) == 2
    amalgam = C.GraphOfFreeGroupsData(1, [1, 1], [C.GroupEdge(0, 1, ((1, 1), (1, 1, 1)))], [[(1, 1, 1)], [(1, 1)]])
    assert C.corank_bound(amalgam) == 1
    big = C.GraphOfFreeGroupsData(4, [2, 3], [C.GroupEdge(0, 1, ((1,), (1,)))], [[(1,), (2,)], [(1,), (3,), (4,)]])
    assert C.corank_bound(big) == 4


def test_adjoin_root_data_shapes():
    _, d = adjoin("ab", 2)
    assert d.vertex_ranks == [2, 1] and len(d.edges) == 1 and d.edges[0].kind == "amalgam"
    a = C.AdjoinRootData(2, [((1,), 2), ((2,), 3)])
    d = C.adjoin_root_data_to_gofg(a, [(1, 1), (2, 2, 2)], [(1,), (2,)])
    assert d.vertex_ranks == [2, 1, 1]
    assert sorted((e.src, e.dst) for e in d.edges) == [(0, 1), (0, 2)]


def test_adjoin_root_rejects_inverse_classes_and_powers():
    with pytest.raises(C.ConstructError):
        C.AdjoinRootData(2, [((1,), 2), ((-1,), 3)]).check()
    with pytest.raises(C.ConstructError, match="proper power"):
        C.AdjoinRootData(2, [((1, 2, 1, 2), 2)]).check()
    with pytest.raises(C.ConstructError):
        C.AdjoinRootData(2, [((1,), 1)]).check()


@pytest.mark.parametrize("gamma, k", [("a", 2), ("ab", 2), ("ab", 3), ("aab", 2)])
def test_build_gos_adjoin_root_has_equal_euler_characteristics(gamma, k):
    _, d = adjoin(gamma, k)
    built = C.build_gos(d)
    assert G.validate(built.X) == []
    a, b = G.chi_pair(built.X)
    assert a == b == 1 - d.rank


def test_build_gos_hnn():
    built = C.build_gos(C.hnn_conjugacy_instance())
    assert G.validate(built.X) == []
    a, b = G.chi_pair(built.X)
    assert a == b == -1


def test_build_gos_refuses_non_surjective_map():
    a = C.AdjoinRootData(2, [((1,), 2)])
    d = C.adjoin_root_data_to_gofg(a, [(1, 1), (2, 2)], [(1,)])
    with pytest.raises(C.ConstructError):
        C.build_gos(d)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**5))
def test_primitive_root_instances_build(seed):
    _, d = C.primitive_root_instance(seed)
    built = C.build_gos(d)
    a, b = G.chi_pair(built.X)
    assert a == b


def test_corank_search_free_group_identity_witness():
    hit = C.bounded_corank_search(2, [], 2, 1)
    assert hit == ((1,), (2,))


def test_corank_search_finds_root_of_product():
    a = C.AdjoinRootData(2, [((1, 2), 2)])
    n, rels = presentation(a)
    hit = C.bounded_corank_search(n, rels, 2, 2)
    assert hit is not None and C.verify_witness(hit, rels, 2)


def test_verify_witness_rejects_bad_images():
    n, rels = presentation(C.AdjoinRootData(2, [((1, 2), 2)]))
    assert not C.verify_witness(((1,), (2,), (1,)), rels, 2)
    assert not C.verify_witness(((1,), (1,)), [], 2)


def test_parallel_search_matches_sequential():
    n, rels = presentation(C.AdjoinRootData(2, [((1, 2), 2)]))
    assert C.bounded_corank_search(n, rels, 2, 2, parallel=2) == C.bounded_corank_search(n, rels, 2, 2)


@pytest.mark.parametrize("gamma, k", [("ab", 2), ("a", 3)])
def test_theorem_report_confirms_primitive_factor(gamma, k):
    a, d = adjoin(gamma, k)
    rep = C.theorem_report(C.build_gos(d), a)
    assert rep["edge_spaces_trees"] and rep["separable"]
    [f] = rep["roots"]
    assert f["whitehead_primitive"] and f["agree"] and f["free_factor_certificate"] is not None
    assert rep["summary"] == f"edge spaces: trees; factor: <{gamma}> primitive"


def test_non_primitive_gamma_is_a_hypothesis_failure():
    a = C.AdjoinRootData(2, [((1, 1, 2, 2), 2)])
    a.check()
    with pytest.raises(PreconditionError, match="not primitive"):
        derived_surjection(a)
    n, rels = presentation(a)
    assert C.bounded_corank_search(n, rels, 2, 2) is None


def test_corollary_report_stock_instance():
    rep = C.corollary_report(C.hnn_conjugacy_instance())
    assert rep["ok"], rep["checks"]
    assert rep["summary"] == "F = F1 * <a> with F1 = <b>; Z carries a"
    factors = {p["word"]: p["factor"] for p in rep["placements"]}
    assert factors == {"a": "Z", "b": "F1"}


def test_corollary_report_rejects_singleton_class():
    d = C.GraphOfFreeGroupsData(2, [2], [C.GroupEdge(0, 0, ((1,), (1,)), "hnn")], [[(1,), (2,)]], {0: (1,)})
    with pytest.raises(C.ConstructError, match="singleton"):
        C.corollary_report(d)


def test_corollary_report_two_stable_letters():
    rep = C.corollary_report(C.hnn_conjugacy_instance([("a", "b"), ("b", "a")]))
    assert len(rep["classes"]) == 1
    assert rep["ok"], rep["checks"]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**5))
def test_corollary_report_random_twisted_instances(seed):
    rep = C.corollary_report(C.random_hnn_instance(seed))
    assert rep["ok"], rep["checks"]


def test_gofg_json_round_trip():
    d = C.hnn_conjugacy_instance()
    d2 = C.GraphOfFreeGroupsData.from_json(d.to_json())
    assert d2.to_json() == d.to_json()
