import pytest
from hypothesis import given, settings, strategies as st

from artifact import construct as C
from artifact import cylinders as CY
from artifact import gos as G
from artifact import splitting as S
from artifact.cli import derived_surjection
from artifact.generate import random_gos
from artifact.graphs import Graph
from artifact.words import Word, is_primitive

R1 = Graph(1, ((0, 0),))

# random seeds whose minimized space has an irreducible component needing a split
SPLIT_SEEDS = (28, 37, 58, 60, 68, 72, 107, 129)


def split_component(seed):
    X = G.minimize(random_gos(seed)).gos
    X, _ = S.reduce_components(X)
    Y = next(Y for Y in CY.irreducible_components(X) if S._needs_split(Y))
    return X, Y


def root_space(gamma=(1, 2), k=2):
    a = C.AdjoinRootData(2, [(gamma, k)])
    base, roots = derived_surjection(a)
    return C.build_gos(C.adjoin_root_data_to_gofg(a, base, roots)).X


def test_peripheral_elements_in_hnn_edge_space():
    X = G.minimize(C.build_gos(C.hnn_conjugacy_instance()).X).gos
    data = CY.build_cylinders(X)
    found = [pe for e in X.edges for pe in S.peripheral_elements(X, e, data)]
    for pe in found:
        holders = [F for F in S.fibre_family(data, pe.edge) if pe.vertex in F.vertices]
        assert holders == [pe.fibre]
        assert pe.vertex in S.boundary_vertices(data, pe.edge)


def test_constant_push_is_identity():
    X, Y = split_component(28)
    data = CY.build_cylinders(Y)
    pe = next(pe for e in sorted(Y.edges) for pe in S.peripheral_elements(Y, e, data))
    t = S.push(Y, pe, [], data)
    assert t.path == [] and t.crossings == [] and t.fibres == [pe.fibre]


def test_one_edge_push_in_identity_torus():
    X = G.mapping_torus(R1, (0,), (0,))
    data = CY.build_cylinders(X)
    cyl = data.cylinders[0]
    fibre = S.Fibre(0, 0, 0, frozenset({0}), frozenset())
    t = S.push_steps(data, S.PeripheralElement(fibre, 0), 1, 1)
    assert t.path == [0]
    assert t.points[0][0] == t.points[1][0] == 0
    assert cyl.windings == [[1, 1]]


def test_push_around_a_circuit_returns():
    X, Y = split_component(37)
    data = CY.build_cylinders(Y)
    for e in sorted(Y.edges):
        for pe in S.peripheral_elements(Y, e, data):
            cyl = data.cylinders[pe.fibre.cylinder]
            t = S.push_steps(data, pe, cyl.length, 1)
            assert t.fibres[-1].vertices == pe.fibre.vertices
            assert S.push(Y, pe, t.path, data).fibres == t.fibres


@pytest.mark.parametrize("seed", SPLIT_SEEDS)
def test_found_splitting_vertex_is_valid(seed):
    _, Y = split_component(seed)
    sv = S.find_splitting_vertex(Y)
    assert S.check_splitting_vertex(Y, sv) == []
    assert sv in S.splitting_vertices(Y)


def test_precondition_euler_characteristic_zero():
    X = G.mapping_torus(R1, (0,), (0,))
    with pytest.raises(S.SplittingError, match="precondition"):
        S.find_splitting_vertex(X)


def test_precondition_bad_cylinder():
    X = G.minimize(root_space()).gos
    X, _ = S.reduce_components(X)
    Y = max(CY.irreducible_components(X), key=lambda Y: len(Y.edges) - len(Y.vertices))
    with pytest.raises(S.SplittingError, match="precondition"):
        S.find_splitting_vertex(Y)


def test_precondition_not_irreducible():
    inc = G.identity_inc(R1)
    pt = G.UEdge(0, 1, G.point(), (((0,), ()), ((0,), ())))
    X = G.GoS({0: R1, 1: R1}, {0: G.UEdge(0, 0, R1, (inc, inc)), 1: G.UEdge(1, 1, R1, (inc, inc)), 2: pt})
    with pytest.raises(S.SplittingError, match="irreducible"):
        S.find_splitting_vertex(X)


@pytest.mark.parametrize("seed", SPLIT_SEEDS)
def test_split_decreases_relative_weight_or_creates_weightless_edge(seed):
    X, Y = split_component(seed)
    sv = min(S.splitting_vertices(Y), key=lambda c: S.relative_weight(Y, c.vertex))
    out = S.split(X, sv, Y)
    assert out.weightless_created or out.relative_after < out.relative_before
    assert G.validate(out.gos) == []
    a, b = G.chi_pair(out.gos)
    assert a == b


def test_split_rejects_stale_vertex():
    X, Y = split_component(28)
    sv = S.find_splitting_vertex(Y)
    stale = S.SplittingVertex(sv.vertex, sv.secondary, sv.primary, sv.outgoing, sv.triple_point, sv.witness)
    with pytest.raises(S.SplittingError, match="stale"):
        S.split(X, stale, Y)


def test_split_to_bad_fixes_all_bad_space():
    X = G.mapping_torus(R1, (0,), (0,))
    res = S.split_to_bad(X)
    assert res.splits == 0 and G.canonical_form(res.gos) == G.canonical_form(X)


def test_split_to_bad_hnn():
    X = G.minimize(C.build_gos(C.hnn_conjugacy_instance()).X).gos
    res = S.split_to_bad(X)
    assert S.final_state_ok(res.gos)
    for row in S.component_verdicts(res.gos):
        assert row["chiU"] >= 0 or "bad" in row["verdicts"]


def test_split_to_bad_root_instance_exposes_primitive():
    X = G.minimize(root_space()).gos
    res = S.split_to_bad(X)
    assert S.final_state_ok(res.gos) and res.splits == 0
    assert any(ue.graph.n_edges == 0 for ue in res.gos.edges.values())
    assert [row["verdicts"] for row in S.component_verdicts(res.gos)] == [["bad"]]
    assert is_primitive(Word((1, 2), 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 800))
def test_split_to_bad_terminates_and_preserves_horizontal_profile(seed):
    X = random_gos(seed)
    a, b = G.chi_pair(X)
    if a != b:
        with pytest.raises(G.NotSeparableError):
            S.split_to_bad(X)
        return
    X = G.minimize(X).gos
    profile = G.horizontal(X).betti_profile()
    res = S.split_to_bad(X)
    assert S.final_state_ok(res.gos)
    assert G.horizontal(res.gos).betti_profile() == profile
    for move in res.trace:
        if move["move"] == "split":
            rb, ra = move["relativeWeight"]
            assert move["weightlessCreated"] or ra < rb
