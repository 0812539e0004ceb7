import pytest
from hypothesis import given, settings, strategies as st

from artifact import construct as C
from artifact import cylinders as CY
from artifact import gos as G
from artifact.cli import derived_surjection
from artifact.corpus import built_corpus, general_corpus
from artifact.generate import random_gos
from artifact.graphs import Graph
from artifact.oracles import band_oracle

R1 = Graph(1, ((0, 0),))


def identity_torus():
    return G.mapping_torus(R1, (0,), (0,))


def root_space(gamma=(1, 2), k=2):
    a = C.AdjoinRootData(2, [(gamma, k)])
    base, roots = derived_surjection(a)
    return C.build_gos(C.adjoin_root_data_to_gofg(a, base, roots))


def point_edge(src, dst):
    return G.UEdge(src, dst, G.point(), (((0,), ()), ((0,), ())))


def test_identity_torus_one_annulus():
    bands = CY.trace_annuli(identity_torus())
    assert len(bands) == 1 and not bands[0].moebius
    assert [len(p) for p in bands[0].boundary] == [1, 1]


def test_flip_torus_bands():
    X = G.mapping_torus(G.circle_graph(2), (1, 0), (1, 3))
    assert G.validate(X) == []
    bands = CY.trace_annuli(X)
    assert [b.moebius for b in bands] == [True, True]
    assert [len(b.boundary) for b in bands] == [1, 1]
    assert all(len(b.boundary[0]) == 2 for b in bands)
    assert sorted(map(frozenset, (b.squares for b in bands)), key=sorted) == band_oracle(X)


def test_root_annulus_winds_twice():
    X = root_space().X
    data = CY.build_cylinders(X)
    assert len(data.cylinders) == 1
    assert data.cylinders[0].windings == [[1, 2]]


def test_identity_torus_cylinder_has_empty_boundary():
    X = identity_torus()
    data = CY.build_cylinders(X)
    assert len(data.cylinders) == 1
    assert CY.ambient_boundary(data, data.cylinders[0]) == set()
    assert CY.classify_cylinder(data, data.cylinders[0]) == "bad"


def test_hnn_cylinder_has_two_circles():
    X = C.build_gos(C.hnn_conjugacy_instance()).X
    data = CY.build_cylinders(X)
    assert len(data.cylinders) == 1
    cyl = data.cylinders[0]
    assert len(cyl.circles) == 2
    words = sorted(r["word"] for r in CY.cylinder_report(X)["cylinders"][0]["circles"])
    assert len(words) == 2


def test_two_roots_give_two_cylinders():
    a = C.AdjoinRootData(2, [((1,), 2), ((2,), 3)])
    d = C.adjoin_root_data_to_gofg(a, [(1, 1), (2, 2, 2)], [(1,), (2,)])
    data = CY.build_cylinders(C.build_gos(d).X)
    assert len(data.cylinders) == 2


def test_irreducible_components_examples():
    X = identity_torus()
    assert len(CY.irreducible_components(X)) == 1
    inc = G.identity_inc(R1)
    two = G.GoS({0: R1, 1: R1}, {0: G.UEdge(0, 0, R1, (inc, inc)), 1: G.UEdge(1, 1, R1, (inc, inc)),
                                 2: point_edge(0, 1)})
    assert G.validate(two) == []
    assert len(CY.irreducible_components(two)) == 2
    looped = G.GoS({0: R1}, {0: G.UEdge(0, 0, R1, (inc, inc)), 1: point_edge(0, 0)})
    comps = CY.irreducible_components(looped)
    assert len(comps) == 1 and sorted(comps[0].edges) == [0]


def test_built_cylinders_are_bad_with_ambient_crossings():
    hnn = C.build_gos(C.hnn_conjugacy_instance()).X
    rep = CY.cylinder_report(hnn)["cylinders"][0]
    assert rep["verdict"] == "bad" and rep["ambientCrossings"] == [2, 2]
    for k in (2, 3):
        rep = CY.cylinder_report(root_space(k=k).X)["cylinders"][0]
        assert rep["verdict"] == "bad"
        assert set(rep["ambientCrossings"]) == {k}


def test_transverse_tree_check_examples():
    assert CY.transverse_tree_check(G.minimize(root_space().X).gos)
    assert CY.transverse_tree_check(G.mapping_torus(G.point(), (0,), ()))
    assert not CY.transverse_tree_check(identity_torus())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 5000))
def test_bands_partition_squares(seed):
    X = random_gos(seed)
    bands = CY.trace_annuli(X)
    squares = [sq for b in bands for sq in b.squares]
    assert len(squares) == len(set(squares)) == CY.square_count(X)
    assert sorted(map(frozenset, (b.squares for b in bands)), key=sorted) == band_oracle(X)


@pytest.mark.parametrize("name, built", built_corpus())
def test_root_windings_on_corpus(name, built):
    if not name.startswith("root"):
        return
    k = built.data.edges[0].words[1].count(1)
    Y = G.minimize(built.X).gos
    windings = [w for cyl in CY.build_cylinders(Y).cylinders for row in cyl.windings for w in row]
    assert k in windings


def test_partition_on_general_corpus():
    for name, X in general_corpus():
        assert sum(b.length for b in CY.trace_annuli(X)) == CY.square_count(X), name
