from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from artifact import uot as U
from artifact.graphs import Graph
from artifact.oracles import uot_boundary_oracle, uot_kappa_oracle, uot_reassembly_oracle

HALF = Fraction(1, 2)


def test_kappa_examples():
    assert U.kappa_tree(U.interval()) == 0
    assert U.kappa_tree(U.tripod()) == HALF
    assert U.kappa_graph(Graph(1, ((0, 0), (0, 0))), 0) == 1


def test_validation_rejects_bad_paths():
    t = U.tripod()
    a, b, _ = sorted(t.boundary)
    back = U.Rectangle(U.Side(0, (a, 0, a)), U.Side(1, (0, 1)))
    assert U.UnionOfTrees([t, U.interval()], [back]).problems()
    inner = U.Rectangle(U.Side(0, (0, a)), U.Side(1, (0, 1)))
    assert U.UnionOfTrees([t, U.interval()], [inner]).problems()
    with pytest.raises(U.UnionOfTreesError):
        U.UnionOfTrees([U.Tree((-1, 0), frozenset({0}))]).check()
    assert U.UnionOfTrees([t, U.interval()], [U.Rectangle(U.Side(0, t.path(a, b)), U.Side(1, (0, 1)))]).problems() == []


def test_single_interval_has_zero_deltas():
    d = U.deltas(U.UnionOfTrees([U.interval()]))
    assert (d.q_minus, d.q_plus, d.p_minus, d.p_plus, d.zclass) == (0, 0, 0, 0, 1)
    assert U.kappa_balance(U.UnionOfTrees([U.interval()])).lhs == 0


def test_disconnected_deltas_raise():
    with pytest.raises(U.UnionOfTreesError, match="disconnected"):
        U.deltas(U.UnionOfTrees([U.interval(), U.interval()]))


def test_marked_tripod_example():
    Z = U.marked_tripod_example()
    d = U.deltas(Z)
    assert d.zclass == 3
    assert d.boundary_tree == 1 and d.betti_tree == 1
    assert d.p_minus == 2 and d.q_plus == HALF and d.q_minus == 0
    b = U.kappa_balance(Z)
    assert b.lhs == b.rhs == HALF and b.marked_bound


def test_twisted_pair_has_half_defect():
    Z = U.twisted_pair()
    d = U.deltas(Z)
    assert d.q_minus == HALF and d.zclass == 2 and d.p_plus == 1
    assert not U.is_treelike(Z)
    with pytest.raises(U.UnionOfTreesError):
        U.product_decomposition(Z)
    with pytest.raises(U.UnionOfTreesError):
        U.leaf_space(Z)


def test_parallel_pair_is_one_band_over_an_interval():
    Z = U.parallel_pair()
    assert U.is_treelike(Z)
    dec = U.product_decomposition(Z)
    assert len(dec.bands) == 1 and len(dec.bands[0].edges) == 2
    assert U.same_complex(U.reassemble(Z, dec), Z)
    ls = U.leaf_space(Z)
    assert (ls.graph.n_vertices, len(ls.graph.edges)) == (2, 1)
    assert all(ls.checks.values())


def test_tripod_star_leaf_space_is_a_tripod():
    Z = U.tripod_star()
    dec = U.product_decomposition(Z)
    assert len(dec.bands) == 3
    ls = U.leaf_space(Z)
    assert all(ls.checks.values())
    valences = sorted(ls.graph.valence(x) for x in range(ls.graph.n_vertices))
    assert valences == [1, 1, 1, 3]


def test_kappa_balance_without_rectangles():
    b = U.kappa_balance(U.UnionOfTrees([U.tripod()]))
    assert b.lhs == b.rhs == 0 and b.holds


def test_tree_independence_surfaces_marked_dependence():
    # scan marked instances; any dependence is reported with a witness pair
    # and the balance still holds because the difference is constant
    for seed in range(200):
        Z = U.random_uot(seed, marked_prob=0.5)
        ti = U.tree_independence(Z, samples=6, seed=seed)
        assert ti.difference_constant
        if not ti.independent:
            assert ti.counterexample is not None and Z.marked_count() > 0
        else:
            assert ti.counterexample is None


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.0, 0.4]))
def test_balance_identity_and_bounds(seed, marked_prob):
    Z = U.random_uot(seed, marked_prob=marked_prob)
    d = U.deltas(Z)
    assert d.q_minus >= 0
    if d.zclass == 2:
        assert d.q_minus >= HALF
    b = U.kappa_balance(Z)
    assert b.holds
    assert (b.lhs, b.rhs) == uot_kappa_oracle(Z)
    if d.zclass == 3:
        assert b.marked_bound
    assert len(U.boundary_components(Z)) == uot_boundary_oracle(Z)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_unmarked_deltas_do_not_depend_on_the_tree(seed):
    Z = U.random_uot(seed)
    assert U.tree_independence(Z, samples=5, seed=seed).independent


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_treelike_decomposes_and_reassembles(seed):
    Z = U.random_uot(seed, treelike=True)
    assert U.is_treelike(Z)
    dec = U.product_decomposition(Z)
    Z2 = U.reassemble(Z, dec)
    assert U.same_complex(Z, Z2) and uot_reassembly_oracle(Z, Z2)
    ls = U.leaf_space(Z)
    assert all(ls.checks.values()), ls.checks


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_decomposition_succeeds_exactly_when_treelike(seed):
    Z = U.random_uot(seed)
    try:
        U.product_decomposition(Z)
        ok = True
    except U.UnionOfTreesError:
        ok = False
    assert ok == (U.deltas(Z).q_minus == 0)


def glue(Za, Zb, rng):
    """Disjoint union of two complexes plus one rectangle between them."""
    ta, tb = rng.randrange(len(Za.trees)), rng.randrange(len(Zb.trees))
    pa = U._random_side(rng, Za.trees[ta])
    pb = U._random_side(rng, Zb.trees[tb])
    if pa is None or pb is None:
        return None, None
    off = len(Za.trees)
    shifted = [U.Rectangle(U.Side(r.minus.tree + off, r.minus.path), U.Side(r.plus.tree + off, r.plus.path))
               for r in Zb.rectangles]
    new = U.Rectangle(U.Side(ta, pa), U.Side(tb + off, pb))
    return U.UnionOfTrees(Za.trees + Zb.trees, Za.rectangles + shifted + [new]), new


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_kappa_under_gluing(sa, sb, pick):
    """Gluing along corners in distinct boundary components adds kappas;
    when both attaching paths already have their ends in one boundary
    component, the second collar side closes a loop and adds a half."""
    import random
    Za, Zb = U.random_uot(sa), U.random_uot(sb)
    Z, new = glue(Za, Zb, random.Random(pick))
    assume(Z is not None)
    same = []
    for W, side in ((Za, new.minus), (Zb, new.plus)):
        comp = {k: n for n, c in enumerate(U.boundary_components(W)) for k in c}
        tree = side.tree if W is Za else side.tree - len(Za.trees)
        same.append(comp[(tree, side.path[0])] == comp[(tree, side.path[-1])])
    assert U.kappa_uot(Z) == U.kappa_uot(Za) + U.kappa_uot(Zb) + HALF * all(same)
    assert len(U.boundary_components(Z)) == uot_boundary_oracle(Z)


def test_json_round_trip():
    for Z in (U.marked_tripod_example(), U.tripod_star(), U.random_uot(5, marked_prob=0.4)):
        assert U.same_complex(U.UnionOfTrees.from_json(Z.to_json()), Z)


def test_leaf_space_subdivides_unequal_sides():
    Z = U.UnionOfTrees([U.interval(1), U.interval(2), U.interval(3)],
                       [U.Rectangle(U.Side(0, (0, 1)), U.Side(1, (0, 1, 2))),
                        U.Rectangle(U.Side(1, (0, 1, 2)), U.Side(2, (0, 1, 2, 3)))])
    ls = U.leaf_space(Z)
    assert all(ls.checks.values())
    # thirds and halves of the unit interval: 0, 1/3, 1/2, 2/3, 1
    assert (ls.graph.n_vertices, len(ls.graph.edges)) == (5, 4)
    assert ls.subdivisions > 0


def test_leaf_space_rejects_marked_complexes():
    arm = U.Tree((-1, 0), frozenset({1}), frozenset({0}))
    Z = U.UnionOfTrees([U.interval(2), arm], [U.Rectangle(U.Side(0, (0, 1, 2)), U.Side(1, (1, 0, 1)))])
    with pytest.raises(U.UnionOfTreesError, match="marked"):
        U.leaf_space(Z)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_marked_decomposition_reassembles_when_it_exists(seed):
    Z = U.random_uot(seed, marked_prob=0.5)
    if not U.is_treelike(Z):
        return
    try:
        dec = U.product_decomposition(Z)
    except U.UnionOfTreesError:
        return
    assert uot_reassembly_oracle(Z, U.reassemble(Z, dec))
