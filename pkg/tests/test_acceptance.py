"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (with output
capture disabled so the line lands in the pytest log) and then asserts.
"""

import json
import random
import time

import pytest

from artifact import construct as C
from artifact import cylinders as CY
from artifact import gos as G
from artifact import splitting as S
from artifact import uot as U
from artifact import words as W
from artifact.cli import presentation
from artifact.corpus import ROOT_SEEDS, built_corpus, closed_corpus, general_corpus
from artifact.generate import random_gos
from artifact.oracles import (band_oracle, exhaustive_search, oracle_unfoldable, uot_boundary_oracle,
                              uot_kappa_oracle, uot_reassembly_oracle)


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return report


def test_1_euler_characteristic_lemma(verdict):
    t0 = time.perf_counter()
    bad = []
    for seed in range(500):
        X = random_gos(seed)
        assert G.validate(X) == []
        a, b = G.chi_pair(X)
        if a > b:
            bad.append(seed)
    dt = time.perf_counter() - t0
    verdict(1, not bad and dt < 10, f"500 instances, {len(bad)} violations, {dt:.1f}s (limit 10s)")


def test_2_fold_collapse_round_trip(verdict):
    rng = random.Random(2)
    passed = 0
    for k in range(200):
        X = random_gos(1000 + k)
        v = rng.choice([u for u in sorted(X.vertices) if X.valence(u) >= 2])
        ends = X.ends_at(v)
        J = rng.sample(ends, rng.randint(1, min(2, len(ends) - 1)))
        Y, new = G.fold(X, v, J)
        passed += G.canonical_form(G.crush(Y, new)) == G.canonical_form(X)
    verdict(2, passed == 200, f"{passed}/200 round trips by canonical form")


def test_3_minimization_optimal_on_small_corpus(verdict):
    t0 = time.perf_counter()
    corpus = closed_corpus()
    equal, unfoldable = 0, 0
    misses = []
    for seed, X in corpus:
        assert len(X.edges) <= 5
        Y = G.minimize(X).gos
        ex = exhaustive_search(X)
        assert ex.closed
        if G.complexity(Y) == ex.best:
            equal += 1
        else:
            misses.append(seed)
        unfoldable += all(oracle_unfoldable(Y, v) for v in Y.vertices)
    dt = time.perf_counter() - t0
    n = len(corpus)
    ok = n >= 30 and equal == n and unfoldable == n and dt < 60
    verdict(3, ok, f"{equal}/{n} equal to the exhaustive minimum, {unfoldable}/{n} unfoldable, "
                   f"{dt:.1f}s (limit 60s){'; misses ' + str(misses) if misses else ''}")


def test_4_separability(verdict):
    checked, good, kinds_seen = 0, 0, set()
    for name, X in general_corpus():
        Y = G.minimize(X).gos
        a, b = G.chi_pair(Y)
        if a != b or b >= 0:
            continue
        checked += 1
        classes = G.separability(Y)
        kinds_seen |= {c.kind for c in classes.values()}
        good += all(Y.valence(v) == 3 and c.triple_point is not None for v, c in classes.items())
    total = kinds_seen <= {"trivial", "splittable", "unsplittable"}
    verdict(4, checked > 0 and good == checked and total,
            f"{good}/{checked} negative-chi instances with valence 3 and one triple point; kinds {sorted(kinds_seen)}")


def test_5_edge_spaces_are_trees(verdict):
    confirmed = 0
    for seed in ROOT_SEEDS:
        a, d = C.primitive_root_instance(seed)
        rep = C.theorem_report(C.build_gos(d), a)
        [f] = rep["roots"]
        gamma = W.Word(W.free_reduce(a.roots[0][0]), a.rank)
        confirmed += (rep["edge_spaces_trees"] and f["free_factor_certificate"] is not None
                      and f["whitehead_primitive"] and W.whitehead_minimize(gamma)[0] == 1)
    verdict(5, confirmed == len(ROOT_SEEDS), f"{confirmed}/{len(ROOT_SEEDS)} instances confirmed")


def test_6_bounded_corank_search(verdict):
    t0 = time.perf_counter()
    n, rels = presentation(C.AdjoinRootData(2, [((1, 2, -1, -2), 2)]))
    none = C.bounded_corank_search(n, rels, 2, 4)
    n2, rels2 = presentation(C.AdjoinRootData(2, [((1, 2), 2)]))
    hit = C.bounded_corank_search(n2, rels2, 2, 2)
    dt = time.perf_counter() - t0
    ok = none is None and hit is not None and C.verify_witness(hit, rels2, 2) and dt < 120
    shown = ", ".join(W.word_str(w) for w in hit) if hit else "none"
    verdict(6, ok, f"commutator root: {'none up to 4' if none is None else 'witness'}; "
                   f"product root witness {shown}; {dt:.1f}s (limit 120s)")


def test_7_corollary_pipeline(verdict):
    d = C.hnn_conjugacy_instance()
    X = G.minimize(C.build_gos(d).X).gos
    driven = S.split_to_bad(X)
    data = CY.build_cylinders(driven.gos)
    has_bad = any(CY.classify_cylinder(data, c) == "bad" for c in data.cylinders)
    first = C.corollary_report(d)
    second = C.corollary_report(C.hnn_conjugacy_instance())
    same = json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)
    z = W.Word(W.parse_letters(first["z"]), 2)
    placed = all(p["factor"] is not None for p in first["placements"])
    ok = S.final_state_ok(driven.gos) and has_bad and first["ok"] and W.is_primitive(z) and placed and same
    verdict(7, ok, f"{first['summary']}; checks {sorted(k for k, v in first['checks'].items() if v)}; "
                   f"deterministic {same}")


def test_8_union_of_trees_identities(verdict):
    counts = {"balance": 0, "decomposed": 0, "treelike": 0, "leaf": 0, "marked": 0, "bound": 0}
    for seed in range(200):
        Z = U.random_uot(seed, marked_prob=0.4 if seed % 2 else 0.0, treelike=seed % 3 == 0)
        b = U.kappa_balance(Z)
        counts["balance"] += b.holds and (b.lhs, b.rhs) == uot_kappa_oracle(Z) \
            and len(U.boundary_components(Z)) == uot_boundary_oracle(Z)
        d = U.deltas(Z)
        if d.zclass == 3:
            counts["marked"] += 1
            counts["bound"] += bool(b.marked_bound)
        elif d.q_minus == 0:
            counts["treelike"] += 1
            dec = U.product_decomposition(Z)
            counts["decomposed"] += uot_reassembly_oracle(Z, U.reassemble(Z, dec))
            ls = U.leaf_space(Z)
            counts["leaf"] += all(ls.checks.values())
    ok = (counts["balance"] == 200 and counts["decomposed"] == counts["leaf"] == counts["treelike"] > 0
          and counts["bound"] == counts["marked"] > 0)
    verdict(8, ok, f"balance {counts['balance']}/200; unmarked treelike {counts['treelike']}: "
                   f"reassembled {counts['decomposed']}, leaf spaces {counts['leaf']}; "
                   f"marked bound {counts['bound']}/{counts['marked']}")


def test_9_cylinder_partition(verdict):
    partitioned, total = 0, 0
    for name, X in general_corpus():
        total += 1
        bands = CY.trace_annuli(X)
        squares = [sq for b in bands for sq in b.squares]
        partitioned += (len(squares) == len(set(squares)) == CY.square_count(X)
                        and sorted(map(frozenset, (b.squares for b in bands)), key=sorted) == band_oracle(X))
    winding, roots = 0, 0
    for name, built in built_corpus():
        if not name.startswith("root"):
            continue
        roots += 1
        k = built.data.edges[0].words[1].count(1)
        Y = G.minimize(built.X).gos
        windings = {w for cyl in CY.build_cylinders(Y).cylinders for row in cyl.windings for w in row}
        winding += k in windings
    verdict(9, partitioned == total and winding == roots,
            f"{partitioned}/{total} instances partitioned; winding k on {winding}/{roots} root instances")
