"""Brute-force oracles that cross-check the main implementations.

Each oracle recomputes its answer by a different and deliberately naive
route.  ``oracle_suite`` runs them over a shipped corpus and reports a
pass/fail matrix; ``inject_fault`` swaps in a broken implementation so the
suite can demonstrate that it notices.
"""

from __future__ import annotations

import contextlib
import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from . import gos as gos_mod
from . import words as words_mod


# -- words ------------------------------------------------------------------------------

def _naive_reduce(letters: Sequence[int]) -> tuple[int, ...]:
    w = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i] == -w[i + 1]:
                del w[i:i + 2]
                changed = True
                break
    return tuple(w)


def _naive_cyclic(letters: Sequence[int]) -> tuple[int, ...]:
    w = list(_naive_reduce(letters))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def root_oracle(letters: Sequence[int]) -> tuple[tuple[int, ...], int]:
    """Smallest period over all divisors of the length and all rotations."""
    w = _naive_cyclic(letters)
    n = len(w)
    for d in range(1, n + 1):
        if n % d:
            continue
        for r in range(n):
            rot = w[r:] + w[:r]
            if rot == rot[:d] * (n // d):
                return rot[:d], n // d
    return w, 1


def _rotations_both(w: tuple[int, ...]):
    inv = tuple(-x for x in reversed(w))
    for base in (w, inv):
        for r in range(len(base)):
            yield base[r:] + base[:r]


def conjugacy_oracle(u: Sequence[int], v: Sequence[int]) -> bool:
    a, b = _naive_cyclic(u), _naive_cyclic(v)
    return len(a) == len(b) and any(a[r:] + a[:r] == b for r in range(max(len(a), 1)))


def _whitehead_images(rank: int):
    """Generator images of every Whitehead automorphism, written out as
    explicit substitutions x -> a^p x a^q."""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    for perm in itertools.permutations(range(1, rank + 1)):
        for signs in itertools.product((1, -1), repeat=rank):
            yield {i: (signs[i - 1] * perm[i - 1],) for i in range(1, rank + 1)}
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        for mask in itertools.product((0, 1), repeat=len(others)):
            A = {x for x, m in zip(others, mask) if m}
            if not A:
                continue
            img = {}
            for i in range(1, rank + 1):
                if i == abs(a):
                    img[i] = (i,)
                    continue
                left = (-a,) if -i in A else ()
                right = (a,) if i in A else ()
                img[i] = _naive_reduce(left + (i,) + right)
            yield img


def _apply_images(img, w):
    out = []
    for x in w:
        piece = img[abs(x)]
        out.extend(piece if x > 0 else tuple(-y for y in reversed(piece)))
    return _naive_cyclic(out)


def whitehead_oracle(letters: Sequence[int], rank: int, cap: int = 20000) -> int:
    """Minimal cyclic length in the automorphism orbit, by exhaustive search
    over Whitehead moves that never lengthen the word."""
    start = _naive_cyclic(letters)
    best = len(start)
    seen = {start}
    queue = deque([start])
    autos = list(_whitehead_images(rank))
    while queue and len(seen) < cap:
        w = queue.popleft()
        for img in autos:
            u = _apply_images(img, w)
            if len(u) <= len(w) and u not in seen:
                seen.add(u)
                best = min(best, len(u))
                queue.append(u)
    return best


# -- graphs -------------------------------------------------------------------------------

def membership_oracle(generators: Sequence[Sequence[int]], word: Sequence[int], max_len: int = 8) -> bool:
    """Is ``word`` a product of at most ``max_len`` generators or inverses?"""
    target = _naive_reduce(word)
    gens = [tuple(g) for g in generators] + [tuple(-x for x in reversed(g)) for g in generators]
    frontier = {()}
    seen = {()}
    for _ in range(max_len):
        if target in seen:
            return True
        nxt = set()
        for w in frontier:
            for g in gens:
                u = _naive_reduce(w + g)
                if u not in seen:
                    seen.add(u)
                    nxt.add(u)
        frontier = nxt
    return target in seen


# -- graphs of spaces -------------------------------------------------------------------------

def to_networkx(X: gos_mod.GoS) -> nx.Graph:
    colors, adj = gos_mod.flatten(X)
    g = nx.Graph()
    for i, c in enumerate(colors):
        g.add_node(i, color=c)
    for a, nb in enumerate(adj):
        for b in nb:
            g.add_edge(a, b)
    return g


def isomorphic_oracle(X: gos_mod.GoS, Y: gos_mod.GoS) -> bool:
    return nx.is_isomorphic(to_networkx(X), to_networkx(Y), node_match=lambda a, b: a["color"] == b["color"])


def _natural_map_injective(X: gos_mod.GoS, ends) -> bool:
    hit_v: dict[int, int] = {}
    hit_e: dict[int, int] = {}
    for k, end in enumerate(ends):
        vm, em = X.end_map(end)
        for x in vm:
            if x in hit_v:
                return False
            hit_v[x] = k
        for o in em:
            if (o >> 1) in hit_e:
                return False
            hit_e[o >> 1] = k
    return True


def oracle_unfoldable(X: gos_mod.GoS, v: int) -> bool:
    ends = X.ends_at(v)
    for r in range(1, len(ends)):
        for J in itertools.combinations(ends, r):
            N = [e for e in ends if e not in J]
            if not _natural_map_injective(X, J) and not _natural_map_injective(X, N):
                return False
    return True


def oracle_complexity(X: gos_mod.GoS) -> tuple[int, ...]:
    """The complexity tuple recomputed through networkx and the naive
    unfoldability test."""
    g = nx.MultiGraph()
    g.add_nodes_from(X.vertices)
    val = {v: 0 for v in X.vertices}
    for e, ue in X.edges.items():
        g.add_edge(ue.src, ue.dst, key=e)
        val[ue.src] += 1
        val[ue.dst] += 1
    betti = g.number_of_edges() - g.number_of_nodes() + nx.number_connected_components(g)
    k = max(val.values(), default=0)
    counts = tuple(sum(1 for x in val.values() if x == l) for l in range(k, 2, -1))
    red = deg = 0
    for v in X.vertices:
        if val[v] != 2:
            continue
        ends = X.ends_at(v)
        isos = [
            len(set(X.end_map(end)[0])) == X.vertices[v].n_vertices == len(X.end_map(end)[0])
            and len({o >> 1 for o in X.end_map(end)[1]}) == X.vertices[v].n_edges == len(X.end_map(end)[1])
            for end in ends
        ]
        if ends[0][0] != ends[1][0] and all(isos) and not any(X.edges[e].is_loop() for e, _ in ends):
            red += 1
        elif oracle_unfoldable(X, v) and any(not _natural_map_injective(X, [end]) for end in ends):
            deg += 1
    return (-betti, k) + counts + (red, -deg)


def _fold_successors(Y: gos_mod.GoS):
    for v in sorted(Y.vertices):
        ends = Y.ends_at(v)
        for r in range(1, len(ends)):
            for J in itertools.combinations(ends, r):
                if r * 2 > len(ends) or (r * 2 == len(ends) and ends[0] not in J):
                    continue
                Z, _ = gos_mod.fold(Y, v, J)
                Z, _ = gos_mod.reduce(Z)
                yield Z


@dataclass(frozen=True)
class Exhaustive:
    best: tuple[int, ...]
    states: int
    closed: bool          # one more level of folding finds nothing new


def exhaustive_search(X: gos_mod.GoS, depth: int = 4, state_cap: int = 5000) -> Exhaustive:
    """Least complexity over every fold/reduce sequence of bounded depth.

    Every vertex and every nonempty proper subset of its ends is tried (one of
    each complementary pair), states are deduplicated up to isomorphism.
    """
    start, _ = gos_mod.reduce(X.without_origin())
    seen = {gos_mod.canonical_form(start)}
    best = oracle_complexity(start)
    frontier = [start]
    for level in range(depth + 1):
        nxt = []
        for Y in frontier:
            for Z in _fold_successors(Y):
                key = gos_mod.canonical_form(Z)
                if key in seen:
                    continue
                if level == depth:
                    return Exhaustive(best, len(seen), False)
                seen.add(key)
                best = min(best, oracle_complexity(Z))
                nxt.append(Z)
                if len(seen) > state_cap:
                    raise RuntimeError("oracle state cap exceeded")
        frontier = nxt
    return Exhaustive(best, len(seen), True)


def exhaustive_min_complexity(X: gos_mod.GoS, depth: int = 4, state_cap: int = 5000) -> tuple[tuple[int, ...], int]:
    r = exhaustive_search(X, depth, state_cap)
    return r.best, r.states


# -- cylinders ---------------------------------------------------------------------------------

def band_oracle(X: gos_mod.GoS) -> list[frozenset]:
    """Bands as connected components of the corner-gluing graph: two squares
    are adjacent when their sides cover the same vertex-graph edge."""
    g = nx.MultiGraph()
    owners: dict = {}
    for e, ue in X.edges.items():
        for i in range(ue.graph.n_edges):
            g.add_node((e, i))
            for side in (0, 1):
                key = (ue.vertex(side), ue.maps[side][1][i] >> 1)
                owners.setdefault(key, []).append((e, i))
    for key, sq in owners.items():
        if len(sq) != 2:
            raise ValueError(f"vertex-graph edge {key} is covered {len(sq)} times")
        g.add_edge(*sq)
    return sorted((frozenset(c) for c in nx.connected_components(g)), key=lambda c: sorted(c))


# -- unions of trees -----------------------------------------------------------------------------

def uot_boundary_oracle(Z) -> int:
    """Number of boundary components, tracing the boundary as explicit arcs.

    Each vertical side is an arc between two boundary points; leaves of the
    trees are points.  Counted with networkx from the raw data.
    """
    g = nx.MultiGraph()
    for i, t in enumerate(Z.trees):
        for v in t.boundary:
            g.add_node(("leaf", i, v))
    for j, r in enumerate(Z.rectangles):
        for k, end in enumerate((0, -1)):
            arc = ("arc", j, k)
            g.add_edge(arc, ("leaf", r.minus.tree, r.minus.path[end]))
            g.add_edge(arc, ("leaf", r.plus.tree, r.plus.path[end]))
    return nx.number_connected_components(g)


def uot_kappa_oracle(Z) -> tuple:
    """Both sides of the balance identity from the oracle boundary count
    and a freshly chosen (depth first) maximal tree."""
    from fractions import Fraction
    from .uot import UnionOfTrees
    G = nx.MultiGraph()
    G.add_nodes_from(range(len(Z.trees)))
    for j, r in enumerate(Z.rectangles):
        G.add_edge(r.minus.tree, r.plus.tree, key=j)
    T = sorted(_dfs_tree_keys(G))
    ZT = UnionOfTrees(Z.trees, [Z.rectangles[j] for j in T])
    whole = uot_boundary_oracle(Z)
    part = uot_boundary_oracle(ZT)
    leaves = sum(len(t.boundary) for t in Z.trees)
    betti = 2 * len(T) - leaves + part
    half = Fraction(1, 2)
    lhs = half * whole - 1 - sum((half * len(t.boundary) - 1 for t in Z.trees), Fraction(0))
    rhs = half * betti - half * (part - whole)
    return lhs, rhs


def _dfs_tree_keys(G: nx.MultiGraph) -> list[int]:
    seen = {0}
    stack = [0]
    keys = []
    while stack:
        x = stack.pop()
        for _, y, k in sorted(G.edges(x, keys=True), key=lambda e: e[2]):
            if y not in seen:
                seen.add(y)
                keys.append(k)
                stack.append(y)
    return keys


def uot_reassembly_oracle(Z, Z2) -> bool:
    """Isomorphism of two unions of trees with the same trees, via networkx
    on a graph with one node per rectangle side and per tree vertex."""
    def encode(U):
        g = nx.Graph()
        for i, t in enumerate(U.trees):
            for v in range(t.n):
                g.add_node(("v", i, v), c=("v", i, v))
        for j, r in enumerate(U.rectangles):
            g.add_node(("r", j), c="r")
            for name, s in (("m", r.minus), ("p", r.plus)):
                node = ("s", j, name)
                g.add_node(node, c=("s", s.tree, min(s.path, tuple(reversed(s.path)))))
                g.add_edge(node, ("r", j))
            # which corners of the two sides are joined by a vertical side
            corners = sorted(tuple(sorted(((r.minus.tree, r.minus.path[end]), (r.plus.tree, r.plus.path[end]))))
                             for end in (0, -1))
            g.add_node(("k", j), c=("k", tuple(corners)))
            g.add_edge(("k", j), ("r", j))
        return g
    return nx.is_isomorphic(encode(Z), encode(Z2), node_match=lambda a, b: a["c"] == b["c"])


# -- the suite -----------------------------------------------------------------------------------

@dataclass
class CheckResult:
    passed: int = 0
    total: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, where: str) -> None:
        self.total += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(where)

    @property
    def ok(self) -> bool:
        return self.passed == self.total


SCOPES = ("words", "gos", "cylinders", "uot")


def _suite_words(out: dict, quick: bool) -> None:
    rng = random.Random(7)
    rootc, conj, wh = CheckResult(), CheckResult(), CheckResult()
    for n in range(60 if not quick else 20):
        base = words_mod.free_reduce([rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(1, 4))])
        if not base or not words_mod.cyclic_core(base)[1]:
            continue
        w = base * rng.randint(1, 3)
        c, k = words_mod.root(words_mod.cyclic_canonical(w, 2))
        r, k2 = root_oracle(w)
        rootc.record(k == k2 and words_mod.unoriented_canonical(r) == words_mod.unoriented_canonical(c.letters), f"root {words_mod.word_str(w)}")
        u = words_mod.free_reduce(base + (1,))
        x = (rng.choice((1, 2, -1, -2)),)
        v = words_mod.free_reduce(x + u + (-x[0],))
        conj.record(words_mod.is_conjugate(words_mod.reduce(u, 2), words_mod.reduce(v, 2)) == conjugacy_oracle(u, v) if u else True,
                    f"conjugate {words_mod.word_str(u)}")
    for n in range(25 if not quick else 8):
        w = words_mod.free_reduce([rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(1, 5))])
        if not words_mod.cyclic_core(w)[1]:
            continue
        m = words_mod.whitehead_minimize(words_mod.cyclic_canonical(w, 2))[0]
        wh.record(m == whitehead_oracle(w, 2), f"whitehead {words_mod.word_str(w)}")
    out["words"] = {"root": rootc, "conjugacy": conj, "whitehead": wh}


def _suite_gos(out: dict, quick: bool) -> None:
    from .corpus import CLOSED_SEEDS, small_instance
    from .generate import random_gos
    rt, cx, mn, un = CheckResult(), CheckResult(), CheckResult(), CheckResult()
    rng = random.Random(11)
    for s in range(40 if not quick else 10):
        X = random_gos(s)
        v = rng.choice([u for u in sorted(X.vertices) if X.valence(u) >= 2])
        ends = X.ends_at(v)
        J = rng.sample(ends, rng.randint(1, min(2, len(ends) - 1)))
        Y, new = gos_mod.fold(X, v, J)
        Z = gos_mod.crush(Y, new)
        rt.record(gos_mod.isomorphic(Z, X) and isomorphic_oracle(Z, X), f"fold round trip seed {s} vertex {v} J {J}")
        R, _ = gos_mod.reduce(X)
        cx.record(gos_mod.complexity(R) == oracle_complexity(R), f"complexity seed {s}")
    for s in CLOSED_SEEDS[: (37 if not quick else 6)]:
        X = small_instance(s)
        if quick and len(X.edges) > 3:
            continue
        r = exhaustive_search(X, 4)
        m = gos_mod.minimize(X).gos
        mn.record(r.closed and oracle_complexity(m) == r.best, f"minimize seed {s}")
        un.record(all(oracle_unfoldable(m, v) == gos_mod.classify_vertex(m, v).unfoldable for v in m.vertices), f"unfoldable seed {s}")
    out["gos"] = {"fold_round_trip": rt, "complexity": cx, "minimality": mn, "unfoldable": un}


def _suite_cylinders(out: dict, quick: bool) -> None:
    from . import cylinders
    from .corpus import general_corpus
    part = CheckResult()
    for name, X in general_corpus()[: (None if not quick else 12)]:
        mine = sorted((frozenset(b.squares) for b in cylinders.trace_annuli(X)), key=lambda c: sorted(c))
        part.record(mine == band_oracle(X), f"bands {name}")
    out["cylinders"] = {"band_partition": part}


def _suite_uot(out: dict, quick: bool) -> None:
    from . import uot
    bal, ind, rea = CheckResult(), CheckResult(), CheckResult()
    for s in range(60 if not quick else 15):
        for kw in ({}, {"marked_prob": 0.5}, {"treelike": True}):
            Z = uot.random_uot(s, **kw)
            b = uot.kappa_balance(Z)
            lhs, rhs = uot_kappa_oracle(Z)
            bal.record(b.holds and lhs == b.lhs and rhs == b.rhs, f"balance seed {s} {kw}")
            if not Z.marked_count():
                ind.record(uot.tree_independence(Z, 4, s).independent, f"tree independence seed {s} {kw}")
            if kw.get("treelike"):
                dec = uot.product_decomposition(Z)
                rea.record(uot_reassembly_oracle(Z, uot.reassemble(Z, dec)), f"reassembly seed {s}")
    out["uot"] = {"kappa_balance": bal, "tree_independence": ind, "reassembly": rea}


_RUNNERS = {"words": _suite_words, "gos": _suite_gos, "cylinders": _suite_cylinders, "uot": _suite_uot}


def oracle_suite(scopes: Sequence[str] | None = None, quick: bool = False) -> dict[str, dict[str, CheckResult]]:
    """Run the oracle cross-checks for the chosen module scopes."""
    scopes = list(scopes or SCOPES)
    unknown = [s for s in scopes if s not in _RUNNERS]
    if unknown:
        raise ValueError(f"unknown oracle scope(s): {', '.join(unknown)}")
    out: dict = {}
    for s in scopes:
        _RUNNERS[s](out, quick)
    return out


def suite_ok(results: dict) -> bool:
    return all(c.ok for checks in results.values() for c in checks.values())


def suite_matrix(results: dict) -> list[str]:
    lines = []
    for scope, checks in results.items():
        for name, c in checks.items():
            tag = "PASS" if c.ok else "FAIL"
            line = f"{tag} {scope}.{name}: {c.passed}/{c.total}"
            if c.failures:
                line += f" (first failure: {c.failures[0]})"
            lines.append(line)
    return lines


# -- fault injection ------------------------------------------------------------------------------

def _forgetful_fold(original):
    def fold(X, v, J):
        Y, _ = original(X, v, J)
        return Y, []
    return fold


FAULTS = {"fold": (gos_mod, "fold", _forgetful_fold)}


@contextlib.contextmanager
def inject_fault(name: str = "fold"):
    """Temporarily replace an implementation by a broken one.

    ``fold`` forgets which edges it introduced, so the fold/collapse round
    trip can no longer undo it.
    """
    module, attr, make = FAULTS[name]
    original = getattr(module, attr)
    setattr(module, attr, make(original))
    try:
        yield
    finally:
        setattr(module, attr, original)
