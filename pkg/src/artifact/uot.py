"""Unions of trees: trees with boundary leaves glued by rectangles.

A rectangle ``I x I`` has its two horizontal sides attached along edge
paths in trees, from boundary leaf to boundary leaf.  Its two vertical
sides are boundary, so the boundary of the whole complex is the graph whose
vertices are the boundary leaves and whose edges are the vertical sides;
boundary components are the components of that graph.

Marked vertices stand in for attached spaces with fundamental group (the
"Y" pieces).  An attaching path may turn back only at a marked vertex, which
models a path running once around such a space.

Quantities are half-integers and are returned as ``fractions.Fraction``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import Graph, UnionFind, components, is_tree

HALF = Fraction(1, 2)
FORMAT_VERSION = 1


class UnionOfTreesError(ValueError):
    pass


@dataclass(frozen=True)
class Tree:
    parent: tuple[int, ...]            # parent[0] == -1; a rooted tree
    boundary: frozenset[int]           # boundary leaves
    marked: frozenset[int] = frozenset()

    @property
    def n(self) -> int:
        return len(self.parent)

    def graph(self) -> Graph:
        return Graph(self.n, tuple((self.parent[v], v) for v in range(1, self.n)))

    def neighbours(self, v: int) -> set[int]:
        out = {u for u in range(self.n) if self.parent[u] == v}
        if self.parent[v] >= 0:
            out.add(self.parent[v])
        return out

    def path(self, a: int, b: int) -> tuple[int, ...]:
        """The reduced path from ``a`` to ``b``."""
        up_a = [a]
        while self.parent[up_a[-1]] >= 0:
            up_a.append(self.parent[up_a[-1]])
        up_b = [b]
        while self.parent[up_b[-1]] >= 0:
            up_b.append(self.parent[up_b[-1]])
        common = set(up_a) & set(up_b)
        i = next(k for k, x in enumerate(up_a) if x in common)
        j = up_b.index(up_a[i])
        return tuple(up_a[:i + 1]) + tuple(reversed(up_b[:j]))

    def leaves(self) -> set[int]:
        return {v for v in range(self.n) if len(self.neighbours(v)) == 1}

    def free_leaves(self) -> set[int]:
        """Leaves not carrying a marked space; these are the boundary."""
        return self.leaves() - self.marked


@dataclass(frozen=True)
class Side:
    tree: int
    path: tuple[int, ...]

    def reversed(self) -> "Side":
        return Side(self.tree, tuple(reversed(self.path)))


@dataclass(frozen=True)
class Rectangle:
    minus: Side
    plus: Side


@dataclass
class UnionOfTrees:
    trees: list[Tree]
    rectangles: list[Rectangle] = field(default_factory=list)

    # -- validity -----------------------------------------------------------------------
    def problems(self) -> list[str]:
        out = []
        for i, t in enumerate(self.trees):
            if t.n < 2:
                out.append(f"tree {i} has fewer than two vertices")
                continue
            if t.parent[0] != -1 or any(not (0 <= t.parent[v] < t.n) for v in range(1, t.n)):
                out.append(f"tree {i}: bad parent array")
                continue
            if not is_tree(t.graph()):
                out.append(f"tree {i} is not a tree")
                continue
            if t.marked & t.boundary:
                out.append(f"tree {i}: a boundary leaf is marked")
            elif set(t.boundary) != t.leaves() - t.marked:
                out.append(f"tree {i}: boundary must be exactly the unmarked leaves")
        if out:
            return out
        for j, r in enumerate(self.rectangles):
            for name, s in (("minus", r.minus), ("plus", r.plus)):
                if not (0 <= s.tree < len(self.trees)):
                    out.append(f"rectangle {j} {name}: no tree {s.tree}")
                    continue
                t = self.trees[s.tree]
                p = s.path
                if len(p) < 2:
                    out.append(f"rectangle {j} {name}: path has no edges")
                    continue
                if p[0] not in t.boundary or p[-1] not in t.boundary:
                    out.append(f"rectangle {j} {name}: endpoints must be boundary leaves")
                for k in range(len(p) - 1):
                    if p[k + 1] not in t.neighbours(p[k]):
                        out.append(f"rectangle {j} {name}: not an edge path")
                        break
                for k in range(1, len(p) - 1):
                    if p[k - 1] == p[k + 1] and p[k] not in t.marked:
                        out.append(f"rectangle {j} {name}: path turns back at an unmarked vertex")
                        break
        return out

    def check(self) -> None:
        bad = self.problems()
        if bad:
            raise UnionOfTreesError("; ".join(bad))

    # -- structure ---------------------------------------------------------------------
    def incidence_graph(self) -> Graph:
        """Trees as vertices, one edge per rectangle."""
        return Graph(len(self.trees), tuple((r.minus.tree, r.plus.tree) for r in self.rectangles))

    def is_connected(self) -> bool:
        return len(components(self.incidence_graph())) == 1

    def marked_count(self) -> int:
        return sum(len(t.marked) for t in self.trees)

    # -- serialisation -------------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "formatVersion": FORMAT_VERSION,
            "trees": [
                {"parent": list(t.parent), "boundary": [v in t.boundary for v in range(t.n)],
                 "marked": sorted(t.marked)}
                for t in self.trees
            ],
            "rectangles": [
                {"minus": {"tree": r.minus.tree, "path": "-".join(map(str, r.minus.path))},
                 "plus": {"tree": r.plus.tree, "path": "-".join(map(str, r.plus.path))}}
                for r in self.rectangles
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "UnionOfTrees":
        trees = []
        for t in data["trees"]:
            parent = tuple(int(x) for x in t["parent"])
            flags = t.get("boundary")
            boundary = frozenset(v for v, f in enumerate(flags) if f) if flags is not None else None
            tr = Tree(parent, frozenset(), frozenset(int(x) for x in t.get("marked", [])))
            trees.append(Tree(parent, boundary if boundary is not None else frozenset(tr.free_leaves()), tr.marked))

        def side(d) -> Side:
            p = d["path"]
            if isinstance(p, str):
                p = [int(x) for x in p.split("-") if x != ""]
            return Side(int(d["tree"]), tuple(int(x) for x in p))

        rects = [Rectangle(side(r["minus"]), side(r["plus"])) for r in data.get("rectangles", [])]
        Z = cls(trees, rects)
        Z.check()
        return Z


# -- kappa ---------------------------------------------------------------------------------

def kappa(boundary_count: int) -> Fraction:
    """Curvature stand-in of a tree with the given number of boundary points."""
    return HALF * boundary_count - 1


def kappa_tree(t: Tree) -> Fraction:
    return kappa(len(t.boundary))


def kappa_graph(g: Graph, boundary_count: int) -> Fraction:
    return -Fraction(g.n_vertices - g.n_edges) + HALF * boundary_count


# -- boundary --------------------------------------------------------------------------------

def boundary_graph(Z: UnionOfTrees, rects: list[int] | None = None) -> tuple[Graph, list[tuple[int, int]]]:
    """Boundary leaves joined by the vertical sides of the chosen rectangles."""
    keys = [(i, v) for i, t in enumerate(Z.trees) for v in sorted(t.boundary)]
    index = {k: n for n, k in enumerate(keys)}
    rects = range(len(Z.rectangles)) if rects is None else rects
    edges = []
    for j in rects:
        r = Z.rectangles[j]
        for end in (0, -1):
            edges.append((index[(r.minus.tree, r.minus.path[end])], index[(r.plus.tree, r.plus.path[end])]))
    return Graph(len(keys), tuple(edges)), keys


def boundary_components(Z: UnionOfTrees, rects: list[int] | None = None) -> list[list[tuple[int, int]]]:
    g, keys = boundary_graph(Z, rects)
    return [[keys[x] for x in vs] for vs, _ in components(g)]


def _betti(g: Graph) -> int:
    return g.n_edges - g.n_vertices + len(components(g))


def kappa_uot(Z: UnionOfTrees) -> Fraction:
    """Curvature stand-in of the complex with boundary collars crushed:
    half the number of boundary components, minus one."""
    return kappa(len(boundary_components(Z)))


# -- maximal trees and deltas ----------------------------------------------------------------

def maximal_tree(Z: UnionOfTrees, rng: random.Random | None = None) -> list[int]:
    """Rectangles forming a spanning tree of the incidence graph: breadth
    first from tree 0 (lowest rectangle id first), or in random order."""
    G = Z.incidence_graph()
    if rng is None:
        seen = {0}
        chosen = []
        queue = [0]
        while queue:
            x = queue.pop(0)
            for j, (a, b) in enumerate(G.edges):
                for u, w in ((a, b), (b, a)):
                    if u == x and w not in seen:
                        seen.add(w)
                        chosen.append(j)
                        queue.append(w)
        return sorted(chosen)
    order = list(range(G.n_edges))
    rng.shuffle(order)
    uf = UnionFind(range(G.n_vertices))
    chosen = []
    for j in order:
        a, b = G.edges[j]
        if uf.find(a) != uf.find(b):
            uf.union(a, b)
            chosen.append(j)
    return sorted(chosen)


@dataclass(frozen=True)
class Deltas:
    q_minus: Fraction
    q_plus: Fraction
    p_minus: int
    p_plus: int
    zclass: int                          # 1, 2 or 3
    tree: tuple[int, ...]                # rectangles of the maximal tree used
    boundary_tree: int                   # boundary components of the tree part
    boundary_all: int                    # boundary components of the whole complex
    betti_tree: int                      # betti number of the boundary of the tree part

    def to_json(self) -> dict:
        return {
            "qMinus": str(self.q_minus), "qPlus": str(self.q_plus),
            "pMinus": self.p_minus, "pPlus": self.p_plus, "class": self.zclass,
            "boundaryTree": self.boundary_tree, "boundaryAll": self.boundary_all, "bettiTree": self.betti_tree,
        }


def deltas(Z: UnionOfTrees, tree: list[int] | None = None) -> Deltas:
    Z.check()
    if not Z.is_connected():
        raise UnionOfTreesError("union of trees is disconnected")
    T = maximal_tree(Z) if tree is None else sorted(tree)
    gT, _ = boundary_graph(Z, T)
    gA, _ = boundary_graph(Z)
    nT = len(components(gT))
    nA = len(components(gA))
    betti_T = _betti(gT)
    q_minus = HALF * (nT - nA)
    marked = Z.marked_count()
    if marked:
        zclass = 3
    else:
        zclass = 1 if q_minus == 0 else 2
    q_plus = HALF * betti_T if zclass == 3 else Fraction(0)
    p_minus = marked - 1 if zclass == 3 else 0
    p_plus = 1 if zclass == 2 else 0
    return Deltas(q_minus, q_plus, p_minus, p_plus, zclass, tuple(T), nT, nA, betti_T)


@dataclass(frozen=True)
class Balance:
    lhs: Fraction            # kappa of the whole minus the sum over trees
    rhs: Fraction            # delta_q^+ - delta_q^-
    holds: bool
    marked_bound: bool | None    # for marked complexes: delta_p^- >= 2 delta_q^+


def kappa_balance(Z: UnionOfTrees, tree: list[int] | None = None) -> Balance:
    """Both sides of the balance identity, computed separately.

    The right side uses the boundary of the tree part, whose loops count
    towards delta_q^+ (for unmarked complexes such loops cannot occur, which
    is asserted here rather than assumed).
    """
    d = deltas(Z, tree)
    lhs = kappa_uot(Z) - sum((kappa_tree(t) for t in Z.trees), Fraction(0))
    if d.zclass != 3 and d.betti_tree != 0:
        raise UnionOfTreesError("boundary of the tree part has a loop without a marked vertex")
    rhs = HALF * d.betti_tree - d.q_minus
    bound = d.p_minus >= 2 * d.q_plus if d.zclass == 3 else None
    return Balance(lhs, rhs, lhs == rhs, bound)


def tree_samples(Z: UnionOfTrees, samples: int = 8, seed: int = 0) -> list[Deltas]:
    """Deltas for several random maximal trees."""
    rng = random.Random(seed)
    return [deltas(Z, maximal_tree(Z, rng)) for _ in range(samples)]


@dataclass(frozen=True)
class TreeIndependence:
    values: tuple[tuple[Fraction, Fraction], ...]     # distinct (q_minus, q_plus) seen
    independent: bool
    difference_constant: bool                          # q_plus - q_minus over all samples
    counterexample: tuple[tuple[int, ...], tuple[int, ...]] | None


def tree_independence(Z: UnionOfTrees, samples: int = 8, seed: int = 0) -> TreeIndependence:
    """Compare the deltas over the default tree and random maximal trees.

    Unmarked complexes cannot show a dependence (the boundary of the tree
    part is a forest).  Marked ones can; the first pair of trees that
    disagree is returned so the dependence is visible.
    """
    ds = [deltas(Z)] + tree_samples(Z, samples, seed)
    values = tuple(sorted({(d.q_minus, d.q_plus) for d in ds}))
    diffs = {d.q_plus - d.q_minus for d in ds}
    witness = None
    for d in ds[1:]:
        if (d.q_minus, d.q_plus) != (ds[0].q_minus, ds[0].q_plus):
            witness = (ds[0].tree, d.tree)
            break
    return TreeIndependence(values, len(values) == 1, len(diffs) == 1, witness)


# -- treelike structure ------------------------------------------------------------------------

def is_treelike(Z: UnionOfTrees) -> bool:
    d = deltas(Z)
    return d.q_minus == 0 and (d.zclass != 3 or d.q_plus == 0)


def _side_key(s: Side) -> tuple[tuple[int, tuple[int, ...]], int]:
    """Unoriented attachment key and the orientation relative to it."""
    fwd, rev = s.path, tuple(reversed(s.path))
    return ((s.tree, min(fwd, rev)), 0 if fwd <= rev else 1)


@dataclass
class Band:
    """Rectangles glued along shared attaching paths, a product ``G x I``.

    ``paths`` are the vertices of G (attachments, with a fixed orientation),
    ``edges`` its edges: (rectangle, minus path index, plus path index,
    whether the rectangle runs against the chosen orientations).
    """

    paths: list[tuple[int, tuple[int, ...]]]
    edges: list[tuple[int, int, int, int]]

    def graph(self) -> Graph:
        return Graph(len(self.paths), tuple((a, b) for _, a, b, _ in self.edges))


@dataclass
class ProductDecomposition:
    bands: list[Band]
    incidence: Graph          # bands first, then trees; an edge per band attachment

    def to_json(self) -> dict:
        return {
            "bands": [
                {"paths": [{"tree": t, "path": "-".join(map(str, p))} for t, p in b.paths],
                 "rectangles": [r for r, *_ in b.edges]}
                for b in self.bands
            ],
            "incidenceIsTree": is_tree(self.incidence),
        }


def product_decomposition(Z: UnionOfTrees) -> ProductDecomposition:
    """Group rectangles that share attaching paths into bands.

    Raises UnionOfTreesError for complexes that are not treelike, and when a
    band closes up with a twist or the band/tree incidence graph is not a
    tree (which would contradict treelikeness).
    """
    if not is_treelike(Z):
        raise UnionOfTreesError("product decomposition needs a treelike union of trees")
    nodes: dict = {}
    for r in Z.rectangles:
        for s in (r.minus, r.plus):
            key, _ = _side_key(s)
            nodes.setdefault(key, len(nodes))
    # parity union-find: orientation of each attachment relative to its band
    parent = list(range(len(nodes)))
    parity = [0] * len(nodes)

    def find(x):
        if parent[x] == x:
            return x, 0
        root, p = find(parent[x])
        parent[x] = root
        parity[x] ^= p
        return root, parity[x]

    for j, r in enumerate(Z.rectangles):
        (km, om), (kp, op) = _side_key(r.minus), _side_key(r.plus)
        a, b = nodes[km], nodes[kp]
        (ra, pa), (rb, pb) = find(a), find(b)
        want = om ^ op
        if ra == rb:
            if pa ^ pb != want:
                raise UnionOfTreesError(f"rectangle {j} closes a band with a twist")
            continue
        parent[rb] = ra
        parity[rb] = pa ^ pb ^ want
    groups: dict = {}
    for key, x in nodes.items():
        root, p = find(x)
        groups.setdefault(root, []).append((key, p))
    bands = []
    where = {}
    for root in sorted(groups, key=lambda r: min(nodes[k] for k, _ in groups[r])):
        members = sorted(groups[root])
        paths = []
        for idx, (key, p) in enumerate(members):
            tree, canon = key
            paths.append((tree, canon if p == 0 else tuple(reversed(canon))))
            where[key] = (len(bands), idx, p)
        bands.append(Band(paths, []))
    for j, r in enumerate(Z.rectangles):
        (km, om), (kp, op) = _side_key(r.minus), _side_key(r.plus)
        bi, ia, pa = where[km]
        _, ib, pb = where[kp]
        bands[bi].edges.append((j, ia, ib, om ^ pa))
    inc_edges = []
    for bi, b in enumerate(bands):
        for tree, _ in b.paths:
            inc_edges.append((bi, len(bands) + tree))
    incidence = Graph(len(bands) + len(Z.trees), tuple(inc_edges))
    if not is_tree(incidence):
        raise UnionOfTreesError("band/tree incidence graph is not a tree")
    return ProductDecomposition(bands, incidence)


def reassemble(Z: UnionOfTrees, dec: ProductDecomposition) -> UnionOfTrees:
    """Rebuild the complex from its trees and bands."""
    rects = []
    for b in dec.bands:
        for j, ia, ib, flip in b.edges:
            tm, pm = b.paths[ia]
            tp, pp = b.paths[ib]
            if flip:
                pm, pp = tuple(reversed(pm)), tuple(reversed(pp))
            rects.append((j, Rectangle(Side(tm, pm), Side(tp, pp))))
    return UnionOfTrees(list(Z.trees), [r for _, r in sorted(rects, key=lambda x: x[0])])


def rectangle_canonical(r: Rectangle) -> tuple:
    """A rectangle up to its two reflections."""
    forms = []
    for s1, s2 in ((r.minus, r.plus), (r.plus, r.minus)):
        for flip in (False, True):
            a, b = (s1.reversed(), s2.reversed()) if flip else (s1, s2)
            forms.append(((a.tree, a.path), (b.tree, b.path)))
    return min(forms)


def same_complex(Z1: UnionOfTrees, Z2: UnionOfTrees) -> bool:
    """Equal trees and equal multisets of rectangles up to reflection."""
    return Z1.trees == Z2.trees and sorted(map(rectangle_canonical, Z1.rectangles)) == sorted(
        map(rectangle_canonical, Z2.rectangles))


# -- leaf space ------------------------------------------------------------------------------

@dataclass
class LeafSpace:
    graph: Graph
    vertex_of: dict[tuple[int, int], int]          # (tree, vertex) -> leaf-space vertex
    boundary: list[int]                              # image of each boundary component
    checks: dict[str, bool]
    subdivisions: int = 0                            # points added inside tree edges

    def to_json(self) -> dict:
        return {"vertices": self.graph.n_vertices, "edges": [list(e) for e in self.graph.edges],
                "boundary": self.boundary, "subdivisions": self.subdivisions, "checks": self.checks}


# A point of a tree is ("v", v) for a vertex or ("e", c, t) for the point at
# fraction t along the edge from parent[c] to c.

def _side_point(t: Tree, path: tuple[int, ...], f: Fraction) -> tuple:
    """The point at fraction ``f`` along an attaching path, by arc length."""
    s = f * (len(path) - 1)
    k = s.numerator // s.denominator
    frac = s - k
    if frac == 0:
        return ("v", path[k])
    a, b = path[k], path[k + 1]
    return ("e", b, frac) if t.parent[b] == a else ("e", a, 1 - frac)


def _side_fraction(t: Tree, path: tuple[int, ...], pt: tuple) -> Fraction | None:
    """Where ``pt`` sits along an attaching path (a reduced path in a tree
    meets each point at most once), or None when off the path."""
    m = len(path) - 1
    if pt[0] == "v":
        return Fraction(path.index(pt[1]), m) if pt[1] in path else None
    _, c, frac = pt
    par = t.parent[c]
    for k in range(m):
        if (path[k], path[k + 1]) == (par, c):
            return (k + frac) / m
        if (path[k], path[k + 1]) == (c, par):
            return (k + 1 - frac) / m
    return None


def _common_subdivision(Z: UnionOfTrees, cap: int = 20000) -> list[set]:
    """Points of every tree closed under the rectangle identifications."""
    points = [{("v", v) for v in range(t.n)} for t in Z.trees]
    sides = [(r.minus, r.plus) for r in Z.rectangles] + [(r.plus, r.minus) for r in Z.rectangles]
    changed = True
    while changed:
        changed = False
        for a, b in sides:
            ta, tb = Z.trees[a.tree], Z.trees[b.tree]
            for pt in list(points[a.tree]):
                f = _side_fraction(ta, a.path, pt)
                if f is None:
                    continue
                q = _side_point(tb, b.path, f)
                if q not in points[b.tree]:
                    points[b.tree].add(q)
                    changed = True
        if sum(map(len, points)) > cap:
            raise UnionOfTreesError("rectangle identifications do not close up")
    return points


def leaf_space(Z: UnionOfTrees) -> LeafSpace:
    """Collapse every band to an interval.

    The two horizontal sides of a rectangle are identified by arc length,
    so trees are first subdivided at every point some identification sends
    to the middle of an edge.
    """
    if Z.marked_count():
        raise UnionOfTreesError("leaf space is defined for unions of trees without marked vertices")
    if not is_treelike(Z):
        raise UnionOfTreesError("leaf space needs a treelike union of trees")
    points = _common_subdivision(Z)
    keys = [(i, pt) for i in range(len(Z.trees)) for pt in sorted(points[i], key=_point_order)]
    uf = UnionFind(keys)
    fibre_edges = []
    for r in Z.rectangles:
        tm, tp = Z.trees[r.minus.tree], Z.trees[r.plus.tree]
        for pt in points[r.minus.tree]:
            f = _side_fraction(tm, r.minus.path, pt)
            if f is not None:
                a, b = (r.minus.tree, pt), (r.plus.tree, _side_point(tp, r.plus.path, f))
                uf.union(a, b)
                fibre_edges.append((a, b))
    classes: dict = {}
    for k in keys:
        classes.setdefault(uf.find(k), []).append(k)
    pos = {k: n for n, k in enumerate(keys)}
    order = sorted(classes.values(), key=lambda ms: min(pos[m] for m in ms))
    node = {k: n for n, members in enumerate(order) for k in members}

    # refined tree edges: walk each original edge through its cut points
    tree_edges = []
    for i, t in enumerate(Z.trees):
        cuts: dict = {}
        for pt in points[i]:
            if pt[0] == "e":
                cuts.setdefault(pt[1], []).append(pt)
        mine = []
        for c in range(1, t.n):
            chain = [(i, ("v", t.parent[c]))] + [(i, pt) for pt in sorted(cuts.get(c, []))] + [(i, ("v", c))]
            mine += list(zip(chain, chain[1:]))
        tree_edges.append(mine)
    edge_set = {tuple(sorted((node[a], node[b]))) for mine in tree_edges for a, b in mine}
    g = Graph(len(order), tuple(sorted(edge_set)))
    vertex_of = {(i, v): node[(i, ("v", v))] for i, t in enumerate(Z.trees) for v in range(t.n)}

    checks = {}
    checks["tree"] = is_tree(g) and all(a != b for a, b in g.edges)
    images = []
    embeds = True
    for i in range(len(Z.trees)):
        img = {node[(i, pt)] for pt in points[i]}
        embeds &= len(img) == len(points[i])
        images.append(img)
    small_overlaps = True
    for a in range(len(images)):
        for b in range(a + 1, len(images)):
            common = images[a] & images[b]
            if len(common) > 1:
                es = [e for e in g.edges if e[0] in common and e[1] in common]
                deg = {x: 0 for x in common}
                for u, w in es:
                    deg[u] += 1
                    deg[w] += 1
                # an interval: connected, acyclic, no vertex of valence above two
                small_overlaps &= len(es) == len(common) - 1 and max(deg.values()) <= 2 and _connected(common, es)
    checks["trees_embed"] = embeds
    checks["overlaps_are_intervals"] = small_overlaps
    comps = boundary_components(Z)
    bimg = [vertex_of[c[0]] for c in comps]
    consistent = all(len({vertex_of[k] for k in c}) == 1 for c in comps)
    valence_one = {x for x in range(g.n_vertices) if g.valence(x) == 1}
    checks["leaves_are_boundary"] = consistent and len(set(bimg)) == len(bimg) and set(bimg) == valence_one
    checks["kappa"] = kappa_graph(g, len(set(bimg))) == kappa_uot(Z)
    connected = True
    for members in order:
        ms = set(members)
        es = [(a, b) for a, b in fibre_edges if a in ms]
        connected &= _connected(members, es)
    checks["fibres_connected"] = connected
    added = sum(1 for pts in points for pt in pts if pt[0] == "e")
    return LeafSpace(g, vertex_of, bimg, checks, added)


def _point_order(pt: tuple) -> tuple:
    return (0, pt[1], 0) if pt[0] == "v" else (1, pt[1], pt[2])


def _connected(vs, es) -> bool:
    vs = list(vs)
    if not vs:
        return True
    uf = UnionFind(vs)
    for a, b in es:
        uf.union(a, b)
    return len({uf.find(v) for v in vs}) == 1


# -- stock examples and generators --------------------------------------------------------------

def interval(length: int = 1, marked=()) -> Tree:
    parent = (-1,) + tuple(range(length))
    return Tree(parent, frozenset({0, length}), frozenset(marked))


def tripod(arm: int = 1) -> Tree:
    """Centre 0 and three arms of the given length; leaves are boundary."""
    parent = [-1]
    leaves = []
    for _ in range(3):
        prev = 0
        for _ in range(arm):
            parent.append(prev)
            prev = len(parent) - 1
        leaves.append(prev)
    return Tree(tuple(parent), frozenset(leaves))


def star_tree(leaves: int, marked_centre: bool = False) -> Tree:
    parent = (-1,) + (0,) * leaves
    return Tree(parent, frozenset(range(1, leaves + 1)), frozenset({0}) if marked_centre else frozenset())


def twisted_pair() -> UnionOfTrees:
    """Two intervals joined by two rectangles, one with a half twist."""
    a, b = interval(), interval()
    return UnionOfTrees([a, b], [Rectangle(Side(0, (0, 1)), Side(1, (0, 1))),
                                 Rectangle(Side(0, (0, 1)), Side(1, (1, 0)))])


def parallel_pair() -> UnionOfTrees:
    """Two intervals joined by two coherent rectangles: an annulus."""
    a, b = interval(), interval()
    r = Rectangle(Side(0, (0, 1)), Side(1, (0, 1)))
    return UnionOfTrees([a, b], [r, r])


def tripod_star() -> UnionOfTrees:
    """A tripod with an interval band on each pair of arms."""
    t = tripod()
    leaves = sorted(t.boundary)
    trees = [t]
    rects = []
    for k in range(3):
        u, w = leaves[k], leaves[(k + 1) % 3]
        trees.append(interval(2))
        rects.append(Rectangle(Side(0, t.path(u, w)), Side(k + 1, (0, 1, 2))))
    return UnionOfTrees(trees, rects)


def marked_tripod_example() -> UnionOfTrees:
    """A tripod whose three pairs of arms carry rectangles running around
    three marked spaces; the tree part has a single boundary component."""
    centre = tripod()
    a, b, c = sorted(centre.boundary)
    arm = Tree((-1, 0), frozenset({1}), frozenset({0}))
    rects = [Rectangle(Side(0, centre.path(u, w)), Side(k + 1, (1, 0, 1)))
             for k, (u, w) in enumerate(((a, b), (b, c), (c, a)))]
    return UnionOfTrees([centre, arm, arm, arm], rects)


def random_tree(rng: random.Random, size: int, marked_prob: float = 0.0) -> Tree:
    parent = (-1,) + tuple(rng.randrange(v) for v in range(1, size))
    t = Tree(parent, frozenset())
    leaves = sorted(t.leaves())
    marked = {v for v in range(size) if v not in leaves and rng.random() < marked_prob}
    if marked_prob and len(leaves) > 2 and rng.random() < marked_prob:
        marked.add(leaves[-1])
    return Tree(parent, frozenset(leaves) - marked, frozenset(marked))


def _random_side(rng: random.Random, t: Tree, length: int | None = None, tries: int = 60):
    leaves = sorted(t.boundary)
    for _ in range(tries):
        if t.marked and rng.random() < 0.3:
            u = rng.choice(leaves)
            y = rng.choice(sorted(t.marked))
            v = rng.choice(leaves)
            p = t.path(u, y) + t.path(y, v)[1:]
        else:
            u, v = rng.sample(leaves, 2)
            p = t.path(u, v)
        if length is None or len(p) == length:
            return p
    return None


def random_uot(seed: int, n_trees: int | None = None, n_rects: int | None = None,
               marked_prob: float = 0.0, treelike: bool = False) -> UnionOfTrees:
    """A random connected union of trees.

    With ``treelike`` the incidence pattern is a tree of single rectangles
    plus coherent copies.
    """
    rng = random.Random(seed)
    n = n_trees or rng.randint(1, 5)
    trees = [random_tree(rng, rng.randint(2, 7), 0.0 if treelike else marked_prob) for _ in range(n)]
    rects: list[Rectangle] = []
    for i in range(1, n):
        for _ in range(200):
            j = rng.randrange(i)
            pm = _random_side(rng, trees[j])
            pp = _random_side(rng, trees[i])
            if pm is not None and pp is not None:
                rects.append(Rectangle(Side(j, pm), Side(i, pp)))
                break
        else:
            # fall back to a fresh interval matching the path length
            pm = _random_side(rng, trees[0])
            trees[i] = interval(len(pm) - 1)
            rects.append(Rectangle(Side(0, pm), Side(i, tuple(range(len(pm))))))
    extra = rng.randint(0, 3) if n_rects is None else max(0, n_rects - len(rects))
    for _ in range(extra):
        if treelike:
            if rects:
                rects.append(rng.choice(rects))
            continue
        a, b = rng.randrange(n), rng.randrange(n)
        pm = _random_side(rng, trees[a])
        pp = _random_side(rng, trees[b])
        if pm is not None and pp is not None:
            rects.append(Rectangle(Side(a, pm), Side(b, pp)))
    Z = UnionOfTrees(trees, rects)
    Z.check()
    return Z
