"""Two-covered graphs of spaces and the moves that simplify them.

A graph of spaces ``X`` has an underlying graph whose vertices carry
connected *vertex graphs* and whose edges carry connected *edge graphs*.
Each unoriented underlying edge stores its edge graph once together with two
incidence immersions, one into the vertex graph at each endpoint.  An *end*
is a pair ``(edge_id, side)`` with side 0 at the source and side 1 at the
target; a loop contributes two ends at the same vertex.

The 2-cover condition: every edge of a vertex graph is hit exactly twice by
the incidence maps of the ends at that vertex.

Moves (collapse, fold, reduce) optionally track an *origin*: a map from the
horizontal graph of the current space into a fixed base graph, so circuits
found late in a pipeline can be read back as words.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .canon import canonical_form as _canonical_form
from .graphs import Graph, GraphMorphism, UnionFind, bar, components, is_immersion, subgraph

Incidence = tuple[tuple[int, ...], tuple[int, ...]]   # (vertex map, oriented edge map)
End = tuple[int, int]

FORMAT_VERSION = 1


class GoSError(ValueError):
    """Precondition failure for a move on a graph of spaces."""


class NotReducedError(GoSError):
    pass


class NotSeparableError(GoSError):
    pass


@dataclass(frozen=True)
class UEdge:
    src: int
    dst: int
    graph: Graph
    maps: tuple[Incidence, Incidence]

    def vertex(self, side: int) -> int:
        return self.src if side == 0 else self.dst

    def is_loop(self) -> bool:
        return self.src == self.dst


@dataclass
class Origin:
    """Map from the horizontal graph into a base graph.

    ``vertex[(v, x)]`` is a base vertex, ``edge[(e, y)]`` an oriented edge
    path in the base from the image of the source end to the image of the
    target end.
    """

    base: Graph
    vertex: dict
    edge: dict


def _reduce_path(path: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for o in path:
        if out and out[-1] == bar(o):
            out.pop()
        else:
            out.append(o)
    return tuple(out)


def _reverse_path(path: Sequence[int]) -> tuple[int, ...]:
    return tuple(bar(o) for o in reversed(path))


@dataclass
class GoS:
    vertices: dict[int, Graph]
    edges: dict[int, UEdge]
    origin: Origin | None = None

    # -- basic structure ------------------------------------------------------
    def ends(self) -> list[End]:
        return [(e, s) for e in sorted(self.edges) for s in (0, 1)]

    def end_vertex(self, end: End) -> int:
        return self.edges[end[0]].vertex(end[1])

    def end_map(self, end: End) -> Incidence:
        return self.edges[end[0]].maps[end[1]]

    def end_graph(self, end: End) -> Graph:
        return self.edges[end[0]].graph

    def ends_at(self, v: int) -> list[End]:
        return [end for end in self.ends() if self.end_vertex(end) == v]

    def valence(self, v: int) -> int:
        return len(self.ends_at(v))

    def underlying(self) -> tuple[Graph, list[int], list[int]]:
        vids = sorted(self.vertices)
        eids = sorted(self.edges)
        idx = {v: k for k, v in enumerate(vids)}
        g = Graph(len(vids), tuple((idx[self.edges[e].src], idx[self.edges[e].dst]) for e in eids))
        return g, vids, eids

    def vertex_weight(self, v: int) -> int:
        return self.vertices[v].n_edges

    def edge_weight(self, e: int) -> int:
        return self.edges[e].graph.n_edges

    def total_weight(self) -> int:
        return sum(g.n_edges for g in self.vertices.values())

    def copy(self) -> "GoS":
        return GoS(dict(self.vertices), dict(self.edges), self.origin)

    def fresh_vertex_id(self) -> int:
        return max(self.vertices, default=-1) + 1

    def fresh_edge_id(self) -> int:
        return max(self.edges, default=-1) + 1

    def without_origin(self) -> "GoS":
        return GoS(dict(self.vertices), dict(self.edges), None)

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> dict:
        g = {
            "vertices": sorted(self.vertices),
            "edges": [{"id": e, "from": self.edges[e].src, "to": self.edges[e].dst} for e in sorted(self.edges)],
        }
        inc = {}
        for e in sorted(self.edges):
            for s, key in ((1, f"{e}+"), (0, f"{e}-")):
                vm, em = self.edges[e].maps[s]
                inc[key] = {"vertexMap": list(vm), "edgeMap": list(em)}
        return {
            "formatVersion": FORMAT_VERSION,
            "underlying": g,
            "vertexGraphs": {str(v): self.vertices[v].to_json() for v in sorted(self.vertices)},
            "edgeGraphs": {str(e): self.edges[e].graph.to_json() for e in sorted(self.edges)},
            "incidences": inc,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GoS":
        verts = {int(v): Graph.from_json(g) for v, g in data["vertexGraphs"].items()}
        edges = {}
        for ed in data["underlying"]["edges"]:
            e = int(ed["id"])
            eg = Graph.from_json(data["edgeGraphs"][str(e)])
            plus = data["incidences"][f"{e}+"]
            minus = data["incidences"][f"{e}-"]
            maps = (
                (tuple(minus["vertexMap"]), tuple(minus["edgeMap"])),
                (tuple(plus["vertexMap"]), tuple(plus["edgeMap"])),
            )
            edges[e] = UEdge(int(ed["from"]), int(ed["to"]), eg, maps)
        for v in data["underlying"]["vertices"]:
            if int(v) not in verts:
                raise GoSError(f"vertex {v} has no vertex graph")
        return cls(verts, edges)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# -- incidence helpers ----------------------------------------------------------

def morphism(X: GoS, end: End) -> GraphMorphism:
    vm, em = X.end_map(end)
    return GraphMorphism(X.end_graph(end), X.vertices[X.end_vertex(end)], vm, em)


def inc_is_embedding(inc: Incidence) -> bool:
    vm, em = inc
    return len(set(vm)) == len(vm) and len({o >> 1 for o in em}) == len(em)


def inc_is_isomorphism(inc: Incidence, target: Graph) -> bool:
    vm, em = inc
    return inc_is_embedding(inc) and len(vm) == target.n_vertices and len(em) == target.n_edges


def image(X: GoS, end: End) -> tuple[frozenset[int], frozenset[int]]:
    """Vertices and unoriented edges of the vertex graph hit by an end."""
    vm, em = X.end_map(end)
    return frozenset(vm), frozenset(o >> 1 for o in em)


def _compose(inner: Incidence, q_v: Sequence[int], q_o) -> Incidence:
    vm, em = inner
    return tuple(q_v[x] for x in vm), tuple(q_o(o) for o in em)


# -- validation -------------------------------------------------------------------

def validate(X: GoS) -> list[str]:
    """All violations of the graph-of-spaces invariants (empty when valid)."""
    out: list[str] = []
    if not X.vertices:
        out.append("no vertices")
    for v, g in sorted(X.vertices.items()):
        if g.n_vertices == 0 or len(components(g)) != 1:
            out.append(f"vertex {v}: vertex graph not connected")
    for e, ue in sorted(X.edges.items()):
        if ue.src not in X.vertices or ue.dst not in X.vertices:
            out.append(f"edge {e}: endpoint missing")
            continue
        if ue.graph.n_vertices == 0 or len(components(ue.graph)) != 1:
            out.append(f"edge {e}: edge graph not connected")
        for s in (0, 1):
            try:
                f = morphism(X, (e, s))
            except ValueError as exc:
                out.append(f"edge {e} side {s}: not a graph map ({exc})")
                continue
            if not is_immersion(f):
                out.append(f"edge {e} side {s}: incidence is not an immersion")
    if out:
        return out
    for v, g in sorted(X.vertices.items()):
        count = [0] * g.n_edges
        for end in X.ends_at(v):
            for o in X.end_map(end)[1]:
                count[o >> 1] += 1
        for i, c in enumerate(count):
            if c != 2:
                out.append(f"vertex {v}: edge {i} covered {c} times")
    und, _, _ = X.underlying()
    if len(components(und)) != 1:
        out.append("underlying graph not connected")
    return out


def is_valid(X: GoS) -> bool:
    return not validate(X)


# -- horizontal graph ---------------------------------------------------------------

@dataclass
class Horizontal:
    graph: Graph
    vkeys: list[tuple[int, int]]
    ekeys: list[tuple[int, int]]
    vindex: dict[tuple[int, int], int]
    eindex: dict[tuple[int, int], int]
    comps: list[tuple[list[int], list[int], bool]]   # vertices, edges, is_circle

    def infinite_edges(self) -> set[tuple[int, int]]:
        return {self.ekeys[i] for vs, es, circ in self.comps if not circ for i in es}

    def infinite_vertices(self) -> set[tuple[int, int]]:
        return {self.vkeys[i] for vs, es, circ in self.comps if not circ for i in vs}

    def circle_count(self) -> int:
        return sum(1 for c in self.comps if c[2])

    def betti_profile(self) -> list[tuple[int, int]]:
        """Sorted multiset of (component size class, betti) over components."""
        return sorted((1 - (len(vs) - len(es)), int(circ)) for vs, es, circ in self.comps)


def horizontal(X: GoS) -> Horizontal:
    vkeys = [(v, x) for v in sorted(X.vertices) for x in range(X.vertices[v].n_vertices)]
    vindex = {k: i for i, k in enumerate(vkeys)}
    ekeys, edges = [], []
    for e in sorted(X.edges):
        ue = X.edges[e]
        for y in range(ue.graph.n_vertices):
            ekeys.append((e, y))
            edges.append((vindex[(ue.src, ue.maps[0][0][y])], vindex[(ue.dst, ue.maps[1][0][y])]))
    g = Graph(len(vkeys), tuple(edges))
    comps = []
    for vs, es in components(g):
        circ = len(vs) == len(es) and len(es) > 0 and all(g.valence(x) == 2 for x in vs)
        comps.append((vs, es, circ))
    return Horizontal(g, vkeys, ekeys, vindex, {k: i for i, k in enumerate(ekeys)}, comps)


def chi_pair(X: GoS) -> tuple[int, int]:
    """(chi of the horizontal graph, chi of the underlying graph)."""
    chi_h = sum(g.n_vertices for g in X.vertices.values()) - sum(ue.graph.n_vertices for ue in X.edges.values())
    chi_u = len(X.vertices) - len(X.edges)
    return chi_h, chi_u


def underlying_betti(X: GoS) -> int:
    und, _, _ = X.underlying()
    return sum(1 - (len(vs) - len(es)) for vs, es in components(und))


# -- crushing, collapse, reduce ---------------------------------------------------------

def crush(X: GoS, crushed: Iterable[int]) -> GoS:
    """Quotient crushing each listed edge space onto its ends.

    Vertex graphs joined by crushed edges are glued along the two incidence
    images.  A single non-loop edge with an embedded end is an ordinary
    collapse; several edges at once undo a fold.
    """
    crushed = sorted(set(crushed))
    uf = UnionFind(X.vertices)
    for e in crushed:
        uf.union(X.edges[e].src, X.edges[e].dst)
    classes: dict[int, list[int]] = {}
    for v in sorted(X.vertices):
        classes.setdefault(uf.find(v), []).append(v)
    rep_of = {v: min(members) for members in classes.values() for v in members}

    cells = UnionFind()
    for v, g in X.vertices.items():
        for x in range(g.n_vertices):
            cells.add(("v", v, x))
        for o in g.oriented():
            cells.add(("o", v, o))
    for e in crushed:
        ue = X.edges[e]
        (v0, e0), (v1, e1) = ue.maps
        for y in range(ue.graph.n_vertices):
            cells.union(("v", ue.src, v0[y]), ("v", ue.dst, v1[y]))
        for i in range(ue.graph.n_edges):
            cells.union(("o", ue.src, e0[i]), ("o", ue.dst, e1[i]))
            cells.union(("o", ue.src, bar(e0[i])), ("o", ue.dst, bar(e1[i])))

    new_vertices: dict[int, Graph] = {}
    q_v: dict[int, list[int]] = {}
    q_o: dict[int, list[int]] = {}
    for members in classes.values():
        newid = min(members)
        vgroups: dict = {}
        for v in members:
            for x in range(X.vertices[v].n_vertices):
                vgroups.setdefault(cells.find(("v", v, x)), []).append((v, x))
        vorder = sorted(vgroups.values(), key=min)
        vnum = {}
        for k, grp in enumerate(vorder):
            for key in grp:
                vnum[key] = k
        ogroups: dict = {}
        for v in members:
            for o in X.vertices[v].oriented():
                ogroups.setdefault(cells.find(("o", v, o)), []).append((v, o))
        pairs = {}
        for root, grp in ogroups.items():
            v, o = min(grp)
            broot = cells.find(("o", v, bar(o)))
            if broot == root:
                raise GoSError("crush identifies an edge with its reverse")
            key = frozenset((root, broot))
            pairs.setdefault(key, []).append((min(grp), root))
        edge_list = []
        for key, lst in pairs.items():
            lst.sort()
            pos_root = lst[0][1]
            edge_list.append((lst[0][0], pos_root, [r for r in key if r != pos_root][0]))
        edge_list.sort()
        onum = {}
        edges = []
        for k, (first, pos_root, neg_root) in enumerate(edge_list):
            for key in ogroups[pos_root]:
                onum[key] = 2 * k
            for key in ogroups[neg_root]:
                onum[key] = 2 * k + 1
            v, o = first
            g = X.vertices[v]
            edges.append((vnum[(v, g.iota(o))], vnum[(v, g.tau(o))]))
        new_vertices[newid] = Graph(len(vorder), tuple(edges))
        for v in members:
            q_v[v] = [vnum[(v, x)] for x in range(X.vertices[v].n_vertices)]
            q_o[v] = [onum[(v, o)] for o in X.vertices[v].oriented()]

    new_edges = {}
    for e, ue in X.edges.items():
        if e in crushed:
            continue
        maps = []
        for s in (0, 1):
            v = ue.vertex(s)
            vm, em = ue.maps[s]
            maps.append((tuple(q_v[v][x] for x in vm), tuple(q_o[v][o] for o in em)))
        new_edges[e] = UEdge(rep_of[ue.src], rep_of[ue.dst], ue.graph, (maps[0], maps[1]))

    origin = None
    if X.origin is not None:
        origin = _crush_origin(X, crushed, rep_of, q_v)
    return GoS(new_vertices, new_edges, origin)


def _crush_origin(X: GoS, crushed, rep_of, q_v) -> Origin:
    # paths inside the crushed horizontal forest
    nbrs: dict = {}
    for e in crushed:
        ue = X.edges[e]
        for y in range(ue.graph.n_vertices):
            a = (ue.src, ue.maps[0][0][y])
            b = (ue.dst, ue.maps[1][0][y])
            nbrs.setdefault(a, []).append((b, (e, y), 1))
            nbrs.setdefault(b, []).append((a, (e, y), -1))
    org = X.origin

    def step_path(key, sign):
        p = org.edge[key]
        return p if sign == 1 else _reverse_path(p)

    new_key = {}
    for v, g in X.vertices.items():
        for x in range(g.n_vertices):
            new_key[(v, x)] = (rep_of[v], q_v[v][x])
    groups: dict = {}
    for k, nk in new_key.items():
        groups.setdefault(nk, []).append(k)
    to_rep: dict = {}     # old vertex -> base path from the group representative to it
    vertex = {}
    for nk, members in groups.items():
        root = min(members)
        vertex[nk] = org.vertex[root]
        to_rep[root] = ()
        queue = [root]
        while queue:
            a = queue.pop(0)
            for b, key, sign in sorted(nbrs.get(a, [])):
                if b not in to_rep:
                    to_rep[b] = _reduce_path(to_rep[a] + step_path(key, sign))
                    queue.append(b)
        for m in members:
            to_rep.setdefault(m, ())
    edge = {}
    for e, ue in X.edges.items():
        if e in crushed:
            continue
        for y in range(ue.graph.n_vertices):
            a = (ue.src, ue.maps[0][0][y])
            b = (ue.dst, ue.maps[1][0][y])
            edge[(e, y)] = _reduce_path(to_rep[a] + org.edge[(e, y)] + _reverse_path(to_rep[b]))
    return Origin(org.base, vertex, edge)


def collapse(X: GoS, e: int) -> GoS:
    """Crush a non-loop edge space with an embedded end into the other vertex."""
    if e not in X.edges:
        raise GoSError(f"no edge {e}")
    ue = X.edges[e]
    if ue.is_loop():
        raise GoSError(f"edge {e} is a loop")
    if not (inc_is_embedding(ue.maps[0]) or inc_is_embedding(ue.maps[1])):
        raise GoSError(f"edge {e} has no embedded end")
    return crush(X, [e])


def reducible_vertex(X: GoS, v: int) -> int | None:
    """Edge to collapse if ``v`` is reducible or a weightless leaf, else None."""
    ends = X.ends_at(v)
    if len(ends) == 2:
        (e1, s1), (e2, s2) = ends
        if e1 != e2 and not X.edges[e1].is_loop() and not X.edges[e2].is_loop():
            g = X.vertices[v]
            if inc_is_isomorphism(X.end_map((e1, s1)), g) and inc_is_isomorphism(X.end_map((e2, s2)), g):
                return e1
    if len(ends) == 1 and X.vertices[v].n_edges == 0 and len(X.vertices) > 1:
        return ends[0][0]
    return None


def is_reduced(X: GoS) -> bool:
    return all(reducible_vertex(X, v) is None for v in X.vertices)


def reduce(X: GoS) -> tuple[GoS, list[dict]]:
    """Collapse reducible vertices and weightless leaves until none remain."""
    trace = []
    while True:
        for v in sorted(X.vertices):
            e = reducible_vertex(X, v)
            if e is not None:
                X = collapse(X, e)
                trace.append({"move": "collapse", "edge": e, "vertex": v})
                break
        else:
            return X, trace


# -- folding ------------------------------------------------------------------------------

def _sub_components(g: Graph, verts: set[int], edges: set[int]) -> list[tuple[list[int], list[int]]]:
    uf = UnionFind(verts)
    for i in edges:
        uf.union(g.edges[i][0], g.edges[i][1])
    comps: dict = {}
    for x in sorted(verts):
        comps.setdefault(uf.find(x), ([], []))[0].append(x)
    for i in sorted(edges):
        comps[uf.find(g.edges[i][0])][1].append(i)
    return sorted(comps.values(), key=lambda c: c[0][0])


def union_image(X: GoS, ends: Iterable[End]) -> tuple[set[int], set[int]]:
    vs: set[int] = set()
    es: set[int] = set()
    for end in ends:
        a, b = image(X, end)
        vs |= a
        es |= b
    return vs, es


def fold(X: GoS, v: int, J: Iterable[End]) -> tuple[GoS, list[int]]:
    """Blow ``v`` up along the subset ``J`` of its ends.

    Returns the new space and the ids of the introduced edges, which run
    from the complementary side to the ``J`` side.
    """
    if v not in X.vertices:
        raise GoSError(f"no vertex {v}")
    ends = X.ends_at(v)
    J = sorted(set(J))
    if not J or len(J) >= len(ends) or any(j not in ends for j in J):
        raise GoSError("J must be a nonempty proper subset of the ends at v")
    N = [end for end in ends if end not in J]
    V = X.vertices[v]
    jv, je = union_image(X, J)
    nv, ne = union_image(X, N)
    jcomps = _sub_components(V, jv, je)
    ncomps = _sub_components(V, nv, ne)
    kcomps = _sub_components(V, jv & nv, je & ne)

    new_vertices = {u: g for u, g in X.vertices.items() if u != v}
    next_v = X.fresh_vertex_id()
    where: dict = {}        # (side tag, V-vertex) -> (new id, local vertex map, local edge map)
    for tag, comps in (("J", jcomps), ("N", ncomps)):
        for vs, es in comps:
            sub, vlist, elist = subgraph(V, vs, es)
            vloc = {x: k for k, x in enumerate(vlist)}
            eloc = {i: k for k, i in enumerate(elist)}
            new_vertices[next_v] = sub
            for x in vs:
                where[(tag, x)] = (next_v, vloc, eloc)
            next_v += 1

    def relocate(tag, inc: Incidence):
        vm, em = inc
        nid, vloc, eloc = where[(tag, vm[0])]
        return nid, (tuple(vloc[x] for x in vm), tuple(2 * eloc[o >> 1] + (o & 1) for o in em))

    new_edges = {}
    for e, ue in X.edges.items():
        if ue.src != v and ue.dst != v:
            new_edges[e] = ue
            continue
        src, dst, maps = ue.src, ue.dst, list(ue.maps)
        for s in (0, 1):
            if ue.vertex(s) == v:
                tag = "J" if (e, s) in J else "N"
                nid, maps[s] = relocate(tag, ue.maps[s])
                if s == 0:
                    src = nid
                else:
                    dst = nid
        new_edges[e] = UEdge(src, dst, ue.graph, (maps[0], maps[1]))

    next_e = X.fresh_edge_id()
    introduced = []
    for vs, es in kcomps:
        sub, vlist, elist = subgraph(V, vs, es)
        inc = (tuple(vlist), tuple(2 * i for i in elist))
        nsrc, m0 = relocate("N", inc)
        ndst, m1 = relocate("J", inc)
        new_edges[next_e] = UEdge(nsrc, ndst, sub, (m0, m1))
        introduced.append(next_e)
        next_e += 1

    origin = None
    if X.origin is not None:
        org = X.origin
        vertex = {k: val for k, val in org.vertex.items() if k[0] != v}
        for (tag, x), (nid, vloc, _) in where.items():
            vertex[(nid, vloc[x])] = org.vertex[(v, x)]
        edge = {k: val for k, val in org.edge.items() if k[0] in X.edges}
        for e in introduced:
            for y in range(new_edges[e].graph.n_vertices):
                edge[(e, y)] = ()
        origin = Origin(org.base, vertex, edge)
    return GoS(new_vertices, new_edges, origin), introduced


def candidate_subsets(ends: Sequence[End], max_size: int | None = None) -> list[tuple[End, ...]]:
    """Nonempty proper subsets, singletons first, one of each complementary pair."""
    n = len(ends)
    out = []
    seen = set()
    top = n - 1 if max_size is None else min(max_size, n - 1)
    for size in range(1, top + 1):
        for J in itertools.combinations(ends, size):
            comp = tuple(x for x in ends if x not in J)
            key = frozenset((J, comp))
            if key in seen:
                continue
            seen.add(key)
            out.append(J)
    return out


# -- vertex classification ------------------------------------------------------------

def disjoint_union_holds(X: GoS, ends: Sequence[End]) -> bool:
    """The union of images is the disjoint union of the edge graphs."""
    seen: set[int] = set()
    for end in ends:
        if not inc_is_embedding(X.end_map(end)):
            return False
        vs = set(X.end_map(end)[0])
        if vs & seen:
            return False
        seen |= vs
    return True


@dataclass
class VertexClass:
    kind: str          # foldable | degenerate | nondegenerate | circle | isolated | anomalous
    witness: tuple = ()
    triple_points: tuple = ()
    distinguished: End | None = None

    @property
    def unfoldable(self) -> bool:
        return self.kind != "foldable"


def classify_vertex(X: GoS, v: int) -> VertexClass:
    ends = X.ends_at(v)
    for J in candidate_subsets(ends):
        N = [end for end in ends if end not in J]
        if not disjoint_union_holds(X, J) and not disjoint_union_holds(X, N):
            return VertexClass("foldable", witness=J)
    if not ends:
        return VertexClass("isolated")
    bad = [end for end in ends if not inc_is_embedding(X.end_map(end))]
    if bad:
        rest = [end for end in ends if end != bad[0]]
        if len(bad) == 1 and disjoint_union_holds(X, rest):
            return VertexClass("degenerate", distinguished=bad[0])
        return VertexClass("anomalous")
    if len(ends) == 3:
        common = set.intersection(*(set(X.end_map(end)[0]) for end in ends))
        if common:
            return VertexClass("nondegenerate", triple_points=tuple(sorted(common)))
    if len(ends) == 2 and ends[0][0] == ends[1][0]:
        return VertexClass("circle")
    return VertexClass("anomalous")


# -- complexity and minimisation --------------------------------------------------------

def complexity(X: GoS) -> tuple[int, ...]:
    if not is_reduced(X):
        raise NotReducedError("complexity is defined on reduced spaces")
    vals = {v: X.valence(v) for v in X.vertices}
    k = max(vals.values(), default=0)
    counts = tuple(sum(1 for x in vals.values() if x == l) for l in range(k, 2, -1))
    m2_red = sum(1 for v in X.vertices if vals[v] == 2 and reducible_vertex(X, v) is not None)
    m2_deg = sum(1 for v in X.vertices if vals[v] == 2 and classify_vertex(X, v).kind == "degenerate")
    return (-underlying_betti(X), k) + counts + (m2_red, -m2_deg)


@dataclass
class MinimizeResult:
    gos: GoS
    trace: list[dict]
    fallbacks: int = 0


def minimize(X: GoS, cap: int | None = None) -> MinimizeResult:
    """Steepest descent of the complexity through folds followed by reduction.

    Every foldable vertex is tried with every subset of one or two of its
    ends; the fold giving the least complexity is taken, ties going to the
    earliest vertex and subset.  Larger subsets are tried only when no small
    one decreases the complexity.
    """
    X, trace = reduce(X)
    n_edges = sum(g.n_edges for g in X.vertices.values()) + sum(ue.graph.n_edges for ue in X.edges.values())
    cap = cap if cap is not None else 10 * max(n_edges, 1) ** 2 + 10
    fallbacks = 0
    moves = 0
    while True:
        c = complexity(X)
        foldable = [v for v in sorted(X.vertices) if classify_vertex(X, v).kind == "foldable"]
        best = None
        for large in (False, True):
            for v in foldable:
                ends = X.ends_at(v)
                small = candidate_subsets(ends, 2)
                subsets = candidate_subsets(ends)[len(small):] if large else small
                for J in subsets:
                    Y, _ = fold(X, v, J)
                    Y, sub = reduce(Y)
                    cy = complexity(Y)
                    if cy < c and (best is None or cy < best[0]):
                        best = (cy, v, J, Y, sub)
            if best is not None:
                fallbacks += int(large)
                break
        if best is None:
            return MinimizeResult(X, trace, fallbacks)
        cy, v, J, Y, sub = best
        trace.append({"move": "fold", "vertex": v, "J": [list(j) for j in J], "before": list(c), "after": list(cy)})
        trace.extend(sub)
        X = Y
        moves += 1
        if moves > cap:
            raise RuntimeError("minimize exceeded its iteration cap")


def all_unfoldable(X: GoS) -> bool:
    return all(classify_vertex(X, v).unfoldable for v in X.vertices)


# -- separability -------------------------------------------------------------------------

@dataclass
class SeparableVertex:
    kind: str                      # trivial | splittable | unsplittable | exceptional
    ends: tuple[End, ...] = ()
    triple_point: int | None = None
    outgoing: End | None = None    # end whose edge graph is isomorphic to V (splittable)
    pieces: tuple = ()             # vertex sets of the pairwise intersections


def classify_separable_vertex(X: GoS, v: int) -> SeparableVertex:
    ends = X.ends_at(v)
    V = X.vertices[v]
    if len(ends) != 3 or not all(inc_is_embedding(X.end_map(e)) for e in ends):
        return SeparableVertex("exceptional", tuple(ends))
    imgs = [image(X, e) for e in ends]
    common = imgs[0][0] & imgs[1][0] & imgs[2][0]
    if len(common) != 1:
        return SeparableVertex("exceptional", tuple(ends))
    w = next(iter(common))
    pieces = []
    for k in range(3):
        i, j = [t for t in range(3) if t != k]
        pieces.append((imgs[i][0] & imgs[j][0], imgs[i][1] & imgs[j][1]))
    allv = set(range(V.n_vertices))
    alle = set(range(V.n_edges))
    ok = set().union(*(p[0] for p in pieces)) == allv and set().union(*(p[1] for p in pieces)) == alle
    for a, b in itertools.combinations(range(3), 2):
        ok = ok and pieces[a][0] & pieces[b][0] == {w}
    for k in range(3):
        i, j = [t for t in range(3) if t != k]
        ok = ok and imgs[k][0] == pieces[i][0] | pieces[j][0] and imgs[k][1] == pieces[i][1] | pieces[j][1]
    if not ok:
        return SeparableVertex("exceptional", tuple(ends), w)
    points = [k for k in range(3) if not pieces[k][1]]
    frozen = tuple(tuple(sorted(p[0])) for p in pieces)
    if len(points) >= 2:
        return SeparableVertex("trivial", tuple(ends), w, pieces=frozen)
    if len(points) == 1:
        k = points[0]
        return SeparableVertex("splittable", tuple(ends), w, outgoing=ends[k], pieces=frozen)
    return SeparableVertex("unsplittable", tuple(ends), w, pieces=frozen)


def separability(X: GoS) -> dict[int, SeparableVertex]:
    """Per-vertex separable classification; raises unless the Euler
    characteristics of the horizontal and underlying graphs agree."""
    a, b = chi_pair(X)
    if a != b:
        raise NotSeparableError(f"chi(horizontal)={a} differs from chi(underlying)={b}")
    return {v: classify_separable_vertex(X, v) for v in sorted(X.vertices)}


# -- isomorphism ----------------------------------------------------------------------------

def flatten(X: GoS) -> tuple[list, list[list[int]]]:
    """Coloured graph whose isomorphisms are exactly the isomorphisms of X."""
    colors: list = []
    adj: list[list[int]] = []

    def node(col) -> int:
        colors.append(col)
        adj.append([])
        return len(colors) - 1

    def link(a, b):
        adj[a].append(b)
        adj[b].append(a)

    def graph_nodes(g: Graph, tag: str, owner: int):
        vn = [node(tag + "v") for _ in range(g.n_vertices)]
        hn = []
        for i in range(g.n_edges):
            en = node(tag + "e")
            link(en, owner)
            for o in (2 * i, 2 * i + 1):
                h = node(tag + "h")
                link(h, en)
                link(h, vn[g.iota(o)])
                hn.append(h)
        for x in vn:
            link(x, owner)
        return vn, hn

    unode, vnodes = {}, {}
    for v in sorted(X.vertices):
        unode[v] = node("U")
        vnodes[v] = graph_nodes(X.vertices[v], "V", unode[v])
    for e in sorted(X.edges):
        ue = X.edges[e]
        en = node("W")
        evn, ehn = graph_nodes(ue.graph, "E", en)
        for s in (0, 1):
            end = node("end")
            link(end, en)
            link(end, unode[ue.vertex(s)])
            vm, em = ue.maps[s]
            tv, th = vnodes[ue.vertex(s)]
            for y, x in enumerate(vm):
                m = node("mv")
                link(m, end)
                link(m, evn[y])
                link(m, tv[x])
            for i, o in enumerate(em):
                for flip in (0, 1):
                    m = node("mh")
                    link(m, end)
                    link(m, ehn[2 * i + flip])
                    link(m, th[o ^ flip])
    return colors, adj


def canonical_form(X: GoS) -> tuple:
    colors, adj = flatten(X)
    return _canonical_form(colors, adj)


def isomorphic(X: GoS, Y: GoS) -> bool:
    if (len(X.vertices), len(X.edges), X.total_weight()) != (len(Y.vertices), len(Y.edges), Y.total_weight()):
        return False
    return canonical_form(X) == canonical_form(Y)


# -- builders ----------------------------------------------------------------------------------

def point() -> Graph:
    return Graph(1)


def identity_inc(g: Graph) -> Incidence:
    return tuple(range(g.n_vertices)), tuple(2 * i for i in range(g.n_edges))


def mapping_torus(g: Graph, vmap: Sequence[int], emap: Sequence[int], length: int = 1) -> GoS:
    """Mapping torus of a graph automorphism, subdivided into ``length`` edges.

    The last edge carries the automorphism on its target side; all other
    incidences are identities.
    """
    verts = {i: g for i in range(length)}
    edges = {}
    for i in range(length):
        twist = (tuple(vmap), tuple(emap)) if i == length - 1 else identity_inc(g)
        edges[i] = UEdge(i, (i + 1) % length, g, (identity_inc(g), twist))
    return GoS(verts, edges)


def circle_graph(n: int) -> Graph:
    return Graph(n, tuple((k, (k + 1) % n) for k in range(n)))


def to_dot(X: GoS, name: str = "X") -> str:
    """DOT text for the underlying graph, the horizontal graph and every
    vertex graph (edges coloured by how many ends of each edge cover them)."""
    palette = ["black", "red", "blue", "darkgreen", "orange", "purple", "brown", "cyan"]
    lines = [f"digraph {name} {{", "  compound=true;"]
    lines.append("  subgraph cluster_underlying { label=\"underlying\";")
    for v in sorted(X.vertices):
        lines.append(f"    u{v} [label=\"{v} (w={X.vertex_weight(v)})\"];")
    for e in sorted(X.edges):
        ue = X.edges[e]
        lines.append(f"    u{ue.src} -> u{ue.dst} [label=\"{e} (w={ue.graph.n_edges})\"];")
    lines.append("  }")
    H = horizontal(X)
    lines.append("  subgraph cluster_horizontal { label=\"horizontal\";")
    for i, (v, x) in enumerate(H.vkeys):
        lines.append(f"    h{i} [label=\"{v}.{x}\"];")
    for i, (a, b) in enumerate(H.graph.edges):
        e, y = H.ekeys[i]
        lines.append(f"    h{a} -> h{b} [label=\"{e}.{y}\"];")
    lines.append("  }")
    for v in sorted(X.vertices):
        g = X.vertices[v]
        lines.append(f"  subgraph cluster_v{v} {{ label=\"vertex graph {v}\";")
        for x in range(g.n_vertices):
            lines.append(f"    v{v}_{x} [label=\"{x}\"];")
        owners: dict[int, list[str]] = {i: [] for i in range(g.n_edges)}
        first: dict[int, int] = {}
        for k, end in enumerate(X.ends_at(v)):
            for o in X.end_map(end)[1]:
                owners[o >> 1].append(f"{end[0]}{'-+'[end[1]]}")
                first.setdefault(o >> 1, k)
        for i, (a, b) in enumerate(g.edges):
            col = palette[first.get(i, 0) % len(palette)]
            lines.append(f"    v{v}_{a} -> v{v}_{b} [label=\"{','.join(owners[i])}\", color={col}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)

