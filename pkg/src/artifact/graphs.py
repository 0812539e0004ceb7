"""Graphs with an edge involution, combinatorial maps and Stallings folding.

A graph has vertices ``0..n-1`` and unoriented edges ``0..m-1``.  Edge ``i``
has two orientations: oriented edge ``2*i`` runs ``edges[i][0] -> edges[i][1]``
and ``2*i + 1`` is its reverse, so the involution is ``o ^ 1``.  An optional
label (a signed letter) is attached to the positive orientation; the reverse
carries the inverse letter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .words import CyclicWord, free_reduce, letter_key, letter_str


def bar(o: int) -> int:
    return o ^ 1


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...] = ()
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        for (u, v) in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge endpoint outside vertex range: {(u, v)}")
        if self.labels is not None and len(self.labels) != len(self.edges):
            raise ValueError("labels must match edges")

    # involution structure
    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def oriented(self) -> range:
        return range(2 * len(self.edges))

    def iota(self, o: int) -> int:
        return self.edges[o >> 1][o & 1]

    def tau(self, o: int) -> int:
        return self.edges[o >> 1][1 - (o & 1)]

    def label(self, o: int) -> int:
        lab = self.labels[o >> 1]
        return lab if o % 2 == 0 else -lab

    def outgoing(self, v: int) -> list[int]:
        """Oriented edges starting at ``v`` (a loop contributes both orientations)."""
        return [o for o in self.oriented() if self.iota(o) == v]

    def valence(self, v: int) -> int:
        return sum(1 for o in self.oriented() if self.iota(o) == v)

    def is_labeled(self) -> bool:
        return self.labels is not None

    def euler(self) -> int:
        return self.n_vertices - self.n_edges

    def relabel(self, labels: Sequence[int] | None) -> "Graph":
        return Graph(self.n_vertices, self.edges, tuple(labels) if labels is not None else None)

    # serialisation
    def to_json(self) -> dict:
        es = []
        for i, (u, v) in enumerate(self.edges):
            d = {"id": i, "from": u, "to": v}
            if self.labels is not None:
                d["label"] = letter_str(self.labels[i])
            es.append(d)
        return {"vertices": list(range(self.n_vertices)), "edges": es}

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        from .words import parse_letters

        verts = list(data["vertices"])
        index = {v: k for k, v in enumerate(verts)}
        es = sorted(data.get("edges", []), key=lambda e: e.get("id", 0))
        edges = tuple((index[e["from"]], index[e["to"]]) for e in es)
        labels = None
        if es and all("label" in e for e in es):
            labels = tuple(parse_letters(e["label"])[0] for e in es)
        return cls(len(verts), edges, labels)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in range(self.n_vertices):
            lines.append(f"  v{v};")
        for i, (u, v) in enumerate(self.edges):
            lab = f' [label="{letter_str(self.labels[i])}"]' if self.labels is not None else ""
            lines.append(f"  v{u} -> v{v}{lab};")
        lines.append("}")
        return "\n".join(lines)


def disjoint_union(graphs: Sequence[Graph]) -> tuple[Graph, list[int], list[int]]:
    """Disjoint union; returns the union and vertex/edge offsets."""
    voff, eoff, edges, labels = [], [], [], []
    nv = 0
    labeled = all(g.is_labeled() for g in graphs) and graphs
    for g in graphs:
        voff.append(nv)
        eoff.append(len(edges))
        edges.extend((u + nv, v + nv) for (u, v) in g.edges)
        if labeled:
            labels.extend(g.labels)
        nv += g.n_vertices
    return Graph(nv, tuple(edges), tuple(labels) if labeled else None), voff, eoff


@dataclass(frozen=True)
class GraphMorphism:
    """Combinatorial map.  ``emap[i]`` is the oriented codomain edge hit by the
    positive orientation of domain edge ``i``."""

    domain: Graph
    codomain: Graph
    vmap: tuple[int, ...]
    emap: tuple[int, ...]

    def __post_init__(self):
        d, c = self.domain, self.codomain
        if len(self.vmap) != d.n_vertices or len(self.emap) != d.n_edges:
            raise ValueError("morphism size mismatch")
        for i in range(d.n_edges):
            o = self.emap[i]
            if not 0 <= o < 2 * c.n_edges:
                raise ValueError("edge image out of range")
            if c.iota(o) != self.vmap[d.iota(2 * i)] or c.tau(o) != self.vmap[d.tau(2 * i)]:
                raise ValueError(f"edge {i} image does not commute with endpoints")

    def on_oriented(self, o: int) -> int:
        img = self.emap[o >> 1]
        return img if o % 2 == 0 else bar(img)

    def compose(self, after: "GraphMorphism") -> "GraphMorphism":
        """``after o self``."""
        return GraphMorphism(
            self.domain,
            after.codomain,
            tuple(after.vmap[x] for x in self.vmap),
            tuple(after.on_oriented(o) for o in self.emap),
        )


def is_immersion(f: GraphMorphism) -> bool:
    """Injective on outgoing oriented edges at every vertex."""
    d = f.domain
    seen: dict[tuple[int, int], int] = {}
    for o in d.oriented():
        key = (d.iota(o), f.on_oriented(o))
        if key in seen and seen[key] != o:
            return False
        seen[key] = o
    return True


def is_embedding(f: GraphMorphism) -> bool:
    return (
        is_immersion(f)
        and len(set(f.vmap)) == len(f.vmap)
        and len({o >> 1 for o in f.emap}) == len(f.emap)
    )


def is_isomorphism(f: GraphMorphism) -> bool:
    return (
        is_embedding(f)
        and f.domain.n_vertices == f.codomain.n_vertices
        and f.domain.n_edges == f.codomain.n_edges
    )


def identity(g: Graph) -> GraphMorphism:
    return GraphMorphism(g, g, tuple(range(g.n_vertices)), tuple(2 * i for i in range(g.n_edges)))


# --- components and homology ----------------------------------------------------

class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent = {}
        for x in items:
            self.parent[x] = x

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if repr(ry) < repr(rx):
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True


def components(g: Graph) -> list[tuple[list[int], list[int]]]:
    """Connected components as ``(vertices, edges)`` sorted by least vertex."""
    uf = UnionFind(range(g.n_vertices))
    for (u, v) in g.edges:
        uf.union(u, v)
    comps: dict[int, tuple[list[int], list[int]]] = {}
    for v in range(g.n_vertices):
        comps.setdefault(uf.find(v), ([], []))[0].append(v)
    for i, (u, _) in enumerate(g.edges):
        comps[uf.find(u)][1].append(i)
    return sorted(comps.values(), key=lambda c: c[0][0])


def is_connected(g: Graph) -> bool:
    return g.n_vertices > 0 and len(components(g)) == 1


def pi1_data(g: Graph) -> dict:
    """Components, first Betti number per component and Euler characteristic."""
    comps = components(g)
    bettis = [1 - (len(vs) - len(es)) for vs, es in comps]
    return {"components": len(comps), "betti": bettis, "euler": g.euler()}


def is_tree(g: Graph) -> bool:
    return is_connected(g) and g.euler() == 1


def is_circle(g: Graph) -> bool:
    return is_connected(g) and g.n_edges >= 1 and all(g.valence(v) == 2 for v in range(g.n_vertices))


def subgraph(g: Graph, verts: Iterable[int], edges: Iterable[int]) -> tuple[Graph, list[int], list[int]]:
    """Induced graph on the given cells; returns it with the vertex and edge lists
    (new index -> old index)."""
    vs = sorted(set(verts))
    es = sorted(set(edges))
    idx = {v: k for k, v in enumerate(vs)}
    sub = Graph(
        len(vs),
        tuple((idx[g.edges[e][0]], idx[g.edges[e][1]]) for e in es),
        tuple(g.labels[e] for e in es) if g.labels is not None else None,
    )
    return sub, vs, es


# --- labeled graphs over a rose ---------------------------------------------

def rose(rank: int) -> Graph:
    return Graph(1, tuple((0, 0) for _ in range(rank)), tuple(range(1, rank + 1)))


def normalize_labels(g: Graph) -> Graph:
    """Reorient edges so that every label is a positive letter."""
    edges, labels = [], []
    for (u, v), lab in zip(g.edges, g.labels):
        if lab < 0:
            edges.append((v, u))
            labels.append(-lab)
        else:
            edges.append((u, v))
            labels.append(lab)
    return Graph(g.n_vertices, tuple(edges), tuple(labels))


def rose_map(g: Graph, rank: int) -> GraphMorphism:
    """The label map from a labeled graph to the rose of the given rank."""
    r = rose(rank)
    emap = tuple(2 * (lab - 1) if lab > 0 else 2 * (-lab - 1) + 1 for lab in g.labels)
    return GraphMorphism(g, r, tuple(0 for _ in range(g.n_vertices)), emap)


def wedge_of_words(words: Sequence[Sequence[int]]) -> Graph:
    """Subdivided loops spelling each word, wedged at vertex 0."""
    edges, labels = [], []
    nv = 1
    for w in words:
        w = tuple(w)
        if not w:
            continue
        prev = 0
        for k, x in enumerate(w):
            nxt = 0 if k == len(w) - 1 else nv
            if nxt:
                nv += 1
            edges.append((prev, nxt))
            labels.append(x)
            prev = nxt
    return Graph(nv, tuple(edges), tuple(labels))


@dataclass
class FoldResult:
    graph: Graph
    base: int
    vmap: tuple[int, ...]          # input vertex -> output vertex (or -1 if pruned)
    emap: tuple[int, ...]          # input edge -> oriented output edge (or -1 if pruned)
    steps: list = field(default_factory=list)


def stallings_fold(g: Graph, base: int = 0, core: bool = True) -> FoldResult:
    """Fold same-label edge pairs until an immersion, then trim to the core.

    Identifications are made at the least vertex first, then least label,
    then least edge ids.  The base vertex survives trimming.
    """
    if not g.is_labeled():
        raise ValueError("folding needs a labeled graph")
    uf = UnionFind(range(g.n_vertices))
    alive = set(range(g.n_edges))
    # each edge is represented by an oriented edge of a surviving edge
    rep = {i: 2 * i for i in range(g.n_edges)}

    def ends(o):
        return uf.find(g.iota(o)), uf.find(g.tau(o))

    def resolve(o):
        # follow the chain of identifications
        i = o >> 1
        flip = o & 1
        while i not in alive:
            r = rep[i]
            i, flip = r >> 1, flip ^ (r & 1)
        return 2 * i + flip

    steps = []
    while True:
        best = None
        seen: dict[tuple[int, int], int] = {}
        for i in sorted(alive):
            for o in (2 * i, 2 * i + 1):
                start = uf.find(g.iota(o))
                key = (start, g.label(o))
                if key in seen:
                    cand = (start, letter_key(g.label(o)), seen[key], o)
                    if best is None or cand < best:
                        best = cand
                else:
                    seen[key] = o
        if best is None:
            break
        _, _, o1, o2 = best
        uf.union(ends(o1)[1], ends(o2)[1])
        alive.discard(o2 >> 1)
        rep[o2 >> 1] = o1 if o2 % 2 == 0 else bar(o1)
        steps.append((o1, o2))

    # compact, then trim
    vclass = sorted({uf.find(v) for v in range(g.n_vertices)})
    keep_edges = sorted(alive)
    broot = uf.find(base)

    if core:
        verts = set(vclass)
        es = set(keep_edges)
        while True:
            val = {v: 0 for v in verts}
            for i in es:
                u, v = uf.find(g.edges[i][0]), uf.find(g.edges[i][1])
                val[u] += 1
                val[v] += 1
            drop = [v for v in verts if v != broot and val[v] <= 1]
            if not drop:
                break
            dset = set(drop)
            verts -= dset
            es = {i for i in es if uf.find(g.edges[i][0]) not in dset and uf.find(g.edges[i][1]) not in dset}
        vclass = sorted(verts)
        keep_edges = sorted(es)

    vidx = {v: k for k, v in enumerate(vclass)}
    eidx = {i: k for k, i in enumerate(keep_edges)}
    out = Graph(
        len(vclass),
        tuple((vidx[uf.find(g.edges[i][0])], vidx[uf.find(g.edges[i][1])]) for i in keep_edges),
        tuple(g.labels[i] for i in keep_edges),
    )
    vmap = tuple(vidx.get(uf.find(v), -1) for v in range(g.n_vertices))
    emap = []
    for i in range(g.n_edges):
        o = resolve(2 * i)
        emap.append(2 * eidx[o >> 1] + (o & 1) if (o >> 1) in eidx else -1)
    return FoldResult(out, vidx[broot], vmap, tuple(emap), steps)


def is_folded(g: Graph) -> bool:
    return is_immersion(rose_map(g, max((abs(x) for x in g.labels), default=1)))


def read_path(g: Graph, start: int, letters: Sequence[int]) -> list[int] | None:
    """Follow letters from ``start`` in a folded graph; oriented edges or None."""
    out = []
    v = start
    for x in letters:
        nxt = None
        for o in g.outgoing(v):
            if g.label(o) == x:
                nxt = o
                break
        if nxt is None:
            return None
        out.append(nxt)
        v = g.tau(nxt)
    return out


def accepts(g: Graph, base: int, letters: Sequence[int]) -> bool:
    """Membership of a reduced word in the subgroup of a folded based graph."""
    path = read_path(g, base, free_reduce(letters))
    return path is not None and (g.tau(path[-1]) if path else base) == base


def subgroup_graph(words: Sequence[Sequence[int]]) -> FoldResult:
    return stallings_fold(wedge_of_words(words), 0)


def subgroup_is_whole(g: Graph, base: int, rank: int) -> bool:
    """True iff the folded based core is exactly the rose of the given rank."""
    return (
        g.n_vertices == 1
        and g.n_edges == rank
        and sorted(abs(x) for x in g.labels) == list(range(1, rank + 1))
        and is_folded(g)
    )


def circle_graph(letters: Sequence[int]) -> Graph:
    n = len(letters)
    return Graph(n, tuple((k, (k + 1) % n) for k in range(n)), tuple(letters))


def circle_immersion(c: CyclicWord | Sequence[int], target: Graph) -> list[GraphMorphism]:
    """All closed circuits in a folded target spelling ``c`` up to rotation.

    Each circuit is a morphism from the subdivided circle spelling the
    rotation that starts it; circuits equal up to rotation are listed once.
    """
    letters = tuple(c.letters if isinstance(c, CyclicWord) else c)
    n = len(letters)
    if n == 0:
        return []
    found = []
    seen = set()
    for v in range(target.n_vertices):
        for r in range(n):
            rot = letters[r:] + letters[:r]
            path = read_path(target, v, rot)
            if path is None or target.tau(path[-1]) != v:
                continue
            key = min(tuple(path[k:] + path[:k]) for k in range(n))
            if key in seen:
                continue
            seen.add(key)
            # present the circuit starting at the canonical rotation of c
            dom = circle_graph(letters)
            shift = (n - r) % n
            p = path[shift:] + path[:shift]
            vmap = tuple(target.iota(o) for o in p)
            found.append(GraphMorphism(dom, target, vmap, tuple(p)))
    return found


# --- fundamental group coordinates ---------------------------------------------

@dataclass(frozen=True)
class Pi1Basis:
    """Free basis of the fundamental group of a component at ``base``.

    Edges outside a breadth-first spanning tree are the generators; the
    generator numbered ``k + 1`` is non-tree edge ``gens[k]`` in its positive
    orientation.
    """

    graph: Graph
    base: int
    tree: frozenset[int]
    gens: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.gens)

    def coordinates(self, path: Sequence[int]) -> tuple[int, ...]:
        """Word in the generators read off a closed path (tree edges ignored)."""
        index = {e: k + 1 for k, e in enumerate(self.gens)}
        out = []
        for o in path:
            k = index.get(o >> 1)
            if k is not None:
                out.append(k if o % 2 == 0 else -k)
        return free_reduce(out)

    def tree_path(self, v: int) -> tuple[int, ...]:
        """Oriented tree path from the base to ``v``."""
        parent: dict[int, int] = {self.base: -1}
        queue = [self.base]
        while queue:
            x = queue.pop(0)
            for o in self.graph.outgoing(x):
                y = self.graph.tau(o)
                if (o >> 1) in self.tree and y not in parent:
                    parent[y] = o
                    queue.append(y)
        if v not in parent:
            raise ValueError(f"vertex {v} is not in the base component")
        out = []
        while parent[v] != -1:
            o = parent[v]
            out.append(o)
            v = self.graph.iota(o)
        return tuple(reversed(out))


def pi1_basis(g: Graph, base: int = 0) -> Pi1Basis:
    seen = {base}
    tree = set()
    queue = [base]
    while queue:
        x = queue.pop(0)
        for o in sorted(g.outgoing(x)):
            y = g.tau(o)
            if y not in seen:
                seen.add(y)
                tree.add(o >> 1)
                queue.append(y)
    comp_edges = sorted(i for i, (u, v) in enumerate(g.edges) if u in seen)
    gens = tuple(i for i in comp_edges if i not in tree)
    return Pi1Basis(g, base, frozenset(tree), gens)
