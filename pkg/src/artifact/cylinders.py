"""Annuli, cylinders and their good/bad classification.

Every edge of an edge graph spans a square.  Each side of a square sits on
an edge of a vertex graph, and the 2-cover condition pairs the sides up, so
squares chain into annuli and Moebius bands.  Their boundary paths live in
the horizontal graph.  Replacing each boundary circuit by the indivisible
circuit it winds around and gluing the bands to those circuits gives the
cylinders.

Transverse graphs of a cylinder are computed directly: an *edge fibre* has
one node per edge position on the cylinder's circuits and one edge per
square; a *vertex fibre* has one node per vertex position and one edge per
vertical side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gos import FORMAT_VERSION, GoS, Horizontal, horizontal
from .graphs import Graph, UnionFind, bar, components, is_tree

Square = tuple[int, int]          # (underlying edge, edge-graph edge)


@dataclass
class Band:
    """An annulus or Moebius band traced from the square matching."""

    squares: list[Square]
    entry: list[int]              # side each square is entered from
    flips: list[int]              # 1 if the square is traversed against its edge orientation
    moebius: bool
    boundary: list[tuple[int, ...]]     # closed oriented edge paths in the horizontal graph
    verticals: list[tuple[int, int]]    # (vertex, vertex-graph edge) crossed after each square

    @property
    def length(self) -> int:
        return len(self.squares)


def _square_side(X: GoS, sq: Square, side: int) -> int:
    """Oriented vertex-graph edge that the given side of the square covers."""
    e, i = sq
    return X.edges[e].maps[side][1][i]


def trace_annuli(X: GoS, H: Horizontal | None = None) -> list[Band]:
    """Partition all squares into annuli and Moebius bands."""
    H = H or horizontal(X)
    owners: dict[tuple[int, int], list[tuple[Square, int]]] = {}
    for e in sorted(X.edges):
        ue = X.edges[e]
        for i in range(ue.graph.n_edges):
            for side in (0, 1):
                key = (ue.vertex(side), _square_side(X, (e, i), side) >> 1)
                owners.setdefault(key, []).append(((e, i), side))
    for key, sides in owners.items():
        if len(sides) != 2:
            raise ValueError(f"vertex-graph edge {key} has {len(sides)} square sides")

    def partner(sq: Square, side: int) -> tuple[Square, int]:
        key = (X.edges[sq[0]].vertex(side), _square_side(X, sq, side) >> 1)
        a, b = owners[key]
        return b if a == (sq, side) else a

    used: set[Square] = set()
    bands = []
    for e in sorted(X.edges):
        for i in range(X.edges[e].graph.n_edges):
            start = (e, i)
            if start in used:
                continue
            squares, entry, flips, verticals = [], [], [], []
            sq, side, flip = start, 0, 0
            while True:
                used.add(sq)
                squares.append(sq)
                entry.append(side)
                flips.append(flip)
                out = 1 - side
                leaving = _square_side(X, sq, out) ^ flip
                verticals.append((X.edges[sq[0]].vertex(out), leaving >> 1))
                nsq, nside = partner(sq, out)
                nflip = int(_square_side(X, nsq, nside) != leaving)
                if nsq == start:
                    # the side pairing is a perfect matching, so the trace closes at side 0
                    moebius = nflip != 0
                    break
                sq, side, flip = nsq, nside, nflip
            bands.append(Band(squares, entry, flips, moebius, _boundaries(X, H, squares, entry, flips, moebius), verticals))
    return bands


def _boundaries(X, H, squares, entry, flips, moebius) -> list[tuple[int, ...]]:
    paths: list[list[int]] = [[], []]
    for sq, side, flip in zip(squares, entry, flips):
        e, i = sq
        g = X.edges[e].graph
        ends = (g.edges[i][0], g.edges[i][1])
        if flip:
            ends = ends[::-1]
        for k in (0, 1):
            idx = H.eindex[(e, ends[k])]
            paths[k].append(2 * idx + (1 if side == 1 else 0))
    if moebius:
        return [tuple(paths[0] + paths[1])]
    return [tuple(paths[0]), tuple(paths[1])]


# -- circuits --------------------------------------------------------------------------

def circuit_root(path: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Shortest period of a closed edge path and how often it repeats."""
    n = len(path)
    for d in range(1, n + 1):
        if n % d == 0 and path == path[:d] * (n // d):
            return path[:d], n // d
    return path, 1


def circuit_canonical(path: tuple[int, ...]) -> tuple[int, ...]:
    """Least rotation over both traversal directions."""
    rev = tuple(bar(o) for o in reversed(path))
    return min(min(p[r:] + p[:r] for r in range(len(p))) for p in (path, rev))


def is_immersed_circuit(g: Graph, path: tuple[int, ...]) -> bool:
    n = len(path)
    if n == 0:
        return False
    for k in range(n):
        a, b = path[k], path[(k + 1) % n]
        if g.tau(a) != g.iota(b) or b == bar(a):
            return False
    return True


def _lift(path: tuple[int, ...], circ: tuple[int, ...]) -> tuple[int, int]:
    """(offset, direction) with path[t] the circuit edge at offset + direction*t."""
    L = len(circ)
    for direction in (1, -1):
        for off in range(L):
            if all(
                (path[t] == circ[(off + t) % L]) if direction == 1 else (path[t] == bar(circ[(off - t) % L]))
                for t in range(len(path))
            ):
                return off, direction
    raise ValueError("boundary path does not wind around its root circuit")


# -- cylinders ---------------------------------------------------------------------------

@dataclass
class Cylinder:
    circles: list[int]                        # indices into the circuit table
    bands: list[int]                          # indices into the band list
    windings: list[list[int]]                 # per band, winding number of each boundary
    edge_fibres: list[tuple[Graph, list, list]] = field(default_factory=list)
    vertex_fibres: list[tuple[Graph, list, list]] = field(default_factory=list)

    @property
    def length(self) -> int:
        """Number of edges of the underlying circle (edge fibres)."""
        return len(self.edge_fibres)


@dataclass
class CylinderData:
    X: GoS
    H: Horizontal
    bands: list[Band]
    circuits: list[tuple[int, ...]]           # the indivisible circuits used
    lifts: list[list[tuple[int, int, int]]]   # per band, per boundary: (circuit, offset, direction)
    cylinders: list[Cylinder]


def build_cylinders(X: GoS) -> CylinderData:
    H = horizontal(X)
    bands = trace_annuli(X, H)
    circuits: list[tuple[int, ...]] = []
    index: dict[tuple[int, ...], int] = {}
    lifts = []
    for b in bands:
        row = []
        for path in b.boundary:
            rootp, _ = circuit_root(path)
            key = circuit_canonical(rootp)
            if key not in index:
                index[key] = len(circuits)
                circuits.append(key)
            c = index[key]
            off, direction = _lift(path, circuits[c])
            row.append((c, off, direction))
        lifts.append(row)
    uf = UnionFind(("b", k) for k in range(len(bands)))
    for k, row in enumerate(lifts):
        for c, _, _ in row:
            uf.add(("c", c))
            uf.union(("b", k), ("c", c))
    groups: dict = {}
    for k in range(len(bands)):
        groups.setdefault(uf.find(("b", k)), []).append(k)
    cylinders = []
    for members in sorted(groups.values()):
        circles = sorted({c for k in members for c, _, _ in lifts[k]})
        windings = [[len(bands[k].boundary[j]) // len(circuits[c]) for j, (c, _, _) in enumerate(lifts[k])] for k in members]
        cyl = Cylinder(circles, members, windings)
        _fibres(cyl, bands, circuits, lifts)
        cylinders.append(cyl)
    return CylinderData(X, H, bands, circuits, lifts, cylinders)


def _fibres(cyl: Cylinder, bands: list[Band], circuits, lifts) -> None:
    """Edge and vertex fibres of a cylinder, by position on its circuits."""
    e_nodes = [(c, i) for c in cyl.circles for i in range(len(circuits[c]))]
    e_index = {k: n for n, k in enumerate(e_nodes)}
    e_edges, e_labels = [], []
    v_edges, v_labels = [], []
    for k in cyl.bands:
        band = bands[k]
        n = band.length
        row = lifts[k]
        for t in range(n):
            pos = []
            vpos = []
            for j in (0, 1):
                # a Moebius band's second side is the second lap of its one boundary
                c, off, d = row[0] if band.moebius else row[j]
                step = t + n * j if band.moebius else t
                L = len(circuits[c])
                p = (off + d * step) % L
                pos.append((c, p))
                # vertex position after the edge in traversal direction
                vpos.append((c, (p + 1) % L if d == 1 else p))
            e_edges.append((e_index[pos[0]], e_index[pos[1]]))
            e_labels.append(("square", band.squares[t]))
            v_edges.append((e_index[vpos[0]], e_index[vpos[1]]))
            v_labels.append(("vertical", band.verticals[t]))
    eg = Graph(len(e_nodes), tuple(e_edges))
    vg = Graph(len(e_nodes), tuple(v_edges))
    for g, labels, out in ((eg, e_labels, cyl.edge_fibres), (vg, v_labels, cyl.vertex_fibres)):
        for vs, es in components(g):
            remap = {x: n for n, x in enumerate(vs)}
            sub = Graph(len(vs), tuple((remap[g.edges[i][0]], remap[g.edges[i][1]]) for i in es))
            out.append((sub, [e_nodes[x] for x in vs], [labels[i] for i in es]))


# -- irreducible components and verdicts ---------------------------------------------------

def irreducible_components(X: GoS) -> list[GoS]:
    """Pieces left after deleting weightless edges and stranded weightless vertices.

    Vertex and edge ids are kept so horizontal keys remain comparable with X.
    """
    kept = {e: ue for e, ue in X.edges.items() if ue.graph.n_edges > 0}
    uf = UnionFind(X.vertices)
    for ue in kept.values():
        uf.union(ue.src, ue.dst)
    touched = {ue.src for ue in kept.values()} | {ue.dst for ue in kept.values()}
    groups: dict = {}
    for v in sorted(X.vertices):
        if v in touched or X.vertices[v].n_edges > 0:
            groups.setdefault(uf.find(v), []).append(v)
    out = []
    for members in sorted(groups.values()):
        ms = set(members)
        edges = {e: ue for e, ue in kept.items() if ue.src in ms}
        out.append(GoS({v: X.vertices[v] for v in members}, edges))
    return out


def essential_boundary(data: CylinderData, cyl: Cylinder) -> set[int]:
    """Circuits of the cylinder lying in the non-circle horizontal part of
    the irreducible component that contains the cylinder."""
    X = data.X
    e0 = data.bands[cyl.bands[0]].squares[0][0]
    comp = next(Y for Y in irreducible_components(X) if e0 in Y.edges)
    HY = horizontal(comp)
    inf = HY.infinite_edges()
    out = set()
    for c in cyl.circles:
        keys = {data.H.ekeys[o >> 1] for o in data.circuits[c]}
        if keys <= inf:
            out.add(c)
    return out


def ambient_boundary(data: CylinderData, cyl: Cylinder) -> set[int]:
    """Circuits of the cylinder lying in the non-circle horizontal part of
    the whole space (weightless edges included)."""
    inf = data.H.infinite_edges()
    return {c for c in cyl.circles if all(data.H.ekeys[o >> 1] in inf for o in data.circuits[c])}


def fibre_crossings(data: CylinderData, cyl: Cylinder, essential: bool = True) -> list[int]:
    """Per transverse graph, how many of its nodes lie on boundary circuits
    (the essential boundary by default, else the ambient one)."""
    ess = essential_boundary(data, cyl) if essential else ambient_boundary(data, cyl)
    counts = []
    for g, nodes, _ in cyl.edge_fibres + cyl.vertex_fibres:
        counts.append(sum(1 for c, _ in nodes if c in ess))
    return counts


def classify_cylinder(data: CylinderData, cyl: Cylinder) -> str:
    """Good when every transverse graph meets the essential boundary more than once."""
    return "good" if min(fibre_crossings(data, cyl)) > 1 else "bad"


def transverse_tree_check(X: GoS) -> bool:
    return all(is_tree(ue.graph) for ue in X.edges.values())


def square_count(X: GoS) -> int:
    return sum(ue.graph.n_edges for ue in X.edges.values())


# -- reports -----------------------------------------------------------------------------------

def circuit_word(X: GoS, H: Horizontal, path: tuple[int, ...]) -> tuple[int, ...] | None:
    """Label sequence of a horizontal circuit read through the origin, if any."""
    if X.origin is None or not X.origin.base.is_labeled():
        return None
    base = X.origin.base
    out: list[int] = []
    for o in path:
        seg = X.origin.edge[H.ekeys[o >> 1]]
        if o & 1:
            seg = tuple(bar(x) for x in reversed(seg))
        out.extend(base.label(x) for x in seg)
    from .words import free_reduce
    return free_reduce(out)


def cylinder_report(X: GoS) -> dict:
    from .words import word_str
    data = build_cylinders(X)
    rows = []
    for cyl in data.cylinders:
        circles = []
        for c in cyl.circles:
            w = circuit_word(X, data.H, data.circuits[c])
            circles.append({"length": len(data.circuits[c]), "word": word_str(w) if w is not None else None,
                            "edges": list(data.circuits[c])})
        rows.append({
            "circles": circles,
            "bands": [{"squares": data.bands[k].length, "moebius": data.bands[k].moebius} for k in cyl.bands],
            "windings": cyl.windings,
            "length": cyl.length,
            "crossings": fibre_crossings(data, cyl),
            "ambientCrossings": fibre_crossings(data, cyl, essential=False),
            "verdict": classify_cylinder(data, cyl),
        })
    return {"formatVersion": FORMAT_VERSION, "squares": square_count(X), "cylinders": rows}


def matching_dot(X: GoS) -> str:
    """DOT text of the square adjacency: squares joined across shared vertical sides."""
    bands = trace_annuli(X)
    lines = ["graph squares {"]
    for k, b in enumerate(bands):
        lines.append(f"  subgraph cluster_{k} {{ label=\"{'moebius' if b.moebius else 'annulus'} {k}\";")
        for sq in b.squares:
            lines.append(f"    s{sq[0]}_{sq[1]} [label=\"{sq[0]}:{sq[1]}\"];")
        n = b.length
        for t in range(n):
            a, c = b.squares[t], b.squares[(t + 1) % n]
            v, j = b.verticals[t]
            lines.append(f"    s{a[0]}_{a[1]} -- s{c[0]}_{c[1]} [label=\"{v}.{j}\"];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)
