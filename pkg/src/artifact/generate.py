"""Annulus-first construction of graphs of spaces and random instances.

A space is assembled from a *horizontal graph* ``H`` mapped onto a target
graph ``T`` together with annuli.  Each annulus is a closed walk in ``T``
with two lifts to ``H``; its squares become edge-graph edges and its
vertical sides become vertex-graph edges.  The 2-cover condition then holds
by construction: every vertical side borders exactly two squares.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .gos import GoS, Origin, UEdge, validate
from .graphs import Graph, UnionFind, bar, components


@dataclass(frozen=True)
class Annulus:
    lower: tuple[int, ...]    # closed path of oriented H-edges
    upper: tuple[int, ...]    # same length, same projection


def gos_from_annuli(H: Graph, tproj: tuple[int, ...], annuli: list[Annulus], track_origin: bool = False) -> GoS:
    """Build the graph of spaces of ``H`` over a target with the given annuli.

    ``tproj[i]`` names the target edge that H-edge ``i`` covers positively;
    H-edges covering the same target edge lie in the same family of edge
    graphs.  The horizontal graph of the result is ``H`` itself.
    """
    verticals = []          # (annulus, step) -> (lower vertex, upper vertex)
    for a, ann in enumerate(annuli):
        n = len(ann.lower)
        if n == 0 or len(ann.upper) != n:
            raise ValueError("annulus lifts must be nonempty and of equal length")
        for k in range(n):
            lo, up = ann.lower[k], ann.upper[k]
            if tproj[lo >> 1] != tproj[up >> 1] or (lo & 1) != (up & 1):
                raise ValueError("annulus lifts cover different target edges")
            if H.tau(lo) != H.iota(ann.lower[(k + 1) % n]) or H.tau(up) != H.iota(ann.upper[(k + 1) % n]):
                raise ValueError("annulus lift is not a closed path")
            verticals.append(((a, k), H.iota(lo), H.iota(up)))

    vuf = UnionFind(range(H.n_vertices))
    for _, x, y in verticals:
        vuf.union(x, y)
    vgroups: dict[int, list[int]] = {}
    for x in range(H.n_vertices):
        vgroups.setdefault(vuf.find(x), []).append(x)
    vorder = sorted(vgroups.values(), key=min)
    uvert = {}
    vloc = {}
    for u, grp in enumerate(vorder):
        for k, x in enumerate(grp):
            uvert[x] = u
            vloc[x] = k
    vedges: dict[int, list] = {u: [] for u in range(len(vorder))}
    vertical_id = {}
    for key, x, y in verticals:
        u = uvert[x]
        vertical_id[key] = (u, len(vedges[u]))
        vedges[u].append((vloc[x], vloc[y]))
    vertices = {u: Graph(len(grp), tuple(vedges[u])) for u, grp in enumerate(vorder)}

    squares = []            # (lower H-edge, upper H-edge, vertical at iota side, vertical at tau side)
    for a, ann in enumerate(annuli):
        n = len(ann.lower)
        for k in range(n):
            lo, up = ann.lower[k], ann.upper[k]
            first, second = (a, k), (a, (k + 1) % n)
            if lo & 1:
                first, second = second, first
            squares.append((lo >> 1, up >> 1, first, second))

    euf = UnionFind(range(H.n_edges))
    for h1, h2, _, _ in squares:
        euf.union(h1, h2)
    egroups: dict[int, list[int]] = {}
    for h in range(H.n_edges):
        egroups.setdefault(euf.find(h), []).append(h)
    eorder = sorted(egroups.values(), key=min)
    uedge_of = {}
    eloc = {}
    for e, grp in enumerate(eorder):
        for k, h in enumerate(grp):
            uedge_of[h] = e
            eloc[h] = k
    esq: dict[int, list] = {e: [] for e in range(len(eorder))}
    for sq in squares:
        esq[uedge_of[sq[0]]].append(sq)

    edges = {}
    for e, grp in enumerate(eorder):
        g = Graph(len(grp), tuple((eloc[h1], eloc[h2]) for h1, h2, _, _ in esq[e]))
        src = uvert[H.edges[grp[0]][0]]
        dst = uvert[H.edges[grp[0]][1]]
        m0 = (tuple(vloc[H.edges[h][0]] for h in grp), tuple(2 * vertical_id[sq[2]][1] for sq in esq[e]))
        m1 = (tuple(vloc[H.edges[h][1]] for h in grp), tuple(2 * vertical_id[sq[3]][1] for sq in esq[e]))
        edges[e] = UEdge(src, dst, g, (m0, m1))

    X = GoS(vertices, edges)
    if track_origin:
        vertex = {(uvert[x], vloc[x]): x for x in range(H.n_vertices)}
        edge = {(uedge_of[h], eloc[h]): (2 * h,) for h in range(H.n_edges)}
        X.origin = Origin(H, vertex, edge)
    return X


# -- random instances -------------------------------------------------------------

def _random_target(rng: random.Random) -> Graph:
    nv = rng.randint(1, 2)
    ne = rng.randint(1, 3)
    edges = []
    if nv == 2:
        edges.append((0, 1))
    while len(edges) < ne:
        edges.append((rng.randrange(nv), rng.randrange(nv)))
    return Graph(nv, tuple(edges))


def _random_closed_walk(T: Graph, length: int, rng: random.Random, tries: int = 200) -> list[int] | None:
    for _ in range(tries):
        start = rng.randrange(T.n_vertices)
        walk = []
        v = start
        for _ in range(length):
            opts = [o for o in T.outgoing(v) if not walk or o != bar(walk[-1])]
            if not opts:
                break
            o = rng.choice(opts)
            walk.append(o)
            v = T.tau(o)
        if len(walk) == length and v == start and walk[0] != bar(walk[-1]):
            return walk
    return None


def random_gos(seed: int, max_uedges: int = 8, max_weight: int = 12, retries: int = 200) -> GoS:
    """A valid two-covered graph of spaces, deterministic in ``seed``."""
    rng = random.Random(seed)
    for _ in range(retries):
        X = _attempt(rng, max_weight)
        if X is not None and len(X.edges) <= max_uedges and X.total_weight() <= max_weight and not validate(X):
            return X
    raise RuntimeError(f"no instance for seed {seed}")


def _attempt(rng: random.Random, max_weight: int) -> GoS | None:
    T = _random_target(rng)
    n_ann = rng.randint(1, 3)
    walks = []
    for _ in range(n_ann):
        w = _random_closed_walk(T, rng.randint(1, 4), rng)
        if w is not None:
            walks.append(w)
    if not walks or sum(len(w) for w in walks) > max_weight:
        return None
    # two circle copies per annulus
    hv_proj, he = [], []            # H-vertex -> T-vertex; H-edge -> (iota, tau, T-edge)
    lifts = []
    for w in walks:
        n = len(w)
        pair = []
        for _ in range(2):
            base = len(hv_proj)
            for k in range(n):
                hv_proj.append(T.iota(w[k]))
            path = []
            for k in range(n):
                a, b = base + k, base + (k + 1) % n
                if w[k] & 1:
                    he.append((b, a, w[k] >> 1))
                    path.append(2 * (len(he) - 1) + 1)
                else:
                    he.append((a, b, w[k] >> 1))
                    path.append(2 * (len(he) - 1))
            pair.append(path)
        lifts.append(pair)
    # weightless extras
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            hv_proj.append(rng.randrange(T.n_vertices))
        i = rng.randrange(T.n_edges)
        a, b = T.edges[i]
        ca = [x for x in range(len(hv_proj)) if hv_proj[x] == a]
        cb = [x for x in range(len(hv_proj)) if hv_proj[x] == b]
        if ca and cb:
            he.append((rng.choice(ca), rng.choice(cb), i))
    # random identifications
    vuf = UnionFind(range(len(hv_proj)))
    euf = UnionFind(range(len(he)))
    for _ in range(rng.randint(0, 6)):
        if rng.random() < 0.5 and len(he) > 1:
            i, j = rng.sample(range(len(he)), 2)
            if he[i][2] == he[j][2]:
                euf.union(i, j)
                vuf.union(he[i][0], he[j][0])
                vuf.union(he[i][1], he[j][1])
        else:
            x, y = rng.randrange(len(hv_proj)), rng.randrange(len(hv_proj))
            if hv_proj[x] == hv_proj[y]:
                vuf.union(x, y)
    vroots = sorted({vuf.find(x) for x in range(len(hv_proj))})
    vnum = {r: k for k, r in enumerate(vroots)}
    eroots = sorted({euf.find(i) for i in range(len(he))})
    enum_ = {r: k for k, r in enumerate(eroots)}
    rep = {}
    for i in range(len(he)):
        rep.setdefault(euf.find(i), i)
    H = Graph(
        len(vroots),
        tuple((vnum[vuf.find(he[rep[r]][0])], vnum[vuf.find(he[rep[r]][1])]) for r in eroots),
    )
    tproj = tuple(he[rep[r]][2] for r in eroots)

    def remap(path):
        return tuple(2 * enum_[euf.find(o >> 1)] + (o & 1) for o in path)

    annuli = [Annulus(remap(lo), remap(up)) for lo, up in lifts]
    X = gos_from_annuli(H, tproj, annuli)
    und, _, _ = X.underlying()
    if len(components(und)) != 1:
        return None
    return X


def random_instances(count: int, start: int = 0, **kw) -> list[GoS]:
    return [random_gos(start + s, **kw) for s in range(count)]
