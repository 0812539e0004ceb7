"""From graphs of free groups to two-covered graphs of spaces.

A graph of free groups over cyclic edge groups, together with a
homomorphism to a free group given by generator images, is realised as
follows.  Each vertex group becomes the Stallings graph of its image; each
edge becomes an annulus glued along the circuits that its two edge words
trace in those graphs.  The result maps onto the rose and its horizontal
graph is the disjoint union of the Stallings graphs.

Also here: corank bounds, a bounded search for surjections onto a free
group, and the two end-to-end reports (free factor of an adjoined root,
and the factorization for conjugacy data without singleton classes).
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import words as W
from .generate import Annulus, gos_from_annuli
from .gos import FORMAT_VERSION, GoS, chi_pair, complexity, minimize, separability, validate
from .graphs import (
    Graph,
    UnionFind,
    accepts,
    circle_immersion,
    components,
    disjoint_union,
    normalize_labels,
    pi1_basis,
    read_path,
    stallings_fold,
    subgroup_graph,
    subgroup_is_whole,
    wedge_of_words,
)


class ConstructError(ValueError):
    """Raised when problem data violates a precondition."""


# -- problem data ------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupEdge:
    """Edge of a graph of groups: ``t w_src t^-1 = w_dst`` with ``t`` trivial
    for amalgamated edges.  Words are in the generators of each endpoint group."""

    src: int
    dst: int
    words: tuple[tuple[int, ...], tuple[int, ...]]
    kind: str = "amalgam"           # amalgam | hnn


@dataclass
class GraphOfFreeGroupsData:
    rank: int                                    # rank of the target free group
    vertex_ranks: list[int]
    edges: list[GroupEdge]
    vertex_images: list[list[tuple[int, ...]]]   # per vertex, image of each generator
    stable_images: dict[int, tuple[int, ...]] = field(default_factory=dict)
    scott: tuple[int, int] | None = None         # declared, never computed

    def check(self) -> None:
        if len(self.vertex_images) != len(self.vertex_ranks):
            raise ConstructError("one image list per vertex group")
        for i, (r, imgs) in enumerate(zip(self.vertex_ranks, self.vertex_images)):
            if len(imgs) != r:
                raise ConstructError(f"vertex {i}: {len(imgs)} images for rank {r}")
        for j, ed in enumerate(self.edges):
            for side, w in zip((ed.src, ed.dst), ed.words):
                if not W.free_reduce(w):
                    raise ConstructError(f"edge {j}: trivial edge word")
                if any(abs(x) > self.vertex_ranks[side] for x in w):
                    raise ConstructError(f"edge {j}: word uses a letter outside its vertex group")
            if ed.kind == "amalgam" and ed.src == ed.dst:
                raise ConstructError(f"edge {j}: an amalgamated edge needs two distinct vertices")
            if ed.kind not in ("amalgam", "hnn"):
                raise ConstructError(f"edge {j}: unknown kind {ed.kind}")
        und = Graph(len(self.vertex_ranks), tuple((e.src, e.dst) for e in self.edges if e.kind == "amalgam"))
        if len(components(und)) != 1 or und.euler() != 1:
            raise ConstructError("amalgamated edges must form a spanning tree")

    def vertex_map(self, i: int) -> dict[int, tuple[int, ...]]:
        return {g + 1: W.free_reduce(img) for g, img in enumerate(self.vertex_images[i])}

    def edge_images(self, j: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        ed = self.edges[j]
        w1 = W.apply_map(self.vertex_map(ed.src), ed.words[0])
        w2 = W.apply_map(self.vertex_map(ed.dst), ed.words[1])
        t = W.free_reduce(self.stable_images.get(j, ())) if ed.kind == "hnn" else ()
        return w1, w2, t

    def presentation(self) -> tuple[list[str], list[tuple[int, ...]]]:
        """Generators and relators of the fundamental group.

        Generators are numbered vertex by vertex, followed by one stable
        letter per HNN edge.
        """
        names, offset = [], []
        for i, r in enumerate(self.vertex_ranks):
            offset.append(len(names))
            names.extend(f"v{i}{W.letter_str(g + 1)}" for g in range(r))
        stable = {}
        for j, ed in enumerate(self.edges):
            if ed.kind == "hnn":
                stable[j] = len(names) + 1
                names.append(f"t{j}")
        rels = []
        for j, ed in enumerate(self.edges):
            w1 = tuple((abs(x) + offset[ed.src]) * (1 if x > 0 else -1) for x in ed.words[0])
            w2 = tuple((abs(x) + offset[ed.dst]) * (1 if x > 0 else -1) for x in ed.words[1])
            if ed.kind == "hnn":
                t = stable[j]
                rels.append(W.free_reduce((t,) + w1 + (-t,) + W.invert(w2)))
            else:
                rels.append(W.free_reduce(w1 + W.invert(w2)))
        return names, rels

    def hom_images(self) -> list[tuple[int, ...]]:
        """Images of the presentation generators, in presentation order."""
        out = [W.free_reduce(img) for imgs in self.vertex_images for img in imgs]
        for j, ed in enumerate(self.edges):
            if ed.kind == "hnn":
                out.append(W.free_reduce(self.stable_images.get(j, ())))
        return out

    def to_json(self) -> dict:
        names, _ = self.presentation()
        imgs = self.hom_images()
        return {
            "formatVersion": FORMAT_VERSION,
            "alphabetRank": self.rank,
            "vertices": [{"rank": r} for r in self.vertex_ranks],
            "edges": [
                {"type": e.kind, "src": e.src, "dst": e.dst, "words": [W.word_str(e.words[0]), W.word_str(e.words[1])]}
                for e in self.edges
            ],
            "hom": {n: W.word_str(w) for n, w in zip(names, imgs)},
            **({"scott": list(self.scott)} if self.scott else {}),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GraphOfFreeGroupsData":
        ranks = [int(v["rank"]) for v in data["vertices"]]
        edges = []
        for e in data["edges"]:
            kind = e.get("type", "amalgam")
            src = int(e.get("src", 0))
            dst = int(e.get("dst", src if kind == "hnn" else 1))
            w1, w2 = (W.parse_letters(s) for s in e["words"])
            edges.append(GroupEdge(src, dst, (w1, w2), kind))
        d = cls(int(data["alphabetRank"]), ranks, edges, [[] for _ in ranks], {})
        names, _ = d.presentation()
        hom = data.get("hom", {})
        missing = [n for n in names if n not in hom]
        if missing:
            raise ConstructError(f"hom is missing images for {missing}")
        k = 0
        for i, r in enumerate(ranks):
            d.vertex_images[i] = [W.parse_letters(hom[names[k + g]]) for g in range(r)]
            k += r
        for j, e in enumerate(edges):
            if e.kind == "hnn":
                d.stable_images[j] = W.parse_letters(hom[f"t{j}"])
        if "scott" in data:
            d.scott = tuple(data["scott"])
        d.check()
        return d


def corank_bound(d: GraphOfFreeGroupsData) -> int:
    """Upper bound on the rank of a free quotient: one minus the summed
    Euler characteristics of the vertex groups."""
    return 1 - sum(1 - r for r in d.vertex_ranks)


@dataclass
class AdjoinRootData:
    rank: int
    roots: list[tuple[tuple[int, ...], int]]     # (gamma, k)

    def check(self) -> None:
        for gamma, k in self.roots:
            if k < 2:
                raise ConstructError("root exponents must be at least 2")
            if not W.cyclic_core(gamma)[1]:
                raise ConstructError("gamma must be nontrivial")
            if W.root(W.cyclic_canonical(gamma, self.rank))[1] != 1:
                raise ConstructError(f"{W.word_str(gamma)} is a proper power")
        if not W.are_distinct_classes([W.Word(W.free_reduce(g), self.rank) for g, _ in self.roots]):
            raise ConstructError("gamma classes must be pairwise distinct, inverses included")


def adjoin_root_data_to_gofg(a: AdjoinRootData, base_images: list[tuple[int, ...]],
                             root_images: list[tuple[int, ...]], target_rank: int | None = None) -> GraphOfFreeGroupsData:
    """One vertex for the base group and one rank-one vertex per root, with
    an amalgamated edge identifying ``r_i^k_i`` with ``gamma_i``."""
    a.check()
    if len(root_images) != len(a.roots):
        raise ConstructError("one image per root")
    edges = [GroupEdge(0, i + 1, (W.free_reduce(g), (1,) * k)) for i, (g, k) in enumerate(a.roots)]
    return GraphOfFreeGroupsData(
        target_rank or a.rank,
        [a.rank] + [1] * len(a.roots),
        edges,
        [list(base_images)] + [[tuple(r)] for r in root_images],
        scott=(a.rank - 1, 0),
    )


# -- building the space ------------------------------------------------------------------------

@dataclass
class Built:
    X: GoS
    H: Graph                                   # horizontal graph (with letters)
    bases: list[int]                           # base vertex of each vertex group in H
    circuits: list[tuple[tuple[int, ...], tuple[int, ...]]]   # per edge, (lower, upper) H-paths
    data: GraphOfFreeGroupsData


def _split_conjugate(w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    u, c = W.cyclic_core(w)
    return u, c


def _in_cyclic(h: tuple[int, ...], w: tuple[int, ...]) -> bool:
    """Is the reduced word ``h`` a power of the reduced word ``w``?"""
    h = W.free_reduce(h)
    if not h:
        return True
    for sign in (1, -1):
        base = w if sign == 1 else W.invert(w)
        acc: tuple[int, ...] = ()
        for _ in range(len(h) + 1):
            acc = W.free_reduce(acc + base)
            if acc == h:
                return True
            if len(acc) > len(h) + 2 * len(w):
                break
    return False


def build_gos(d: GraphOfFreeGroupsData, require_maximal: bool = True) -> Built:
    """Realise the homomorphism as a graph of spaces over the rose."""
    d.check()
    graphs, bases = [], []
    for i, r in enumerate(d.vertex_ranks):
        imgs = [W.free_reduce(w) for w in d.vertex_images[i]]
        if any(not w for w in imgs):
            raise ConstructError(f"vertex {i}: a generator maps to the identity")
        fr = stallings_fold(wedge_of_words(imgs), 0)
        g = normalize_labels(fr.graph)
        if g.n_edges - g.n_vertices + 1 != r:
            raise ConstructError(f"vertex {i}: images do not generate a free group of rank {r}")
        graphs.append(g)
        bases.append(fr.base)
    H, voff, eoff = disjoint_union(graphs)
    bases = [voff[i] + b for i, b in enumerate(bases)]
    tproj = tuple(abs(x) - 1 for x in H.labels)

    if require_maximal:
        whole = stallings_fold(wedge_of_words([w for w in d.hom_images() if w]), 0)
        if not subgroup_is_whole(whole.graph, whole.base, d.rank):
            raise ConstructError("the homomorphism is not onto the target free group")
        if corank_bound(d) != d.rank:
            raise ConstructError(f"target rank {d.rank} is not the corank bound {corank_bound(d)}")

    annuli, circuits = [], []
    for j, ed in enumerate(d.edges):
        w1, w2, t = d.edge_images(j)
        u1, c1 = _split_conjugate(w1)
        u2, c2 = _split_conjugate(w2)
        if not c1 or len(c1) != len(c2):
            raise ConstructError(f"edge {j}: edge word images are not conjugate")
        p1 = read_path(H, bases[ed.src], w1)
        p2 = read_path(H, bases[ed.dst], w2)
        if p1 is None or p2 is None:
            raise ConstructError(f"edge {j}: edge word does not lift")
        C1 = p1[len(u1):len(u1) + len(c1)]
        C2 = p2[len(u2):len(u2) + len(c2)]
        L = len(c1)
        chosen = None
        for s in range(L):
            if c1[s:] + c1[:s] != c2:
                continue
            g = W.free_reduce(u2 + W.invert(c1[:s]) + W.invert(u1))
            if _in_cyclic(W.free_reduce(W.invert(g) + t), w1):
                chosen = s
                break
        if chosen is None:
            raise ConstructError(f"edge {j}: no annulus realises the stable letter image")
        lower = tuple(C1[chosen:] + C1[:chosen])
        upper = tuple(C2)
        annuli.append(Annulus(lower, upper))
        circuits.append((lower, upper))
    X = gos_from_annuli(H, tproj, annuli, track_origin=True)
    problems = validate(X)
    if problems:
        raise ConstructError("built space is invalid: " + "; ".join(problems))
    if require_maximal:
        a, b = chi_pair(X)
        if a != b:
            raise ConstructError(f"Euler characteristics differ: {a} vs {b}")
    return Built(X, H, bases, circuits, d)


# -- bounded corank search ---------------------------------------------------------------------------

def reduced_words(rank: int, length: int) -> list[tuple[int, ...]]:
    """All reduced words of exactly the given length, in shortlex order."""
    letters = sorted([x for g in range(1, rank + 1) for x in (g, -g)], key=W.letter_key)
    out = [()]
    for _ in range(length):
        out = [w + (x,) for w in out for x in letters if not w or w[-1] != -x]
    return out


def _check_tuple(images, relators, rank) -> bool:
    for rel in relators:
        if W.apply_map({g + 1: img for g, img in enumerate(images)}, rel):
            return False
    nontrivial = [w for w in images if w]
    if not nontrivial:
        return False
    fr = stallings_fold(wedge_of_words(nontrivial), 0)
    return subgroup_is_whole(fr.graph, fr.base, rank)


def _search_shape(args):
    shape, relators, rank = args
    pools = [reduced_words(rank, n) for n in shape]
    for images in itertools.product(*pools):
        if _check_tuple(images, relators, rank):
            return images
    return None


def _shapes(n_gens: int, max_len: int):
    """Length profiles in search order: by total length, then lexicographically."""
    for total in range(n_gens * max_len + 1):
        for shape in itertools.product(range(max_len + 1), repeat=n_gens):
            if sum(shape) == total:
                yield shape


def bounded_corank_search(n_gens: int, relators: list[tuple[int, ...]], rank: int, max_len: int,
                          parallel: int = 1) -> tuple[tuple[int, ...], ...] | None:
    """First surjection onto the free group of the given rank, over generator
    images of length at most ``max_len``, or None.

    Tuples are ordered by total image length, then length profile, then
    shortlex within each coordinate.  None means none up to the bound, not
    that the corank is smaller.
    """
    shapes = list(_shapes(n_gens, max_len))
    jobs = [(s, relators, rank) for s in shapes]
    if parallel <= 1:
        for job in jobs:
            hit = _search_shape(job)
            if hit is not None:
                return hit
        return None
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        # results come back in submission order, so the first hit is order-minimal
        for hit in pool.map(_search_shape, jobs, chunksize=1):
            if hit is not None:
                return hit
    return None


def verify_witness(images, relators, rank) -> bool:
    """Independent check of a search witness: relators die and images generate."""
    for rel in relators:
        acc: list[int] = []
        for x in rel:
            img = images[abs(x) - 1]
            acc.extend(img if x > 0 else W.invert(img))
        if W.free_reduce(acc):
            return False
    g = subgroup_graph([w for w in images if w])
    return all(accepts(g.graph, g.base, (x,)) for x in range(1, rank + 1))


# -- instance generators ------------------------------------------------------------------------------

def primitive_root_instance(seed: int, rank: int = 2, ks=(2, 3), steps: int = 4):
    """Adjoin a root to a random primitive element and pick a surjection.

    With ``gamma = alpha(a)`` and ``beta: a -> a^k``, the map
    ``delta o beta o alpha^-1`` on the base group together with
    ``r -> delta(a)`` is onto and sends ``gamma`` to the k-th power of the
    image of ``r``.
    """
    rng = random.Random(seed)
    k = rng.choice(list(ks))
    alpha, alpha_inv = W.random_automorphism(rank, steps, rng)
    delta, _ = W.random_automorphism(rank, rng.randint(0, 2), rng)
    gamma = alpha[1]
    beta = W.identity_map(rank)
    beta[1] = (1,) * k
    phi = W.compose(delta, W.compose(beta, alpha_inv))
    data = AdjoinRootData(rank, [(gamma, k)])
    gofg = adjoin_root_data_to_gofg(data, [phi[g] for g in range(1, rank + 1)], [delta[1]])
    return data, gofg


def hnn_conjugacy_instance(pairs: list[tuple[str, str]] | None = None) -> GraphOfFreeGroupsData:
    """HNN data over F(a, b).  The default is ``t a t^-1 = b`` with
    ``a -> x``, ``b -> y x y^-1``, ``t -> y``; the pair list
    ``[("a", "b"), ("b", "a")]`` adds a second stable letter sent to ``y^-1``."""
    pairs = pairs or [("a", "b")]
    img = {"a": (1,), "b": (2, 1, -2)}
    stable = {("a", "b"): (2,), ("b", "a"): (-2,)}
    edges, st = [], {}
    for j, (p, q) in enumerate(pairs):
        edges.append(GroupEdge(0, 0, (W.parse_letters(p), W.parse_letters(q)), "hnn"))
        if (p, q) not in stable:
            raise ConstructError(f"no stock stable letter image for {p} -> {q}")
        st[j] = stable[(p, q)]
    return GraphOfFreeGroupsData(2, [2], edges, [[img["a"], img["b"]]], st, scott=(1, 0))


def random_hnn_instance(seed: int, steps: int = 3) -> GraphOfFreeGroupsData:
    """The stock ``t a t^-1 = b`` instance twisted by a random automorphism.

    With ``sigma`` random, the edge words are ``sigma(a)`` and a random
    conjugate ``u sigma(b) u^-1``; the homomorphism is the stock one composed
    with ``sigma^-1``, and the stable letter goes to the image of ``u``
    followed by ``y``, so the map stays onto and the relation holds.
    """
    rng = random.Random(seed)
    sigma, sigma_inv = W.random_automorphism(2, steps, rng)
    u = tuple(rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(0, 2)))
    u = W.free_reduce(u)
    psi = {1: (1,), 2: (2, 1, -2)}
    phi = W.compose(psi, sigma_inv)
    w1 = sigma[1]
    w2 = W.free_reduce(u + sigma[2] + W.invert(u))
    t = W.free_reduce(W.apply_map(phi, u) + (2,))
    edge = GroupEdge(0, 0, (w1, w2), "hnn")
    return GraphOfFreeGroupsData(2, [2], [edge], [[phi[1], phi[2]]], {0: t}, scott=(1, 0))


# -- reports --------------------------------------------------------------------------------------------

def _circuit_letters(X: GoS, H, path) -> tuple[int, ...]:
    from .cylinders import circuit_word
    return circuit_word(X, H, path)


def _base_path(X: GoS, Hx, path) -> tuple[int, ...]:
    """The closed path in the origin graph traced by a horizontal circuit."""
    out: list[int] = []
    for o in path:
        seg = X.origin.edge[Hx.ekeys[o >> 1]]
        if o & 1:
            seg = tuple(x ^ 1 for x in reversed(seg))
        out.extend(seg)
    return tuple(out)


def _crossed_once(Hx, path) -> list[int]:
    counts: dict[int, int] = {}
    for o in path:
        counts[o >> 1] = counts.get(o >> 1, 0) + 1
    return sorted(e for e, n in counts.items() if n == 1)


def _separating(g: Graph, e: int) -> bool:
    rest = Graph(g.n_vertices, tuple(x for i, x in enumerate(g.edges) if i != e))
    return len(components(rest)) > len(components(g))


def theorem_report(built: Built, roots: AdjoinRootData) -> dict:
    """Minimise, check separability and tree edge spaces, then certify that
    each root's gamma is a free factor by a horizontal edge it crosses once."""
    from .cylinders import build_cylinders, transverse_tree_check

    res = minimize(built.X)
    Xc = res.gos
    sep = separability(Xc)
    trees = transverse_tree_check(Xc)
    data = build_cylinders(Xc)
    Hx = data.H
    d = built.data
    findings = []
    for i, (gamma, k) in enumerate(roots.roots):
        target = W.apply_map(d.vertex_map(0), gamma)
        key = W.unoriented_canonical(W.cyclic_core(target)[1])
        circuit = None
        for c in data.circuits:
            word = _circuit_letters(Xc, Hx, c)
            if word is not None and W.cyclic_core(word)[1] and W.unoriented_canonical(W.cyclic_core(word)[1]) == key:
                circuit = c
                break
        certificate = None
        if circuit is not None:
            for e in _crossed_once(Hx, circuit):
                if not _separating(Hx.graph, e):
                    certificate = {"edge": list(Hx.ekeys[e]), "crossings": 1}
                    break
        whitehead = W.is_primitive(W.Word(W.free_reduce(gamma), roots.rank))
        windings = [w for cyl in data.cylinders for row in cyl.windings for w in row]
        findings.append({
            "gamma": W.word_str(gamma),
            "k": k,
            "circuit_found": circuit is not None,
            "free_factor_certificate": certificate,
            "whitehead_primitive": whitehead,
            "agree": (certificate is not None) == whitehead,
            "winding_k_present": k in windings,
        })
    return {
        "formatVersion": FORMAT_VERSION,
        "kind": "theorem",
        "chi": list(chi_pair(Xc)),
        "separable": all(v.kind != "exceptional" for v in sep.values()),
        "vertex_kinds": {str(v): s.kind for v, s in sep.items()},
        "edge_spaces_trees": trees,
        "complexity": list(complexity(Xc)),
        "moves": len(res.trace),
        "roots": findings,
        "summary": (
            ("edge spaces: trees" if trees else "edge spaces: NOT trees")
            + "; "
            + ", ".join(
                f"factor: <{f['gamma']}> " + ("primitive" if f["whitehead_primitive"] else "not primitive")
                for f in findings
            )
        ),
    }


def conjugacy_classes(d: GraphOfFreeGroupsData) -> list[list[tuple[int, ...]]]:
    """Classes of maximal cyclic subgroups met by the edge words, grouped by
    the relation that each stable letter joins the classes of its two words.

    Each maximal cyclic subgroup is named by the unoriented canonical form
    of the root of its generator.
    """
    rank = d.vertex_ranks[0]
    uf = UnionFind()
    for ed in d.edges:
        keys = [W.root(W.cyclic_canonical(W.Word(W.free_reduce(w), rank)))[0].letters for w in ed.words]
        for k in keys:
            uf.add(k)
        uf.union(keys[0], keys[1])
    groups: dict = {}
    for ed in d.edges:
        for w in ed.words:
            k = W.root(W.cyclic_canonical(W.Word(W.free_reduce(w), rank)))[0].letters
            groups.setdefault(uf.find(k), set()).add(k)
    return sorted(sorted(g) for g in groups.values())


def _origin_path(X: GoS, Hx, path) -> tuple[int, ...]:
    out: list[int] = []
    for o in path:
        seg = X.origin.edge[Hx.ekeys[o >> 1]]
        if o & 1:
            seg = tuple(x ^ 1 for x in reversed(seg))
        out.extend(seg)
    return tuple(out)


def _spanning_generators(g: Graph, edges: list[int], circuit: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Closed paths at the start of an embedded ``circuit`` forming a free
    basis of the fundamental group of its component; the first is the
    circuit itself.  The spanning tree contains every circuit edge but the
    first."""
    base = g.iota(circuit[0])
    if len({g.iota(o) for o in circuit}) != len(circuit):
        raise ConstructError("boundary circuit is not embedded")
    parent: dict[int, int] = {base: -1}
    tree = set()
    for o in reversed(circuit[1:]):
        parent[g.iota(o)] = o ^ 1
        tree.add(o >> 1)
    queue = list(parent)
    edge_set = set(edges)
    while queue:
        x = queue.pop(0)
        for o in sorted(g.outgoing(x)):
            y = g.tau(o)
            if (o >> 1) in edge_set and y not in parent:
                parent[y] = o
                tree.add(o >> 1)
                queue.append(y)

    def from_base(v: int) -> tuple[int, ...]:
        out = []
        while parent[v] != -1:
            o = parent[v]
            out.append(o)
            v = g.iota(o)
        return tuple(reversed(out))

    gens = [tuple(circuit)]
    for e in sorted(edge_set - tree - {circuit[0] >> 1}):
        o = 2 * e
        back = tuple(x ^ 1 for x in reversed(from_base(g.tau(o))))
        gens.append(from_base(g.iota(o)) + (o,) + back)
    return gens


def corollary_report(d: GraphOfFreeGroupsData) -> dict:
    """Split an HNN realisation down to bad cylinders and read off a free
    factorization ``F = F1 * Z`` of the vertex group.

    Every claim is re-checked in the coordinates of a free basis of the
    vertex group's Stallings graph: the factors together form a basis, the
    generator of Z is primitive, and each edge word is conjugate into one
    of the two factors.
    """
    from .cylinders import build_cylinders, classify_cylinder, essential_boundary
    from .splitting import split_to_bad

    if len(d.vertex_ranks) != 1 or any(ed.kind != "hnn" for ed in d.edges):
        raise ConstructError("conjugacy data needs one vertex group and stable letters only")
    rank = d.vertex_ranks[0]
    classes = conjugacy_classes(d)
    single = [c for c in classes if len(c) == 1]
    if single:
        raise ConstructError(f"singleton class of maximal cyclic subgroups: {W.word_str(single[0][0])}")
    built = build_gos(d)
    res = minimize(built.X)
    sep = separability(res.gos)
    driven = split_to_bad(res.gos)
    Xb = driven.gos
    data = build_cylinders(Xb)
    Hx = data.H
    inf = Hx.infinite_edges()
    choice = None
    for ci, cyl in enumerate(data.cylinders):
        if classify_cylinder(data, cyl) != "bad":
            continue
        ess = essential_boundary(data, cyl)
        ambient = [c for c in cyl.circles if all(Hx.ekeys[o >> 1] in inf for o in data.circuits[c])]
        loose = [c for c in ambient if c not in ess]
        if loose:
            choice = (ci, loose[0])
            break
    if choice is None:
        raise ConstructError("no bad cylinder has an inessential boundary circuit")
    ci, zc = choice
    circuit = data.circuits[zc]
    comp = next((vs, es) for vs, es, _ in Hx.comps if (circuit[0] >> 1) in es)
    gens = _spanning_generators(Hx.graph, comp[1], circuit)

    basis = pi1_basis(built.H, built.bases[0])
    coords = [basis.coordinates(_origin_path(Xb, Hx, p)) for p in gens]
    z, f1 = coords[0], [c for c in coords[1:] if c]
    n = basis.rank
    joint = stallings_fold(wedge_of_words([z] + f1), 0)
    is_basis = len(f1) + 1 == n and subgroup_is_whole(joint.graph, joint.base, n)
    primitive = W.is_primitive(W.Word(z, n))
    f1_graph = stallings_fold(wedge_of_words(f1), 0).graph if f1 else Graph(1)

    touching = set()
    zverts = {Hx.graph.iota(o) for o in circuit}
    zedges = {o >> 1 for o in circuit}
    for i, (a, b) in enumerate(Hx.graph.edges):
        if i not in zedges and (a in zverts or b in zverts):
            touching.add(Hx.ekeys[i][0])
    weightless = all(Xb.edges[e].graph.n_edges == 0 for e in touching)

    placements = []
    for j, ed in enumerate(d.edges):
        for s, w in enumerate(ed.words):
            img = W.apply_map(d.vertex_map(0), w)
            path = read_path(built.H, built.bases[0], img)
            g = basis.coordinates(path) if path is not None else None
            where = None
            if g is not None:
                core = W.cyclic_core(g)[1]
                zc_core = W.cyclic_core(z)[1]
                if core and zc_core and len(core) % len(zc_core) == 0:
                    m = len(core) // len(zc_core)
                    for sign in (1, -1):
                        power = (zc_core if sign == 1 else W.invert(zc_core)) * m
                        if W.is_conjugate(W.Word(g, n), W.Word(power, n)):
                            where = "Z"
                if where is None and core and f1 and circle_immersion(core, f1_graph):
                    where = "F1"
            placements.append({"edge": j, "side": s + 1, "word": W.word_str(w),
                               "coordinates": W.word_str(g) if g is not None else None, "factor": where})
    gen_of_z = None
    for p in placements:
        if p["factor"] == "Z" and p["coordinates"] is not None:
            gen_of_z = p["word"]
            break
    checks = {
        "basis": is_basis,
        "z_primitive": primitive,
        "all_placed": all(p["factor"] is not None for p in placements),
        "f1_meets_some_word": any(p["factor"] == "F1" for p in placements),
        "touching_edges_weightless": weightless,
    }
    return {
        "formatVersion": FORMAT_VERSION,
        "kind": "corollary",
        "classes": [[W.word_str(k) for k in c] for c in classes],
        "separable": all(v.kind != "exceptional" for v in sep.values()),
        "splits": driven.splits,
        "bad_cylinder": ci,
        "z_circuit": list(circuit),
        "z": W.word_str(z),
        "z_contains": gen_of_z,
        "f1": [W.word_str(w) for w in f1],
        "placements": placements,
        "checks": checks,
        "ok": all(checks.values()),
        "summary": f"F = F1 * <{W.word_str(z)}> with F1 = <{', '.join(W.word_str(w) for w in f1)}>"
                   + (f"; Z carries {gen_of_z}" if gen_of_z else ""),
    }
