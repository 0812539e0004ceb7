"""Peripheral elements, pushing, splitting vertices and the split driver.

Moves are always applied to the whole space so that vertex and edge ids
stay meaningful; irreducible components (which keep ids) are only used to
decide where a move is needed and to locate splitting vertices.

A cylinder fibre in an edge space is identified by the set of edge-graph
vertices it covers.  Pushing a boundary vertex through its cylinder is a
walk along the circuit that carries it, which is how the rotation of the
cylinder acts on horizontal edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cylinders import CylinderData, build_cylinders, classify_cylinder, irreducible_components
from .gos import (
    End,
    GoS,
    NotSeparableError,
    canonical_form,
    chi_pair,
    classify_separable_vertex,
    collapse,
    complexity,
    fold,
    MinimizeResult,
    minimize,
    reduce,
    reducible_vertex,
)
from .graphs import bar


class SplittingError(ValueError):
    """A precondition of the splitting machinery does not hold."""


@dataclass(frozen=True)
class Fibre:
    edge: int                      # underlying edge whose edge space contains the fibre
    cylinder: int
    index: int                     # position in the cylinder's edge-fibre list
    vertices: frozenset[int]       # edge-graph vertices covered
    squares: frozenset[int]        # edge-graph edges covered


@dataclass(frozen=True)
class PeripheralElement:
    fibre: Fibre
    vertex: int                    # the boundary vertex, an edge-graph vertex

    @property
    def edge(self) -> int:
        return self.fibre.edge


@dataclass(frozen=True)
class SplittingVertex:
    vertex: int
    outgoing: End
    primary: End
    secondary: End
    triple_point: int
    witness: PeripheralElement

    def to_json(self) -> dict:
        return {
            "vertex": self.vertex,
            "outgoing": list(self.outgoing),
            "primary": list(self.primary),
            "secondary": list(self.secondary),
            "triplePoint": self.triple_point,
            "witness": {"edge": self.witness.edge, "vertex": self.witness.vertex,
                        "fibre": sorted(self.witness.fibre.vertices)},
        }


@dataclass
class PushTrace:
    path: list[int]                         # underlying edges crossed, in order
    points: list[tuple[int, int]]           # horizontal edge carrying the pushed vertex at each integer time
    crossings: list[tuple[int, int]]        # horizontal vertices passed between consecutive times
    fibres: list[Fibre]                     # the pushed fibre at each integer time
    arrival: End | None = None              # end through which the last crossing enters its vertex


# -- fibre families ------------------------------------------------------------------

def fibre_family(data: CylinderData, e: int) -> list[Fibre]:
    """Images in the edge space of ``e`` of all cylinder edge fibres.

    Raises ValueError when a fibre is not embedded or two fibres share two
    vertices; neither happens on an irreducible separable space.
    """
    out = []
    for ci, cyl in enumerate(data.cylinders):
        for fi, (g, nodes, labels) in enumerate(cyl.edge_fibres):
            keys = [data.H.ekeys[data.circuits[c][p] >> 1] for c, p in nodes]
            if keys[0][0] != e:
                continue
            if any(k[0] != e for k in keys):
                raise ValueError("edge fibre spans two edge spaces")
            verts = frozenset(y for _, y in keys)
            if len(verts) != len(keys):
                raise ValueError(f"fibre {fi} of cylinder {ci} is not embedded in edge space {e}")
            squares = frozenset(sq[1] for _, sq in labels)
            out.append(Fibre(e, ci, fi, verts, squares))
    for a in range(len(out)):
        for b in range(a + 1, len(out)):
            if len(out[a].vertices & out[b].vertices) >= 2:
                raise ValueError(f"fibres in edge space {e} share two vertices")
    return out


def boundary_vertices(data: CylinderData, e: int) -> list[int]:
    """Edge-graph vertices of ``e`` whose horizontal edge lies in the
    non-circle part of the horizontal graph."""
    inf = data.H.infinite_edges()
    return [y for y in range(data.X.edges[e].graph.n_vertices) if (e, y) in inf]


def peripheral_elements(X: GoS, e: int, data: CylinderData | None = None) -> list[PeripheralElement]:
    data = data or build_cylinders(X)
    family = fibre_family(data, e)
    out = []
    for y in boundary_vertices(data, e):
        holders = [F for F in family if y in F.vertices]
        if len(holders) == 1:
            out.append(PeripheralElement(holders[0], y))
    return out


# -- pushing ----------------------------------------------------------------------------

def _fibre_at(data: CylinderData, families: dict, key: tuple[int, int]) -> Fibre:
    e, y = key
    if e not in families:
        families[e] = fibre_family(data, e)
    for F in families[e]:
        if y in F.vertices:
            return F
    raise ValueError(f"horizontal edge {key} lies in no fibre")


def _carrier(data: CylinderData, pe: PeripheralElement) -> tuple[int, int]:
    """(circuit, position) of the pushed vertex inside its fibre's cylinder."""
    cyl = data.cylinders[pe.fibre.cylinder]
    _, nodes, _ = cyl.edge_fibres[pe.fibre.index]
    for c, p in nodes:
        if data.H.ekeys[data.circuits[c][p] >> 1] == (pe.edge, pe.vertex):
            return c, p
    raise ValueError("boundary vertex is not on its fibre")


def push_steps(data: CylinderData, pe: PeripheralElement, steps: int, direction: int) -> PushTrace:
    """Rotate the cylinder of ``pe`` by ``steps`` edge positions in ``direction``."""
    c, p = _carrier(data, pe)
    circ = data.circuits[c]
    L = len(circ)
    H = data.H
    families: dict = {}
    trace = PushTrace([], [H.ekeys[circ[p] >> 1]], [], [pe.fibre])
    for _ in range(steps):
        o = circ[p] if direction == 1 else bar(circ[p])
        hv = H.graph.tau(o)
        p = (p + direction) % L
        nxt = circ[p] if direction == 1 else bar(circ[p])
        key = H.ekeys[nxt >> 1]
        trace.crossings.append(H.vkeys[hv])
        trace.path.append(key[0])
        trace.points.append(key)
        trace.fibres.append(_fibre_at(data, families, key))
    return trace


def push(X: GoS, pe: PeripheralElement, path: list[int], data: CylinderData | None = None) -> PushTrace:
    """Push a peripheral fibre along a sequence of underlying edges.

    The path must be the projection of a rotation of the fibre's cylinder;
    anything else cannot be lifted and raises ValueError.
    """
    data = data or build_cylinders(X)
    if not path:
        return push_steps(data, pe, 0, 1)
    for direction in (1, -1):
        t = push_steps(data, pe, len(path), direction)
        if t.path == list(path):
            return t
    raise ValueError("path does not lift along the cylinder of the fibre")


def _arrival_end(data: CylinderData, o: int) -> End:
    e, _ = data.H.ekeys[o >> 1]
    return (e, 1) if o % 2 == 0 else (e, 0)


def _walk_to_triple(data: CylinderData, pe: PeripheralElement, direction: int) -> tuple[int, int, End, PeripheralElement] | None:
    """Walk from the boundary vertex along its circuit until a horizontal
    vertex of valence three.  Returns (steps, GoS vertex, arrival end, the
    pushed peripheral element just before arrival)."""
    c, p = _carrier(data, pe)
    circ = data.circuits[c]
    H = data.H
    families: dict = {}
    fibre = pe.fibre
    for steps in range(len(circ)):
        o = circ[p] if direction == 1 else bar(circ[p])
        hv = H.graph.tau(o)
        if H.graph.valence(hv) == 3:
            key = H.ekeys[o >> 1]
            return steps, H.vkeys[hv][0], _arrival_end(data, o), PeripheralElement(fibre, key[1])
        p = (p + direction) % len(circ)
        nxt = circ[p] if direction == 1 else bar(circ[p])
        fibre = _fibre_at(data, families, H.ekeys[nxt >> 1])
    return None


# -- splitting vertices -------------------------------------------------------------------

def check_splitting_vertex(X: GoS, sv: SplittingVertex, data: CylinderData | None = None) -> list[str]:
    """Which defining conditions fail (empty when ``sv`` is a splitting vertex)."""
    problems = []
    if sv.vertex not in X.vertices:
        return [f"no vertex {sv.vertex}"]
    cls = classify_separable_vertex(X, sv.vertex)
    if cls.kind != "splittable":
        problems.append(f"vertex {sv.vertex} is {cls.kind}, not splittable")
        return problems
    if cls.outgoing != sv.outgoing:
        problems.append("outgoing edge is not the edge isomorphic to the vertex graph")
    if X.edges[sv.outgoing[0]].is_loop():
        problems.append("outgoing edge is a loop")
    if {sv.primary, sv.secondary, sv.outgoing} != set(cls.ends):
        problems.append("incoming edges do not match the ends at the vertex")
    if cls.triple_point != sv.triple_point:
        problems.append("triple point mismatch")
    data = data or build_cylinders(X)
    if sv.primary[0] in X.edges:
        pes = peripheral_elements(X, sv.primary[0], data)
        if sv.witness not in pes:
            problems.append("witness is not a peripheral element of the primary edge space")
        elif X.end_map(sv.primary)[0][sv.witness.vertex] != sv.triple_point:
            problems.append("boundary vertex does not map to the triple point")
    return problems


def splitting_vertices(X: GoS, data: CylinderData | None = None) -> list[SplittingVertex]:
    """Every (vertex, primary edge, witness) meeting the definition, by direct search."""
    data = data or build_cylinders(X)
    out = []
    for v in sorted(X.vertices):
        cls = classify_separable_vertex(X, v)
        if cls.kind != "splittable" or X.edges[cls.outgoing[0]].is_loop():
            continue
        incoming = [end for end in cls.ends if end != cls.outgoing]
        for k, e1 in enumerate(incoming):
            vmap = X.end_map(e1)[0]
            for pe in peripheral_elements(X, e1[0], data):
                if vmap[pe.vertex] == cls.triple_point:
                    out.append(SplittingVertex(v, cls.outgoing, e1, incoming[1 - k], cls.triple_point, pe))
    return out


def pushed_splitting_vertex(X: GoS, data: CylinderData | None = None) -> SplittingVertex | None:
    """Push peripheral boundary vertices along their circuits to the nearest
    triple point; shortest push first, ties to the lowest edge id."""
    data = data or build_cylinders(X)
    found = []
    for e in sorted(X.edges):
        for pe in peripheral_elements(X, e, data):
            for direction in (1, -1):
                hit = _walk_to_triple(data, pe, direction)
                if hit is None:
                    continue
                steps, v, arrival, landed = hit
                cls = classify_separable_vertex(X, v)
                if cls.kind != "splittable" or arrival == cls.outgoing or arrival not in cls.ends:
                    continue
                other = next(end for end in cls.ends if end not in (arrival, cls.outgoing))
                sv = SplittingVertex(v, cls.outgoing, arrival, other, cls.triple_point, landed)
                found.append((steps, e, pe.vertex, direction, sv))
    for *_, sv in sorted(found, key=lambda t: t[:4]):
        if not check_splitting_vertex(X, sv, data):
            return sv
    return None


def _is_irreducible(X: GoS) -> bool:
    comps = irreducible_components(X)
    return len(comps) == 1 and len(comps[0].edges) == len(X.edges) and len(comps[0].vertices) == len(X.vertices)


def find_splitting_vertex(X: GoS) -> SplittingVertex:
    """A splitting vertex of an irreducible separable space whose underlying
    graph has negative Euler characteristic and whose cylinders are all good."""
    if not _is_irreducible(X):
        raise SplittingError("precondition: space is not irreducible")
    a, b = chi_pair(X)
    if a != b:
        raise SplittingError("precondition: space is not separable (Euler characteristics differ)")
    kinds = {classify_separable_vertex(X, v).kind for v in X.vertices}
    if "exceptional" in kinds:
        raise SplittingError("precondition: space is not separable (vertex without a triple point)")
    if b >= 0:
        raise SplittingError("precondition: underlying graph has non-negative Euler characteristic")
    data = build_cylinders(X)
    if any(classify_cylinder(data, c) == "bad" for c in data.cylinders):
        raise SplittingError("precondition: space has a bad cylinder")
    sv = pushed_splitting_vertex(X, data)
    if sv is None:
        direct = splitting_vertices(X, data)
        if not direct:
            raise SplittingError("no boundary vertex can be pushed to a splitting vertex")
        sv = direct[0]
    return sv


# -- the splitting move ----------------------------------------------------------------------

def _weightless(X: GoS) -> int:
    return sum(1 for ue in X.edges.values() if ue.graph.n_edges == 0)


def relative_weight(X: GoS, v: int) -> int:
    return sum(X.vertex_weight(u) for u in X.vertices if u != v)


def _component_of(X: GoS, v: int) -> GoS | None:
    return next((Y for Y in irreducible_components(X) if v in Y.vertices), None)


def _best_relative_weight(X: GoS) -> int | None:
    best = None
    for Y in irreducible_components(X):
        for sv in splitting_vertices(Y):
            w = relative_weight(Y, sv.vertex)
            best = w if best is None else min(best, w)
    return best


@dataclass
class SplitOutcome:
    gos: GoS
    J: tuple[End, End]
    merged: int
    weightless_created: bool
    relative_before: int
    relative_after: int | None


def split(X: GoS, sv: SplittingVertex, component: GoS | None = None) -> SplitOutcome:
    """Collapse the outgoing edge, then fold the primary incoming edge with
    one of the two edges at the far end.

    ``component`` is the irreducible component in which ``sv`` was found;
    by default X itself.  Both choices of partner are tried and the first
    that is a nontrivial fold and either creates a weightless edge or leaves
    a splitting vertex of smaller relative weight is kept.
    """
    Y = component if component is not None else X
    if check_splitting_vertex(Y, sv):
        raise SplittingError("stale splitting vertex: " + "; ".join(check_splitting_vertex(Y, sv)))
    e, side = sv.outgoing
    v = sv.vertex
    vp = X.edges[e].vertex(1 - side)
    Xbar = collapse(X, e)
    merged = min(v, vp)
    ends = Xbar.ends_at(merged)
    first = (sv.primary[0], sv.primary[1])
    partners = [end for end in ends
                if end not in (sv.primary, sv.secondary) and Xbar.edges[end[0]].graph.n_edges > 0]
    if first not in ends or not partners:
        raise SplittingError("collapsed vertex does not carry the expected edges")
    before_rel = relative_weight(Y, v)
    base_key = canonical_form(reduce(Xbar)[0])
    w0 = _weightless(X)
    for partner in partners:
        J = (first, partner)
        Xs, _ = fold(Xbar, merged, J)
        if canonical_form(reduce(Xs)[0]) == base_key:
            continue
        created = _weightless(Xs) > w0
        after = None if created else _best_relative_weight(Xs)
        if created or (after is not None and after < before_rel):
            return SplitOutcome(Xs, J, merged, created, before_rel, after)
    raise SplittingError("neither fold of the collapsed vertex decreases the relative weight")


# -- driver ------------------------------------------------------------------------------

def reduce_components(X: GoS) -> tuple[GoS, list[dict]]:
    """Apply to X the collapses that reduce each irreducible component.

    Deleting weightless edges can leave valence-two vertices inside a
    component; collapsing them in X keeps X and its components in step.
    """
    trace = []
    while True:
        for Y in irreducible_components(X):
            hit = next(((v, e) for v in sorted(Y.vertices) if (e := reducible_vertex(Y, v)) is not None), None)
            if hit is not None:
                v, e = hit
                X = collapse(X, e)
                trace.append({"move": "collapse", "edge": e, "vertex": v})
                break
        else:
            return X, trace


def _needs_split(Y: GoS) -> bool:
    if len(Y.vertices) - len(Y.edges) >= 0:
        return False
    data = build_cylinders(Y)
    return bool(data.cylinders) and all(classify_cylinder(data, c) == "good" for c in data.cylinders)


def component_verdicts(X: GoS) -> list[dict]:
    X, _ = reduce_components(X)
    rows = []
    for Y in irreducible_components(X):
        data = build_cylinders(Y)
        rows.append({
            "vertices": sorted(Y.vertices),
            "chiU": len(Y.vertices) - len(Y.edges),
            "verdicts": [classify_cylinder(data, c) for c in data.cylinders],
        })
    return rows


@dataclass
class SplitToBadResult:
    gos: GoS
    trace: list[dict] = field(default_factory=list)
    splits: int = 0


def split_to_bad(X: GoS, cap: int | None = None) -> SplitToBadResult:
    """Split until every irreducible component has a bad cylinder or an
    underlying graph of non-negative Euler characteristic."""
    a, b = chi_pair(X)
    if a != b:
        raise NotSeparableError(f"chi(horizontal)={a} differs from chi(underlying)={b}")
    cap = cap if cap is not None else 4 * X.total_weight() + 10
    trace: list[dict] = []
    splits = 0
    seen = {canonical_form(X)}
    while True:
        X, sub = reduce_components(X)
        trace.extend(sub)
        target = next((Y for Y in irreducible_components(X) if _needs_split(Y)), None)
        if target is None:
            return SplitToBadResult(X, trace, splits)
        if splits >= cap:
            raise RuntimeError("split_to_bad exceeded its iteration cap")
        find_splitting_vertex(target)      # checks the preconditions
        sv = min(splitting_vertices(target), key=lambda c: relative_weight(target, c.vertex))
        before = complexity(reduce(X)[0])
        out = split(X, sv, target)
        res = minimize(out.gos)
        Xn = res.gos
        if canonical_form(Xn) in seen:
            # minimizing folded the split straight back; continue from the
            # split itself, whose relative weight is the one that decreased
            Xn, sub = reduce(out.gos)
            res = MinimizeResult(Xn, sub)
            if canonical_form(Xn) in seen:
                raise RuntimeError("split_to_bad revisited a state")
        a, b = chi_pair(Xn)
        if a != b:
            raise RuntimeError("split broke the Euler characteristic equality")
        trace.append({
            "move": "split",
            "vertex": sv.vertex,
            "outgoing": list(sv.outgoing),
            "J": [list(j) for j in out.J],
            "before": list(before),
            "after": list(complexity(Xn)),
            "relativeWeight": [out.relative_before, out.relative_after],
            "weightlessCreated": out.weightless_created,
            "components": component_verdicts(Xn),
        })
        trace.extend(res.trace)
        X = Xn
        seen.add(canonical_form(X))
        splits += 1


def final_state_ok(X: GoS) -> bool:
    """Every irreducible component has a bad cylinder or is not hyperbolic."""
    X, _ = reduce_components(X)
    return not any(_needs_split(Y) for Y in irreducible_components(X))


__all__ = [
    "Fibre", "PeripheralElement", "PushTrace", "SplitOutcome", "SplitToBadResult", "SplittingError",
    "SplittingVertex", "boundary_vertices", "check_splitting_vertex", "component_verdicts", "fibre_family",
    "final_state_ok", "find_splitting_vertex", "peripheral_elements", "push", "push_steps",
    "pushed_splitting_vertex", "reduce_components", "relative_weight", "split", "split_to_bad", "splitting_vertices",
]
