"""Canonical labelling of small vertex-coloured graphs.

Colour refinement followed by individualisation with backtracking, with
pruning by automorphisms discovered at the leaves.  Intended for graphs of a
few hundred vertices where exactness matters more than speed.
"""

from __future__ import annotations

from typing import Hashable, Sequence


def _refine(cells: list[list[int]], adj: Sequence[Sequence[int]]) -> list[list[int]]:
    n = sum(len(c) for c in cells)
    where = [0] * n
    while True:
        for k, c in enumerate(cells):
            for x in c:
                where[x] = k
        out: list[list[int]] = []
        changed = False
        for k, c in enumerate(cells):
            if len(c) == 1:
                out.append(c)
                continue
            sig = {}
            for x in c:
                sig[x] = tuple(sorted(where[y] for y in adj[x]))
            keys = sorted(set(sig.values()))
            if len(keys) == 1:
                out.append(c)
                continue
            changed = True
            for key in keys:
                out.append([x for x in c if sig[x] == key])
        cells = out
        if not changed:
            return cells


def _individualize(cells: list[list[int]], k: int, v: int) -> list[list[int]]:
    c = cells[k]
    rest = [x for x in c if x != v]
    return cells[:k] + [[v], rest] + cells[k + 1:]


def canonical_form(colors: Sequence[Hashable], adj: Sequence[Sequence[int]], with_labeling: bool = False):
    """Canonical certificate of a coloured undirected graph.

    ``colors`` must be mutually comparable.  Two inputs get equal
    certificates iff they are isomorphic as coloured graphs.
    """
    n = len(colors)
    palette = sorted(set(colors))
    cells = [[x for x in range(n) if colors[x] == col] for col in palette]
    cells = [c for c in cells if c]
    color_seq = tuple(colors[c[0]] for c in cells for _ in c)
    adj = [list(a) for a in adj]

    best: list = [None, None]          # certificate, labelling (position -> vertex)
    leaves: dict[tuple, list[int]] = {}
    automorphisms: list[list[int]] = []

    def certificate(order: list[int]) -> tuple:
        pos = {v: i for i, v in enumerate(order)}
        return tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b])) for a in range(n) for b in adj[a] if a <= b))

    def orbits_fixing(prefix: list[int]) -> dict[int, int]:
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in automorphisms:
            if all(g[p] == p for p in prefix):
                for x in range(n):
                    a, b = find(x), find(g[x])
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return {x: find(x) for x in range(n)}

    def search(cells: list[list[int]], prefix: list[int]):
        cells = _refine(cells, adj)
        target = None
        for k, c in enumerate(cells):
            if len(c) > 1 and (target is None or len(c) < len(cells[target])):
                target = k
        if target is None:
            order = [c[0] for c in cells]
            cert = certificate(order)
            if cert in leaves:
                other = leaves[cert]
                perm = [0] * n
                for a, b in zip(other, order):
                    perm[a] = b
                automorphisms.append(perm)
            else:
                leaves[cert] = order
            if best[0] is None or cert < best[0]:
                best[0], best[1] = cert, order
            return
        tried_roots: set[int] = set()
        for v in sorted(cells[target]):
            if tried_roots:
                orb = orbits_fixing(prefix)
                if orb[v] in {orb[t] for t in tried_roots}:
                    continue
            tried_roots.add(v)
            search(_individualize(cells, target, v), prefix + [v])

    search(cells, [])
    result = (color_seq, best[0])
    if with_labeling:
        return result, best[1]
    return result
