"""Command-line front end.

Every subcommand reads an instance file (or a word), prints a one-line
summary and optionally writes a JSON report with ``--json PATH`` (``-``
writes the report to stdout instead of the summary).

Exit codes: 0 success, 2 precondition failure, 1 internal invariant
violation, 3 unparsable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass

from . import construct as C
from . import cylinders as CY
from . import gos as G
from . import oracles as O
from . import splitting as SP
from . import uot as U
from . import words as W
from .generate import random_gos

FORMAT_VERSION = 1
KINDS = ("adjoin-root", "hnn-conjugacy", "raw-gos", "union-of-trees")

EXIT_OK, EXIT_INTERNAL, EXIT_PRECONDITION, EXIT_PARSE = 0, 1, 2, 3


class ParseError(Exception):
    pass


class PreconditionError(Exception):
    pass


class InvariantError(Exception):
    pass


@dataclass
class Instance:
    kind: str
    payload: dict
    seed: int | None = None

    def to_json(self) -> dict:
        out = {"formatVersion": FORMAT_VERSION, "kind": self.kind, "payload": self.payload}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


# -- loading ----------------------------------------------------------------------------------

def load_instance(path: str) -> Instance:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not JSON: {exc}") from exc
    if not isinstance(data, dict) or "kind" not in data or "payload" not in data:
        raise ParseError(f"{path}: expected an object with 'kind' and 'payload'")
    if data["kind"] not in KINDS:
        raise ParseError(f"{path}: unknown kind {data['kind']!r}")
    if data.get("formatVersion", FORMAT_VERSION) != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported formatVersion {data.get('formatVersion')}")
    return Instance(data["kind"], data["payload"], data.get("seed"))


def _parse(fn, *args):
    try:
        return fn(*args)
    except (KeyError, TypeError, W.WordError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed payload: {exc!r}") from exc


def _roots(inst: Instance) -> C.AdjoinRootData:
    p = inst.payload
    roots = [(W.free_reduce(W.parse_letters(r["gamma"])), int(r["k"])) for r in p["roots"]]
    return C.AdjoinRootData(int(p["rank"]), roots)


def derived_surjection(a: C.AdjoinRootData) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Base and root images making gamma a k-th power, for a primitive gamma.

    A Whitehead reduction sends gamma to a conjugate ``u l u^-1`` of a
    letter; composing with ``l -> l^k`` sends gamma to the k-th power of the
    image of ``u l u^-1``, and the images still generate.
    """
    if len(a.roots) != 1:
        raise PreconditionError("images can only be derived for a single root; give baseImages and rootImages")
    gamma, k = a.roots[0]
    length, _, seq = W.whitehead_minimize(W.Word(gamma, a.rank))
    if length != 1:
        raise PreconditionError(f"{W.word_str(gamma)} is not primitive; give baseImages and rootImages")
    sigma = W.identity_map(a.rank)
    for aut in seq:
        sigma = W.compose(aut.images(), sigma)
    image = W.apply_map(sigma, gamma)
    u, core = W.cyclic_core(image)
    letter = core[0]
    beta = W.identity_map(a.rank)
    beta[abs(letter)] = (abs(letter),) * k
    phi = W.compose(beta, sigma)
    root = W.free_reduce(W.apply_map(beta, u) + (letter,) + W.invert(W.apply_map(beta, u)))
    if W.free_reduce(W.apply_map(phi, gamma)) != W.free_reduce(root * k):
        raise InvariantError("derived surjection does not send gamma to a k-th power")
    return [phi[g] for g in range(1, a.rank + 1)], [root]


def adjoin_root_gofg(inst: Instance) -> tuple[C.AdjoinRootData, C.GraphOfFreeGroupsData]:
    a = _parse(_roots, inst)
    try:
        a.check()
    except C.ConstructError as exc:
        raise PreconditionError(str(exc)) from exc
    p = inst.payload
    if "baseImages" in p:
        base = [W.parse_letters(w) for w in p["baseImages"]]
        roots = [W.parse_letters(w) for w in p["rootImages"]]
    else:
        base, roots = derived_surjection(a)
    return a, C.adjoin_root_data_to_gofg(a, base, roots)


def load_space(inst: Instance) -> tuple[G.GoS, C.Built | None]:
    """The graph of spaces an instance describes, plus build data if built."""
    if inst.kind == "raw-gos":
        return _parse(G.GoS.from_json, inst.payload), None
    if inst.kind == "adjoin-root":
        _, d = adjoin_root_gofg(inst)
    elif inst.kind == "hnn-conjugacy":
        d = _parse(C.GraphOfFreeGroupsData.from_json, inst.payload)
    else:
        raise PreconditionError(f"kind {inst.kind} does not describe a graph of spaces")
    built = C.build_gos(d)
    return built.X, built


def require_kind(inst: Instance, *kinds: str) -> None:
    if inst.kind not in kinds:
        raise PreconditionError(f"expected kind {' or '.join(kinds)}, got {inst.kind}")


# -- commands ---------------------------------------------------------------------------------------

def _report(kind: str, summary: str, **body) -> dict:
    return {"formatVersion": FORMAT_VERSION, "kind": kind, "summary": summary, **body}


def _write_dot(args, name: str, text: str) -> None:
    if getattr(args, "dot", None):
        os.makedirs(args.dot, exist_ok=True)
        with open(os.path.join(args.dot, name), "w") as fh:
            fh.write(text + "\n")


def cmd_validate(inst: Instance, args=None) -> dict:
    if inst.kind == "union-of-trees":
        try:
            Z = U.UnionOfTrees.from_json(inst.payload)
        except U.UnionOfTreesError as exc:
            raise PreconditionError(f"invalid union of trees: {exc}") from exc
        return _report("validate", "valid union of trees", valid=True, problems=[], instance=inst.to_json(),
                       method="structural checks")
    X, _ = load_space(inst)
    problems = G.validate(X)
    if problems:
        raise PreconditionError("invalid graph of spaces: " + "; ".join(problems))
    chi = G.chi_pair(X)
    return _report("validate", f"valid; chi(horizontal)={chi[0]}, chi(underlying)={chi[1]}", valid=True,
                   problems=[], chi=list(chi), euler_lemma=chi[0] <= chi[1], instance=inst.to_json(),
                   method="2-cover and immersion checks")


def cmd_minimize(inst: Instance, args=None) -> dict:
    X, _ = load_space(inst)
    if G.validate(X):
        raise PreconditionError("invalid graph of spaces")
    res = G.minimize(X)
    Y = res.gos
    if not G.all_unfoldable(Y):
        raise InvariantError("minimized space has a foldable vertex")
    out = Instance("raw-gos", Y.without_origin().to_json())
    _write_dot(args, "minimized.dot", G.to_dot(Y))
    c = G.complexity(Y)
    return _report("minimize", f"complexity {tuple(c)} after {len(res.trace)} moves", complexity=list(c),
                   trace=res.trace, result=out.to_json(), instance=inst.to_json(),
                   method="steepest descent; unfoldability re-checked")


def cmd_cylinders(inst: Instance, args=None) -> dict:
    X, _ = load_space(inst)
    if getattr(args, "minimize", False):
        X = G.minimize(X).gos
    rep = CY.cylinder_report(X)
    bands = CY.trace_annuli(X)
    if sum(b.length for b in bands) != CY.square_count(X):
        raise InvariantError("bands do not partition the squares")
    agree = sorted((frozenset(b.squares) for b in bands), key=sorted) == O.band_oracle(X)
    if not agree:
        raise InvariantError("band tracing disagrees with the corner-gluing oracle")
    _write_dot(args, "squares.dot", CY.matching_dot(X))
    verdicts = [row["verdict"] for row in rep["cylinders"]]
    summary = f"{len(bands)} bands over {rep['squares']} squares; cylinders: {', '.join(verdicts) or 'none'}"
    return _report("cylinders", summary, report=rep, oracle_agrees=agree, instance=inst.to_json(),
                   method="square matching, cross-checked by corner gluing")


def cmd_split(inst: Instance, args=None) -> dict:
    X, _ = load_space(inst)
    X = G.minimize(X).gos
    try:
        res = SP.split_to_bad(X)
    except (G.NotSeparableError, SP.SplittingError) as exc:
        raise PreconditionError(str(exc)) from exc
    ok = SP.final_state_ok(res.gos)
    if not ok:
        raise InvariantError("split_to_bad ended with a component needing a split")
    verdicts = SP.component_verdicts(res.gos)
    return _report("split", f"{res.splits} splits; components: {verdicts}", splits=res.splits, trace=res.trace,
                   verdicts=verdicts, result=Instance("raw-gos", res.gos.without_origin().to_json()).to_json(),
                   instance=inst.to_json(), method="split/minimize loop; final state re-classified")


def cmd_theorem(inst: Instance, args=None) -> dict:
    require_kind(inst, "adjoin-root")
    a, d = adjoin_root_gofg(inst)
    built = C.build_gos(d)
    rep = C.theorem_report(built, a)
    if not all(f["agree"] for f in rep["roots"]):
        raise InvariantError("free factor certificate and Whitehead test disagree")
    return _report("theorem", rep["summary"], report=rep, instance=inst.to_json(),
                   method="minimize + separability + tree check; primitivity by Whitehead")


def cmd_corollary(inst: Instance, args=None) -> dict:
    require_kind(inst, "hnn-conjugacy")
    d = _parse(C.GraphOfFreeGroupsData.from_json, inst.payload)
    try:
        rep = C.corollary_report(d)
    except (C.ConstructError, G.NotSeparableError, SP.SplittingError) as exc:
        raise PreconditionError(str(exc)) from exc
    if not rep["ok"]:
        raise InvariantError("factorization failed its checks: " + json.dumps(rep["checks"]))
    return _report("corollary", rep["summary"], report=rep, instance=inst.to_json(),
                   method="split to bad cylinder; Whitehead, conjugacy and membership checks")


def cmd_uot(inst: Instance, args=None) -> dict:
    require_kind(inst, "union-of-trees")
    try:
        Z = _parse(U.UnionOfTrees.from_json, inst.payload)
        d = U.deltas(Z)
    except U.UnionOfTreesError as exc:
        raise PreconditionError(str(exc)) from exc
    bal = U.kappa_balance(Z)
    if not bal.holds or bal.marked_bound is False:
        raise InvariantError("kappa balance failed")
    seed = getattr(args, "seed", None) or 0
    ind = U.tree_independence(Z, 8, seed)
    body = {
        "deltas": d.to_json(),
        "balance": {"lhs": str(bal.lhs), "rhs": str(bal.rhs), "holds": bal.holds, "markedBound": bal.marked_bound},
        "treeIndependence": {"independent": ind.independent, "differenceConstant": ind.difference_constant,
                             "counterexample": [list(t) for t in ind.counterexample] if ind.counterexample else None},
        "treelike": U.is_treelike(Z),
    }
    if body["treelike"]:
        try:
            dec = U.product_decomposition(Z)
        except U.UnionOfTreesError as exc:
            if not Z.marked_count():
                raise InvariantError(f"treelike complex has no product decomposition: {exc}") from exc
            # marked complexes need not be products
            body["decomposition"] = {"error": str(exc)}
        else:
            body["decomposition"] = dec.to_json()
            body["reassembles"] = U.same_complex(U.reassemble(Z, dec), Z)
        if not Z.marked_count():
            leaf = U.leaf_space(Z)
            body["leafSpace"] = leaf.to_json()
            _write_dot(args, "leafspace.dot", leaf.graph.to_dot("leafspace"))
    summary = (f"class Z{d.zclass}; dq- = {d.q_minus}, dq+ = {d.q_plus}, dp- = {d.p_minus}, dp+ = {d.p_plus}; "
               f"balance {'holds' if bal.holds else 'fails'}; {'treelike' if body['treelike'] else 'not treelike'}")
    return _report("uot", summary, **body, instance=inst.to_json(), method="boundary graph counts, two routes")


def cmd_primitive(word: str, rank: int) -> dict:
    letters = _parse(W.parse_letters, word)
    if letters and max(abs(x) for x in letters) > rank:
        raise ParseError(f"{word!r} uses letters beyond rank {rank}")
    w = W.Word(W.free_reduce(letters), rank)
    if not W.cyclic_core(w.letters)[1]:
        raise PreconditionError("the trivial element is not primitive")
    length, c, seq = W.whitehead_minimize(w)
    summary = "primitive" if length == 1 else f"not primitive, minimal length {length}"
    return _report("primitive", summary, word=W.word_str(w.letters), rank=rank, minimalLength=length,
                   minimalWord=W.word_str(c.letters), automorphisms=[str(a) for a in seq],
                   method="Whitehead peak reduction")


def presentation(a: C.AdjoinRootData) -> tuple[int, list[tuple[int, ...]]]:
    """Generators and relators of the group with the roots adjoined."""
    n = a.rank + len(a.roots)
    rels = []
    for i, (gamma, k) in enumerate(a.roots):
        r = a.rank + i + 1
        rels.append(W.free_reduce((r,) * k + W.invert(gamma)))
    return n, rels


def cmd_corank_search(inst: Instance, max_length: int, parallel: int = 1) -> dict:
    require_kind(inst, "adjoin-root")
    a = _parse(_roots, inst)
    try:
        a.check()
    except C.ConstructError as exc:
        raise PreconditionError(str(exc)) from exc
    n, rels = presentation(a)
    t0 = time.perf_counter()
    hit = C.bounded_corank_search(n, rels, a.rank, max_length, parallel)
    elapsed = time.perf_counter() - t0
    if hit is None:
        return _report("corank-search", f"none up to {max_length}", witness=None, maxLength=max_length,
                       seconds=round(elapsed, 3), instance=inst.to_json(), method="bounded enumeration")
    if not C.verify_witness(hit, rels, a.rank):
        raise InvariantError("search witness failed verification")
    imgs = [W.word_str(w) for w in hit]
    return _report("corank-search", "witness " + ", ".join(imgs), witness=imgs, maxLength=max_length,
                   seconds=round(elapsed, 3), instance=inst.to_json(),
                   method="bounded enumeration; witness re-verified by folding")


def generate(kind: str, seed: int) -> Instance:
    if kind == "raw-gos":
        return Instance(kind, random_gos(seed).without_origin().to_json(), seed)
    if kind == "adjoin-root":
        a, d = C.primitive_root_instance(seed)
        gamma, k = a.roots[0]
        base = d.vertex_images[0]
        root = d.vertex_images[1][0]
        return Instance(kind, {"rank": a.rank, "roots": [{"gamma": W.word_str(gamma), "k": k}],
                               "baseImages": [W.word_str(w) for w in base], "rootImages": [W.word_str(root)]}, seed)
    if kind == "hnn-conjugacy":
        d = C.random_hnn_instance(seed) if seed else C.hnn_conjugacy_instance()
        return Instance(kind, d.to_json(), seed)
    if kind == "union-of-trees":
        return Instance(kind, U.random_uot(seed, treelike=seed % 2 == 0).to_json(), seed)
    raise ParseError(f"unknown kind {kind!r}")


def cmd_oracles(modules: list[str] | None, fault: str | None, quick: bool) -> dict:
    if fault:
        if fault not in O.FAULTS:
            raise ParseError(f"unknown fault {fault!r}")
        with O.inject_fault(fault):
            res = O.oracle_suite(modules, quick)
    else:
        res = O.oracle_suite(modules, quick)
    lines = O.suite_matrix(res)
    ok = O.suite_ok(res)
    return _report("oracles", "all green" if ok else "RED: " + "; ".join(l for l in lines if l.startswith("FAIL")),
                   ok=ok, matrix=lines)


# -- argument handling ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="Graphs of spaces for adjoining roots to free groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=True):
        if needs_input:
            sp.add_argument("input_pos", nargs="?", metavar="FILE", help="instance file")
            sp.add_argument("--input", help="instance file")
        sp.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
        sp.add_argument("--dot", metavar="DIR", help="write DOT files into this directory")
        sp.add_argument("--seed", type=int, default=None)
        return sp

    for name in ("validate", "minimize", "split", "theorem", "corollary", "uot"):
        common(sub.add_parser(name))
    cy = common(sub.add_parser("cylinders"))
    cy.add_argument("--minimize", action="store_true", help="minimize before decomposing")
    pr = common(sub.add_parser("primitive"), needs_input=False)
    pr.add_argument("word")
    pr.add_argument("rank", type=int)
    cs = common(sub.add_parser("corank-search"))
    cs.add_argument("--max-length", type=int, default=2)
    cs.add_argument("--parallel", type=int, default=1)
    gen = common(sub.add_parser("gen"), needs_input=False)
    gen.add_argument("gen_kind", choices=KINDS)
    orc = common(sub.add_parser("oracles"), needs_input=False)
    orc.add_argument("--module", action="append", choices=O.SCOPES)
    orc.add_argument("--inject-fault", choices=sorted(O.FAULTS))
    orc.add_argument("--quick", action="store_true")
    return p


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=str)
    if args.json == "-":
        print(text)
        return
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    if "matrix" in report:
        print("\n".join(report["matrix"]))
    print(report.get("summary", ""))


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "primitive":
            report = cmd_primitive(args.word, args.rank)
        elif args.command == "gen":
            inst = generate(args.gen_kind, args.seed or 0)
            report = inst.to_json()
            text = json.dumps(report, indent=2, sort_keys=True)
            if args.json and args.json != "-":
                with open(args.json, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return EXIT_OK
        elif args.command == "oracles":
            report = cmd_oracles(args.module, args.inject_fault, args.quick)
            _emit(report, args)
            return EXIT_OK if report["ok"] else EXIT_INTERNAL
        else:
            path = args.input or args.input_pos
            if not path:
                raise ParseError("no instance file given")
            inst = load_instance(path)
            if args.command == "corank-search":
                report = cmd_corank_search(inst, args.max_length, args.parallel)
            else:
                handler = {"validate": cmd_validate, "minimize": cmd_minimize, "cylinders": cmd_cylinders,
                           "split": cmd_split, "theorem": cmd_theorem, "corollary": cmd_corollary,
                           "uot": cmd_uot}[args.command]
                report = handler(inst, args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, G.GoSError, C.ConstructError, U.UnionOfTreesError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit(report, args)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
