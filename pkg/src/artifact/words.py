"""Free-group words over signed letter indices.

Letters are nonzero integers: ``i`` is the i-th generator and ``-i`` its
inverse.  Words print as strings over ``a, b, c, ...`` with capitals for
inverses, so ``abAB`` is the commutator of the first two generators.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class WordError(ValueError):
    """Raised for malformed words or operations on the trivial element."""


def letter_key(x: int) -> int:
    # order 1 < -1 < 2 < -2 < ...
    return 2 * abs(x) - (1 if x > 0 else 0)


def letter_str(x: int) -> str:
    ch = ALPHABET[abs(x) - 1]
    return ch if x > 0 else ch.upper()


def parse_letters(text: str) -> tuple[int, ...]:
    out = []
    for ch in text.strip():
        if ch in " .*1":
            continue
        low = ch.lower()
        if low not in ALPHABET:
            raise WordError(f"bad letter {ch!r} in {text!r}")
        idx = ALPHABET.index(low) + 1
        out.append(idx if ch.islower() else -idx)
    return tuple(out)


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def invert(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


@dataclass(frozen=True)
class Word:
    """A freely reduced word in the free group of the given rank."""

    letters: tuple[int, ...]
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise WordError("rank must be positive")
        for x in self.letters:
            if x == 0 or abs(x) > self.rank:
                raise WordError(f"letter {x} outside rank {self.rank}")
        if free_reduce(self.letters) != self.letters:
            raise WordError("word is not freely reduced; use reduce()")

    @classmethod
    def parse(cls, text: str, rank: int) -> "Word":
        return reduce(parse_letters(text), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return reduce(self.letters + other.letters, max(self.rank, other.rank))

    def inverse(self) -> "Word":
        return Word(invert(self.letters), self.rank)

    def is_trivial(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return "".join(letter_str(x) for x in self.letters) or "1"


def reduce(raw: Iterable[int], rank: int) -> Word:
    """Freely reduce a letter sequence."""
    raw = tuple(raw)
    for x in raw:
        if x == 0 or abs(x) > rank:
            raise WordError(f"letter {x} outside rank {rank}")
    return Word(free_reduce(raw), rank)


def cyclic_core(letters: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a reduced word as ``u * core * u^-1`` with ``core`` cyclically reduced.

    Returns ``(u, core)``.
    """
    w = free_reduce(letters)
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return w[:i], w[i:j + 1]


def _least_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    best = None
    for r in range(len(seq)):
        rot = seq[r:] + seq[:r]
        k = tuple(letter_key(x) for x in rot)
        if best is None or k < best[0]:
            best = (k, rot)
    return best[1]


def _keyed(seq: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(letter_key(x) for x in seq)


@dataclass(frozen=True)
class CyclicWord:
    """Unoriented conjugacy class of a nontrivial element, in canonical form."""

    letters: tuple[int, ...]
    rank: int

    def __len__(self) -> int:
        return len(self.letters)

    def word(self) -> Word:
        return Word(self.letters, self.rank)

    def __str__(self) -> str:
        return "".join(letter_str(x) for x in self.letters)


def oriented_canonical(letters: Sequence[int]) -> tuple[int, ...]:
    """Least rotation of the cyclic reduction; identifies conjugacy classes."""
    _, core = cyclic_core(letters)
    if not core:
        raise WordError("trivial element has no cyclic form")
    return _least_rotation(core)


def unoriented_canonical(letters: Sequence[int]) -> tuple[int, ...]:
    fwd = oriented_canonical(letters)
    bwd = _least_rotation(invert(fwd))
    return fwd if _keyed(fwd) <= _keyed(bwd) else bwd


def cyclic_canonical(w: Word | Sequence[int], rank: int | None = None) -> CyclicWord:
    """Canonical unoriented cyclic form of a nontrivial element."""
    if isinstance(w, Word):
        letters, rank = w.letters, w.rank
    else:
        letters = tuple(w)
        if rank is None:
            rank = max((abs(x) for x in letters), default=1)
    return CyclicWord(unoriented_canonical(letters), rank)


def root(c: CyclicWord | Word) -> tuple[CyclicWord, int]:
    """Indivisible root and maximal exponent of a cyclic word."""
    if isinstance(c, Word):
        c = cyclic_canonical(c)
    seq = c.letters
    n = len(seq)
    if n == 0:
        raise WordError("trivial element has no root")
    for p in range(1, n + 1):
        if n % p == 0 and seq[:p] * (n // p) == seq:
            return CyclicWord(unoriented_canonical(seq[:p]), c.rank), n // p
    raise AssertionError("unreachable")


def is_conjugate(u: Word, v: Word) -> bool:
    """Oriented conjugacy test; the identity is conjugate only to itself."""
    _, cu = cyclic_core(u.letters)
    _, cv = cyclic_core(v.letters)
    if not cu or not cv:
        return not cu and not cv
    return oriented_canonical(cu) == oriented_canonical(cv)


def are_distinct_classes(words: Sequence[Word]) -> bool:
    """True iff no two words are conjugate, even after inverting one."""
    seen = set()
    for w in words:
        key = unoriented_canonical(w.letters)
        if key in seen:
            return False
        seen.add(key)
    return True


# --- automorphisms ----------------------------------------------------------

def apply_map(images: dict[int, tuple[int, ...]], letters: Sequence[int]) -> tuple[int, ...]:
    """Apply an endomorphism given by the images of the positive generators."""
    out: list[int] = []
    for x in letters:
        out.extend(images[x] if x > 0 else invert(images[-x]))
    return free_reduce(out)


def compose(outer: dict[int, tuple[int, ...]], inner: dict[int, tuple[int, ...]]) -> dict[int, tuple[int, ...]]:
    """Images of ``outer o inner`` (apply ``inner`` first)."""
    return {g: apply_map(outer, img) for g, img in inner.items()}


def identity_map(rank: int) -> dict[int, tuple[int, ...]]:
    return {g: (g,) for g in range(1, rank + 1)}


@dataclass(frozen=True)
class WhiteheadAut:
    """A Whitehead automorphism.

    ``kind`` is ``"perm"`` (``perm[i-1]`` is the signed image of generator i)
    or ``"II"`` (multiplier letter ``a`` and a set ``A`` of signed letters with
    ``a`` in ``A`` and ``-a`` not in ``A``).
    """

    kind: str
    rank: int
    perm: tuple[int, ...] = ()
    a: int = 0
    A: frozenset = frozenset()

    def __post_init__(self):
        if self.kind == "perm":
            if sorted(abs(x) for x in self.perm) != list(range(1, self.rank + 1)):
                raise WordError("perm must be a signed permutation")
        elif self.kind == "II":
            if self.a not in self.A or -self.a in self.A:
                raise WordError("type II needs a in A and a^-1 not in A")
            if any(x == 0 or abs(x) > self.rank for x in self.A):
                raise WordError("letters of A outside rank")
        else:
            raise WordError(f"unknown kind {self.kind}")

    def images(self) -> dict[int, tuple[int, ...]]:
        if self.kind == "perm":
            return {i + 1: (self.perm[i],) for i in range(self.rank)}
        out = {}
        a = self.a
        for g in range(1, self.rank + 1):
            if g == abs(a):
                out[g] = (g,)
                continue
            img = (g,)
            if g in self.A:
                img = img + (a,)
            if -g in self.A:
                img = (-a,) + img
            out[g] = free_reduce(img)
        return out

    def apply(self, letters: Sequence[int]) -> tuple[int, ...]:
        return apply_map(self.images(), letters)

    def __str__(self) -> str:
        if self.kind == "perm":
            return "perm(" + "".join(letter_str(x) for x in self.perm) + ")"
        return f"({letter_str(self.a)},{{{''.join(letter_str(x) for x in sorted(self.A, key=letter_key))}}})"


def type_two_automorphisms(rank: int) -> list[WhiteheadAut]:
    """All nontrivial type II Whitehead automorphisms, in a fixed order."""
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    out = []
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        for r in range(len(others) + 1):
            for extra in itertools.combinations(others, r):
                aut = WhiteheadAut("II", rank, a=a, A=frozenset((a,) + extra))
                if any(img != (g,) for g, img in aut.images().items()):
                    out.append(aut)
    return out


def permutation_automorphisms(rank: int) -> list[WhiteheadAut]:
    out = []
    for p in itertools.permutations(range(1, rank + 1)):
        for signs in itertools.product((1, -1), repeat=rank):
            out.append(WhiteheadAut("perm", rank, perm=tuple(s * x for s, x in zip(signs, p))))
    return out


def _cyc_len(letters: Sequence[int]) -> int:
    return len(cyclic_core(letters)[1])


def whitehead_minimize(c: CyclicWord | Word, plateau_cap: int = 5000):
    """Minimise cyclic length over the automorphism orbit.

    Greedy descent by type II automorphisms, then a breadth-first search
    over same-length images at each local minimum.  Returns
    ``(length, CyclicWord, [WhiteheadAut, ...])``; applying the sequence in
    order to the input gives a conjugate of the output.
    """
    if isinstance(c, Word):
        if not cyclic_core(c.letters)[1]:
            raise WordError("trivial element")
        c = cyclic_canonical(c)
    rank = c.rank
    auts = type_two_automorphisms(rank)
    cur = c.letters
    trace: list[WhiteheadAut] = []
    while True:
        improved = False
        for aut in auts:
            img = cyclic_core(aut.apply(cur))[1]
            if len(img) < len(cur):
                cur, improved = img, True
                trace.append(aut)
                break
        if improved:
            continue
        # plateau search: same-length neighbours might reach a shorter word
        start = oriented_canonical(cur)
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None and len(parent) < plateau_cap:
            w = queue.popleft()
            for aut in auts:
                img = cyclic_core(aut.apply(w))[1]
                if len(img) < len(cur):
                    found = (w, aut, img)
                    break
                key = oriented_canonical(img)
                if len(img) == len(cur) and key not in parent:
                    parent[key] = (w, aut, img)
                    queue.append(key)
        if found is None:
            break
        w, aut, img = found
        path = [aut]
        while parent[w] is not None:
            prev, step, _ = parent[w]
            path.append(step)
            w = prev
        path.reverse()
        # replay from cur so the recorded sequence is exact
        x = cur
        for step in path:
            x = cyclic_core(step.apply(x))[1]
        trace.extend(path)
        cur = x
    return len(cur), CyclicWord(unoriented_canonical(cur), rank), trace


def is_primitive(c: CyclicWord | Word) -> bool:
    """True iff the element is part of a free basis (up to conjugacy)."""
    return whitehead_minimize(c)[0] == 1


# --- Nielsen moves for random automorphisms -----------------------------------

def nielsen_move(rank: int, kind: str, i: int, j: int = 0) -> dict[int, tuple[int, ...]]:
    """Elementary automorphism: ``mul`` sends x_i to x_i x_j, ``inv`` inverts x_i,
    ``swap`` exchanges x_i and x_j.  Generators are 1-based."""
    m = identity_map(rank)
    if kind == "mul":
        m[i] = free_reduce((i, j))
    elif kind == "inv":
        m[i] = (-i,)
    elif kind == "swap":
        m[i], m[j] = (j,), (i,)
    else:
        raise WordError(kind)
    return m


def random_automorphism(rank: int, steps: int, rng) -> tuple[dict, dict]:
    """Random product of Nielsen moves; returns ``(images, inverse_images)``."""
    fwd = identity_map(rank)
    inv = identity_map(rank)
    for _ in range(steps):
        i = rng.randrange(1, rank + 1)
        if rank == 1:
            kind = "inv"
        else:
            kind = rng.choice(["mul", "mul", "mul", "inv", "swap"])
        j = i
        while j == i and rank > 1:
            j = rng.randrange(1, rank + 1)
        sign = rng.choice([1, -1])
        if kind == "mul":
            step = nielsen_move(rank, "mul", i, sign * j)
            undo = nielsen_move(rank, "mul", i, -sign * j)
        else:
            step = nielsen_move(rank, kind, i, j)
            undo = step
        fwd = compose(fwd, step)
        inv = compose(undo, inv)
    return fwd, inv


def word_str(letters: Sequence[int]) -> str:
    return "".join(letter_str(x) for x in letters) or "1"
