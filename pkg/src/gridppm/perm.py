"""Permutations as sequences and as point sets.

A permutation of length n is a sequence of the ranks 1..n, each exactly
once.  Its diagram is the point set {(i, p_i)}.  Containment, the eight
symmetries, sums and inflation all operate on this diagram view.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

from .coords import ExactCoord, PlanePoint


class DuplicateCoordinate(ValueError):
    """Two points agree on x or on y; the set has no reduction."""


class IndexOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class Permutation:
    ranks: Tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.ranks)
        if sorted(self.ranks) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.ranks}")

    def __len__(self) -> int:
        return len(self.ranks)

    def __getitem__(self, i: int) -> int:
        return self.ranks[i]

    def __iter__(self):
        return iter(self.ranks)

    def __repr__(self) -> str:
        return "Perm(" + " ".join(map(str, self.ranks)) + ")"

    def points(self) -> Tuple[Tuple[int, int], ...]:
        """The diagram {(i, p_i)}, 1-based."""
        return tuple((i + 1, r) for i, r in enumerate(self.ranks))


def perm(*ranks: int) -> Permutation:
    if len(ranks) == 1 and isinstance(ranks[0], (list, tuple)):
        ranks = tuple(ranks[0])
    return Permutation(tuple(ranks))


EMPTY = Permutation(())


def standardize(points: Iterable[PlanePoint]) -> Permutation:
    """The reduction of a finite point set: sort by x, rank by y.

    Raises DuplicateCoordinate when two points tie on x or on y under
    the full lexicographic comparison.
    """
    pts = list(points)
    xs = sorted(p.x for p in pts)
    ys = sorted(p.y for p in pts)
    for u, v in zip(xs, xs[1:]):
        if u == v:
            raise DuplicateCoordinate(f"duplicate x coordinate {u}")
    for u, v in zip(ys, ys[1:]):
        if u == v:
            raise DuplicateCoordinate(f"duplicate y coordinate {u}")
    by_x = sorted(pts, key=lambda p: p.x)
    rank = {p.y: i + 1 for i, p in enumerate(sorted(pts, key=lambda p: p.y))}
    return Permutation(tuple(rank[p.y] for p in by_x))


def is_order_isomorphic(text: Permutation, pattern: Permutation,
                        embedding: Sequence[int]) -> bool:
    """Check that text restricted to `embedding` (0-based positions,
    strictly increasing) induces exactly `pattern`."""
    if len(embedding) != len(pattern):
        return False
    if any(j <= i for i, j in zip(embedding, embedding[1:])):
        return False
    if embedding and not (0 <= embedding[0] and embedding[-1] < len(text)):
        return False
    vals = [text[i] for i in embedding]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if (vals[i] < vals[j]) != (pattern[i] < pattern[j]):
                return False
    return True


def contains(text: Permutation, pattern: Permutation) -> Optional[Tuple[int, ...]]:
    """Lexicographically least embedding of pattern into text, or None.

    Backtracking over text positions in increasing order; worst case
    O(n^k).  The witness is re-validated before being returned.
    """
    n, k = len(text), len(pattern)
    if k == 0:
        return ()
    if k > n:
        return None

    chosen: list[int] = []

    def consistent(pos: int) -> bool:
        v = text[pos]
        i = len(chosen)
        for j, q in enumerate(chosen):
            if (text[q] < v) != (pattern[j] < pattern[i]):
                return False
        return True

    def search(start: int) -> bool:
        if len(chosen) == k:
            return True
        # not enough room left
        for pos in range(start, n - (k - len(chosen)) + 1):
            if consistent(pos):
                chosen.append(pos)
                if search(pos + 1):
                    return True
                chosen.pop()
        return False

    if not search(0):
        return None
    witness = tuple(chosen)
    assert is_order_isomorphic(text, pattern, witness)
    return witness


def avoids(p: Permutation, sigma: Permutation) -> bool:
    return contains(p, sigma) is None


# --- symmetries -----------------------------------------------------------

_GENERATORS = ("r", "c", "i")  # reversal, complement, inverse


@dataclass(frozen=True)
class SymmetryOp:
    """A word over {r, c, i}; the group they generate has order 8."""

    word: str = ""

    def __post_init__(self) -> None:
        if any(ch not in _GENERATORS for ch in self.word):
            raise ValueError(f"unknown symmetry letters in {self.word!r}")


def apply_symmetry(p: Permutation, s: SymmetryOp) -> Permutation:
    out = p
    for ch in reversed(s.word):
        n = len(out)
        if ch == "r":
            out = Permutation(tuple(reversed(out.ranks)))
        elif ch == "c":
            out = Permutation(tuple(n + 1 - v for v in out.ranks))
        else:  # inverse: swap the roles of position and value
            inv = [0] * n
            for i, v in enumerate(out.ranks):
                inv[v - 1] = i + 1
            out = Permutation(tuple(inv))
    return out


def all_symmetries() -> Tuple[SymmetryOp, ...]:
    """Canonical coset words for the 8-element symmetry group."""
    return tuple(SymmetryOp(w) for w in
                 ("", "r", "c", "i", "rc", "ri", "ci", "rci"))


# --- sums and inflation ---------------------------------------------------

def direct_sum(p: Permutation, q: Permutation) -> Permutation:
    return Permutation(p.ranks + tuple(v + len(p) for v in q.ranks))


def skew_sum(p: Permutation, q: Permutation) -> Permutation:
    return Permutation(tuple(v + len(q) for v in p.ranks) + q.ranks)


def inflate(p: Permutation, index: int, q: Permutation) -> Permutation:
    """Replace the point of p at position `index` (1-based) by a copy of
    q shrunk into its cell: the point (x, y) becomes the set
    {(x + qx/(m+1), y + qy/(m+1))}.
    """
    if not 1 <= index <= len(p):
        raise IndexOutOfRange(f"index {index} not in 1..{len(p)}")
    m = len(q)
    pts: list[PlanePoint] = []
    for x, y in p.points():
        if x == index:
            for qx, qy in q.points():
                pts.append(PlanePoint(
                    ExactCoord(Fraction(x) + Fraction(qx, m + 1)),
                    ExactCoord(Fraction(y) + Fraction(qy, m + 1))))
        else:
            pts.append(PlanePoint(ExactCoord(Fraction(x)),
                                  ExactCoord(Fraction(y))))
    return standardize(pts)


# --- small class predicates ----------------------------------------------

def is_fibonacci(p: Permutation, mirrored: bool = False) -> bool:
    """Membership in the Fibonacci class: |p_i - i| <= 1 for all i.

    With mirrored=True, tests the reverse-complement image instead,
    i.e. membership in the mirror class.
    """
    if mirrored:
        p = apply_symmetry(p, SymmetryOp("rc"))
    return all(abs(v - (i + 1)) <= 1 for i, v in enumerate(p.ranks))


# --- text format ----------------------------------------------------------

def parse_perm(text: str) -> Permutation:
    """One line of space-separated decimal ranks; empty input is the
    empty permutation."""
    fields = text.split()
    return Permutation(tuple(int(f) for f in fields))


def format_perm(p: Permutation) -> str:
    return " ".join(map(str, p.ranks)) + "\n"
