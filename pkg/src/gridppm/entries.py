"""The closed vocabulary of cell classes used in gridding matrices.

Tags: empty, inc, dec, the Fibonacci class fib+ (all |p_i - i| <= 1) and
its mirror fib-, avoidance classes av:sigma for a concrete sigma, and
monotone juxtapositions juxth:d1,d2 / juxtv:d1,d2 with d in {inc, dec}.
Membership of a concrete permutation in every tag is decidable here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .perm import Permutation, avoids, is_fibonacci, perm


class UnsupportedEntry(ValueError):
    """The requested transform leaves the tag vocabulary."""


@dataclass(frozen=True)
class ClassEntry:
    kind: str  # empty | inc | dec | fib+ | fib- | av | juxth | juxtv
    sigma: Optional[Permutation] = None
    d1: Optional[str] = None
    d2: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("empty", "inc", "dec", "fib+", "fib-",
                             "av", "juxth", "juxtv"):
            raise ValueError(f"unknown entry kind {self.kind!r}")
        if self.kind == "av" and self.sigma is None:
            raise ValueError("av entry needs a pattern")
        if self.kind in ("juxth", "juxtv"):
            if self.d1 not in ("inc", "dec") or self.d2 not in ("inc", "dec"):
                raise ValueError("juxtaposition parts must be inc or dec")

    def __repr__(self) -> str:
        return f"Entry({format_entry(self)})"


EMPTY_E = ClassEntry("empty")
INC = ClassEntry("inc")
DEC = ClassEntry("dec")
FIBP = ClassEntry("fib+")
FIBM = ClassEntry("fib-")


def av(sigma: Permutation) -> ClassEntry:
    return ClassEntry("av", sigma=sigma)


def juxth(d1: str, d2: str) -> ClassEntry:
    return ClassEntry("juxth", d1=d1, d2=d2)


def juxtv(d1: str, d2: str) -> ClassEntry:
    return ClassEntry("juxtv", d1=d1, d2=d2)


def is_empty(e: ClassEntry) -> bool:
    return e.kind == "empty"


def is_monotone(e: ClassEntry) -> bool:
    return e.kind in ("inc", "dec")


def _sum_indecomposable(s: Permutation) -> bool:
    seen_max = 0
    for i, v in enumerate(s.ranks[:-1], start=1):
        seen_max = max(seen_max, v)
        if seen_max == i:
            return False
    return len(s) > 0


def _skew_indecomposable(s: Permutation) -> bool:
    n = len(s)
    seen_min = n + 1
    for i, v in enumerate(s.ranks[:-1], start=1):
        seen_min = min(seen_min, v)
        if seen_min == n - i + 1:
            return False
    return n > 0


def sum_closed(e: ClassEntry) -> bool:
    """Closed under direct sums (refines into a diagonal block matrix)."""
    if e.kind in ("inc", "fib+"):
        return True
    if e.kind == "av":
        return _sum_indecomposable(e.sigma)
    return False


def skew_closed(e: ClassEntry) -> bool:
    if e.kind in ("dec", "fib-"):
        return True
    if e.kind == "av":
        return _skew_indecomposable(e.sigma)
    return False


def _mono_ok(vals: Tuple[int, ...], d: str) -> bool:
    if d == "inc":
        return all(a < b for a, b in zip(vals, vals[1:]))
    return all(a > b for a, b in zip(vals, vals[1:]))


def _longest_increasing(vals: Tuple[int, ...]) -> int:
    """Patience sorting, O(n log n)."""
    from bisect import bisect_left
    piles: list = []
    for v in vals:
        i = bisect_left(piles, v)
        if i == len(piles):
            piles.append(v)
        else:
            piles[i] = v
    return len(piles)


def entry_contains(e: ClassEntry, p: Permutation) -> bool:
    n = len(p)
    if e.kind == "empty":
        return n == 0
    if e.kind == "inc":
        return _mono_ok(p.ranks, "inc")
    if e.kind == "dec":
        return _mono_ok(p.ranks, "dec")
    if e.kind == "fib+":
        return is_fibonacci(p)
    if e.kind == "fib-":
        return is_fibonacci(p, mirrored=True)
    if e.kind == "av":
        # monotone patterns reduce to a longest-run computation
        if _mono_ok(e.sigma.ranks, "inc"):
            return _longest_increasing(p.ranks) < len(e.sigma)
        if _mono_ok(e.sigma.ranks, "dec"):
            rev = tuple(reversed(p.ranks))
            return _longest_increasing(rev) < len(e.sigma)
        return avoids(p, e.sigma)
    if e.kind == "juxth":
        # a column cut: prefix in d1, suffix in d2
        return any(_mono_ok(p.ranks[:s], e.d1) and _mono_ok(p.ranks[s:], e.d2)
                   for s in range(n + 1))
    # juxtv: a row cut by value; d1 is the bottom part, d2 the top
    for v in range(n + 1):
        low = tuple(r for r in p.ranks if r <= v)
        high = tuple(r for r in p.ranks if r > v)
        if _mono_ok(low, e.d1) and _mono_ok(high, e.d2):
            return True
    return False


def entry_reverse(e: ClassEntry) -> ClassEntry:
    from .perm import SymmetryOp, apply_symmetry
    if e.kind == "empty":
        return e
    if e.kind == "inc":
        return DEC
    if e.kind == "dec":
        return INC
    if e.kind == "av":
        return av(apply_symmetry(e.sigma, SymmetryOp("r")))
    if e.kind == "juxth":
        return juxth(_flip_dir(e.d2), _flip_dir(e.d1))
    if e.kind == "juxtv":
        return juxtv(_flip_dir(e.d1), _flip_dir(e.d2))
    raise UnsupportedEntry(f"reversal of {format_entry(e)} leaves the vocabulary")


def entry_complement(e: ClassEntry) -> ClassEntry:
    from .perm import SymmetryOp, apply_symmetry
    if e.kind == "empty":
        return e
    if e.kind == "inc":
        return DEC
    if e.kind == "dec":
        return INC
    if e.kind == "av":
        return av(apply_symmetry(e.sigma, SymmetryOp("c")))
    if e.kind == "juxth":
        return juxth(_flip_dir(e.d1), _flip_dir(e.d2))
    if e.kind == "juxtv":
        return juxtv(_flip_dir(e.d2), _flip_dir(e.d1))
    raise UnsupportedEntry(f"complement of {format_entry(e)} leaves the vocabulary")


def _flip_dir(d: str) -> str:
    return "dec" if d == "inc" else "inc"


def parse_entry(s: str) -> ClassEntry:
    s = s.strip().lower()
    if s in ("empty", "inc", "dec", "fib+", "fib-"):
        return ClassEntry(s)
    if s.startswith("av:"):
        return av(perm(*[int(ch) for ch in s[3:].strip()]))
    if s.startswith("juxth:") or s.startswith("juxtv:"):
        kind, _, rest = s.partition(":")
        d1, _, d2 = rest.partition(",")
        return ClassEntry(kind, d1=d1.strip(), d2=d2.strip())
    raise ValueError(f"unknown entry string {s!r}")


def format_entry(e: ClassEntry) -> str:
    if e.kind == "av":
        return "av:" + "".join(map(str, e.sigma.ranks))
    if e.kind in ("juxth", "juxtv"):
        return f"{e.kind}:{e.d1},{e.d2}"
    return e.kind
