"""Permutation core: standardization, containment, symmetries, sums."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridppm.coords import EPS, ExactCoord, coord, pt
from gridppm.perm import (EMPTY, DuplicateCoordinate, IndexOutOfRange,
                          Permutation, SymmetryOp, all_symmetries,
                          apply_symmetry, avoids, contains, direct_sum,
                          format_perm, inflate, is_fibonacci,
                          is_order_isomorphic, parse_perm, perm, skew_sum,
                          standardize)

# -- independent oracles -----------------------------------------------------


def rank_by_pairwise_comparison(points):
    """Rank a point set by counting pairwise comparisons only."""
    pts = list(points)
    order = []
    for p in pts:
        x_rank = sum(1 for q in pts if q.x < p.x)
        y_rank = sum(1 for q in pts if q.y < p.y)
        order.append((x_rank, y_rank))
    order.sort()
    return tuple(y + 1 for _, y in order)


def brute_contains(text, pattern):
    """Exhaustive subsequence enumeration."""
    for combo in itertools.combinations(range(len(text)), len(pattern)):
        if is_order_isomorphic(text, pattern, combo):
            return combo
    return None


def all_perms(n):
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)


# -- standardize -------------------------------------------------------------


def test_standardize_two_points():
    assert standardize([pt(Fraction(5, 2), 7), pt(9, 1)]) == perm(2, 1)


def test_standardize_empty():
    assert standardize([]) == EMPTY


def test_standardize_with_infinitesimals():
    pts = [pt(coord(1), coord(1) + EPS), pt(Fraction(3, 2), 5),
           pt(coord(2).shift(0), coord(2) - EPS)]
    assert standardize(pts) == perm(1, 3, 2)
    assert standardize(pts).ranks == rank_by_pairwise_comparison(pts)


def test_standardize_duplicate_rejected():
    with pytest.raises(DuplicateCoordinate):
        standardize([pt(1, 2), pt(1, 3)])
    with pytest.raises(DuplicateCoordinate):
        standardize([pt(1, 2), pt(3, 2)])


@pytest.mark.parametrize("n", range(8))
def test_standardize_idempotent_on_diagrams(n):
    for p in all_perms(n):
        pts = [pt(x, y) for x, y in p.points()]
        assert standardize(pts) == p


# -- exact coordinates --------------------------------------------------------

coords_st = st.builds(
    coord,
    st.fractions(max_denominator=8),
    st.fractions(max_denominator=8),
    st.fractions(max_denominator=8),
)


@given(coords_st, coords_st)
def test_coord_antisymmetry(u, v):
    assert (u < v) + (v < u) + (u == v) == 1


@given(coords_st, coords_st, coords_st)
def test_coord_transitivity(u, v, w):
    if u < v and v < w:
        assert u < w


def test_eps_dominates_delta():
    assert coord(0, 0, 10**9) < coord(0, 1)
    assert coord(0, 1) < coord(Fraction(1, 10**9))


# -- containment ---------------------------------------------------------------


def test_contains_basic():
    assert contains(perm(1, 5, 3, 4, 2), perm(1, 3, 2)) is not None
    assert contains(perm(1, 2, 3), perm(2, 1)) is None
    assert contains(perm(3, 1, 2), EMPTY) == ()


def test_contains_returns_lex_least():
    text = perm(2, 4, 1, 3, 5)
    pat = perm(1, 2)
    found = contains(text, pat)
    embeds = [c for c in itertools.combinations(range(5), 2)
              if is_order_isomorphic(text, pat, c)]
    assert found == min(embeds)


@pytest.mark.parametrize("n,k", [(5, 2), (5, 3), (6, 3)])
def test_contains_agrees_with_brute_force(n, k):
    pats = list(all_perms(k))
    for text in itertools.islice(all_perms(n), 0, None, 7):
        for pat in pats:
            got = contains(text, pat)
            want = brute_contains(text, pat)
            assert (got is None) == (want is None)
            if got is not None:
                assert got == want  # both lexicographically least


def test_avoids():
    assert avoids(perm(1, 2, 3), perm(2, 1))
    assert not avoids(perm(2, 1, 4, 3), perm(2, 1))
    assert avoids(perm(4, 1, 3, 5, 2), perm(4, 3, 2, 1))


def test_erdos_szekeres_length_five():
    inc3, dec3 = perm(1, 2, 3), perm(3, 2, 1)
    for p in all_perms(5):
        assert contains(p, inc3) is not None or contains(p, dec3) is not None


# -- symmetries -----------------------------------------------------------------


def test_symmetry_examples():
    assert apply_symmetry(perm(1, 2, 3), SymmetryOp("r")) == perm(3, 2, 1)
    assert apply_symmetry(perm(2, 4, 1, 3), SymmetryOp("i")) == perm(3, 1, 4, 2)
    p = perm(3, 1, 4, 2, 5)
    assert apply_symmetry(apply_symmetry(p, SymmetryOp("c")),
                          SymmetryOp("c")) == p


def test_symmetry_group_order_eight():
    p = perm(2, 4, 1, 3)  # asymmetric enough to separate the images? use orbit
    words = ["", "r", "c", "i", "rc", "ri", "cr", "ci", "ir", "ic",
             "rci", "rcr", "rir", "cic"]
    images = set()
    for n in (3, 4, 5):
        seen = {}
        for w in words:
            key = tuple(apply_symmetry(q, SymmetryOp(w))
                        for q in all_perms(n))
            seen.setdefault(key, w)
        images.add(len(seen))
    assert images == {8}


@settings(max_examples=60)
@given(st.permutations(list(range(1, 10))), st.data())
def test_containment_symmetry_invariant(ranks, data):
    text = Permutation(tuple(ranks))
    pat_len = data.draw(st.integers(0, 4))
    pat = Permutation(tuple(data.draw(st.permutations(
        list(range(1, pat_len + 1))))))
    s = data.draw(st.sampled_from(all_symmetries()))
    lhs = contains(text, pat) is not None
    rhs = contains(apply_symmetry(text, s), apply_symmetry(pat, s)) is not None
    assert lhs == rhs


# -- sums and inflation -----------------------------------------------------------


def test_sums():
    assert direct_sum(perm(1), perm(1)) == perm(1, 2)
    assert skew_sum(perm(2, 1), perm(1)) == perm(3, 2, 1)
    assert direct_sum(perm(2, 1), perm(2, 1)) == perm(2, 1, 4, 3)
    assert direct_sum(EMPTY, perm(3, 1, 2)) == perm(3, 1, 2)
    assert direct_sum(perm(3, 1, 2), EMPTY) == perm(3, 1, 2)


def test_inflate():
    # inflating the 1 in 12
    assert inflate(perm(1, 2), 1, perm(2, 1)) == perm(2, 1, 3)
    assert inflate(perm(2, 1), 2, perm(1, 2)) == perm(3, 1, 2)
    assert inflate(perm(1, 2), 2, EMPTY) == perm(1)
    with pytest.raises(IndexOutOfRange):
        inflate(perm(1, 2), 3, perm(1))


def test_inflate_against_sums():
    for p in all_perms(3):
        assert inflate(perm(1, 2), 1, p) == direct_sum(p, perm(1))
        assert inflate(perm(2, 1), 1, p) == skew_sum(p, perm(1))


# -- Fibonacci class ------------------------------------------------------------


def test_fibonacci_examples():
    assert is_fibonacci(perm(2, 1, 3))
    assert not is_fibonacci(perm(3, 2, 1))
    assert is_fibonacci(perm(2, 1, 4, 3))


def test_fibonacci_equals_avoidance_characterization():
    basis = [perm(3, 2, 1), perm(3, 1, 2), perm(2, 3, 1)]
    for n in range(7):
        for p in all_perms(n):
            want = all(avoids(p, b) for b in basis)
            assert is_fibonacci(p) == want


def test_fibonacci_mirror():
    rc = SymmetryOp("rc")
    for n in range(6):
        for p in all_perms(n):
            assert is_fibonacci(p, mirrored=True) == \
                is_fibonacci(apply_symmetry(p, rc))


# -- text format -----------------------------------------------------------------


def test_perm_text_roundtrip():
    for p in (EMPTY, perm(1), perm(3, 1, 4, 2, 5)):
        assert parse_perm(format_perm(p)) == p
    assert parse_perm("") == EMPTY
    assert format_perm(perm(2, 1)) == "2 1\n"
