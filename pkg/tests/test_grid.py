"""Gridding matrices: graphs, griddings, orientations, assembly."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridppm import entries as E
from gridppm.coords import EPS, ExactCoord, coord, pt
from gridppm.entries import DEC, EMPTY_E, FIBP, INC, av
from gridppm.grid import (BoxOverflow, CellGraph, DimensionMismatch, Gridding,
                          GriddingMatrix, MultipleDEntries, NoCycle,
                          Orientation, Tile, TileFamily,
                          apply_orientation_gridded, apply_orientation_matrix,
                          assemble, build_rich_path, cell_contents, cell_graph,
                          check_gridding, classify, consistent_orientation,
                          find_gridding, format_gridding_json,
                          format_matrix_json, identity_orientation,
                          matrix_from_rows_top_down, parse_gridding_json,
                          parse_matrix_json, path_order, refine,
                          sample_member, staircase, sum_closing_orientation)
from gridppm.perm import Permutation, perm

P321 = perm(3, 2, 1)
P312 = perm(3, 1, 2)
P231 = perm(2, 3, 1)
P132 = perm(1, 3, 2)


def mat(*rows):
    """Rows given top-to-bottom, as in the file format."""
    return matrix_from_rows_top_down(rows)


def all_perms(n):
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)


# -- entries ------------------------------------------------------------------


def test_entry_contains_basics():
    assert E.entry_contains(INC, perm(1, 2, 3))
    assert not E.entry_contains(INC, perm(1, 3, 2))
    assert E.entry_contains(FIBP, perm(2, 1, 4, 3))
    assert not E.entry_contains(FIBP, perm(3, 1, 2))
    assert E.entry_contains(E.juxth("inc", "inc"), perm(3, 4, 1, 2))
    assert not E.entry_contains(E.juxth("inc", "inc"), perm(3, 1, 4, 2))
    assert E.entry_contains(E.juxtv("inc", "dec"), perm(1, 4, 2, 3))
    assert E.entry_contains(EMPTY_E, perm())
    assert not E.entry_contains(EMPTY_E, perm(1))


def test_av_monotone_fast_path_matches_backtracking():
    from gridppm.perm import avoids
    for p in all_perms(5):
        assert E.entry_contains(av(P321), p) == avoids(p, P321)
        assert E.entry_contains(av(perm(1, 2, 3)), p) == \
            avoids(p, perm(1, 2, 3))


def test_closure_flags():
    assert E.sum_closed(INC) and not E.skew_closed(INC)
    assert E.skew_closed(DEC) and not E.sum_closed(DEC)
    assert E.sum_closed(FIBP)
    assert E.skew_closed(E.FIBM)
    # 321 is sum-indecomposable but skew-decomposable
    assert E.sum_closed(av(P321)) and not E.skew_closed(av(P321))
    # 123 is skew-indecomposable but sum-decomposable
    assert E.skew_closed(av(perm(1, 2, 3))) and not E.sum_closed(av(perm(1, 2, 3)))


def test_entry_string_roundtrip():
    for s in ("empty", "inc", "dec", "fib+", "fib-", "av:321",
              "juxth:inc,inc", "juxtv:inc,dec"):
        assert E.format_entry(E.parse_entry(s)) == s


# -- matrix construction and JSON ----------------------------------------------


def test_matrix_rows_top_down():
    m = mat([DEC, INC], [INC, DEC])
    assert m.entry(1, 1) == INC  # bottom-left
    assert m.entry(1, 2) == DEC  # top-left
    assert m.entry(2, 1) == DEC
    assert m.entry(2, 2) == INC


def test_matrix_json_roundtrip():
    m = mat([DEC, av(P321)], [FIBP, EMPTY_E])
    assert parse_matrix_json(format_matrix_json(m)) == m
    text = ('{"cols":2,"rows":1,"entries":[["inc","dec"]]}')
    m2 = parse_matrix_json(text)
    assert m2.entry(1, 1) == INC and m2.entry(2, 1) == DEC


def test_gridding_json_roundtrip():
    g = Gridding((1, 3, 6), (1, 2, 6))
    assert parse_gridding_json(format_gridding_json(g)) == g


# -- cell graph ----------------------------------------------------------------


def test_cell_graph_diagonal_is_disconnected():
    # diagonal cells share no row or column, so they form isolated
    # vertices, not a path
    m = mat([EMPTY_E, INC], [INC, EMPTY_E])
    g = cell_graph(m)
    assert len(g.edges) == 0
    assert classify(g) == "Other"


def test_cell_graph_two_cell_path():
    m = mat([INC, INC])
    g = cell_graph(m)
    assert len(g.vertices) == 2 and len(g.edges) == 1
    assert classify(g) == "ProperTurningPath"


def test_cell_graph_L_shape_path():
    m = mat([INC, EMPTY_E], [INC, DEC])
    g = cell_graph(m)
    assert set(g.vertices) == {(1, 1), (1, 2), (2, 1)}
    assert classify(g) == "ProperTurningPath"
    assert path_order(g) in ([(1, 2), (1, 1), (2, 1)],
                             [(2, 1), (1, 1), (1, 2)])


def test_cell_graph_full_2x2_cycle():
    m = mat([INC, DEC], [DEC, INC])
    g = cell_graph(m)
    assert len(g.vertices) == 4 and len(g.edges) == 4
    assert classify(g) == "ProperTurningCycle"


def test_cell_graph_skips_blocked_pairs():
    # three cells in one column: middle blocks the long edge, and three
    # in a line violates proper turning
    m = matrix_from_rows_top_down([[INC], [INC], [INC]])
    g = cell_graph(m)
    assert len(g.edges) == 2
    assert classify(g) == "Other"


# -- griddings -----------------------------------------------------------------


def test_check_gridding_trivial():
    m = GriddingMatrix(1, 1, ((INC,),))
    assert check_gridding(perm(1, 2), Gridding((1, 3), (1, 3)), m)
    assert not check_gridding(perm(2, 1), Gridding((1, 3), (1, 3)), m)


def test_find_gridding_horizontal():
    m = mat([DEC, INC])
    g = find_gridding(perm(2, 1, 3, 4, 5), m)
    # (1,2,6) also grids it (a one-point cell is trivially decreasing)
    # and precedes (1,3,6) lexicographically
    assert g == Gridding((1, 2, 6), (1, 6))
    assert check_gridding(perm(2, 1, 3, 4, 5), Gridding((1, 3, 6), (1, 6)), m)


def test_find_gridding_none_when_impossible():
    m = mat([DEC, INC])
    assert find_gridding(perm(2, 3, 1), m) is None


def brute_has_gridding(p, m):
    n = len(p)
    inner = list(range(1, n + 2))
    for c in itertools.product(inner, repeat=m.cols - 1):
        for r in itertools.product(inner, repeat=m.rows - 1):
            cuts_c = (1,) + c + (n + 1,)
            cuts_r = (1,) + r + (n + 1,)
            if any(a > b for a, b in zip(cuts_c, cuts_c[1:])):
                continue
            if any(a > b for a, b in zip(cuts_r, cuts_r[1:])):
                continue
            if check_gridding(p, Gridding(cuts_c, cuts_r), m):
                return True
    return False


@pytest.mark.parametrize("m", [
    mat([DEC, INC]),
    mat([INC], [DEC]),
    mat([DEC, INC], [INC, DEC]),
    mat([EMPTY_E, av(P321)], [INC, EMPTY_E]),
])
def test_find_gridding_agrees_with_brute_force(m):
    rng = random.Random(7)
    for n in (0, 1, 4, 6):
        for _ in range(12):
            ranks = list(range(1, n + 1))
            rng.shuffle(ranks)
            p = Permutation(tuple(ranks))
            assert (find_gridding(p, m) is not None) == brute_has_gridding(p, m)


def test_staircase_shape():
    m = staircase(1, INC, FIBP)
    assert (m.cols, m.rows) == (2, 1)
    assert m.entry(1, 1) == INC and m.entry(2, 1) == FIBP
    m3 = staircase(3, INC, av(P321))
    assert (m3.cols, m3.rows) == (4, 3)
    for i in range(1, 4):
        assert m3.entry(i, i) == INC and m3.entry(i + 1, i) == av(P321)
    assert classify(cell_graph(m3)) == "ProperTurningPath"


def test_staircase_exclusions():
    assert find_gridding(perm(4, 3, 2, 1), staircase(3, INC, av(P321))) is None
    assert find_gridding(perm(4, 2, 3, 1), staircase(3, INC, av(P231))) is None
    assert find_gridding(perm(4, 3, 1, 2), staircase(3, INC, av(P312))) is None


def rich_2x2(pi):
    return mat([DEC, INC], [av(pi), DEC])


def test_rich_2x2_exclusions():
    assert find_gridding(perm(1, 4, 5, 2, 3), rich_2x2(P132)) is None
    assert find_gridding(perm(2, 4, 5, 1, 3), rich_2x2(P231)) is None
    assert find_gridding(perm(3, 2, 1, 5, 4), rich_2x2(P321)) is None
    assert find_gridding(perm(4, 2, 5, 1, 3), rich_2x2(P321)) is None


# -- orientations ----------------------------------------------------------------


def test_apply_orientation_matrix_example():
    m = mat([DEC, INC], [INC, DEC])
    f = Orientation((-1, 1), (1, 1))
    img = apply_orientation_matrix(m, f)
    assert img == mat([INC, INC], [DEC, DEC])


def test_apply_orientation_identity_and_involution():
    m = mat([DEC, av(P132)], [INC, DEC])
    f_id = identity_orientation(2, 2)
    assert apply_orientation_matrix(m, f_id) == m
    f = Orientation((-1, 1), (1, -1))
    assert apply_orientation_matrix(apply_orientation_matrix(m, f), f) == m


def test_apply_orientation_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_orientation_matrix(mat([INC]), Orientation((1, 1), (1,)))


def test_consistent_orientation_paper_examples():
    m = mat([DEC, INC], [INC, DEC])
    f = consistent_orientation(m)
    assert f == Orientation((-1, 1), (-1, 1))
    m2 = mat([INC, INC], [INC, DEC])
    assert consistent_orientation(m2) is None
    m3 = mat([INC, INC], [INC, INC])
    assert consistent_orientation(m3) == identity_orientation(2, 2)


def test_gridded_orientation_preserves_gridding():
    rng = random.Random(3)
    m = mat([DEC, INC], [INC, DEC])
    f = Orientation((-1, 1), (-1, 1))
    fm = apply_orientation_matrix(m, f)
    for _ in range(25):
        sizes = {c: rng.randint(0, 3) for c in m.nonempty_cells()}
        p, g = sample_member(m, rng, sizes)
        q = apply_orientation_gridded(p, g, f)
        assert check_gridding(q, g, fm)
        assert apply_orientation_gridded(q, g, f) == p


# -- refinement and rich paths -----------------------------------------------------


def test_refine_single_entries():
    d = refine(GriddingMatrix(1, 1, ((INC,),)), 2)
    assert d.entry(1, 1) == INC and d.entry(2, 2) == INC
    assert d.entry(1, 2) == EMPTY_E and d.entry(2, 1) == EMPTY_E
    a = refine(GriddingMatrix(1, 1, ((DEC,),)), 2)
    assert a.entry(1, 2) == DEC and a.entry(2, 1) == DEC
    assert a.entry(1, 1) == EMPTY_E and a.entry(2, 2) == EMPTY_E


def test_refine_members_stay_in_original_class():
    rng = random.Random(11)
    m = mat([DEC, INC], [av(P321), DEC])
    r = refine(m, 3)
    for _ in range(10):
        sizes = {c: rng.randint(0, 1) for c in r.nonempty_cells()}
        p, _ = sample_member(r, rng, sizes)
        assert find_gridding(p, m) is not None


CYCLE_D = mat([DEC, INC], [av(P321), DEC])


def test_rich_path_requires_cycle_and_single_d():
    with pytest.raises(NoCycle):
        build_rich_path(mat([av(P321), INC]), 4)
    with pytest.raises(MultipleDEntries):
        build_rich_path(mat([av(P321), INC], [INC, av(P321)]), 4)


def test_rich_path_degenerate_length_one():
    out, order, dpos = build_rich_path(CYCLE_D, 1)
    g = cell_graph(out)
    assert classify(g) == "ProperTurningPath"
    assert len(order) >= 3


@pytest.mark.parametrize("L", [2, 4, 8])
def test_rich_path_structure(L):
    out, order, dpos = build_rich_path(CYCLE_D, L)
    g = cell_graph(out)
    assert classify(g) == "ProperTurningPath"
    assert order == path_order(g)
    assert len(order) >= L
    # one D entry per cycle copy
    cycle_len = len(CYCLE_D.nonempty_cells())
    assert len(dpos) >= len(order) // (cycle_len + 1)
    for cc in dpos:
        assert out.entry(*cc) == av(P321)


@pytest.mark.parametrize("L", [2, 4])
def test_rich_path_members_stay_in_input_class(L):
    rng = random.Random(L)
    out, _, _ = build_rich_path(CYCLE_D, L)
    cells = out.nonempty_cells()
    for _ in range(10):
        chosen = rng.sample(cells, min(6, len(cells)))
        sizes = {c: 1 for c in chosen}
        p, _ = sample_member(out, rng, sizes)
        assert find_gridding(p, CYCLE_D) is not None


# -- assembly -------------------------------------------------------------------


def test_assemble_single_tile_is_standardize():
    tile = Tile((pt(1, 2), pt(2, 1), pt(3, 3)), Fraction(3))
    fam = TileFamily(1, 1, {(1, 1): tile}, Fraction(3))
    p, prov, g = assemble(fam, identity_orientation(1, 1))
    assert p == perm(2, 1, 3)
    assert prov == {((1, 1), 0): 1, ((1, 1), 1): 2, ((1, 1), 2): 3}
    assert g == Gridding((1, 4), (1, 4))


def test_assemble_orientation_reverses():
    tile = Tile((pt(1, 1), pt(2, 2)), Fraction(2))
    fam = TileFamily(1, 1, {(1, 1): tile}, Fraction(2))
    p, _, _ = assemble(fam, Orientation((-1,), (1,)))
    assert p == perm(2, 1)
    p, _, _ = assemble(fam, Orientation((1,), (-1,)))
    assert p == perm(2, 1)
    p, _, _ = assemble(fam, Orientation((-1,), (-1,)))
    assert p == perm(1, 2)


def test_assemble_rotation_tiebreak():
    # two tiles in one row whose points collide in y: the point with
    # larger x must end lower
    t1 = Tile((pt(1, 1),), Fraction(1))
    t2 = Tile((pt(1, 1),), Fraction(1))
    fam = TileFamily(2, 1, {(1, 1): t1, (2, 1): t2}, Fraction(1))
    p, _, _ = assemble(fam, identity_orientation(2, 1))
    assert p == perm(2, 1)
    # two tiles in one column colliding in x: larger y ends further right
    fam = TileFamily(1, 2, {(1, 1): t1, (1, 2): t2}, Fraction(1))
    p, _, _ = assemble(fam, identity_orientation(1, 2))
    assert p == perm(1, 2)


def test_assemble_box_overflow():
    tile = Tile((pt(5, 1),), Fraction(2))
    fam = TileFamily(1, 1, {(1, 1): tile}, Fraction(2))
    with pytest.raises(BoxOverflow):
        assemble(fam, identity_orientation(1, 1))


def test_assemble_passes_induced_gridding():
    rng = random.Random(5)
    m = mat([DEC, INC], [INC, DEC])
    f = consistent_orientation(m)
    fm = apply_orientation_matrix(m, f)
    assert all(fm.entry(*c) == INC for c in fm.nonempty_cells())
    for _ in range(10):
        sizes = {c: rng.randint(1, 3) for c in m.nonempty_cells()}
        # build increasing tiles, orient with f: result lands in Grid(m)
        bound = Fraction(4)
        tiles = {}
        for cell, s in sizes.items():
            pts = tuple(pt(Fraction(t + 1), Fraction(t + 1)) for t in range(s))
            tiles[cell] = Tile(pts, bound)
        fam = TileFamily(2, 2, tiles, bound)
        p, _, g = assemble(fam, f)
        assert check_gridding(p, g, m)
