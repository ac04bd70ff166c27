"""Gridding matrices and everything built on top of them.

A k x l gridding matrix has k columns and l rows of cell classes; rows
are numbered 1..l from bottom to top.  This module provides cell graphs
and their path/cycle classification, gridding search and verification,
orientations, refinements, staircase matrices, the rich-path
construction, and F-assembly of tile families.
"""

from __future__ import annotations

import bisect
import itertools
import math
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import entries as E
from .coords import ExactCoord, PlanePoint
from .entries import ClassEntry
from .perm import Permutation

Cell = Tuple[int, int]  # (column, row), both 1-based


class DimensionMismatch(ValueError):
    pass


class NotClosedEntry(ValueError):
    pass


class NoCycle(ValueError):
    pass


class MultipleDEntries(ValueError):
    pass


class BoxOverflow(ValueError):
    pass


@dataclass(frozen=True)
class GriddingMatrix:
    cols: int
    rows: int
    # entries[i-1][j-1] is the class of column i, row j (row 1 = bottom)
    entries: Tuple[Tuple[ClassEntry, ...], ...]

    def __post_init__(self) -> None:
        if self.cols < 1 or self.rows < 1:
            raise ValueError("matrix must be at least 1x1")
        if len(self.entries) != self.cols or any(
                len(col) != self.rows for col in self.entries):
            raise DimensionMismatch("entry array does not match cols x rows")

    def entry(self, i: int, j: int) -> ClassEntry:
        return self.entries[i - 1][j - 1]

    def cells(self):
        for i in range(1, self.cols + 1):
            for j in range(1, self.rows + 1):
                yield (i, j)

    def nonempty_cells(self) -> List[Cell]:
        # cached: refined path matrices have millions of cells, nearly
        # all empty, and several passes ask for this list
        cached = self.__dict__.get("_nonempty")
        if cached is None:
            cached = [(i + 1, j + 1)
                      for i, col in enumerate(self.entries)
                      for j, e in enumerate(col)
                      if not E.is_empty(e)]
            object.__setattr__(self, "_nonempty", cached)
        return list(cached)


def matrix_from_rows_top_down(rows: Sequence[Sequence[ClassEntry]]) -> GriddingMatrix:
    """Build a matrix from rows listed top-to-bottom (the human and file
    convention), converting to bottom-to-top indexing."""
    l = len(rows)
    k = len(rows[0])
    if any(len(r) != k for r in rows):
        raise DimensionMismatch("ragged rows")
    cols = tuple(tuple(rows[l - j][i - 1] for j in range(1, l + 1))
                 for i in range(1, k + 1))
    return GriddingMatrix(k, l, cols)


def parse_matrix_json(text: str) -> GriddingMatrix:
    obj = json.loads(text)
    k, l = obj["cols"], obj["rows"]
    rows = [[E.parse_entry(s) for s in row] for row in obj["entries"]]
    m = matrix_from_rows_top_down(rows)
    if m.cols != k or m.rows != l:
        raise DimensionMismatch(
            f"declared {k}x{l}, entries give {m.cols}x{m.rows}")
    return m


def format_matrix_json(m: GriddingMatrix) -> str:
    rows = [[E.format_entry(m.entry(i, j)) for i in range(1, m.cols + 1)]
            for j in range(m.rows, 0, -1)]
    return json.dumps({"cols": m.cols, "rows": m.rows, "entries": rows})


# --- cell graph -----------------------------------------------------------

@dataclass(frozen=True)
class CellGraph:
    vertices: Tuple[Cell, ...]
    edges: Tuple[Tuple[Cell, Cell], ...]

    def neighbours(self, v: Cell) -> List[Cell]:
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = {u: [] for u in self.vertices}
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            object.__setattr__(self, "_adj", adj)
        return list(adj.get(v, ()))


def cell_graph(m: GriddingMatrix) -> CellGraph:
    """Vertices are the cells with infinite (non-empty) entries; two
    vertices in the same row or column are adjacent when no infinite
    entry lies between them."""
    verts = m.nonempty_cells()
    by_col: Dict[int, List[int]] = {}
    by_row: Dict[int, List[int]] = {}
    for (i, j) in verts:
        by_col.setdefault(i, []).append(j)
        by_row.setdefault(j, []).append(i)
    # in each line the nonempty cells are adjacent exactly when they are
    # consecutive in it
    edges = []
    for i, js in by_col.items():
        js.sort()
        edges.extend(((i, a), (i, b)) for a, b in zip(js, js[1:]))
    for j, iis in by_row.items():
        iis.sort()
        edges.extend(((a, j), (b, j)) for a, b in zip(iis, iis[1:]))
    return CellGraph(tuple(sorted(verts)), tuple(edges))


def _no_three_in_line(verts: Sequence[Cell]) -> bool:
    for key in (0, 1):
        counts: Dict[int, int] = {}
        for v in verts:
            counts[v[key]] = counts.get(v[key], 0) + 1
            if counts[v[key]] > 2:
                return False
    return True


def classify(g: CellGraph) -> str:
    """One of 'ProperTurningPath', 'ProperTurningCycle', 'Other'."""
    n = len(g.vertices)
    if n == 0:
        return "Other"
    deg = {v: len(g.neighbours(v)) for v in g.vertices}
    # connectivity
    seen = {g.vertices[0]}
    stack = [g.vertices[0]]
    while stack:
        for w in g.neighbours(stack.pop()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        return "Other"
    if not _no_three_in_line(g.vertices):
        return "Other"
    degs = sorted(deg.values())
    if n == 1:
        return "ProperTurningPath"
    if degs == [1, 1] + [2] * (n - 2):
        return "ProperTurningPath"
    if degs == [2] * n and n >= 3:
        return "ProperTurningCycle"
    return "Other"


def path_order(g: CellGraph) -> List[Cell]:
    """Vertex order of a path graph, starting from the smaller endpoint."""
    if len(g.vertices) == 1:
        return [g.vertices[0]]
    ends = sorted(v for v in g.vertices if len(g.neighbours(v)) == 1)
    order = [ends[0]]
    prev = None
    while len(order) < len(g.vertices):
        nxt = [w for w in g.neighbours(order[-1]) if w != prev]
        prev = order[-1]
        order.append(nxt[0])
    return order


# --- griddings ------------------------------------------------------------

@dataclass(frozen=True)
class Gridding:
    col_cuts: Tuple[int, ...]
    row_cuts: Tuple[int, ...]

    def __post_init__(self) -> None:
        for cuts in (self.col_cuts, self.row_cuts):
            if any(a > b for a, b in zip(cuts, cuts[1:])):
                raise ValueError("cuts must be weakly increasing")


def parse_gridding_json(text: str) -> Gridding:
    obj = json.loads(text)
    return Gridding(tuple(obj["col_cuts"]), tuple(obj["row_cuts"]))


def format_gridding_json(g: Gridding) -> str:
    return json.dumps({"col_cuts": list(g.col_cuts),
                       "row_cuts": list(g.row_cuts)})


def _cell_contents_sparse(p: Permutation, g: Gridding
                          ) -> Dict[Cell, Permutation]:
    """Standardization of each non-empty cell of p under the gridding g."""
    vals: Dict[Cell, List[int]] = {}
    for pos in range(1, len(p) + 1):
        v = p[pos - 1]
        i = bisect.bisect_right(g.col_cuts, pos)
        j = bisect.bisect_right(g.row_cuts, v)
        vals.setdefault((i, j), []).append(v)
    out: Dict[Cell, Permutation] = {}
    for cell, vs in vals.items():
        rank = {v: t + 1 for t, v in enumerate(sorted(vs))}
        out[cell] = Permutation(tuple(rank[v] for v in vs))
    return out


def cell_contents(p: Permutation, g: Gridding) -> Dict[Cell, Permutation]:
    """Standardization of each cell of p under the gridding g."""
    k = len(g.col_cuts) - 1
    l = len(g.row_cuts) - 1
    out = _cell_contents_sparse(p, g)
    empty = Permutation(())
    for i in range(1, k + 1):
        for j in range(1, l + 1):
            out.setdefault((i, j), empty)
    return out


def check_gridding(p: Permutation, g: Gridding, m: GriddingMatrix) -> bool:
    n = len(p)
    if len(g.col_cuts) != m.cols + 1 or len(g.row_cuts) != m.rows + 1:
        return False
    if g.col_cuts[0] != 1 or g.col_cuts[-1] != n + 1:
        return False
    if g.row_cuts[0] != 1 or g.row_cuts[-1] != n + 1:
        return False
    # empty cells satisfy every entry; only filled cells need checking
    for cell, content in _cell_contents_sparse(p, g).items():
        if not E.entry_contains(m.entry(*cell), content):
            return False
    return True


def find_gridding(p: Permutation, m: GriddingMatrix) -> Optional[Gridding]:
    """Lexicographically least valid gridding of p, or None.

    Enumerates the O(n^{k+l-2}) cut vectors in lexicographic order of
    (col_cuts, row_cuts) and returns the first that checks out.
    """
    n = len(p)
    inner = range(1, n + 2)
    col_choices = itertools.combinations_with_replacement(inner, m.cols - 1)
    for ccut in col_choices:
        cols = (1,) + ccut + (n + 1,)
        if any(a > b for a, b in zip(cols, cols[1:])):
            continue
        for rcut in itertools.combinations_with_replacement(inner, m.rows - 1):
            rows = (1,) + rcut + (n + 1,)
            if any(a > b for a, b in zip(rows, rows[1:])):
                continue
            g = Gridding(cols, rows)
            if check_gridding(p, g, m):
                return g
    return None


# --- orientations ---------------------------------------------------------

@dataclass(frozen=True)
class Orientation:
    f_c: Tuple[int, ...]
    f_r: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v not in (-1, 1) for v in self.f_c + self.f_r):
            raise ValueError("orientation values must be +-1")

    def col(self, i: int) -> int:
        return self.f_c[i - 1]

    def row(self, j: int) -> int:
        return self.f_r[j - 1]


def identity_orientation(k: int, l: int) -> Orientation:
    return Orientation((1,) * k, (1,) * l)


def apply_orientation_matrix(m: GriddingMatrix, f: Orientation) -> GriddingMatrix:
    if len(f.f_c) != m.cols or len(f.f_r) != m.rows:
        raise DimensionMismatch("orientation size does not match matrix")
    cols = []
    for i in range(1, m.cols + 1):
        col = []
        for j in range(1, m.rows + 1):
            e = m.entry(i, j)
            if f.col(i) == -1:
                e = E.entry_reverse(e)
            if f.row(j) == -1:
                e = E.entry_complement(e)
            col.append(e)
        cols.append(tuple(col))
    return GriddingMatrix(m.cols, m.rows, tuple(cols))


def apply_orientation_gridded(p: Permutation, g: Gridding,
                              f: Orientation) -> Permutation:
    """Reverse every column with f_c = -1 and complement every row with
    f_r = -1; the gridding g stays valid for the transformed matrix."""
    k = len(g.col_cuts) - 1
    l = len(g.row_cuts) - 1
    if len(f.f_c) != k or len(f.f_r) != l:
        raise DimensionMismatch("orientation size does not match gridding")
    pos_map = list(range(len(p)))
    for i in range(1, k + 1):
        if f.col(i) == -1:
            lo, hi = g.col_cuts[i - 1] - 1, g.col_cuts[i] - 1
            pos_map[lo:hi] = reversed(pos_map[lo:hi])
    vals = [p[q] for q in pos_map]
    for j in range(1, l + 1):
        if f.row(j) == -1:
            lo, hi = g.row_cuts[j - 1], g.row_cuts[j]
            vals = [lo + (hi - 1) - v if lo <= v < hi else v for v in vals]
    return Permutation(tuple(vals))


def _orient_by_propagation(m: GriddingMatrix, want_plus, root_sign=1
                           ) -> Optional[Orientation]:
    """2-colour columns/rows so that each non-empty entry (i,j) has
    f_c(i)*f_r(j) equal to want_plus(entry) (+1/-1/None=unconstrained).
    In every connected component the largest-indexed column is anchored
    to root_sign (canonical representative)."""
    sign: Dict[Tuple[str, int], int] = {}
    nodes = [("c", i) for i in range(1, m.cols + 1)] + \
            [("r", j) for j in range(1, m.rows + 1)]
    adj: Dict[Tuple[str, int], List[Tuple[Tuple[str, int], int]]] = \
        {v: [] for v in nodes}
    for (i, j) in m.nonempty_cells():
        w = want_plus(m.entry(i, j))
        if w is None:
            continue
        adj[("c", i)].append((("r", j), w))
        adj[("r", j)].append((("c", i), w))
    for start in [("c", i) for i in range(m.cols, 0, -1)] + \
                 [("r", j) for j in range(m.rows, 0, -1)]:
        if start in sign:
            continue
        sign[start] = root_sign
        stack = [start]
        while stack:
            v = stack.pop()
            for w, rel in adj[v]:
                need = sign[v] * rel
                if w in sign:
                    if sign[w] != need:
                        return None
                else:
                    sign[w] = need
                    stack.append(w)
    return Orientation(tuple(sign[("c", i)] for i in range(1, m.cols + 1)),
                       tuple(sign[("r", j)] for j in range(1, m.rows + 1)))


def consistent_orientation(m: GriddingMatrix) -> Optional[Orientation]:
    """An orientation making every non-empty (monotone) entry inc, or
    None when the propagation over G_M conflicts."""
    for cell in m.nonempty_cells():
        if not E.is_monotone(m.entry(*cell)):
            raise ValueError("consistent_orientation needs a monotone matrix")

    def want(e: ClassEntry) -> int:
        return 1 if e.kind == "inc" else -1

    f = _orient_by_propagation(m, want)
    if f is None:
        return None
    img = apply_orientation_matrix(m, f)
    assert all(img.entry(*c).kind == "inc" for c in img.nonempty_cells())
    return f


def sum_closing_orientation(m: GriddingMatrix) -> Optional[Orientation]:
    """An orientation under which every non-empty entry's image is
    sum-closed; None if propagation conflicts."""
    def want(e: ClassEntry) -> Optional[int]:
        sc, kc = E.sum_closed(e), E.skew_closed(e)
        if sc and kc:
            return None
        if sc:
            return 1
        if kc:
            return -1
        raise NotClosedEntry(f"entry {E.format_entry(e)} is neither sum- "
                             "nor skew-closed")
    return _orient_by_propagation(m, want)


# --- refinement, staircases, rich paths ------------------------------------

def refine(m: GriddingMatrix, q: int) -> GriddingMatrix:
    """Replace each sum-closed entry by a q x q diagonal block and each
    skew-closed entry by an anti-diagonal block."""
    k, l = m.cols, m.rows
    cols = [[E.EMPTY_E] * (q * l) for _ in range(q * k)]
    for (i, j) in m.cells():
        e = m.entry(i, j)
        if E.is_empty(e):
            continue
        if E.sum_closed(e):
            for t in range(1, q + 1):
                cols[(i - 1) * q + t - 1][(j - 1) * q + t - 1] = e
        elif E.skew_closed(e):
            for t in range(1, q + 1):
                cols[(i - 1) * q + t - 1][(j - 1) * q + q - t] = e
        else:
            raise NotClosedEntry(f"entry {E.format_entry(e)} at {(i, j)}")
    return GriddingMatrix(q * k, q * l, tuple(tuple(c) for c in cols))


def staircase(k: int, c: ClassEntry, d: ClassEntry) -> GriddingMatrix:
    """The k-step increasing staircase: main-diagonal entries equal to c
    with d on the adjacent lower diagonal, i.e. cell (i, i) holds c and
    cell (i+1, i) holds d for i in [k]; k+1 columns, k rows."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cols = [[E.EMPTY_E] * k for _ in range(k + 1)]
    for i in range(1, k + 1):
        cols[i - 1][i - 1] = c
        cols[i][i - 1] = d
    return GriddingMatrix(k + 1, k, tuple(tuple(col) for col in cols))


def build_rich_path(m: GriddingMatrix, length: int
                    ) -> Tuple[GriddingMatrix, List[Cell], List[Cell]]:
    """Turn a proper-turning-cycle matrix with a single non-monotone
    entry D into a matrix whose cell graph is one long proper-turning
    path containing a constant fraction of D entries.

    Returns (matrix, path vertices in order, cells holding D).
    """
    g = cell_graph(m)
    if classify(g) != "ProperTurningCycle":
        raise NoCycle("cell graph is not a single proper-turning cycle")
    d_cells = [cc for cc in m.nonempty_cells()
               if not E.is_monotone(m.entry(*cc))]
    if len(d_cells) != 1:
        raise MultipleDEntries(f"need exactly one D entry, got {len(d_cells)}")
    d_entry = m.entry(*d_cells[0])
    if not (E.sum_closed(d_entry) or E.skew_closed(d_entry)):
        raise NotClosedEntry("D entry must be sum- or skew-closed")

    base = m
    f = sum_closing_orientation(base)
    if f is None:
        base = refine(m, 2)
        f = sum_closing_orientation(base)
        assert f is not None, "x2 refinement always admits an orientation"

    L = length
    refined = refine(base, L)

    # characteristic labels of the refined columns/rows
    def col_label(a: int) -> int:  # a is 1-based in the refined matrix
        i, t = divmod(a - 1, L)
        return t + 1 if f.col(i + 1) == 1 else L - t

    def row_label(b: int) -> int:
        j, t = divmod(b - 1, L)
        return t + 1 if f.row(j + 1) == 1 else L - t

    # first non-empty monotone entry of the base matrix hosts the shift
    mono = [cc for cc in base.nonempty_cells()
            if E.is_monotone(base.entry(*cc))]
    si, sj = mono[0]
    shift_entry = base.entry(si, sj)

    cols = [list(col) for col in refined.entries]
    col_range = range((si - 1) * L + 1, si * L + 1)
    row_range = range((sj - 1) * L + 1, sj * L + 1)
    for a in col_range:
        for b in row_range:
            cols[a - 1][b - 1] = E.EMPTY_E
    col_of_label = {col_label(a): a for a in col_range}
    row_of_label = {row_label(b): b for b in row_range}
    for s in range(1, L):
        cols[col_of_label[s] - 1][row_of_label[s + 1] - 1] = shift_entry

    out = GriddingMatrix(refined.cols, refined.rows,
                         tuple(tuple(c) for c in cols))
    og = cell_graph(out)
    assert classify(og) == "ProperTurningPath"
    order = path_order(og)
    d_positions = [cc for cc in order if not E.is_monotone(out.entry(*cc))]
    return out, order, d_positions


# --- tiles and F-assembly ---------------------------------------------------

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Tile:
    """A finite set of plane points in general position inside the open
    box (1/2, box_bound + 1/2)^2."""
    points: Tuple[PlanePoint, ...]
    box_bound: Fraction

    def validate(self) -> None:
        # scaled to a common integer grid so the per-point checks stay
        # cheap on six-figure tiles
        if not self.points:
            return
        dens = {2, self.box_bound.denominator}
        for p in self.points:
            for c in (p.x, p.y):
                dens.update((c.a.denominator, c.b.denominator,
                             c.c.denominator))
        common = math.lcm(*dens)
        lo = (common // 2, 0, 0)
        hi = (self.box_bound.numerator * (common // self.box_bound.denominator)
              + common // 2, 0, 0)
        for axis in ("x", "y"):
            seen = set()
            for p in self.points:
                c = getattr(p, axis)
                k = (c.a.numerator * (common // c.a.denominator),
                     c.b.numerator * (common // c.b.denominator),
                     c.c.numerator * (common // c.c.denominator))
                if not (lo < k < hi):
                    raise BoxOverflow(
                        f"point {p} outside the {self.box_bound}-box")
                if k in seen:
                    raise ValueError(
                        f"tile not in general position on {axis}")
                seen.add(k)


@dataclass(frozen=True)
class TileFamily:
    cols: int
    rows: int
    tiles: Dict[Cell, Tile] = field(default_factory=dict)
    box_bound: Fraction = Fraction(1)

    def tile(self, i: int, j: int) -> Tile:
        return self.tiles.get((i, j), Tile((), self.box_bound))


def assemble(fam: TileFamily, f: Orientation
             ) -> Tuple[Permutation, Dict[Tuple[Cell, int], int], Gridding]:
    """F-assembly: orient each tile, translate it onto the diagonal grid
    of boxes, and standardize the union.

    Coordinate ties between different tiles are resolved as if the whole
    picture were rotated clockwise by a tiny angle: on equal x the point
    with larger y ends up further right; on equal y the point with
    larger x ends up lower.

    Returns the permutation, a provenance map (cell, point index within
    its tile) -> permutation position (1-based), and the induced
    gridding.
    """
    if len(f.f_c) != fam.cols or len(f.f_r) != fam.rows:
        raise DimensionMismatch("orientation does not match the family")
    mb = fam.box_bound
    dens = {mb.denominator}
    for tile in fam.tiles.values():
        tile.validate()
        if tile.box_bound != mb:
            raise BoxOverflow("tile box bound differs from the family's")
        for p in tile.points:
            for c in (p.x, p.y):
                dens.update((c.a.denominator, c.b.denominator,
                             c.c.denominator))

    # exact integer sort keys on a common denominator: the translations
    # and orientation flips are folded in, so the big sorts below compare
    # plain int tuples and no coordinate arithmetic happens per point
    common = math.lcm(*dens)
    mbi = mb.numerator * (common // mb.denominator)
    flipi = mbi + common          # mb + 1, scaled

    def ikey(c: ExactCoord, flipped: bool, off: int) -> Tuple[int, int, int]:
        a = c.a.numerator * (common // c.a.denominator)
        b = c.b.numerator * (common // c.b.denominator)
        cc = c.c.numerator * (common // c.c.denominator)
        if flipped:
            return (flipi - a + off, -b, -cc)
        return (a + off, b, cc)

    keyed = []
    for (i, j), tile in fam.tiles.items():
        fx = f.col(i) == -1
        fy = f.row(j) == -1
        offx = (i - 1) * mbi
        offy = (j - 1) * mbi
        for idx, p in enumerate(tile.points):
            keyed.append((ikey(p.x, fx, offx), ikey(p.y, fy, offy),
                          (i, j), idx))

    by_x = sorted(keyed, key=lambda t: (t[0], t[1]))
    by_y = sorted(keyed, key=lambda t: (t[1],
                                        tuple(-v for v in t[0])))
    yrank = {(t[2], t[3]): r + 1 for r, t in enumerate(by_y)}
    ranks = tuple(yrank[(t[2], t[3])] for t in by_x)
    perm_out = Permutation(ranks)
    prov = {(t[2], t[3]): pos + 1 for pos, t in enumerate(by_x)}

    col_counts = [0] * (fam.cols + 1)
    row_counts = [0] * (fam.rows + 1)
    for (_, _, (i, j), _) in keyed:
        col_counts[i] += 1
        row_counts[j] += 1
    ccuts = [1]
    for i in range(1, fam.cols + 1):
        ccuts.append(ccuts[-1] + col_counts[i])
    rcuts = [1]
    for j in range(1, fam.rows + 1):
        rcuts.append(rcuts[-1] + row_counts[j])
    return perm_out, prov, Gridding(tuple(ccuts), tuple(rcuts))


def random_entry_member(e: ClassEntry, size: int, rng) -> Permutation:
    """A uniform-ish random member of the entry class of a given small
    size, by rejection sampling."""
    if size == 0:
        return Permutation(())
    if E.is_empty(e):
        raise ValueError("the empty class has no non-empty members")
    if e.kind == "inc":
        return Permutation(tuple(range(1, size + 1)))
    if e.kind == "dec":
        return Permutation(tuple(range(size, 0, -1)))
    for _ in range(10000):
        ranks = list(range(1, size + 1))
        rng.shuffle(ranks)
        p = Permutation(tuple(ranks))
        if E.entry_contains(e, p):
            return p
    raise ValueError(f"no member of size {size} found for {E.format_entry(e)}")


def sample_member(m: GriddingMatrix, rng, sizes: Dict[Cell, int]
                  ) -> Tuple[Permutation, Gridding]:
    """A random member of Grid(m) with the given number of points per
    cell, together with its witnessing gridding.

    Realized by filling a tile family with random in-box coordinates and
    assembling with the identity orientation.
    """
    bound = Fraction(max(sizes.values(), default=0) + 1)
    denom = 997
    tiles: Dict[Cell, Tile] = {}
    for cell, s in sizes.items():
        if s == 0:
            continue
        content = random_entry_member(m.entry(*cell), s, rng)
        span = int(bound * denom) - 2
        xs = sorted(Fraction(1 + v, denom) + _HALF
                    for v in rng.sample(range(span), s))
        ys = sorted(Fraction(1 + v, denom) + _HALF
                    for v in rng.sample(range(span), s))
        pts = tuple(PlanePoint(ExactCoord(xs[t]),
                               ExactCoord(ys[content[t] - 1]))
                    for t in range(s))
        tiles[cell] = Tile(pts, bound)
    fam = TileFamily(m.cols, m.rows, tiles, bound)
    p, _, g = assemble(fam, identity_orientation(m.cols, m.rows))
    assert check_gridding(p, g, m)
    return p, g


