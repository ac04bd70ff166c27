"""Construction of hard matching instances from 3-CNF formulas.

Given a 3-CNF formula and a gridding matrix whose cell graph is a long
proper-turning path with recurring non-monotone ("D") entries, this module
builds a pattern/text pair of gridded permutations such that the pattern
embeds into the text by a grid-preserving embedding exactly when the
formula is satisfiable.

The construction is organised in synchronised layers.  All live channels
(atomic pairs) sit in a single frontier tile; a layer advances every one
of them to a later tile, applying copy gadgets by default and the layer's
specific gadgets (choose/pick/multiply/merge/follow/flips/bucket copies)
to designated channels.  Layers come in four shapes:

* ``mono``     -- one step into the next tile, monotone gadgets only;
* ``dsimple``  -- copy up to the tile before the next D entry, then one
                  step into it carrying choose/pick/merge/follow gadgets;
* ``flip``     -- a span between two consecutive D entries; designated
                  adjacent duos get flip (text) gadgets, every other
                  non-anchor channel gets a single-channel flip chain,
                  anchors get plain copies;
* ``bucket``   -- one step into a D entry holding a monotone
                  juxtaposition; every channel is copied with freshly
                  assigned outgoing values, which reorders the channels.

The same driver runs in two modes: ``geometry`` mode emits exact points
and a full gadget trace, ``counting`` mode only tracks per-tile point
counts and channel order, which makes instance sizes cheap to compute for
large formulas.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..coords import DELTA, EPS, ExactCoord, PlanePoint, coord
from .. import entries as E
from ..grid import (Gridding, GriddingMatrix, Orientation, Tile, TileFamily,
                    _orient_by_propagation, assemble, build_rich_path,
                    cell_graph, classify, matrix_from_rows_top_down,
                    path_order)
from ..perm import Permutation, perm
from . import gadgets as G

Cell = Tuple[int, int]

__all__ = [
    "ReductionError", "EmptyClause", "ClauseTooWide", "PathTooShort",
    "TooManyVariables", "NotAPath", "UnusableMatrix",
    "Formula3CNF", "normalize_3cnf", "PathSpec", "make_path_spec",
    "ReductionInstance", "plan_layers", "reduce_formula",
    "default_matrix", "rich_path_matrix", "bucket_rehearsal",
]


class ReductionError(Exception):
    pass


class EmptyClause(ReductionError):
    pass


class ClauseTooWide(ReductionError):
    pass


class PathTooShort(ReductionError):
    def __init__(self, required_d: int, available_d: int, required_len: int):
        super().__init__(
            f"path provides {available_d} usable D entries, "
            f"construction needs {required_d} (path length >= {required_len})")
        self.required_d = required_d
        self.available_d = available_d
        self.required_len = required_len


class TooManyVariables(ReductionError):
    pass


class NotAPath(ReductionError):
    pass


class UnusableMatrix(ReductionError):
    pass


# --- formulas ----------------------------------------------------------------


@dataclass(frozen=True)
class Formula3CNF:
    nvars: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def evaluates(self, assignment: Sequence[bool]) -> bool:
        for cl in self.clauses:
            if not any((lit > 0) == assignment[abs(lit) - 1] for lit in cl):
                return False
        return True


def normalize_3cnf(nvars: int, clauses: Sequence[Sequence[int]]) -> Formula3CNF:
    """Pad narrow clauses by repeating their last literal; reject wide or
    empty ones."""
    out = []
    for idx, cl in enumerate(clauses):
        lits = list(cl)
        if not lits:
            raise EmptyClause(f"clause {idx + 1} is empty")
        if len(lits) > 3:
            raise ClauseTooWide(f"clause {idx + 1} has {len(lits)} literals")
        for lit in lits:
            if lit == 0 or abs(lit) > nvars:
                raise ReductionError(f"literal {lit} out of range")
        while len(lits) < 3:
            lits.append(lits[-1])
        out.append(tuple(lits))
    return Formula3CNF(nvars, tuple(out))


# --- path preparation --------------------------------------------------------


@dataclass(frozen=True)
class PathSpec:
    """A proper-turning path together with the data the builder needs."""
    matrix: GriddingMatrix
    cells: Tuple[Cell, ...]
    orientation: Orientation
    out_coord: Tuple[str, ...]   # "x"/"y": assembled coordinate shared with
                                 # the next tile (last entry is a convention)
    d_tiles: Tuple[int, ...]     # 0-based path indices of non-monotone cells

    def in_coord(self, t: int) -> str:
        return "y" if self.out_coord[t] == "x" else "x"


def _reduction_want(entry):
    if entry.kind == "inc":
        return 1
    if entry.kind == "dec":
        return -1
    return 1  # non-monotone entries are used in their given orientation


def make_path_spec(matrix: GriddingMatrix) -> PathSpec:
    g = cell_graph(matrix)
    if classify(g) != "ProperTurningPath":
        raise NotAPath("cell graph is not a single proper-turning path")
    cells = path_order(g)

    def shared_axis(a: Cell, b: Cell) -> str:
        return "row" if a[1] == b[1] else "col"

    # Prefer the direction whose D entries mostly follow a shared row; with
    # the default cycle-derived matrices this makes every D entry usable for
    # bucket passes that split along the free coordinate.
    def row_d(order):
        return sum(1 for t in range(1, len(order))
                   if not E.is_monotone(matrix.entry(*order[t]))
                   and shared_axis(order[t - 1], order[t]) == "row")

    rev = list(reversed(cells))
    if row_d(rev) > row_d(cells):
        cells = rev

    f = _orient_by_propagation(matrix, _reduction_want)
    if f is None:
        raise UnusableMatrix("path matrix admits no consistent orientation")

    # Sharing a row means the two tiles interleave vertically: the shared
    # assembled coordinate is y.
    out_coord = []
    for t in range(len(cells) - 1):
        out_coord.append("y" if shared_axis(cells[t], cells[t + 1]) == "row"
                         else "x")
    out_coord.append("y" if out_coord[-1] == "x" else "x")

    d_tiles = tuple(t for t, cc in enumerate(cells)
                    if not E.is_monotone(matrix.entry(*cc)))
    return PathSpec(matrix, tuple(cells), f, tuple(out_coord), d_tiles)


# --- channel bookkeeping -----------------------------------------------------

PointRef = Tuple[int, int]  # (path tile index, index within the tile)


@dataclass
class PairRec:
    pid: int
    family: str                     # "P" or "T"
    tile: int
    vals: Optional[Tuple[ExactCoord, ExactCoord]]
    pts: Tuple[PointRef, ...]
    lineage: str = ""               # "Y"/"Z" for text occurrence channels
    tag: Tuple = ()                 # ("anchor", i) / ("var", k) / ("occ", t)
    frozen: bool = False


@dataclass
class GadgetRec:
    kind: str
    family: str
    layer: int
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]
    slots: Dict[str, Tuple[PointRef, ...]]
    meta: Tuple = ()


@dataclass
class ReductionInstance:
    formula: Formula3CNF
    mode: str
    path: PathSpec
    box_bound: Fraction
    sizes: Dict[str, int]
    layers: List[Tuple[str, int]]          # (kind, tile reached)
    d_used: int
    counting_only: bool
    bucket_entry: Optional[E.ClassEntry] = None
    # geometry-mode artifacts (None in counting mode)
    pairs: Optional[Dict[Tuple[str, int], PairRec]] = None
    trace: Optional[List[GadgetRec]] = None
    consumer: Optional[Dict[Tuple[str, int], GadgetRec]] = None
    init_map: Optional[List[Tuple[int, int]]] = None
    clause_layouts: Optional[List[Dict[str, int]]] = None
    final_positions: Optional[Dict[int, int]] = None   # text pid -> live slot
    inflation: Optional[Dict[str, Dict[str, List[PointRef]]]] = None
    tiles: Optional[Dict[str, Dict[int, List[PlanePoint]]]] = None
    families: Optional[Dict[str, TileFamily]] = None
    pattern: Optional[Permutation] = None
    text: Optional[Permutation] = None
    prov: Optional[Dict[str, Dict[Tuple[Cell, int], int]]] = None
    griddings: Optional[Dict[str, Gridding]] = None


# --- the builder -------------------------------------------------------------

_FAMS = ("P", "T")

# Positional duo offsets (within an 8-wide block) of the seven flip layers
# that shuffle, swap and unshuffle two adjacent occurrence groups.
_SWAP_STAGES = [
    [(3, 4), (5, 6)],
    [(2, 3), (4, 5)],
    [(1, 2), (3, 4), (5, 6)],
    [(0, 1), (2, 3), (4, 5), (6, 7)],   # the actual swap
    [(1, 2), (3, 4), (5, 6)],
    [(2, 3), (4, 5)],
    [(1, 2), (3, 4)],
]
_SWAP_PATTERN_STAGE = 3

# Duo offsets (within a 7-wide clause block) of the two evaluation flips.
_EVAL_STAGES = [
    [(2, 3), (5, 6)],
    [(1, 2), (4, 5)],
]


class _Builder:
    def __init__(self, formula: Formula3CNF, path: PathSpec, mode: str,
                 geometry: bool, bucket_entry: Optional[E.ClassEntry] = None):
        if mode not in ("gadgets", "juxtaposition"):
            raise ReductionError(f"unknown mode {mode!r}")
        self.formula = formula
        self.path = path
        self.mode = mode
        self.geometry = geometry
        self.bucket_entry = bucket_entry
        self.n = formula.nvars
        self.bound = Fraction(2 * self.n + 2)

        self.counts = {f: {} for f in _FAMS}   # tile -> point count
        self.tiles = {f: {} for f in _FAMS}    # tile -> [PlanePoint]
        self.pairs: Dict[Tuple[str, int], PairRec] = {}
        self.trace: List[GadgetRec] = []
        self.consumer: Dict[Tuple[str, int], GadgetRec] = {}
        self.live = {f: [] for f in _FAMS}     # pair ids in value order
        self.tag = {f: {} for f in _FAMS}      # pid -> tag tuple
        self.lineage = {}                      # text pid -> "Y"/"Z"/""
        self.cursor = 0
        self.layer_no = 0
        self.layers: List[Tuple[str, int]] = []
        self.init_map: List[Tuple[int, int]] = []
        self.clause_layouts: List[Dict[str, int]] = []
        self._next_pid = {f: 0 for f in _FAMS}
        self._dptr = 0
        self._d_needed = 0
        self._virtual = False
        # occurrence metadata, fixed after the multiplication phase
        self.occ_var: List[int] = []
        self.occ_lit: List[int] = []
        self.occ_key: List[int] = []
        self.occ_order: List[int] = []

    # -- low-level emission ----------------------------------------------

    def _bump(self, fam: str, t: int, k: int) -> int:
        c = self.counts[fam].get(t, 0)
        self.counts[fam][t] = c + k
        return c

    def _put_raw(self, fam: str, t: int, rp: G.RawPoint) -> PointRef:
        base = self._bump(fam, t, 1)
        oc = self.path.out_coord[t] if t < len(self.path.out_coord) else "x"
        if oc == "x":
            pt = PlanePoint(rp.out, rp.inn)
        else:
            pt = PlanePoint(rp.inn, rp.out)
        self.tiles[fam].setdefault(t, []).append(pt)
        return (t, base)

    def _new_pair(self, fam: str, t: int, rawpair: G.RawPair,
                  tag: Tuple, lineage: str = "") -> int:
        pid = self._next_pid[fam]
        self._next_pid[fam] += 1
        refs = (self._put_raw(fam, t, rawpair[0]),
                self._put_raw(fam, t, rawpair[1]))
        self.pairs[(fam, pid)] = PairRec(
            pid, fam, t, G.pair_values(rawpair), refs, lineage, tag)
        self.tag[fam][pid] = tag
        if fam == "T":
            self.lineage[pid] = lineage
        return pid

    def _light_pair(self, fam: str, t: int, tag: Tuple,
                    lineage: str = "") -> int:
        pid = self._next_pid[fam]
        self._next_pid[fam] += 1
        self._bump(fam, t, 2)
        self.tag[fam][pid] = tag
        if fam == "T":
            self.lineage[pid] = lineage
        return pid

    def _rec(self, kind: str, fam: str, inputs: Tuple[int, ...],
             outputs: Tuple[int, ...], slots: Dict, meta: Tuple = ()) -> None:
        rec = GadgetRec(kind, fam, self.layer_no, inputs, outputs,
                        {k: tuple(v) for k, v in slots.items()}, meta)
        self.trace.append(rec)
        for pid in inputs:
            self.consumer[(fam, pid)] = rec

    def _vals(self, fam: str, pid: int) -> Tuple[ExactCoord, ExactCoord]:
        return self.pairs[(fam, pid)].vals

    # -- D-entry supply ----------------------------------------------------

    def _take_d(self, k: int) -> List[int]:
        out = []
        ds = self.path.d_tiles
        floor = self.cursor
        while len(out) < k:
            while self._dptr < len(ds) and ds[self._dptr] <= floor:
                self._dptr += 1
            if self._dptr < len(ds):
                floor = ds[self._dptr]
                out.append(floor)
                self._dptr += 1
            else:
                if self.geometry:
                    raise PathTooShort(
                        self._d_needed + k, len(ds),
                        floor + 2 * k)   # rough; plan_layers reports exactly
                self._virtual = True
                period = ds[1] - ds[0] if len(ds) > 1 else 4
                floor = max(floor, ds[-1] if ds else 0) + period
                out.append(floor)
        self._d_needed += k
        return out

    # -- generic steps -----------------------------------------------------

    def _advance_to(self, target: int) -> None:
        while self.cursor < target:
            t = self.cursor + 1
            for fam in _FAMS:
                if not self.geometry:
                    self._bump(fam, t, 2 * len(self.live[fam]))
                    continue
                new = []
                for pid in self.live[fam]:
                    new.append(self._apply_copy(fam, pid, t))
                self.live[fam] = new
            self.cursor = t

    def _apply_copy(self, fam: str, pid: int, t: int) -> int:
        r, q = self._vals(fam, pid)
        (pair,) = G.gadget_copy(r, q)
        npid = self._new_pair(fam, t, pair, self.tag[fam][pid],
                              self.lineage.get(pid, ""))
        self._rec("copy", fam, (pid,), (npid,),
                  {"pts": self.pairs[(fam, npid)].pts})
        return npid

    def _dsimple(self, kind_of, meta_of=None) -> None:
        """One layer ending with a gadget step into the next D entry.

        ``kind_of(fam, pos, pid)`` names the gadget for each live channel:
        "copy", "pick", "choose", "follow" or ("merge", partner-position).
        ``meta_of(fam, pos)`` (optional) supplies the gadget's metadata;
        it runs after the copy advance, when ``self.live`` holds the
        gadgets' actual input channels.
        """
        (d,) = self._take_d(1)
        self._advance_to(d - 1)
        t = d
        for fam in _FAMS:
            if not self.geometry:
                new, skip = [], set()
                for pos, pid in enumerate(self.live[fam]):
                    if pos in skip:
                        continue
                    kind = kind_of(fam, pos, pid)
                    if isinstance(kind, tuple):
                        skip.add(kind[1])
                        new.append(self._light_pair(
                            fam, t, self.tag[fam][pid],
                            self.lineage.get(pid, "")))
                    elif kind == "choose":
                        self._bump(fam, t, 4)
                        lin = self.lineage.get(pid, "")
                        tg = self.tag[fam][pid]
                        a = self._next_pid[fam]; self._next_pid[fam] += 2
                        self.tag[fam][a] = tg
                        self.tag[fam][a + 1] = tg
                        if fam == "T":
                            self.lineage[a] = lin or "Y"
                            self.lineage[a + 1] = ("Z" if not lin else lin)
                        new.extend([a, a + 1])
                    else:
                        new.append(self._light_pair(
                            fam, t, self.tag[fam][pid],
                            self.lineage.get(pid, "")))
                self.live[fam] = new
                continue

            new, skip = [], set()
            for pos, pid in enumerate(self.live[fam]):
                if pos in skip:
                    continue
                kind = kind_of(fam, pos, pid)
                meta = meta_of(fam, pos) if meta_of else ()
                tg = self.tag[fam][pid]
                lin = self.lineage.get(pid, "")
                r, q = self._vals(fam, pid)
                if kind == "copy":
                    new.append(self._apply_copy(fam, pid, t))
                elif kind == "pick":
                    (pair,) = G.gadget_pick(r, q)
                    npid = self._new_pair(fam, t, pair, tg, lin)
                    self._rec("pick", fam, (pid,), (npid,),
                              {"pts": self.pairs[(fam, npid)].pts}, meta)
                    new.append(npid)
                elif kind == "follow":
                    (pair,) = G.gadget_follow(r, q)
                    npid = self._new_pair(fam, t, pair, tg, lin)
                    self._rec("follow", fam, (pid,), (npid,),
                              {"pts": self.pairs[(fam, npid)].pts}, meta)
                    new.append(npid)
                elif kind == "choose":
                    b1p, b2p = G.gadget_choose(r, q)
                    l1 = (lin or "Y") if fam == "T" else ""
                    l2 = (lin or "Z") if fam == "T" else ""
                    n1 = self._new_pair(fam, t, b1p, tg, l1)
                    n2 = self._new_pair(fam, t, b2p, tg, l2)
                    self._rec("choose", fam, (pid,), (n1, n2),
                              {"b1": self.pairs[(fam, n1)].pts,
                               "b2": self.pairs[(fam, n2)].pts}, meta)
                    new.extend([n1, n2])
                elif isinstance(kind, tuple) and kind[0] == "merge":
                    ppos = kind[1]
                    pid2 = self.live[fam][ppos]
                    skip.add(ppos)
                    r2, q2 = self._vals(fam, pid2)
                    (pair,) = G.gadget_merge(r, q, r2, q2)
                    npid = self._new_pair(fam, t, pair, tg, lin)
                    self._rec("merge", fam, (pid, pid2), (npid,),
                              {"pts": self.pairs[(fam, npid)].pts}, meta)
                    new.append(npid)
                else:  # pragma: no cover - builder bug
                    raise AssertionError(f"bad gadget kind {kind!r}")
            self.live[fam] = new
        self.cursor = t

    def _mono(self, multiply_of) -> None:
        """One step into the next tile; ``multiply_of(fam, pos)`` says which
        channels get multiply gadgets."""
        t = self.cursor + 1
        for fam in _FAMS:
            new = []
            for pos, pid in enumerate(self.live[fam]):
                if not multiply_of(fam, pos):
                    if self.geometry:
                        new.append(self._apply_copy(fam, pid, t))
                    else:
                        new.append(self._light_pair(
                            fam, t, self.tag[fam][pid],
                            self.lineage.get(pid, "")))
                    continue
                if not self.geometry:
                    self._bump(fam, t, 4)
                    tg = self.tag[fam][pid]
                    lin = self.lineage.get(pid, "")
                    a = self._next_pid[fam]; self._next_pid[fam] += 2
                    self.tag[fam][a] = tg
                    self.tag[fam][a + 1] = tg
                    if fam == "T":
                        self.lineage[a] = lin
                        self.lineage[a + 1] = lin
                    new.extend([a, a + 1])
                    continue
                r, q = self._vals(fam, pid)
                b1p, b2p = G.gadget_multiply(r, q)
                tg = self.tag[fam][pid]
                lin = self.lineage.get(pid, "")
                n1 = self._new_pair(fam, t, b1p, tg, lin)
                n2 = self._new_pair(fam, t, b2p, tg, lin)
                self._rec("multiply", fam, (pid,), (n1, n2),
                          {"b1": self.pairs[(fam, n1)].pts,
                           "b2": self.pairs[(fam, n2)].pts})
                new.extend([n1, n2])
            self.live[fam] = new
        self.cursor = t

    def _flip(self, text_duos: List[int], pattern_duos: List[int]) -> None:
        """Flip layer spanning two consecutive D entries.

        ``text_duos``/``pattern_duos`` hold the lower position of each
        adjacent duo to flip; every other non-anchor channel gets a
        single-channel flip chain, anchors get plain copy chains.
        """
        d1, d2 = self._take_d(2)
        self._advance_to(d1 - 1)
        n_mid = d2 - d1 - 1
        duo_low = {"T": set(text_duos), "P": set(pattern_duos)}
        for fam in _FAMS:
            lows = duo_low[fam]
            highs = {i + 1 for i in lows}
            if not self.geometry:
                new = []
                live = self.live[fam]
                for pos, pid in enumerate(live):
                    tg = self.tag[fam][pid]
                    lin = self.lineage.get(pid, "")
                    if tg and tg[0] == "anchor":
                        for t in range(d1, d2 + 1):
                            self._bump(fam, t, 2)
                        new.append(pid)
                    elif pos in lows:
                        pid2 = live[pos + 1]
                        self._bump(fam, d1, 2)
                        for t in range(d1 + 1, d2):
                            self._bump(fam, t, 4)
                        self._bump(fam, d2, 4)
                        lo = self._next_pid[fam]; self._next_pid[fam] += 2
                        self.tag[fam][lo] = self.tag[fam][pid2]
                        self.tag[fam][lo + 1] = tg
                        if fam == "T":
                            self.lineage[lo] = self.lineage.get(pid2, "")
                            self.lineage[lo + 1] = lin
                        new.extend([lo, lo + 1])
                    elif pos in highs:
                        pass
                    else:
                        self._bump(fam, d1, 1)
                        for t in range(d1 + 1, d2):
                            self._bump(fam, t, 2)
                        self._bump(fam, d2, 2)
                        np_ = self._next_pid[fam]; self._next_pid[fam] += 1
                        self.tag[fam][np_] = tg
                        if fam == "T":
                            self.lineage[np_] = lin
                        new.append(np_)
                self.live[fam] = new
                continue

            new = []
            live = self.live[fam]
            for pos, pid in enumerate(live):
                tg = self.tag[fam][pid]
                lin = self.lineage.get(pid, "")
                if tg and tg[0] == "anchor":
                    cur = pid
                    for t in range(d1, d2 + 1):
                        cur = self._apply_copy(fam, cur, t)
                    new.append(cur)
                elif pos in lows:
                    pid2 = live[pos + 1]
                    r1, q1 = self._vals(fam, pid)
                    r2, q2 = self._vals(fam, pid2)
                    assert q1 < r2, "flip inputs must occupy disjoint slots"
                    c1, c2 = G.flip_text_chains(r1, q1, r2, q2)
                    refs1 = [self._put_raw(fam, d1, c1.head)]
                    refs2 = [self._put_raw(fam, d1, c2.head)]
                    for t in range(d1 + 1, d2):
                        refs1 += [self._put_raw(fam, t, c1.middle[0]),
                                  self._put_raw(fam, t, c1.middle[1])]
                        refs2 += [self._put_raw(fam, t, c2.middle[0]),
                                  self._put_raw(fam, t, c2.middle[1])]
                    e1 = (self._put_raw(fam, d2, c1.end[0]),
                          self._put_raw(fam, d2, c1.end[1]))
                    e2 = (self._put_raw(fam, d2, c2.end[0]),
                          self._put_raw(fam, d2, c2.end[1]))
                    refs1 += list(e1)
                    refs2 += list(e2)
                    hi = self._next_pid[fam]; self._next_pid[fam] += 1
                    lo = self._next_pid[fam]; self._next_pid[fam] += 1
                    self.pairs[(fam, hi)] = PairRec(
                        hi, fam, d2, c1.values, e1, lin, tg)
                    lin2 = self.lineage.get(pid2, "")
                    tg2 = self.tag[fam][pid2]
                    self.pairs[(fam, lo)] = PairRec(
                        lo, fam, d2, c2.values, e2, lin2, tg2)
                    self.tag[fam][hi] = tg
                    self.tag[fam][lo] = tg2
                    if fam == "T":
                        self.lineage[hi] = lin
                        self.lineage[lo] = lin2
                    self._rec("fliptext", fam, (pid, pid2), (hi, lo),
                              {"a1": refs1, "a2": refs2})
                    new.extend([lo, hi])
                elif pos in highs:
                    pass
                else:
                    r, q = self._vals(fam, pid)
                    ch = G.flip_pattern_chain(r, q)
                    refs = [self._put_raw(fam, d1, ch.head)]
                    for t in range(d1 + 1, d2):
                        refs += [self._put_raw(fam, t, ch.middle[0]),
                                 self._put_raw(fam, t, ch.middle[1])]
                    e = (self._put_raw(fam, d2, ch.end[0]),
                         self._put_raw(fam, d2, ch.end[1]))
                    refs += list(e)
                    np_ = self._next_pid[fam]; self._next_pid[fam] += 1
                    self.pairs[(fam, np_)] = PairRec(
                        np_, fam, d2, ch.values, e, lin, tg)
                    self.tag[fam][np_] = tg
                    if fam == "T":
                        self.lineage[np_] = lin
                    self._rec("flippat", fam, (pid,), (np_,), {"pts": refs})
                    new.append(np_)
            self.live[fam] = new
        self.cursor = d2

    def _bucket(self, new_order: Dict[str, List[int]],
                dec_of: Dict[str, Dict[int, bool]]) -> None:
        """Bucket pass: one step into the next D entry; every channel is
        copied with fresh outgoing values assigned along ``new_order``
        (positions into the current live list).  ``dec_of[fam][pos]`` marks
        channels landing in a decreasing juxtaposition part, whose x-order
        is reversed."""
        (d,) = self._take_d(1)
        self._advance_to(d - 1)
        for fam in _FAMS:
            order = new_order[fam]
            if not self.geometry:
                new = []
                for pos in order:
                    pid = self.live[fam][pos]
                    new.append(self._light_pair(
                        fam, d, self.tag[fam][pid],
                        self.lineage.get(pid, "")))
                self.live[fam] = new
                continue
            total = 2 * len(order)
            step = self.bound / (total + 1)
            half = coord(Fraction(1, 2))
            new = []
            nxt = 0
            for pos in order:
                pid = self.live[fam][pos]
                r, q = self._vals(fam, pid)
                s_in, t_in = r + EPS, q - EPS
                v1 = half + coord(step * (nxt + 1))
                v2 = half + coord(step * (nxt + 2))
                nxt += 2
                if dec_of[fam].get(pos, False):
                    rawpair = (G.RawPoint(v1, t_in), G.RawPoint(v2, s_in))
                else:
                    rawpair = (G.RawPoint(v1, s_in), G.RawPoint(v2, t_in))
                npid = self._new_pair(fam, d, rawpair, self.tag[fam][pid],
                                      self.lineage.get(pid, ""))
                self._rec("bucket", fam, (pid,), (npid,),
                          {"pts": self.pairs[(fam, npid)].pts})
                new.append(npid)
            self.live[fam] = new
        self.cursor = d

    def _mark_layer(self, kind: str) -> None:
        self.layer_no += 1
        self.layers.append((kind, self.cursor))

    # -- phases ------------------------------------------------------------

    def build_phase_initial(self) -> None:
        t = 0
        n = self.n

        def diag(v_lo: Fraction, v_hi: Fraction) -> G.RawPair:
            return (G.RawPoint(coord(v_lo), coord(v_lo)),
                    G.RawPoint(coord(v_hi), coord(v_hi)))

        a1 = diag(Fraction(5, 8), Fraction(7, 8))
        a2 = diag(2 * n + Fraction(9, 8), 2 * n + Fraction(11, 8))
        for fam in _FAMS:
            ids = []
            if self.geometry:
                lo = self._new_pair(fam, t, a1, ("anchor", 0))
                for k in range(1, n + 1):
                    ids.append(self._new_pair(
                        fam, t, diag(Fraction(2 * k - 1), Fraction(2 * k)),
                        ("var", k)))
                hi = self._new_pair(fam, t, a2, ("anchor", 1))
                for pid in [lo] + ids + [hi]:
                    self._rec("initial", fam, (), (pid,),
                              {"pts": self.pairs[(fam, pid)].pts})
            else:
                lo = self._light_pair(fam, t, ("anchor", 0))
                for k in range(1, n + 1):
                    ids.append(self._light_pair(fam, t, ("var", k)))
                hi = self._light_pair(fam, t, ("anchor", 1))
            self.live[fam] = [lo] + ids + [hi]
        if self.geometry:
            for pp, tp in zip(self.live["P"], self.live["T"]):
                self.init_map.append((pp, tp))
        self._mark_layer("initial")

    def build_phase_assignment(self) -> None:
        def kind_of(fam, pos, pid):
            tg = self.tag[fam][pid]
            if not tg or tg[0] != "var":
                return "copy"
            return "choose" if fam == "T" else "pick"

        def meta_of(fam, pos):
            tg = self.tag[fam][self.live[fam][pos]]
            if fam == "P" and tg and tg[0] == "var":
                return ("assign", tg[1])
            return ()

        self._dsimple(kind_of, meta_of)
        self._mark_layer("assignment")

    def build_phase_multiplication(self) -> None:
        counts = [0] * (self.n + 1)   # occurrences per variable
        for cl in self.formula.clauses:
            for lit in cl:
                counts[abs(lit)] += 1
        levels = [0] * (self.n + 1)
        for k in range(1, self.n + 1):
            levels[k] = max(0, math.ceil(math.log2(counts[k]))) \
                if counts[k] > 1 else 0
        lmax = max(levels[1:], default=0)
        cur = [1] * (self.n + 1)      # channels per variable so far

        for step in range(lmax):
            active = {k for k in range(1, self.n + 1) if levels[k] > step}

            # live text layout: [A1] + per-var blocks of 2*cur[k] + [A2]
            def var_blocks(width_of):
                pos, spans = 1, {}
                for k in range(1, self.n + 1):
                    spans[k] = (pos, pos + width_of(k))
                    pos += width_of(k)
                return spans

            tspan = var_blocks(lambda k: 2 * cur[k])
            pspan = var_blocks(lambda k: cur[k])
            act_t = set()
            act_p = set()
            for k in active:
                act_t.update(range(*tspan[k]))
                act_p.update(range(*pspan[k]))
            self._mono(lambda fam, pos:
                       pos in (act_t if fam == "T" else act_p))
            self._mark_layer("multiply")

            # after doubling: per active var the text block reads
            # [Y~1 Y~2 Z~1 Z~2 ...]; flip (Y~2j, Z~2j-1) in every quadruple
            duos = []
            base = 1
            for k in range(1, self.n + 1):
                width = 2 * cur[k] * (2 if k in active else 1)
                if k in active:
                    for j in range(cur[k]):
                        duos.append(base + 4 * j + 1)
                base += width
            self._flip(duos, [])
            self._mark_layer("multiply-fix")
            for k in active:
                cur[k] *= 2

        # occurrence metadata: channels are in variable-major order, the
        # target order enumerates literal slots clause by clause
        occ_of_var = [[] for _ in range(self.n + 1)]
        tpos = 0
        lits = []
        for cl in self.formula.clauses:
            for lit in cl:
                lits.append(lit)
                occ_of_var[abs(lit)].append(tpos)
                tpos += 1
        self.occ_var, self.occ_lit, self.occ_key = [], [], []
        for k in range(1, self.n + 1):
            for t in occ_of_var[k]:
                self.occ_var.append(k)
                self.occ_lit.append(lits[t])
                self.occ_key.append(t)

        # freeze surplus channels and retag the kept ones by occurrence
        occ_base = [0] * (self.n + 2)
        for k in range(1, self.n + 1):
            occ_base[k + 1] = occ_base[k] + counts[k]
        for fam in _FAMS:
            keep = []
            per_var_seen = [0] * (self.n + 1)
            width = 2 if fam == "T" else 1
            for pid in self.live[fam]:
                tg = self.tag[fam][pid]
                if tg and tg[0] == "var":
                    k = tg[1]
                    slot = per_var_seen[k] // width
                    per_var_seen[k] += 1
                    if slot >= counts[k]:
                        if self.geometry:
                            self.pairs[(fam, pid)].frozen = True
                        continue
                    tg = ("occ", occ_base[k] + slot)
                    self.tag[fam][pid] = tg
                    if self.geometry:
                        self.pairs[(fam, pid)].tag = tg
                keep.append(pid)
            self.live[fam] = keep
        self._mark_layer("freeze")
        self._refresh_occ_order()
        assert self.occ_order == list(range(len(self.occ_key)))

    # -- occurrence position tracking ---------------------------------------

    def _refresh_occ_order(self) -> None:
        self.occ_order = [self.tag["P"][pid][1] for pid in self.live["P"]
                          if self.tag["P"][pid][0] == "occ"]

    def _scan_positions(self):
        """(pattern position of occ, ordered text positions of occ)."""
        pos_p = {}
        pos_t = {}
        for p, pid in enumerate(self.live["P"]):
            tg = self.tag["P"][pid]
            if tg[0] == "occ":
                pos_p[tg[1]] = p
        for p, pid in enumerate(self.live["T"]):
            tg = self.tag["T"][pid]
            if tg[0] == "occ":
                pos_t.setdefault(tg[1], []).append(p)
        return pos_p, pos_t

    def build_phase_sorting_gadgets(self) -> None:
        key = self.occ_key
        parity = 0
        guard = 0
        while any(key[self.occ_order[i]] > key[self.occ_order[i + 1]]
                  for i in range(len(self.occ_order) - 1)):
            guard += 1
            assert guard <= 3 * len(self.occ_order) + 2
            swaps = [i for i in range(parity, len(self.occ_order) - 1, 2)
                     if key[self.occ_order[i]] > key[self.occ_order[i + 1]]]
            parity ^= 1
            if not swaps:
                continue
            self._run_swap_round(swaps)
        self._mark_layer("sorted")

    def _run_swap_round(self, swaps: List[int]) -> None:
        # choose layer: each participating occurrence duo splits its four
        # text channels in eight; the pattern channels commit via picks
        pos_p, pos_t = self._scan_positions()
        choose_pos = set()
        pick_pos = set()
        swap_info = {}   # pattern position -> (side, text positions, partner)
        for i in swaps:
            o1, o2 = self.occ_order[i], self.occ_order[i + 1]
            lo1, hi1 = pos_t[o1]
            lo2, hi2 = pos_t[o2]
            assert (lo1, hi1, lo2, hi2) == (lo1, lo1 + 1, lo1 + 2, lo1 + 3)
            choose_pos.update([lo1, hi1, lo2, hi2])
            pick_pos.update([pos_p[o1], pos_p[o2]])
            quad = (lo1, hi1, lo2, hi2)
            swap_info[pos_p[o1]] = (0, quad, pos_p[o2])
            swap_info[pos_p[o2]] = (1, quad, pos_p[o1])

        def kind_of(fam, pos, pid):
            if fam == "T":
                return "choose" if pos in choose_pos else "copy"
            return "pick" if pos in pick_pos else "copy"

        def meta_of(fam, pos):
            if fam != "P" or pos not in swap_info:
                return ()
            side, quad, ppos = swap_info[pos]
            t_ids = tuple(self.live["T"][p] for p in quad)
            return ("swap", side, t_ids, self.live["P"][ppos])

        self._dsimple(kind_of, meta_of)
        self._mark_layer("swap-choose")

        # each participating text block is now 8 wide and contiguous
        pos_p, pos_t = self._scan_positions()
        blocks = []
        pat_pos = []
        for i in swaps:
            o1, o2 = self.occ_order[i], self.occ_order[i + 1]
            span = pos_t[o1] + pos_t[o2]
            assert span == list(range(span[0], span[0] + 8))
            blocks.append(span[0])
            assert pos_p[o2] == pos_p[o1] + 1
            pat_pos.append(pos_p[o1])

        for stage, duos in enumerate(_SWAP_STAGES):
            td = [b + off for b in blocks for (off, _) in duos]
            pd = pat_pos if stage == _SWAP_PATTERN_STAGE else []
            self._flip(td, pd)
            self._mark_layer("swap-flip")

        # merge layer: each 8-wide block collapses back to four channels;
        # the pattern channels follow their committed images
        merge_lo = {b + off for b in blocks for off in (0, 2, 4, 6)}
        follow_pos = set(pat_pos) | {p + 1 for p in pat_pos}

        def kind_of2(fam, pos, pid):
            if fam == "T":
                return ("merge", pos + 1) if pos in merge_lo else "copy"
            return "follow" if pos in follow_pos else "copy"

        self._dsimple(kind_of2)
        self._mark_layer("swap-merge")
        self._refresh_occ_order()
        for i in swaps:
            assert self.occ_key[self.occ_order[i]] < \
                self.occ_key[self.occ_order[i + 1]]

    def build_phase_sorting_juxtaposition(self) -> None:
        key = self.occ_key
        m = len(self.occ_order)
        if all(key[self.occ_order[i]] <= key[self.occ_order[i + 1]]
               for i in range(m - 1)):
            self._mark_layer("sorted")
            return
        entry = self.bucket_entry
        assert entry is not None
        d1_dec, d2_dec = entry.d1 == "dec", entry.d2 == "dec"
        has_dec = d1_dec or d2_dec

        # split type: "free" when the juxtaposition splits along the tile's
        # outgoing (freshly assigned) coordinate, "carried" when it splits
        # along the coordinate inherited from the previous tile
        t0 = self.path.d_tiles[min(self._dptr, len(self.path.d_tiles) - 1)]
        split_axis = "x" if entry.kind == "juxth" else "y"
        free = self.path.out_coord[t0] == split_axis

        bits = max(1, (m - 1).bit_length())
        if free:
            # radix sort on the target position, least significant bit
            # first; the fresh coordinate realises any stable two-bucket
            # partition
            for bit in range(bits):
                def in_first(tag, _bit=bit):
                    if tag[0] == "anchor":
                        return tag[1] == 0
                    return not (key[tag[1]] >> _bit) & 1
                if has_dec:
                    self._pass(in_first, None, d1_dec, d2_dec)
                    self._mark_layer("bucket-pre")
                self._pass(in_first, None, d1_dec, d2_dec)
                self._mark_layer("bucket")
        else:
            # the carried coordinate only supports prefix/suffix splits:
            # record the forward radix passes that sort the target order
            # back into the current one, then execute their inverses in
            # reverse (each = prefix split + interleave)
            start_pos = {o: i for i, o in enumerate(self.occ_order)}
            seq = sorted(self.occ_order, key=lambda o: key[o])
            plans = []
            for bit in range(bits):
                zero = [o for o in seq if not (start_pos[o] >> bit) & 1]
                one = [o for o in seq if (start_pos[o] >> bit) & 1]
                plans.append((set(zero), list(seq)))
                seq = zero + one
            assert seq == self.occ_order
            for zero_set, target_seq in reversed(plans):
                rank = {o: r for r, o in enumerate(target_seq)}

                def in_first(tag, _z=zero_set):
                    if tag[0] == "anchor":
                        return tag[1] == 0
                    return tag[1] in _z

                def target_rank(tag, _r=rank):
                    if tag[0] == "anchor":
                        return -1 if tag[1] == 0 else len(_r) + 1
                    return _r[tag[1]]

                if has_dec:
                    self._pass(in_first, None, d1_dec, d2_dec, carried=True)
                    self._mark_layer("bucket-pre")
                self._pass(in_first, target_rank, d1_dec, d2_dec,
                           carried=True)
                self._mark_layer("bucket")
                assert self.occ_order == target_seq
        assert [key[o] for o in self.occ_order] == sorted(key)

    def _pass(self, in_first, target_rank, d1_dec: bool, d2_dec: bool,
              carried: bool = False) -> None:
        """One juxtaposition bucket pass over every live channel.

        ``in_first(tag)`` assigns channels to the juxtaposition parts.
        Within a decreasing part the outgoing order is forced: it reverses
        the incoming one.  ``target_rank(tag)`` (optional) prescribes how
        the two parts interleave in the outgoing order; without it the
        first part simply precedes the second.
        """
        orders = {}
        decs = {}
        for fam in _FAMS:
            live = self.live[fam]
            part = [in_first(self.tag[fam][pid]) for pid in live]
            if carried:
                cut = sum(part)
                assert all(part[p] == (p < cut) for p in range(len(live))), \
                    "carried split requires a prefix partition"
            first = [p for p in range(len(live)) if part[p]]
            second = [p for p in range(len(live)) if not part[p]]
            if d1_dec:
                first.reverse()
            if d2_dec:
                second.reverse()
            if target_rank is None:
                pattern = [True] * len(first) + [False] * len(second)
            else:
                by_target = sorted(
                    range(len(live)),
                    key=lambda p: (target_rank(self.tag[fam][live[p]]), p))
                pattern = [part[p] for p in by_target]
            it1, it2 = iter(first), iter(second)
            new_idx = [next(it1) if f else next(it2) for f in pattern]
            orders[fam] = new_idx
            decs[fam] = {p: (d1_dec if part[p] else d2_dec)
                         for p in range(len(live))}
        self._bucket(orders, decs)
        self._refresh_occ_order()

    def build_phase_evaluation(self) -> None:
        m = len(self.occ_order)
        assert m == 3 * len(self.formula.clauses)

        # polarity: make each occurrence's literal-true channel the lower
        # one.  The true channel has lineage Y for positive literals and Z
        # for negative ones.
        _, pos_t = self._scan_positions()
        flips = []
        for o in self.occ_order:
            want = "Y" if self.occ_lit[o] > 0 else "Z"
            lo, hi = pos_t[o]
            assert hi == lo + 1
            if self.lineage.get(self.live["T"][lo], "Y") != want:
                flips.append(lo)
        if flips:
            self._flip(flips, [])
            self._mark_layer("polarity")

        # choose layer: the middle literal's false channel forks
        pos_p, pos_t = self._scan_positions()
        choose_pos = set()
        pick_t = set()
        eval_info = {}   # pattern position -> (clause, slot)
        for c in range(len(self.formula.clauses)):
            for slot in range(3):
                o = self.occ_order[3 * c + slot]
                lo, hi = pos_t[o]
                eval_info[pos_p[o]] = (c, slot)
                if slot == 1:
                    choose_pos.add(hi)
                    pick_t.add(lo)
                else:
                    pick_t.update([lo, hi])

        def kind_of(fam, pos, pid):
            if fam == "T":
                if pos in choose_pos:
                    return "choose"
                return "pick" if pos in pick_t else "copy"
            return "pick" if pos in eval_info else "copy"

        def meta_of(fam, pos):
            if fam == "P" and pos in eval_info:
                return ("eval",) + eval_info[pos]
            return ()

        self._dsimple(kind_of, meta_of)
        self._mark_layer("eval-choose")

        # each clause's text block is now 7 wide and contiguous
        _, pos_t = self._scan_positions()
        bases = []
        for c in range(len(self.formula.clauses)):
            span = sorted(p for slot in range(3)
                          for p in pos_t[self.occ_order[3 * c + slot]])
            assert span == list(range(span[0], span[0] + 7))
            bases.append(span[0])

        for duos in _EVAL_STAGES:
            td = [b + off for b in bases for (off, _) in duos]
            self._flip(td, [])
            self._mark_layer("eval-flip")

        if self.geometry:
            roles = ["ya", "zbar_b", "za", "yb", "zc", "ztilde_b", "yc"]
            self.clause_layouts = []
            for b in bases:
                block = self.live["T"][b: b + 7]
                self.clause_layouts.append(
                    {r: pid for r, pid in zip(roles, block)})

    # -- finishing ----------------------------------------------------------

    def finish(self) -> ReductionInstance:
        text_pre = sum(self.counts["T"].values())
        pat_pre = sum(self.counts["P"].values())
        run = text_pre + 1           # length of each anchor run
        inflation = None
        if self.geometry:
            inflation = {f: {"low": [], "high": []} for f in _FAMS}
            for fam in _FAMS:
                pts = self.tiles[fam][0]
                lows = min(range(len(pts)), key=lambda i: pts[i].y)
                highs = max(range(len(pts)), key=lambda i: pts[i].y)
                inflation[fam]["low"].append((0, lows))
                inflation[fam]["high"].append((0, highs))
                for which, idx0, sgn in (("low", lows, 1), ("high", highs, 1)):
                    base = pts[idx0]
                    for i in range(1, run):
                        d = DELTA.scale(i)
                        pts.append(PlanePoint(base.x + d, base.y + d))
                        inflation[fam][which].append((0, len(pts) - 1))
                self.counts[fam][0] += 2 * (run - 1)
        else:
            for fam in _FAMS:
                self.counts[fam][0] += 2 * (run - 1)

        sizes = {
            "pattern": pat_pre + 2 * (run - 1),
            "text": text_pre + 2 * (run - 1),
            "pattern_core": pat_pre,
            "text_core": text_pre,
            "tiles": self.cursor + 1,
            "anchor_run": run,
        }
        assert sizes["pattern"] <= sizes["text"]

        inst = ReductionInstance(
            formula=self.formula, mode=self.mode, path=self.path,
            box_bound=self.bound, sizes=sizes, layers=self.layers,
            d_used=self._d_needed, counting_only=not self.geometry,
            bucket_entry=self.bucket_entry)
        if not self.geometry:
            return inst

        inst.pairs = self.pairs
        inst.trace = self.trace
        inst.consumer = self.consumer
        inst.init_map = self.init_map
        inst.clause_layouts = self.clause_layouts
        inst.final_positions = {pid: i for i, pid in
                                enumerate(self.live["T"])}
        inst.inflation = inflation
        inst.tiles = self.tiles
        fams = {}
        provs = {}
        grids = {}
        perms = {}
        for fam in _FAMS:
            tf = TileFamily(
                self.path.matrix.cols, self.path.matrix.rows,
                {self.path.cells[t]: Tile(tuple(pts), self.bound)
                 for t, pts in self.tiles[fam].items() if pts},
                self.bound)
            p, prov, grd = assemble(tf, self.path.orientation)
            fams[fam] = tf
            provs[fam] = prov
            grids[fam] = grd
            perms[fam] = p
        inst.families = fams
        inst.prov = provs
        inst.griddings = grids
        inst.pattern = perms["P"]
        inst.text = perms["T"]
        assert len(inst.pattern) == sizes["pattern"]
        assert len(inst.text) == sizes["text"]
        return inst

    def build(self) -> ReductionInstance:
        self.build_phase_initial()
        if self.formula.clauses:
            self.build_phase_assignment()
            self.build_phase_multiplication()
            if self.mode == "gadgets":
                self.build_phase_sorting_gadgets()
            else:
                self.build_phase_sorting_juxtaposition()
            self.build_phase_evaluation()
        return self.finish()


def bucket_rehearsal(keys: Sequence[int], matrix: GriddingMatrix,
                     bucket_entry: Optional[E.ClassEntry] = None
                     ) -> Tuple[ReductionInstance, List[int]]:
    """Sort standalone channels by juxtaposition bucket passes alone.

    ``keys`` must be a permutation of 0..len(keys)-1; channel i carries
    key ``keys[i]``.  Builds the initial layer on the given path matrix,
    runs the bucket sorting phase, and assembles.  Returns the instance
    and the final channel order.  This isolates the bucket machinery so
    every juxtaposition shape can be exercised on small staircases.
    """
    if sorted(keys) != list(range(len(keys))):
        raise ReductionError("keys must be a permutation of 0..m-1")
    path = make_path_spec(matrix)
    formula = Formula3CNF(len(keys), ())
    b = _Builder(formula, path, "juxtaposition", geometry=True,
                 bucket_entry=_default_bucket_entry(matrix, bucket_entry))
    b.build_phase_initial()
    for fam in _FAMS:
        for pid in list(b.live[fam]):
            tg = b.tag[fam][pid]
            if tg[0] == "var":
                ntg = ("occ", tg[1] - 1)
                b.tag[fam][pid] = ntg
                b.pairs[(fam, pid)].tag = ntg
    b.occ_var = list(range(1, len(keys) + 1))
    b.occ_lit = [k for k in b.occ_var]
    b.occ_key = list(keys)
    b._refresh_occ_order()
    b.build_phase_sorting_juxtaposition()
    final = list(b.occ_order)
    return b.finish(), final


# --- public entry points -------------------------------------------------


def default_matrix(mode: str) -> GriddingMatrix:
    """2x2 proper-turning cycle with one rich entry; the seed for
    rich-path refinement."""
    d = E.FIBP if mode == "gadgets" else E.av(perm(3, 2, 1))
    return matrix_from_rows_top_down([[E.DEC, E.INC], [d, E.DEC]])


def rich_path_matrix(mode: str, length: int) -> GriddingMatrix:
    m, _, _ = build_rich_path(default_matrix(mode), length)
    return m


def _default_bucket_entry(matrix: GriddingMatrix,
                          override: Optional[E.ClassEntry]
                          ) -> Optional[E.ClassEntry]:
    if override is not None:
        return override
    ds = [matrix.entry(*cc) for cc in matrix.nonempty_cells()
          if not E.is_monotone(matrix.entry(*cc))]
    if ds and ds[0].kind in ("juxth", "juxtv"):
        return ds[0]
    return E.parse_entry("juxth:inc,inc")


def _capability_check(matrix: GriddingMatrix, mode: str,
                      bucket_entry: Optional[E.ClassEntry]) -> None:
    ds = {matrix.entry(*cc) for cc in matrix.nonempty_cells()
          if not E.is_monotone(matrix.entry(*cc))}
    if not ds:
        raise UnusableMatrix("matrix has no non-monotone entry")
    probes = [perm(2, 1), perm(2, 1, 4, 3), perm(2, 1, 4, 3, 6, 5)]
    if mode == "juxtaposition":
        small = [Permutation(ranks) for n in range(1, 5)
                 for ranks in itertools.permutations(range(1, n + 1))
                 if E.entry_contains(bucket_entry, Permutation(ranks))]
        probes = probes + small
    for d in ds:
        for p in probes:
            if not E.entry_contains(d, p):
                raise UnusableMatrix(
                    f"D entry {E.format_entry(d)} lacks required content "
                    f"{p.ranks}")


def plan_layers(formula: Formula3CNF, path: PathSpec, mode: str,
                bucket_entry: Optional[E.ClassEntry] = None
                ) -> ReductionInstance:
    """Dry-run the construction in counting mode.

    Returns the counting instance (layer schedule, D usage and exact
    sizes).  Raises PathTooShort when the path does not provide enough D
    entries, reporting how many the formula needs."""
    b = _Builder(formula, path, mode, geometry=False,
                 bucket_entry=_default_bucket_entry(path.matrix,
                                                    bucket_entry))
    inst = b.build()
    if b._virtual:
        period = (path.d_tiles[1] - path.d_tiles[0]
                  if len(path.d_tiles) > 1 else 4)
        first = path.d_tiles[0] if path.d_tiles else 1
        raise PathTooShort(b._d_needed, len(path.d_tiles),
                           first + period * b._d_needed + 1)
    return inst


def reduce_formula(formula: Formula3CNF, mode: str = "gadgets",
                   matrix: Optional[GriddingMatrix] = None,
                   bucket_entry: Optional[E.ClassEntry] = None
                   ) -> ReductionInstance:
    """Build the full geometric instance for a formula.

    With no explicit matrix, a rich path of sufficient length is derived
    from the default 2x2 cycle for the requested mode."""
    if matrix is not None:
        path = make_path_spec(matrix)
        be = _default_bucket_entry(matrix, bucket_entry)
        _capability_check(matrix, mode, be)
        plan_layers(formula, path, mode, be)   # raises PathTooShort if unfit
        return _Builder(formula, path, mode, geometry=True,
                        bucket_entry=be).build()

    length = 8
    for _ in range(12):
        m = rich_path_matrix(mode, length)
        path = make_path_spec(m)
        be = _default_bucket_entry(m, bucket_entry)
        try:
            plan = plan_layers(formula, path, mode, be)
        except PathTooShort as exc:
            length = max(length * 2, exc.required_d + 2)
            continue
        _capability_check(m, mode, be)
        return _Builder(formula, path, mode, geometry=True,
                        bucket_entry=be).build()
    raise ReductionError("could not size a rich path for the formula")
