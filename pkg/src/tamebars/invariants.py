"""Named invariants of a tame map.

Bars coming out of the quiver decomposition are converted to intervals
between critical values, and everything downstream is derived from them in
exact arithmetic: fiber and global Betti numbers, Novikov-Betti numbers,
monodromy, configurations with their polynomials, the interval counts for
windows of the infinite cyclic cover, and the canonical block matrix whose
kernel and cokernel recover the homology of the total space.

Circle-valued data uses turn units throughout: one turn is a full circle,
so a bar wrapping k times has its right end shifted by k.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple

from .canonical import Cell, cell_sort_key
from .complexes import CriticalData, SimplexTable, critical_candidates
from .cutting import CutComplex, cut_at_levels
from .field import Field
from .homology import assemble_rep
from .matrix import Mat, block_diag
from .quiver import (Bar, CircleRep, DecompositionError, RepresentationError,
                     circle_rep_from_lists, decompose_circle, decompose_zigzag)


class IndexOutOfRange(ValueError):
    """A bar refers to a critical index outside 1..m."""


class ShapeMismatch(RepresentationError):
    """Representation shape unsuitable for the requested assembly."""


# -- valued bars ----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class ValuedBar:
    """A bar with its ends resolved to critical values.

    For circle-valued maps `hi` is an absolute position on the line: the
    angle of the right critical value plus the number of full turns the bar
    wraps.  `lo = hi` happens only for closed point bars.
    """

    lo: Fraction
    hi: Fraction
    left_closed: bool
    right_closed: bool

    @property
    def is_closed(self) -> bool:
        return self.left_closed and self.right_closed

    @property
    def is_open(self) -> bool:
        return not self.left_closed and not self.right_closed

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.left_closed:
            return False
        if x == self.hi and not self.right_closed:
            return False
        return True

    def translated(self, k: int) -> "ValuedBar":
        return ValuedBar(self.lo + k, self.hi + k,
                         self.left_closed, self.right_closed)

    def n_containing(self, theta: Fraction) -> int:
        """How many integer translates of the angle land inside the bar."""
        lo_k = floor(self.lo - theta)
        hi_k = ceil(self.hi - theta)
        return sum(1 for k in range(lo_k, hi_k + 1) if self.contains(theta + k))

    def label(self) -> str:
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"{lb}{self.lo}, {self.hi}{rb}"


def convert_bars(bars: Sequence[Bar], crit: CriticalData) -> List[ValuedBar]:
    """Replace index ends by the critical values they name.

    The wrap count of a cyclic bar is added to the right end, so both ends
    live on the (unrolled) line and `lo <= hi` always holds.
    """
    vals = crit.criticals
    m = crit.m
    out = []
    for b in bars:
        if not (1 <= b.i <= m and 1 <= b.j <= m):
            raise IndexOutOfRange(f"bar {b.label()} has ends outside 1..{m}")
        out.append(ValuedBar(vals[b.i - 1], vals[b.j - 1] + b.wraps,
                             b.left_closed, b.right_closed))
    return sorted(out)


# -- the bundle -----------------------------------------------------------------


@dataclass
class InvariantBundle:
    """Per-degree bars, Jordan cells, and the representations they came
    from, for one tame map.  Degrees absent from the dictionaries count as
    empty, so the formulas below accept any degree."""

    field: Field
    circular: bool
    crit: CriticalData
    bars: Dict[int, List[ValuedBar]]
    cells: Dict[int, List[Cell]]
    reps: Dict[int, object]
    rmax: int
    cut: Optional[CutComplex] = None

    def degree_bars(self, r: int) -> List[ValuedBar]:
        return self.bars.get(r, [])

    def degree_cells(self, r: int) -> List[Cell]:
        return self.cells.get(r, [])

    def closed_bars(self, r: int) -> List[ValuedBar]:
        return [b for b in self.degree_bars(r) if b.is_closed]

    def open_bars(self, r: int) -> List[ValuedBar]:
        return [b for b in self.degree_bars(r) if b.is_open]

    def mixed_bars(self, r: int) -> List[ValuedBar]:
        return [b for b in self.degree_bars(r) if b.left_closed != b.right_closed]

    def eigenvalue_one_count(self, r: int) -> int:
        one = self.field.one
        return sum(1 for c in self.degree_cells(r)
                   if c.is_linear() and c.eigenvalue_in(self.field) == one)

    def jordan_dim(self, r: int) -> int:
        return sum(c.dim() for c in self.degree_cells(r))


def _is_iso(mat: Mat) -> bool:
    return mat.is_square() and mat.is_invertible()


def _bar_end_check(rep, bars: Sequence[Bar], m: int) -> None:
    """No bar may end at a critical index whose two adjacent maps are both
    isomorphisms: such an index is an artifact of oversampling the levels."""
    for i in range(1, m + 1):
        if rep.is_cyclic:
            a, b = rep.alpha(i), rep.beta(i)
        else:
            a, b = rep.maps[(2 * i - 1, +1)], rep.maps[(2 * i + 1, -1)]
        if _is_iso(a) and _is_iso(b):
            for bar in bars:
                if bar.i == i or bar.j == i:
                    raise DecompositionError(
                        f"bar {bar.label()} ends at a transparent level {i}")


def compute_invariants(table: SimplexTable, mapping, field: Field) -> InvariantBundle:
    """Full pipeline: choose levels, cut, assemble one representation per
    degree, decompose it with a verified certificate, and convert the
    summands into valued invariants."""
    crit = critical_candidates(table, mapping)
    cc = cut_at_levels(table, mapping, crit.criticals + crit.regulars)
    rmax = max(table.dim, 0)
    bars: Dict[int, List[ValuedBar]] = {}
    cells: Dict[int, List[Cell]] = {}
    reps: Dict[int, object] = {}
    for r in range(rmax + 1):
        rep = assemble_rep(cc, crit, r, field)
        if crit.circular:
            raw, found, _ = decompose_circle(rep)
        else:
            raw, _ = decompose_zigzag(rep)
            found = []
        _bar_end_check(rep, raw, crit.m)
        bars[r] = convert_bars(raw, crit)
        cells[r] = sorted(found, key=cell_sort_key)
        reps[r] = rep
    return InvariantBundle(field, crit.circular, crit, bars, cells, reps, rmax, cc)


# -- counting formulas ----------------------------------------------------------


def fiber_betti_at(bundle: InvariantBundle, r: int, value) -> int:
    """Betti number of the fiber over a level, read off bars and cells."""
    value = Fraction(value)
    bars = bundle.degree_bars(r)
    if not bundle.circular:
        return sum(1 for b in bars if b.contains(value))
    return sum(b.n_containing(value) for b in bars) + bundle.jordan_dim(r)


def image_dim_at(bundle: InvariantBundle, r: int, value) -> int:
    """Rank of the map from the fiber's homology into the whole space's."""
    value = Fraction(value)
    closed = bundle.closed_bars(r)
    if not bundle.circular:
        return sum(1 for b in closed if b.contains(value))
    hits = sum(1 for b in closed if b.n_containing(value) > 0)
    return hits + bundle.eigenvalue_one_count(r)


def global_betti(bundle: InvariantBundle, r: int) -> int:
    """Betti number of the whole space: closed bars in degree r, open bars
    one degree down, and (cyclic case) eigenvalue-one cells of both."""
    n = len(bundle.closed_bars(r)) + len(bundle.open_bars(r - 1))
    if bundle.circular:
        n += bundle.eigenvalue_one_count(r) + bundle.eigenvalue_one_count(r - 1)
    return n


def novikov_betti(bundle: InvariantBundle, r: int) -> int:
    return len(bundle.closed_bars(r)) + len(bundle.open_bars(r - 1))


# -- windows of the infinite cyclic cover ----------------------------------------


def _translate_range(bar: ValuedBar, a: Fraction, b: Fraction) -> range:
    return range(ceil(a - bar.hi) - 1, floor(b - bar.lo) + 2)


def _meets_window(bar: ValuedBar, a: Fraction, b: Fraction) -> bool:
    return ((bar.lo < b or (bar.lo == b and bar.left_closed))
            and (bar.hi > a or (bar.hi == a and bar.right_closed)))


def _closed_meet(bar: ValuedBar, a: Fraction, b: Fraction) -> bool:
    # The intersection with [a, b] keeps an open end of the bar only when
    # that end sticks out of the window.
    return (_meets_window(bar, a, b)
            and (bar.lo < a or bar.left_closed)
            and (bar.hi > b or bar.right_closed))


def _inside_window(bar: ValuedBar, a: Fraction, b: Fraction) -> bool:
    return a <= bar.lo and bar.hi <= b


def cover_formulas(bundle: InvariantBundle, r: int, a, b) -> Tuple[int, int, int]:
    """Interval counts for the part of the infinite cyclic cover over a
    window [a, b]: its Betti number, the rank of its homology in the whole
    cover, and the rank in the base space."""
    if not bundle.circular:
        raise ShapeMismatch("cover formulas need a circle-valued map")
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ValueError("cover window needs a < b")
    bars_r = bundle.degree_bars(r)
    closed_r = bundle.closed_bars(r)
    open_prev = bundle.open_bars(r - 1)

    inside_prev = sum(1 for bar in open_prev
                      for k in _translate_range(bar, a, b)
                      if _inside_window(bar.translated(k), a, b))

    slice_betti = bundle.jordan_dim(r) + inside_prev
    for bar in bars_r:
        slice_betti += sum(1 for k in _translate_range(bar, a, b)
                           if _closed_meet(bar.translated(k), a, b))

    into_cover = bundle.jordan_dim(r) + inside_prev
    for bar in closed_r:
        into_cover += sum(1 for k in _translate_range(bar, a, b)
                          if _meets_window(bar.translated(k), a, b))

    # Classes landing in the base: bar families with a translate in range
    # plus fiber classes fixed by the monodromy.  Degree r-1 cells feed the
    # base space's homology through the angle direction, which dies in the
    # cover, so they do not appear here.
    into_base = bundle.eigenvalue_one_count(r)
    into_base += sum(1 for bar in closed_r
                     if any(_meets_window(bar.translated(k), a, b)
                            for k in _translate_range(bar, a, b)))
    into_base += sum(1 for bar in open_prev
                     if any(_inside_window(bar.translated(k), a, b)
                            for k in _translate_range(bar, a, b)))
    return slice_betti, into_cover, into_base


# -- monodromy ------------------------------------------------------------------


def monodromy_assemble(field: Field, cells: Sequence[Cell]) -> Tuple[int, Mat]:
    """Block-diagonal model of the monodromy: one Jordan or companion block
    per cell, in canonical order."""
    ordered = sorted(cells, key=cell_sort_key)
    return (sum(c.dim() for c in ordered),
            block_diag(field, [c.block(field) for c in ordered]))


# -- configurations -------------------------------------------------------------


@dataclass
class Configuration:
    """Planar record of the closed degree-r bars, as points (lo, hi) on or
    above the diagonal, and the open degree-(r-1) bars mirrored below it."""

    degree: int
    circular: bool
    points: List[Tuple[Fraction, Fraction]]


def configuration(bundle: InvariantBundle, r: int) -> Configuration:
    pts = [(b.lo, b.hi) for b in bundle.closed_bars(r)]
    pts += [(b.hi, b.lo) for b in bundle.open_bars(r - 1)]
    return Configuration(r, bundle.circular, sorted(pts))


_TURN = 2.0 * math.pi


def cylinder_embed(point: Tuple[Fraction, Fraction]) -> complex:
    """Send a cylinder point to a nonzero complex number.

    Both coordinates are reduced by the same whole number of turns before
    exponentiating, so diagonal shifts by a turn give the identical float.
    """
    x, y = Fraction(point[0]), Fraction(point[1])
    k = floor(x)
    u, v = x - k, y - k
    return cmath.exp(complex(_TURN * float(u - v), _TURN * float(u)))


def polynomial(config: Configuration) -> List[complex]:
    """Monic polynomial with one root per configuration point, leading
    coefficient first.  Circle-valued points are embedded into C* first, so
    the free coefficient stays nonzero."""
    if config.circular:
        roots = [cylinder_embed(p) for p in config.points]
    else:
        roots = [complex(float(x), float(y)) for x, y in config.points]
    roots.sort(key=lambda z: (z.real, z.imag))
    coeffs = [complex(1.0)]
    for root in roots:
        coeffs.append(complex(0.0))
        for i in range(len(coeffs) - 1, 0, -1):
            coeffs[i] -= root * coeffs[i - 1]
    return coeffs


# -- canonical block matrix -------------------------------------------------------


@dataclass
class CanonicalData:
    """The pairing matrix of one degree with its kernel and cokernel sizes."""

    matrix: Mat
    dim_ker: int
    dim_coker: int


def cyclic_embedding(rep) -> CircleRep:
    """View a linear-shape representation as cyclic by joining its two zero
    end slots into the single regular slot of the cyclic shape."""
    if rep.is_cyclic:
        return rep
    if rep.lo != 1 or rep.hi % 2 == 0:
        raise ShapeMismatch("expected a window 1..2m+1")
    m = (rep.hi - 1) // 2
    if m < 1 or rep.dims[rep.lo] or rep.dims[rep.hi]:
        raise ShapeMismatch("end slots must vanish to close the window")
    alphas = [rep.maps[(2 * i - 1, +1)] for i in range(1, m + 1)]
    betas = [rep.maps[(2 * i + 1, -1)] for i in range(1, m + 1)]
    return circle_rep_from_lists(rep.field, alphas, betas)


def _offsets(dims: Sequence[int]) -> List[int]:
    out = [0]
    for d in dims:
        out.append(out[-1] + d)
    return out


def canonical_matrix(rep) -> CanonicalData:
    """The block matrix from the sum of regular fibers to the sum of
    critical fibers: alpha blocks on the diagonal, negated beta blocks on
    the superdiagonal, the wrap-around beta in the bottom-left corner."""
    rep = cyclic_embedding(rep)
    f = rep.field
    m = rep.m
    row_dims = [rep.dims[2 * i] for i in range(1, m + 1)]
    col_dims = [rep.dims[2 * i - 1] for i in range(1, m + 1)]
    row_off = _offsets(row_dims)
    col_off = _offsets(col_dims)
    rows = [[f.zero] * col_off[-1] for _ in range(row_off[-1])]

    def put(bi: int, bj: int, mat: Mat, negate: bool) -> None:
        # Accumulate: for m = 1 the alpha and beta blocks share one slot.
        for rr in range(mat.nrows):
            for cc in range(mat.ncols):
                val = f.neg(mat.rows[rr][cc]) if negate else mat.rows[rr][cc]
                i, j = row_off[bi] + rr, col_off[bj] + cc
                rows[i][j] = f.add(rows[i][j], val)

    for i in range(1, m + 1):
        put(i - 1, i - 1, rep.alpha(i), negate=False)
        put(i - 1, i % m, rep.beta(i), negate=True)
    mat = Mat.from_rows(f, rows, ncols=col_off[-1])
    rank = mat.rank()
    return CanonicalData(mat, mat.ncols - rank, mat.nrows - rank)


def canonical_check(bundle: InvariantBundle, r: int, beta_direct: int) -> bool:
    """Cokernel in degree r plus kernel one degree down must equal an
    independently computed Betti number of the total space."""
    rep_r = bundle.reps.get(r)
    rep_prev = bundle.reps.get(r - 1)
    coker = canonical_matrix(rep_r).dim_coker if rep_r is not None else 0
    ker = canonical_matrix(rep_prev).dim_ker if rep_prev is not None else 0
    return coker + ker == beta_direct


# -- lookups and serialization-----------------------------------------------------


def bar_multiplicity(bundle: InvariantBundle, r: int, lo, hi,
                     left_closed: bool = True, right_closed: bool = True) -> int:
    """Multiplicity of one exact bar (with end types) in degree r; zero
    when the bar is absent."""
    probe = ValuedBar(Fraction(lo), Fraction(hi), left_closed, right_closed)
    return sum(1 for b in bundle.degree_bars(r) if b == probe)


def bundle_to_json(bundle: InvariantBundle) -> dict:
    """JSON-ready dict: exact ends as fraction strings, cells as polynomial
    coefficients, floats only in the configuration polynomials."""
    fld = bundle.field
    degrees = {}
    for r in range(bundle.rmax + 1):
        cfg = configuration(bundle, r)
        entry = {
            "bars": [{"lo": str(b.lo), "hi": str(b.hi),
                      "left_closed": b.left_closed,
                      "right_closed": b.right_closed}
                     for b in bundle.degree_bars(r)],
            "betti": global_betti(bundle, r),
            "configuration": [[str(x), str(y)] for x, y in cfg.points],
            "polynomial": [[z.real, z.imag] for z in polynomial(cfg)],
        }
        if bundle.circular:
            cells_r = bundle.degree_cells(r)
            dim, T = monodromy_assemble(fld, cells_r)
            entry["jordan_cells"] = [
                {"poly": [fld.to_str(c) for c in cell.poly],
                 "size": cell.size,
                 "eigenvalue": (fld.to_str(cell.eigenvalue_in(fld))
                                if cell.is_linear() else None)}
                for cell in cells_r]
            entry["monodromy"] = {
                "dim": dim,
                "matrix": [[fld.to_str(e) for e in row] for row in T.rows]}
            entry["novikov_betti"] = novikov_betti(bundle, r)
        degrees[str(r)] = entry
    return {
        "field": fld.to_spec(),
        "target": "circle" if bundle.circular else "real",
        "critical_values": [str(v) for v in bundle.crit.criticals],
        "regular_values": [str(v) for v in bundle.crit.regulars],
        "degrees": degrees,
    }
