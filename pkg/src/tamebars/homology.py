"""Homology bases of subcomplexes and the representations they assemble into.

Chains are sparse dicts keyed by global simplex index, so a cycle in a
subcomplex is literally a cycle in any larger subcomplex and inclusion-induced
maps need no re-indexing.  Reduction is the left-to-right sparse column
algorithm with combination tags: tags over the input columns give kernel
vectors, tags over homology generators give coordinates of a cycle in a chosen
basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .complexes import CriticalData, SimplexTable, faces_with_signs
from .cutting import CutComplex, SubcomplexHandle, fiber, slab
from .field import Field
from .matrix import Mat
from .quiver import CircleRep, ZigzagRep, circle_rep_from_lists

Chain = Dict[int, object]


class InternalInconsistency(RuntimeError):
    """A chain that must have been a cycle or a boundary was not."""


class NotTame(RuntimeError):
    """A critical-fiber-to-slab map failed to be an isomorphism."""


class _Reducer:
    """Sparse column reduction; stores (column, tag) pairs keyed by pivot row."""

    def __init__(self, field: Field):
        self.field = field
        self.by_low: Dict[int, Tuple[Chain, Chain]] = {}

    def reduce(self, col: Chain, tag: Chain) -> Tuple[Chain, Chain]:
        F = self.field
        col = dict(col)
        tag = dict(tag)
        while col:
            low = max(col)
            hit = self.by_low.get(low)
            if hit is None:
                break
            rcol, rtag = hit
            c = F.div(col[low], rcol[low])
            for r, x in rcol.items():
                nv = F.sub(col.get(r, F.zero), F.mul(c, x))
                if nv == F.zero:
                    col.pop(r, None)
                else:
                    col[r] = nv
            for r, x in rtag.items():
                nv = F.sub(tag.get(r, F.zero), F.mul(c, x))
                if nv == F.zero:
                    tag.pop(r, None)
                else:
                    tag[r] = nv
        return col, tag

    def insert(self, col: Chain, tag: Chain) -> Optional[int]:
        col, tag = self.reduce(col, tag)
        if not col:
            return None
        low = max(col)
        self.by_low[low] = (col, tag)
        return low

    @property
    def npivots(self) -> int:
        return len(self.by_low)


def _boundary_chain(table: SimplexTable, idx: int, field: Field) -> Chain:
    s = table.simplices[idx]
    if len(s) == 1:
        return {}
    return {table.index[f]: field.from_int(sign) for f, sign in faces_with_signs(s)}


def _members_by_dim(table: SimplexTable, members: Optional[Sequence[int]]) -> Dict[int, List[int]]:
    idxs = range(len(table)) if members is None else members
    out: Dict[int, List[int]] = {}
    for i in idxs:
        out.setdefault(len(table.simplices[i]) - 1, []).append(i)
    return out


@dataclass
class HomologyBasis:
    """A basis of H_r of a subcomplex, with the structure used to read
    coordinates of arbitrary cycles in that basis."""

    table: SimplexTable
    degree: int
    field: Field
    r_cells: List[int]
    reps: List[Chain]
    _structure: _Reducer

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, cycle: Chain) -> List:
        """Coordinates of a cycle of this subcomplex in the chosen basis."""
        F = self.field
        res, tag = self._structure.reduce(cycle, {})
        if res:
            raise InternalInconsistency("chain is not a cycle of the subcomplex")
        return [F.neg(tag.get(i, F.zero)) for i in range(len(self.reps))]

    def rep_matrix(self) -> Mat:
        """Dense representatives; rows follow this subcomplex's r-simplices."""
        F = self.field
        rows = [[rep.get(i, F.zero) for rep in self.reps] for i in self.r_cells]
        return Mat(self.field, rows, len(self.reps))


def homology_of(table: SimplexTable, members: Optional[Sequence[int]],
                r: int, field: Field) -> HomologyBasis:
    by_dim = _members_by_dim(table, members)
    r_cells = by_dim.get(r, [])
    up_cells = by_dim.get(r + 1, [])

    ker = _Reducer(field)
    cycles: List[Chain] = []
    for j in r_cells:
        col, tag = ker.reduce(_boundary_chain(table, j, field), {j: field.one})
        if col:
            ker.by_low[max(col)] = (col, tag)
        else:
            cycles.append(tag)

    structure = _Reducer(field)
    for j in up_cells:
        structure.insert(_boundary_chain(table, j, field), {})
    rank_b = structure.npivots

    reps: List[Chain] = []
    for z in cycles:
        res, tag = structure.reduce(z, {})
        if res:
            tag[len(reps)] = field.one
            structure.by_low[max(res)] = (res, tag)
            reps.append(z)
    if len(reps) != len(cycles) - rank_b:
        raise InternalInconsistency("homology rank bookkeeping failed")
    return HomologyBasis(table, r, field, r_cells, reps, structure)


def homology(handle: SubcomplexHandle, r: int, field: Field) -> HomologyBasis:
    return homology_of(handle.cc.table, handle.members, r, field)


def betti_numbers(table: SimplexTable, field: Field, rmax: Optional[int] = None) -> List[int]:
    """Betti numbers of a whole complex, degrees 0..rmax."""
    if rmax is None:
        rmax = max(table.dim, 0)
    return [homology_of(table, None, r, field).dim for r in range(rmax + 1)]


def induced_map(src: HomologyBasis, dst: HomologyBasis) -> Mat:
    """Matrix of the inclusion-induced map H_r(src) -> H_r(dst)."""
    if src.table is not dst.table or src.degree != dst.degree:
        raise InternalInconsistency("induced map needs handles of one cut complex")
    cols = [dst.coords(rep) for rep in src.reps]
    return Mat.from_cols(dst.field, cols, dst.dim)


def _arrow(reg: HomologyBasis, crit: HomologyBasis, slab_h: HomologyBasis) -> Mat:
    """The composite H(regular fiber) -> H(slab) <- H(critical fiber) with the
    second leg inverted; raises NotTame when it is not invertible."""
    into_crit = induced_map(crit, slab_h)
    into_reg = induced_map(reg, slab_h)
    if not into_crit.is_square() or not into_crit.is_invertible():
        raise NotTame("critical fiber does not carry the slab homology")
    return into_crit.solve(into_reg)


def assemble_rep(cc: CutComplex, crit: CriticalData, r: int, field: Field):
    """The degree-r representation of a cut map: fibers at vertices, arrows
    through the adjacent slabs."""
    th = crit.criticals
    ts = crit.regulars
    m = crit.m
    crit_h = [homology(fiber(cc, c), r, field) for c in th]

    if not crit.circular:
        reg_h = [homology(fiber(cc, t), r, field) for t in ts]
        dims: Dict[int, int] = {}
        maps: Dict[Tuple[int, int], Mat] = {}
        for i in range(m + 1):
            dims[2 * i + 1] = reg_h[i].dim
        for i in range(1, m + 1):
            dims[2 * i] = crit_h[i - 1].dim
            sa = homology(slab(cc, ts[i - 1], th[i - 1]), r, field)
            sb = homology(slab(cc, th[i - 1], ts[i]), r, field)
            maps[(2 * i - 1, +1)] = _arrow(reg_h[i - 1], crit_h[i - 1], sa)
            maps[(2 * i + 1, -1)] = _arrow(reg_h[i], crit_h[i - 1], sb)
        return ZigzagRep(field, 1, 2 * m + 1, dims, maps)

    reg_h = [homology(fiber(cc, t), r, field) for t in ts]
    alphas = []
    betas = []
    for i in range(1, m + 1):
        lo = ts[i - 2] if i > 1 else ts[-1] - 1
        sa = homology(slab(cc, lo, th[i - 1]), r, field)
        sb = homology(slab(cc, th[i - 1], ts[i - 1]), r, field)
        prev_reg = reg_h[i - 2] if i > 1 else reg_h[-1]
        alphas.append(_arrow(prev_reg, crit_h[i - 1], sa))
        betas.append(_arrow(reg_h[i - 1], crit_h[i - 1], sb))
    return circle_rep_from_lists(field, alphas, betas)
