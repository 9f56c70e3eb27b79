"""Zigzag and cyclic graph representations and their certified decomposition.

Two quiver shapes appear.  The linear shape has vertices x_lo..x_hi on a path
with arrows pointing from every odd vertex to both even neighbours
(a_i: x_{2i-1} -> x_{2i}, b_i: x_{2i+1} -> x_{2i}).  The cyclic shape G_2m has
vertices x_1..x_2m arranged on a circle with the same alternating pattern and
the closing arrow b_m: x_1 -> x_2m.

Indecomposables over the linear shape are interval ("bar") modules; over the
cyclic shape they are bars that may wind around the circle plus Jordan cells
attached to the monodromy of the fully invertible part.  `decompose_zigzag`
and `decompose_circle` produce the multiset of summands together with a
certificate: one invertible base change per vertex conjugating the input
matrices to the exact block diagonal of the canonical summand matrices.

The algorithm peels one summand at a time.  A bar with an open end leaves a
kernel vector at the odd vertex where it dies; walking that vector as far as
it survives (images across forward arrows, preimages across backward ones,
rider subspaces quotiented out) yields a maximal chain, which splits off via
an explicit retraction.  Bars closed on both ends have no kernels, so the same
peel runs on the transposed representation and the split is pulled back
through annihilators.  What remains has all arrows invertible; its monodromy
composite is cut into primary components, giving the Jordan cells.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .canonical import Cell, cell_sort_key, jordan_block, primary_components
from .field import Field, Scalar
from .matrix import Mat, block_diag, image, preimage, subspace_intersect


class RepresentationError(ValueError):
    """Malformed representation data (dimensions and matrix shapes)."""


class DecompositionError(RuntimeError):
    """Internal invariant broke during decomposition; indicates a bug."""


# -- bars ---------------------------------------------------------------------


@dataclass(frozen=True)
class Bar:
    """An interval summand.

    Ends are indices of critical values: the bar spans from the i-th to the
    j-th critical value (j shifted by `wraps` full turns on the cyclic shape).
    Closed ends sit on even vertices x_2i, open ends on the flanking odd
    vertices, so the support is recovered from the indices and the two flags.
    """

    i: int
    j: int
    left_closed: bool
    right_closed: bool
    wraps: int = 0

    def right_index(self, m: Optional[int] = None) -> int:
        """The unshifted right end index: j + m * wraps on the cyclic shape."""
        if m is None:
            return self.j
        return self.j + m * self.wraps

    def support(self, m: Optional[int] = None) -> Tuple[int, int]:
        """Inclusive range of (unrolled) vertex positions carrying the bar."""
        a = 2 * self.i if self.left_closed else 2 * self.i + 1
        jj = self.right_index(m)
        b = 2 * jj if self.right_closed else 2 * jj - 1
        return a, b

    def crossings(self, vertex_of, a: Optional[int] = None, b: Optional[int] = None,
                  m: Optional[int] = None) -> Dict[int, List[int]]:
        """Positions of the support grouped by vertex, decreasing order."""
        if a is None or b is None:
            a, b = self.support(m)
        out: Dict[int, List[int]] = {}
        for p in range(b, a - 1, -1):
            out.setdefault(vertex_of(p), []).append(p)
        return out

    def label(self) -> str:
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        wind = f"+{self.wraps}m" if self.wraps else ""
        return f"{lb}{self.i}, {self.j}{wind}{rb}"

    def sort_key(self):
        return (self.i, self.j + 10**9 * self.wraps, not self.left_closed, not self.right_closed)


def bar_from_support(a: int, b: int, m: Optional[int] = None) -> Bar:
    """Recover the Bar whose support is positions a..b (unrolled for cyclic)."""
    if b < a:
        raise ValueError("empty support")
    left_closed = a % 2 == 0
    right_closed = b % 2 == 0
    i0 = a // 2 if left_closed else (a - 1) // 2
    j0 = b // 2 if right_closed else (b + 1) // 2
    if m is None:
        return Bar(i=i0, j=j0, left_closed=left_closed, right_closed=right_closed)
    shift = (i0 - 1) // m  # bring i into 1..m
    i = i0 - m * shift
    jj = j0 - m * shift
    wraps, j = divmod(jj - 1, m)
    return Bar(i=i, j=j + 1, left_closed=left_closed, right_closed=right_closed, wraps=wraps)


Summand = Union[Bar, Cell]


def summand_sort_key(s: Summand):
    if isinstance(s, Bar):
        return (0,) + s.sort_key()
    return (1,) + cell_sort_key(s)


# -- representations ----------------------------------------------------------


def _check_maps(field: Field, dims, maps, slots) -> None:
    for (o, d), (nr, nc) in slots.items():
        M = maps.get((o, d))
        if M is None:
            raise RepresentationError(f"missing arrow matrix at ({o}, {d:+d})")
        if M.nrows != nr or M.ncols != nc:
            raise RepresentationError(
                f"arrow ({o}, {d:+d}) has shape {M.nrows}x{M.ncols}, expected {nr}x{nc}"
            )
        if M.field != field:
            raise RepresentationError("arrow matrix over the wrong field")


class ZigzagRep:
    """A representation of the linear shape on the vertex window lo..hi.

    `dims[x]` is the dimension at vertex x; `maps[(o, d)]` for odd o and
    d = +-1 is the matrix of the arrow x_o -> x_{o+d} whenever both ends lie
    in the window.  Everything outside the window is the zero space.
    """

    is_cyclic = False

    def __init__(self, field: Field, lo: int, hi: int, dims: Dict[int, int],
                 maps: Dict[Tuple[int, int], Mat]):
        if lo > hi:
            raise RepresentationError("window is empty")
        self.field = field
        self.lo = lo
        self.hi = hi
        self.dims = {x: int(dims.get(x, 0)) for x in range(lo, hi + 1)}
        self.maps = dict(maps)
        slots = {}
        for o in range(lo if lo % 2 else lo + 1, hi + 1, 2):
            for d in (+1, -1):
                if lo <= o + d <= hi:
                    slots[(o, d)] = (self.dims[o + d], self.dims[o])
        _check_maps(field, self.dims, self.maps, slots)
        extra = set(self.maps) - set(slots)
        if extra:
            raise RepresentationError(f"unexpected arrow keys: {sorted(extra)}")

    def vertex_of(self, pos: int) -> Optional[int]:
        return pos if self.lo <= pos <= self.hi else None

    def dim_at(self, pos: int) -> int:
        return self.dims.get(pos, 0) if self.lo <= pos <= self.hi else 0

    def arrow_at(self, pos: int, d: int) -> Mat:
        """Matrix of the arrow from position pos to pos+d (zero off-window)."""
        M = self.maps.get((pos, d))
        if M is not None:
            return M
        return Mat.zeros(self.field, self.dim_at(pos + d), self.dim_at(pos))

    def arrow_slots(self) -> List[Tuple[int, int]]:
        return sorted(self.maps.keys())

    def total_dim(self) -> int:
        return sum(self.dims.values())


class CircleRep:
    """A representation of the cyclic shape G_2m.

    Vertices are 1..2m; `maps[(o, d)]` for odd o is the arrow x_o -> x_{o+d}
    with position arithmetic mod 2m, so (1, -1) is the closing arrow
    b_m: x_1 -> x_2m.  `alpha(i)` and `beta(i)` give the classical names
    a_i: x_{2i-1} -> x_{2i} and b_i: x_{2i+1} -> x_{2i} (b_m: x_1 -> x_2m).
    """

    is_cyclic = True

    def __init__(self, field: Field, m: int, dims: Dict[int, int],
                 maps: Dict[Tuple[int, int], Mat]):
        if m < 1:
            raise RepresentationError("m must be at least 1")
        self.field = field
        self.m = m
        self.dims = {x: int(dims.get(x, 0)) for x in range(1, 2 * m + 1)}
        self.maps = dict(maps)
        slots = {}
        for o in range(1, 2 * m + 1, 2):
            for d in (+1, -1):
                t = self._wrap(o + d)
                slots[(o, d)] = (self.dims[t], self.dims[o])
        _check_maps(field, self.dims, self.maps, slots)
        extra = set(self.maps) - set(slots)
        if extra:
            raise RepresentationError(f"unexpected arrow keys: {sorted(extra)}")

    def _wrap(self, v: int) -> int:
        return (v - 1) % (2 * self.m) + 1

    def vertex_of(self, pos: int) -> int:
        return self._wrap(pos)

    def dim_at(self, pos: int) -> int:
        return self.dims[self._wrap(pos)]

    def arrow_at(self, pos: int, d: int) -> Mat:
        return self.maps[(self._wrap(pos), d)]

    def arrow_slots(self) -> List[Tuple[int, int]]:
        return sorted(self.maps.keys())

    def alpha(self, i: int) -> Mat:
        return self.maps[(2 * i - 1, +1)]

    def beta(self, i: int) -> Mat:
        if i == self.m:
            return self.maps[(1, -1)]
        return self.maps[(2 * i + 1, -1)]

    def total_dim(self) -> int:
        return sum(self.dims.values())


Rep = Union[ZigzagRep, CircleRep]


def circle_rep_from_lists(field: Field, alphas: Sequence[Mat], betas: Sequence[Mat]) -> CircleRep:
    """Build a CircleRep from alpha_1..alpha_m, beta_1..beta_m."""
    m = len(alphas)
    if len(betas) != m or m < 1:
        raise RepresentationError("need equal nonzero numbers of alphas and betas")
    dims: Dict[int, int] = {}
    maps: Dict[Tuple[int, int], Mat] = {}
    for i in range(1, m + 1):
        a, b = alphas[i - 1], betas[i - 1]
        dims[2 * i - 1] = a.ncols
        dims[2 * i] = a.nrows
        maps[(2 * i - 1, +1)] = a
        if i < m:
            maps[(2 * i + 1, -1)] = b
        else:
            maps[(1, -1)] = b
    # consistency of beta shapes: b_i: x_{2i+1} -> x_{2i}
    for i in range(1, m + 1):
        b = betas[i - 1]
        src = dims[(2 * i + 1 - 1) % (2 * m) + 1]
        if b.ncols != src or b.nrows != dims[2 * i]:
            raise RepresentationError(f"beta_{i} has shape {b.nrows}x{b.ncols}")
    return CircleRep(field, m, dims, maps)


# -- canonical summand modules -------------------------------------------------


def _bar_arrow_matrix(field: Field, bar: Bar, o: int, d: int, rep: Rep) -> Mat:
    """The canonical partial-permutation block of `bar` at arrow (o, d)."""
    m = rep.m if rep.is_cyclic else None
    a, b = bar.support(m)
    cr = bar.crossings(rep.vertex_of, a, b, m)
    t = rep.vertex_of(o + d)
    src = cr.get(rep.vertex_of(o), [])
    dst = cr.get(t, []) if t is not None else []
    M = Mat.zeros(field, len(dst), len(src))
    for cidx, p in enumerate(src):
        q = p + d
        if a <= q <= b:
            M.rows[dst.index(q)][cidx] = field.one
    return M


def interval_module(field: Field, bar: Bar, lo: int, hi: int) -> ZigzagRep:
    """The interval summand as a representation on the window lo..hi."""
    a, b = bar.support()
    if not (lo <= a and b <= hi):
        raise ValueError("bar support exceeds the window")
    dims = {x: 1 if a <= x <= b else 0 for x in range(lo, hi + 1)}
    shell = ZigzagRep(field, lo, hi, dims,
                      _zero_maps_for(field, False, lo=lo, hi=hi, dims=dims))
    maps = {}
    for (o, d) in shell.maps:
        maps[(o, d)] = _bar_arrow_matrix(field, bar, o, d, shell)
    return ZigzagRep(field, lo, hi, dims, maps)


def interval_module_circle(field: Field, bar: Bar, m: int) -> CircleRep:
    """The winding interval summand on the cyclic shape G_2m."""
    a, b = bar.support(m)
    def vof(p):
        return (p - 1) % (2 * m) + 1
    counts: Dict[int, int] = {v: 0 for v in range(1, 2 * m + 1)}
    for p in range(a, b + 1):
        counts[vof(p)] += 1
    shell = CircleRep(field, m, counts, _zero_maps_for(field, True, m=m, dims=counts))
    maps = {}
    for (o, d) in shell.maps:
        maps[(o, d)] = _bar_arrow_matrix(field, bar, o, d, shell)
    return CircleRep(field, m, counts, maps)


def _zero_maps_for(field: Field, cyclic: bool, lo: int = 0, hi: int = 0,
                   m: int = 0, dims: Optional[Dict[int, int]] = None) -> Dict[Tuple[int, int], Mat]:
    dims = dims or {}
    maps = {}
    if cyclic:
        for o in range(1, 2 * m + 1, 2):
            for d in (+1, -1):
                t = (o + d - 1) % (2 * m) + 1
                maps[(o, d)] = Mat.zeros(field, dims.get(t, 0), dims.get(o, 0))
    else:
        for o in range(lo if lo % 2 else lo + 1, hi + 1, 2):
            for d in (+1, -1):
                if lo <= o + d <= hi:
                    maps[(o, d)] = Mat.zeros(field, dims.get(o + d, 0), dims.get(o, 0))
    return maps


def zero_zigzag(field: Field, lo: int, hi: int) -> ZigzagRep:
    """The zero representation on the window lo..hi."""
    dims = {x: 0 for x in range(lo, hi + 1)}
    return ZigzagRep(field, lo, hi, dims, _zero_maps_for(field, False, lo=lo, hi=hi, dims=dims))


def zero_circle(field: Field, m: int) -> CircleRep:
    """The zero representation on the cyclic shape G_2m."""
    dims = {v: 0 for v in range(1, 2 * m + 1)}
    return CircleRep(field, m, dims, _zero_maps_for(field, True, m=m, dims=dims))


def jordan_module(field: Field, lam: Scalar, k: int, m: int = 1) -> CircleRep:
    """The Jordan cell summand: kappa^k everywhere, alpha_1 = T(lam, k)."""
    if k < 1:
        raise ValueError("Jordan cell size must be positive")
    T = jordan_block(field, lam, k)
    eye = Mat.identity(field, k)
    alphas = [T] + [eye] * (m - 1)
    betas = [eye] * m
    return circle_rep_from_lists(field, alphas, betas)


def cell_module(field: Field, cell: Cell, m: int) -> CircleRep:
    """The canonical cyclic summand of a primary component (block at alpha_1)."""
    B = cell.block(field)
    eye = Mat.identity(field, B.nrows)
    return circle_rep_from_lists(field, [B] + [eye] * (m - 1), [eye] * m)


def direct_sum(reps: Sequence[Rep]) -> Rep:
    """Vertex-wise direct sum; summand blocks appear in the given order."""
    if not reps:
        raise ValueError("empty direct sum")
    first = reps[0]
    field = first.field
    if first.is_cyclic:
        m = first.m
        if any((not r.is_cyclic) or r.m != m for r in reps):
            raise RepresentationError("direct sum shape mismatch")
        dims = {v: sum(r.dims[v] for r in reps) for v in range(1, 2 * m + 1)}
        maps = {}
        for key in first.maps:
            maps[key] = block_diag(field, [r.maps[key] for r in reps])
        return CircleRep(field, m, dims, maps)
    lo, hi = first.lo, first.hi
    if any(r.is_cyclic or r.lo != lo or r.hi != hi for r in reps):
        raise RepresentationError("direct sum shape mismatch")
    dims = {v: sum(r.dims[v] for r in reps) for v in range(lo, hi + 1)}
    maps = {}
    for key in first.maps:
        maps[key] = block_diag(field, [r.maps[key] for r in reps])
    return ZigzagRep(field, lo, hi, dims, maps)


def summand_module(field: Field, s: Summand, rep: Rep) -> Rep:
    if isinstance(s, Bar):
        if rep.is_cyclic:
            return interval_module_circle(field, s, rep.m)
        return interval_module(field, s, rep.lo, rep.hi)
    if not rep.is_cyclic:
        raise RepresentationError("Jordan cells only exist on the cyclic shape")
    return cell_module(field, s, rep.m)


# -- certificates ---------------------------------------------------------------


@dataclass
class Certificate:
    """Invertible base changes conjugating the input to the canonical sum.

    `base_changes[x]` has the new basis as columns (input coordinates); the
    column blocks follow the summand order of the decomposition.
    """

    base_changes: Dict[int, Mat]


def verify_certificate(rep: Rep, summands: Sequence[Summand], cert: Certificate) -> bool:
    """Exact check: base changes invertible and every conjugated arrow equals
    the block diagonal of the claimed canonical summand matrices."""
    field = rep.field
    pieces = [summand_module(field, s, rep) for s in summands]
    vertices = rep.dims.keys()
    for x in vertices:
        P = cert.base_changes.get(x)
        if P is None or P.nrows != rep.dims[x] or P.ncols != rep.dims[x]:
            return False
        if not P.is_invertible():
            return False
        if sum(pc.dims[x] for pc in pieces) != rep.dims[x]:
            return False
    for (o, d) in rep.arrow_slots():
        t = rep.vertex_of(o + d)
        M = rep.maps[(o, d)]
        canon = block_diag(field, [pc.maps[(o, d)] for pc in pieces]) if pieces else Mat.zeros(
            field, rep.dims[t], rep.dims[o])
        if M.mul(cert.base_changes[o]) != cert.base_changes[t].mul(canon):
            return False
    return True


# -- hom spaces -----------------------------------------------------------------


def hom_dim(rep1: Rep, rep2: Rep) -> int:
    """Dimension of the space of morphisms rep1 -> rep2 (same shape)."""
    if rep1.is_cyclic != rep2.is_cyclic:
        raise RepresentationError("hom between different shapes")
    if rep1.is_cyclic:
        if rep1.m != rep2.m:
            raise RepresentationError("hom between different m")
        vertices = sorted(rep1.dims)
    else:
        if (rep1.lo, rep1.hi) != (rep2.lo, rep2.hi):
            raise RepresentationError("hom between different windows")
        vertices = sorted(rep1.dims)
    field = rep1.field
    offs: Dict[int, int] = {}
    total = 0
    for x in vertices:
        offs[x] = total
        total += rep1.dims[x] * rep2.dims[x]
    if total == 0:
        return 0
    rows: List[List[Scalar]] = []
    zero = field.zero
    for (o, d) in rep1.arrow_slots():
        t = rep1.vertex_of(o + d)
        M1 = rep1.maps[(o, d)]
        M2 = rep2.maps[(o, d)]
        d1s, d1t = rep1.dims[o], rep1.dims[t]
        d2s, d2t = rep2.dims[o], rep2.dims[t]
        # phi_t M1 - M2 phi_s = 0, entry (a, b): a < d2t, b < d1s
        for a in range(d2t):
            for b in range(d1s):
                row = [zero] * total
                for k in range(d1t):
                    if M1.rows[k][b] != zero:
                        row[offs[t] + a * d1t + k] = field.add(row[offs[t] + a * d1t + k], M1.rows[k][b])
                for k in range(d2s):
                    if M2.rows[a][k] != zero:
                        idx = offs[o] + k * d1s + b
                        row[idx] = field.sub(row[idx], M2.rows[a][k])
                if any(v != zero for v in row):
                    rows.append(row)
    if not rows:
        return total
    return total - Mat(field, rows, total).rank()


# -- the peeling decomposition ---------------------------------------------------


class _State:
    """Mutable working copy of a representation plus embeddings to the input."""

    def __init__(self, rep: Rep):
        self.rep = rep
        self.field = rep.field
        self.cyclic = rep.is_cyclic
        self.dims = dict(rep.dims)
        self.maps = {k: v.copy() for k, v in rep.maps.items()}
        self.embed = {x: Mat.identity(rep.field, d) for x, d in rep.dims.items()}
        if rep.is_cyclic:
            self.period = 2 * rep.m
        else:
            self.period = None
            self.lo, self.hi = rep.lo, rep.hi

    def vertex_of(self, pos: int) -> Optional[int]:
        if self.cyclic:
            return (pos - 1) % self.period + 1
        return pos if self.lo <= pos <= self.hi else None

    def dim_at(self, pos: int) -> int:
        v = self.vertex_of(pos)
        return self.dims[v] if v is not None else 0

    def arrow_at(self, pos: int, d: int) -> Mat:
        """Arrow from position pos (odd vertex class) to pos + d."""
        v = self.vertex_of(pos)
        if v is None or (v, d) not in self.maps:
            return Mat.zeros(self.field, self.dim_at(pos + d), self.dim_at(pos))
        return self.maps[(v, d)]

    def view_fwd(self, pos: int, d: int, transposed: bool) -> Mat:
        """Outgoing matrix at `pos` toward pos+d in the chosen orientation.

        Primal: pos is an odd source.  Transposed: pos is even and the
        returned matrix is the transpose of the primal arrow pos+d -> pos.
        """
        if not transposed:
            return self.arrow_at(pos, d)
        return self.arrow_at(pos + d, -d).transpose()

    def source_positions(self, transposed: bool) -> List[int]:
        par = 0 if transposed else 1
        if self.cyclic:
            return [v for v in range(1, self.period + 1) if v % 2 == par]
        return [v for v in range(self.lo, self.hi + 1) if v % 2 == par]

    def walk_bound(self) -> int:
        if self.cyclic:
            dmax = max(self.dims.values(), default=0)
            return 2 * self.rep.m * (dmax + 3) + 2
        return self.hi - self.lo + 2

    def as_rep(self) -> Rep:
        if self.cyclic:
            return CircleRep(self.field, self.rep.m, self.dims, self.maps)
        return ZigzagRep(self.field, self.lo, self.hi, self.dims, self.maps)

    def restrict(self, comp: Dict[int, Mat]) -> None:
        """Replace the state by the subrepresentation spanned by `comp`."""
        new_maps = {}
        for (o, d), M in self.maps.items():
            t = self.vertex_of(o + d)
            MC = M.mul(comp[o])
            Z = comp[t].try_solve(MC)
            if Z is None:
                raise DecompositionError("complement is not arrow-invariant")
            new_maps[(o, d)] = Z
        self.maps = new_maps
        self.dims = {x: comp[x].ncols for x in self.dims}
        self.embed = {x: self.embed[x].mul(comp[x]) for x in self.embed}


def _find_peel_start(st: _State, transposed: bool):
    for pos in st.source_positions(transposed):
        if st.dim_at(pos) == 0:
            continue
        for d in (+1, -1):
            M = st.view_fwd(pos, d, transposed)
            K = M.kernel_basis()
            if K.ncols:
                return pos, d, K
    return None


def _not_in_span(space: Mat, candidates: Mat) -> Optional[List[Scalar]]:
    for j in range(candidates.ncols):
        v = candidates.col(j)
        if space.try_solve(Mat.from_cols(space.field, [v], space.nrows)) is None:
            return v
    return None


def _walk_chain(st: _State, src: int, dead_dir: int, K: Mat, transposed: bool):
    """Follow a kernel vector as far as it survives; return (positions, chain).

    The subspace S carries everything reachable from ker(dead arrow), R the
    riders reachable from zero; the walk stops when S/R vanishes, and the
    chain is reconstructed backwards with honest death at the far end.
    """
    field = st.field
    walk = -dead_dir
    par = 0 if transposed else 1
    S = [K.column_reduced()]
    R = [Mat.zeros(field, st.dim_at(src), 0)]
    steps: List[Tuple[str, Mat]] = []
    bound = st.walk_bound()
    n = 0
    while True:
        pos = src + walk * n
        if pos % 2 == par:
            kind, M = "F", st.view_fwd(pos, walk, transposed)
        else:
            kind, M = "B", st.view_fwd(pos + walk, -walk, transposed)
        S1 = image(M, S[n]) if kind == "F" else preimage(M, S[n])
        R1 = image(M, R[n]) if kind == "F" else preimage(M, R[n])
        if S1.ncols == R1.ncols:
            d_star = n
            last = (kind, M)
            break
        steps.append((kind, M))
        S.append(S1)
        R.append(R1)
        n += 1
        if n > bound:
            raise DecompositionError("walk exceeded the support bound")
    kind, M = last
    if kind == "F":
        cand = subspace_intersect(S[d_star], M.kernel_basis())
    else:
        cand = S[d_star]
    w = _not_in_span(R[d_star], cand)
    if w is None:
        raise DecompositionError("no honest chain end available")
    chain: List[Optional[List[Scalar]]] = [None] * (d_star + 1)
    chain[d_star] = w
    for k in range(d_star - 1, -1, -1):
        kind, M = steps[k]
        if kind == "B":
            chain[k] = M.matvec(chain[k + 1])
        else:
            MS = M.mul(S[k])
            y = MS.solve(Mat.from_cols(field, [chain[k + 1]], MS.nrows))
            chain[k] = S[k].matvec(y.col(0))
    positions = [src + walk * k for k in range(d_star + 1)]
    if walk < 0:
        positions.reverse()
        chain.reverse()
    return positions, chain


def _crossing_lists(st: _State, positions: List[int]) -> Dict[int, List[int]]:
    """Support positions grouped by vertex, decreasing within each vertex."""
    out: Dict[int, List[int]] = {}
    for p in sorted(positions, reverse=True):
        out.setdefault(st.vertex_of(p), []).append(p)
    return out


def _interval_arrow(field: Field, cross: Dict[int, List[int]], s: int, t: int, d: int,
                    lo_pos: int, hi_pos: int) -> Mat:
    src = cross.get(s, [])
    dst = cross.get(t, [])
    M = Mat.zeros(field, len(dst), len(src))
    for cidx, p in enumerate(src):
        q = p + d
        if lo_pos <= q <= hi_pos:
            M.rows[dst.index(q)][cidx] = field.one
    return M


def _arrow_instances(st: _State, transposed: bool):
    """All arrows as (source vertex, target vertex, matrix, step dir) in the
    chosen orientation."""
    out = []
    for (o, d), M in sorted(st.maps.items()):
        t = st.vertex_of(o + d)
        if not transposed:
            out.append((o, t, M, d))
        else:
            out.append((t, o, M.transpose(), -d))
    return out


def _solve_retraction(st: _State, transposed: bool, positions: List[int],
                      chain: List[List[Scalar]]) -> Optional[Dict[int, Mat]]:
    """Solve for a retraction r: rep -> interval with r restricted to the
    chain being the identity; returns r_x per vertex or None."""
    field = st.field
    cross = _crossing_lists(st, positions)
    lo_pos, hi_pos = positions[0], positions[-1]
    chain_at: Dict[int, List[List[Scalar]]] = {}
    by_pos = dict(zip(positions, chain))
    for x, plist in cross.items():
        chain_at[x] = [by_pos[p] for p in plist]
    vertices = sorted(st.dims)
    offs: Dict[int, int] = {}
    total = 0
    for x in vertices:
        cx = len(cross.get(x, []))
        offs[x] = total
        total += cx * st.dims[x]
    zero, one = field.zero, field.one
    rows: List[List[Scalar]] = []
    rhs: List[List[Scalar]] = []
    for (s, t, M, d) in _arrow_instances(st, transposed):
        cs, ct = len(cross.get(s, [])), len(cross.get(t, []))
        ds = st.dims[s]
        if ct == 0 and cs == 0:
            continue
        Iarr = _interval_arrow(field, cross, s, t, d, lo_pos, hi_pos)
        # r_t M - Iarr r_s = 0 entrywise: (a, b) with a < ct, b < ds
        for a in range(ct):
            for b in range(ds):
                row = [zero] * total
                for k in range(M.nrows):
                    if M.rows[k][b] != zero:
                        idx = offs[t] + a * st.dims[t] + k
                        row[idx] = field.add(row[idx], M.rows[k][b])
                for k in range(cs):
                    if Iarr.rows[a][k] != zero:
                        idx = offs[s] + k * ds + b
                        row[idx] = field.sub(row[idx], Iarr.rows[a][k])
                rows.append(row)
                rhs.append([zero])
    for x, vecs in chain_at.items():
        cx = len(vecs)
        dx = st.dims[x]
        for a in range(cx):
            for b in range(cx):
                row = [zero] * total
                for k in range(dx):
                    if vecs[b][k] != zero:
                        row[offs[x] + a * dx + k] = vecs[b][k]
                rows.append(row)
                rhs.append([one if a == b else zero])
    A = Mat(field, rows, total)
    B = Mat(field, rhs, 1)
    z = A.try_solve(B)
    if z is None:
        return None
    out: Dict[int, Mat] = {}
    for x in vertices:
        cx = len(cross.get(x, []))
        dx = st.dims[x]
        out[x] = Mat(field, [[z.rows[offs[x] + a * dx + k][0] for k in range(dx)]
                             for a in range(cx)], dx)
    return out


def _solve_interval_embedding(st: _State, B_basis: Dict[int, Mat],
                              positions: List[int]) -> Dict[int, List[List[Scalar]]]:
    """Find a chain of the interval inside the subrepresentation B (primal).

    B_basis gives per-vertex embeddings of B into the current space; the
    restricted arrows are computed here.  Returns chain vectors per vertex in
    decreasing-position order, expressed in current-space coordinates.
    """
    field = st.field
    cross = _crossing_lists(st, positions)
    lo_pos, hi_pos = positions[0], positions[-1]
    bdims = {x: B_basis[x].ncols for x in B_basis}
    rest: List[Tuple[int, int, Mat, int]] = []
    for (o, d), M in sorted(st.maps.items()):
        t = st.vertex_of(o + d)
        MB = M.mul(B_basis[o])
        Z = B_basis[t].try_solve(MB)
        if Z is None:
            raise DecompositionError("bar space is not arrow-invariant")
        rest.append((o, t, Z, d))
    vertices = sorted(bdims)
    offs: Dict[int, int] = {}
    total = 0
    for x in vertices:
        offs[x] = total
        total += bdims[x] * len(cross.get(x, []))
    zero = field.zero
    rows: List[List[Scalar]] = []
    for (s, t, M, d) in rest:
        cs, ct = len(cross.get(s, [])), len(cross.get(t, []))
        if cs == 0 and ct == 0:
            continue
        Iarr = _interval_arrow(field, cross, s, t, d, lo_pos, hi_pos)
        # M phi_s - phi_t Iarr = 0: unknown phi_x is bdims[x] x c_x
        for a in range(bdims[t]):
            for b in range(cs):
                row = [zero] * total
                for k in range(bdims[s]):
                    if M.rows[a][k] != zero:
                        row[offs[s] + k * cs + b] = field.add(
                            row[offs[s] + k * cs + b], M.rows[a][k])
                for k in range(ct):
                    if Iarr.rows[k][b] != zero:
                        idx = offs[t] + a * ct + k
                        row[idx] = field.sub(row[idx], Iarr.rows[k][b])
                if any(v != zero for v in row):
                    rows.append(row)
    if total == 0:
        raise DecompositionError("empty interval embedding system")
    sols = Mat(field, rows, total).kernel_basis() if rows else Mat.identity(field, total)
    for j in range(sols.ncols):
        z = sols.col(j)
        phis: Dict[int, Mat] = {}
        ok = True
        for x in vertices:
            cx = len(cross.get(x, []))
            bx = bdims[x]
            phi = Mat(field, [[z[offs[x] + k * cx + c] for c in range(cx)] for k in range(bx)], cx)
            if phi.rank() != cx:
                ok = False
                break
            phis[x] = phi
        if ok:
            out: Dict[int, List[List[Scalar]]] = {}
            for x in vertices:
                cols = B_basis[x].mul(phis[x]) if x in phis else None
                out[x] = [cols.col(c) for c in range(cols.ncols)] if cols is not None else []
            return out
    raise DecompositionError("no invertible interval embedding found")


def _annihilator(field: Field, functionals: List[List[Scalar]], dim: int) -> Mat:
    if not functionals:
        return Mat.identity(field, dim)
    return Mat(field, [list(f) for f in functionals], dim).kernel_basis()


def _peel_phase(st: _State, transposed: bool,
                found: List[Tuple[Bar, Dict[int, List[List[Scalar]]]]]) -> None:
    while True:
        hit = _find_peel_start(st, transposed)
        if hit is None:
            return
        pos0, dead, K = hit
        positions, chain = _walk_chain(st, pos0, dead, K, transposed)
        m = st.rep.m if st.cyclic else None
        bar = bar_from_support(positions[0], positions[-1], m)
        r = _solve_retraction(st, transposed, positions, chain)
        if r is None:
            raise DecompositionError("maximal chain does not split")
        cross = _crossing_lists(st, positions)
        if not transposed:
            by_pos = dict(zip(positions, chain))
            rec = {x: [st.embed[x].matvec(by_pos[p]) for p in plist]
                   for x, plist in cross.items()}
            comp = {}
            for x in st.dims:
                comp[x] = r[x].kernel_basis() if x in r and r[x].nrows else Mat.identity(
                    st.field, st.dims[x])
                if x in cross and comp[x].ncols != st.dims[x] - len(cross[x]):
                    raise DecompositionError("complement dimension mismatch")
        else:
            # transposed world: chain spans B*, ker r* spans C*; pull both
            # back through annihilators to split the primal representation
            dual_by_pos = dict(zip(positions, chain))
            B_basis: Dict[int, Mat] = {}
            comp = {}
            for x in st.dims:
                dx = st.dims[x]
                duals = [dual_by_pos[p] for p in cross.get(x, [])]
                comp[x] = _annihilator(st.field, duals, dx)
                cstar = r[x].kernel_basis() if x in r and r[x].nrows else Mat.identity(st.field, dx)
                B_basis[x] = _annihilator(st.field, [cstar.col(j) for j in range(cstar.ncols)], dx)
                if B_basis[x].ncols != len(cross.get(x, [])):
                    raise DecompositionError("bar annihilator dimension mismatch")
            emb = _solve_interval_embedding(st, B_basis, positions)
            rec = {x: [st.embed[x].matvec(v) for v in emb[x]] for x in emb if emb[x]}
        found.append((bar, rec))
        st.restrict(comp)


def _monodromy(st: _State) -> Mat:
    """The composite alpha_1 beta_m^-1 alpha_m ... alpha_2 beta_1^-1: V_2 -> V_2."""
    field = st.field
    m = st.rep.m
    M = Mat.identity(field, st.dims[2])
    for i in range(1, m):
        bi = st.maps[(2 * i + 1, -1)]
        M = bi.inverse().mul(M)
        M = st.maps[(2 * i + 1, +1)].mul(M)
    bm = st.maps[(1, -1)]
    M = bm.inverse().mul(M)
    return st.maps[(1, +1)].mul(M)


def _residual_cells(st: _State) -> List[Tuple[Cell, Dict[int, List[List[Scalar]]]]]:
    """Split the all-isomorphism residual part into Jordan cells with bases."""
    field = st.field
    m = st.rep.m
    for (o, d), M in st.maps.items():
        if not M.is_square() or not M.is_invertible():
            raise DecompositionError("residual arrows must be isomorphisms")
    if st.dims[2] == 0:
        return []
    T = _monodromy(st)
    cells, P = primary_components(T)
    # propagate: P_2 = P, P_{2i} = alpha_i P_{2i-1}, P_{2i+1} = beta_i^{-1} P_{2i}
    bases: Dict[int, Mat] = {2: P}
    for i in range(1, m):
        bases[2 * i + 1] = st.maps[(2 * i + 1, -1)].inverse().mul(bases[2 * i])
        bases[2 * i + 2] = st.maps[(2 * i + 1, +1)].mul(bases[2 * i + 1])
    bases[1] = st.maps[(1, -1)].inverse().mul(bases[2 * m])
    out = []
    col0 = 0
    for c in cells:
        w = c.dim()
        rec: Dict[int, List[List[Scalar]]] = {}
        for x in range(1, 2 * m + 1):
            cols = [st.embed[x].matvec(bases[x].col(j)) for j in range(col0, col0 + w)]
            rec[x] = cols
        out.append((c, rec))
        col0 += w
    return out


def _assemble(rep: Rep, bar_recs, cell_recs) -> Tuple[List[Summand], Certificate]:
    field = rep.field
    entries: List[Tuple[Summand, Dict[int, List[List[Scalar]]]]] = list(bar_recs) + list(cell_recs)
    entries.sort(key=lambda e: summand_sort_key(e[0]))
    base: Dict[int, List[List[Scalar]]] = {x: [] for x in rep.dims}
    for s, rec in entries:
        for x in rep.dims:
            base[x].extend(rec.get(x, []))
    changes = {}
    for x in rep.dims:
        if len(base[x]) != rep.dims[x]:
            raise DecompositionError("certificate columns do not fill the space")
        changes[x] = Mat.from_cols(field, base[x], rep.dims[x])
    return [s for s, _ in entries], Certificate(base_changes=changes)


def decompose_zigzag(rep: ZigzagRep) -> Tuple[List[Bar], Certificate]:
    """Decompose a linear-shape representation into bars with a certificate."""
    st = _State(rep)
    bars: List[Tuple[Bar, Dict[int, List[List[Scalar]]]]] = []
    _peel_phase(st, transposed=False, found=bars)
    _peel_phase(st, transposed=True, found=bars)
    if any(st.dims[x] for x in st.dims):
        raise DecompositionError("nonzero residue on the linear shape")
    summands, cert = _assemble(rep, bars, [])
    if not verify_certificate(rep, summands, cert):
        raise DecompositionError("certificate verification failed")
    return [s for s in summands if isinstance(s, Bar)], cert


def decompose_circle(rep: CircleRep) -> Tuple[List[Bar], List[Cell], Certificate]:
    """Decompose a cyclic-shape representation into bars and Jordan cells."""
    st = _State(rep)
    bars: List[Tuple[Bar, Dict[int, List[List[Scalar]]]]] = []
    _peel_phase(st, transposed=False, found=bars)
    _peel_phase(st, transposed=True, found=bars)
    cells = _residual_cells(st)
    summands, cert = _assemble(rep, bars, cells)
    if not verify_certificate(rep, summands, cert):
        raise DecompositionError("certificate verification failed")
    out_bars = [s for s in summands if isinstance(s, Bar)]
    out_cells = [s for s in summands if isinstance(s, Cell)]
    return out_bars, out_cells, cert


def decompose(rep: Rep):
    if rep.is_cyclic:
        return decompose_circle(rep)
    return decompose_zigzag(rep)
