"""Dense exact matrices with deterministic Gaussian elimination.

Matrices carry their field (see :mod:`tamebars.field`) and store rows as plain
lists.  Reduction always picks the first nonzero entry scanning columns left to
right and rows top to bottom, so every derived object (ranks, kernels, solved
systems, certificates) is reproducible bit for bit.

Subspaces of kappa^n are represented by matrices whose columns span them; the
canonical representative is the reduced column echelon form with zero columns
dropped, which is unique, so subspace equality is matrix equality.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .field import Field, PrimeField, Scalar


class LinearSolveError(ValueError):
    """Raised when an exact linear system admits no solution."""


class Mat:
    __slots__ = ("field", "rows", "nrows", "ncols")

    def __init__(self, field: Field, rows: List[List[Scalar]], ncols: Optional[int] = None):
        self.field = field
        self.rows = rows
        self.nrows = len(rows)
        if rows:
            self.ncols = len(rows[0])
        else:
            self.ncols = 0 if ncols is None else ncols

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence[Scalar]], ncols: Optional[int] = None) -> "Mat":
        return cls(field, [list(r) for r in rows], ncols)

    @classmethod
    def from_int_rows(cls, field: Field, rows: Sequence[Sequence[int]], ncols: Optional[int] = None) -> "Mat":
        f = field.from_int
        return cls(field, [[f(x) for x in r] for r in rows], ncols)

    @classmethod
    def zeros(cls, field: Field, nrows: int, ncols: int) -> "Mat":
        z = field.zero
        return cls(field, [[z] * ncols for _ in range(nrows)], ncols)

    @classmethod
    def identity(cls, field: Field, n: int) -> "Mat":
        z, o = field.zero, field.one
        return cls(field, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_cols(cls, field: Field, cols: Sequence[Sequence[Scalar]], nrows: Optional[int] = None) -> "Mat":
        if not cols:
            return cls.zeros(field, nrows or 0, 0)
        n = len(cols[0])
        return cls(field, [[c[i] for c in cols] for i in range(n)], len(cols))

    # -- basics ------------------------------------------------------------

    def copy(self) -> "Mat":
        return Mat(self.field, [row[:] for row in self.rows], self.ncols)

    def col(self, j: int) -> List[Scalar]:
        return [row[j] for row in self.rows]

    def cols(self) -> List[List[Scalar]]:
        return [self.col(j) for j in range(self.ncols)]

    def is_zero(self) -> bool:
        z = self.field.zero
        return all(x == z for row in self.rows for x in row)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Mat)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self):
        raise TypeError("Mat is mutable, not hashable")

    def __repr__(self) -> str:
        body = "; ".join(" ".join(self.field.to_str(x) for x in row) for row in self.rows)
        return f"Mat({self.field.name}, {self.nrows}x{self.ncols}: [{body}])"

    # -- arithmetic --------------------------------------------------------

    def transpose(self) -> "Mat":
        return Mat(self.field, [list(c) for c in zip(*self.rows)] if self.rows else [], self.nrows)

    def mul(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.nrows}x{self.ncols} * {other.nrows}x{other.ncols}")
        p = self.field.p if isinstance(self.field, PrimeField) else None
        ocols = list(zip(*other.rows)) if other.rows else []
        out = []
        for row in self.rows:
            new = []
            for c in ocols:
                acc = sum(a * b for a, b in zip(row, c))
                new.append(acc % p if p else acc)
            out.append(new)
        return Mat(self.field, out, other.ncols)

    def matvec(self, v: Sequence[Scalar]) -> List[Scalar]:
        p = self.field.p if isinstance(self.field, PrimeField) else None
        out = []
        for row in self.rows:
            acc = sum(a * b for a, b in zip(row, v))
            out.append(acc % p if p else acc)
        return out

    def add(self, other: "Mat") -> "Mat":
        p = self.field.p if isinstance(self.field, PrimeField) else None
        rows = [
            [(a + b) % p if p else a + b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.rows, other.rows)
        ]
        return Mat(self.field, rows, self.ncols)

    def sub(self, other: "Mat") -> "Mat":
        p = self.field.p if isinstance(self.field, PrimeField) else None
        rows = [
            [(a - b) % p if p else a - b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.rows, other.rows)
        ]
        return Mat(self.field, rows, self.ncols)

    def neg(self) -> "Mat":
        n = self.field.neg
        return Mat(self.field, [[n(x) for x in row] for row in self.rows], self.ncols)

    def scale(self, c: Scalar) -> "Mat":
        p = self.field.p if isinstance(self.field, PrimeField) else None
        return Mat(self.field, [[(c * x) % p if p else c * x for x in row] for row in self.rows], self.ncols)

    def hstack(self, other: "Mat") -> "Mat":
        if self.nrows != other.nrows:
            raise ValueError("hstack row mismatch")
        return Mat(self.field, [r1 + r2 for r1, r2 in zip(self.rows, other.rows)], self.ncols + other.ncols)

    def vstack(self, other: "Mat") -> "Mat":
        if self.ncols != other.ncols:
            raise ValueError("vstack column mismatch")
        return Mat(self.field, [r[:] for r in self.rows] + [r[:] for r in other.rows], self.ncols)

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "Mat":
        return Mat(self.field, [[self.rows[i][j] for j in col_idx] for i in row_idx], len(col_idx))

    # -- elimination -------------------------------------------------------

    def rref(self) -> tuple["Mat", List[int]]:
        """Reduced row echelon form with deterministic first-nonzero pivoting.

        Returns
        -------
        (R, pivots) : R the reduced matrix, pivots the list of pivot column
        indices in order.
        """
        field = self.field
        p = field.p if isinstance(field, PrimeField) else None
        zero = field.zero
        rows = [row[:] for row in self.rows]
        nr, nc = self.nrows, self.ncols
        pivots: List[int] = []
        r = 0
        for c in range(nc):
            pr = None
            for i in range(r, nr):
                if rows[i][c] != zero:
                    pr = i
                    break
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            pv = rows[r][c]
            if pv != field.one:
                ipv = field.inv(pv)
                rows[r] = [(ipv * x) % p if p else ipv * x for x in rows[r]]
            prow = rows[r]
            for i in range(nr):
                if i == r:
                    continue
                f = rows[i][c]
                if f != zero:
                    ri = rows[i]
                    if p:
                        rows[i] = [(a - f * b) % p for a, b in zip(ri, prow)]
                    else:
                        rows[i] = [a - f * b for a, b in zip(ri, prow)]
            pivots.append(c)
            r += 1
            if r == nr:
                break
        return Mat(field, rows, nc), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def kernel_basis(self) -> "Mat":
        """Matrix whose columns form the canonical basis of the null space.

        Free columns are scanned in increasing order; each generator carries 1
        at its free coordinate and minus the reduced coefficients at the pivot
        coordinates, which makes the result unique for a given input.
        """
        field = self.field
        R, pivots = self.rref()
        pivset = set(pivots)
        free = [j for j in range(self.ncols) if j not in pivset]
        neg = field.neg
        cols = []
        for fj in free:
            v = [field.zero] * self.ncols
            v[fj] = field.one
            for i, pj in enumerate(pivots):
                v[pj] = neg(R.rows[i][fj])
            cols.append(v)
        return Mat.from_cols(field, cols, self.ncols)

    def try_solve(self, B: "Mat") -> Optional["Mat"]:
        """One exact solution X of ``self @ X = B``, or None if inconsistent."""
        if B.nrows != self.nrows:
            raise ValueError("solve: row mismatch")
        aug = self.hstack(B)
        R, pivots = aug.rref()
        na = self.ncols
        for pj in pivots:
            if pj >= na:
                return None
        zero = self.field.zero
        X = [[zero] * B.ncols for _ in range(na)]
        for i, pj in enumerate(pivots):
            X[pj] = R.rows[i][na:]
        return Mat(self.field, X, B.ncols)

    def solve(self, B: "Mat") -> "Mat":
        X = self.try_solve(B)
        if X is None:
            raise LinearSolveError("inconsistent linear system")
        return X

    def inverse(self) -> "Mat":
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        R, pivots = self.hstack(Mat.identity(self.field, n)).rref()
        if pivots != list(range(n)):
            raise LinearSolveError("matrix is singular")
        return Mat(self.field, [row[n:] for row in R.rows], n)

    def is_invertible(self) -> bool:
        return self.is_square() and self.rank() == self.nrows

    def column_reduced(self) -> "Mat":
        """Unique reduced column echelon form with zero columns dropped."""
        R, pivots = self.transpose().rref()
        if not pivots:
            return Mat.zeros(self.field, self.nrows, 0)
        rows = [R.rows[i] for i in range(len(pivots))]
        return Mat(self.field, rows, self.nrows).transpose()


# -- subspace helpers -------------------------------------------------------
# A subspace of kappa^n is any Mat with n rows; its columns span the space.


def span(field: Field, n: int, vectors: Sequence[Sequence[Scalar]]) -> Mat:
    return Mat.from_cols(field, vectors, n).column_reduced()


def subspace_sum(A: Mat, B: Mat) -> Mat:
    return A.hstack(B).column_reduced()


def subspace_dim(A: Mat) -> int:
    return A.column_reduced().ncols


def subspace_eq(A: Mat, B: Mat) -> bool:
    return A.column_reduced() == B.column_reduced()


def subspace_contains(A: Mat, v: Sequence[Scalar]) -> bool:
    return A.try_solve(Mat.from_cols(A.field, [list(v)], A.nrows)) is not None


def subspace_leq(A: Mat, B: Mat) -> bool:
    """Is span(A) contained in span(B)?"""
    return B.try_solve(A) is not None


def image(M: Mat, S: Optional[Mat] = None) -> Mat:
    """Canonical basis of M(span S), or of the column space of M."""
    MS = M if S is None else M.mul(S)
    return MS.column_reduced()


def preimage(M: Mat, S: Mat) -> Mat:
    """Canonical basis of {x : M x in span(S)}."""
    if S.ncols == 0:
        return M.kernel_basis().column_reduced()
    K = M.hstack(S.neg()).kernel_basis()
    top = Mat(M.field, [K.rows[i] for i in range(M.ncols)], K.ncols)
    return top.column_reduced()


def subspace_intersect(A: Mat, B: Mat) -> Mat:
    if A.ncols == 0 or B.ncols == 0:
        return Mat.zeros(A.field, A.nrows, 0)
    K = A.hstack(B).kernel_basis()
    coefA = Mat(A.field, [K.rows[i] for i in range(A.ncols)], K.ncols)
    return A.mul(coefA).column_reduced()


def block_diag(field: Field, blocks: Sequence[Mat]) -> Mat:
    nr = sum(b.nrows for b in blocks)
    nc = sum(b.ncols for b in blocks)
    out = Mat.zeros(field, nr, nc)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.nrows):
            out.rows[r0 + i][c0 : c0 + b.ncols] = [x for x in b.rows[i]]
        r0 += b.nrows
        c0 += b.ncols
    return out
