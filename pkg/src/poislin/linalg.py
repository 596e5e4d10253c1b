"""Exact rational linear algebra shared by the structure and cohomology solvers.

Everything here is deterministic: elimination picks the lowest-index pivot
column first and, within a column, the earliest remaining row.  Solutions set
all free variables to zero, so repeated runs are bit-for-bit identical.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Vector = list[Fraction]
Matrix = list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def zero_vector(n: int) -> Vector:
    return [ZERO] * n


def dot(u: Vector, v: Vector) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), ZERO)


def mat_vec(mat: Matrix, v: Vector) -> Vector:
    return [dot(row, v) for row in mat]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return [[dot(row, col) for col in cols] for row in a]


def transpose(mat: Matrix) -> Matrix:
    return [list(row) for row in zip(*mat)]


def identity_matrix(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def _scaled_int_row(row) -> list[int]:
    # Clear denominators; the common scale is irrelevant to pivoting.
    denom = 1
    for entry in row:
        f = Fraction(entry)
        denom = denom * f.denominator // gcd(denom, f.denominator)
    return [int(Fraction(entry) * denom) for entry in row]


def _reduce_int_row(row: list[int]) -> None:
    g = 0
    for entry in row:
        g = gcd(g, entry)
        if g == 1:
            return
    if g > 1:
        for i, entry in enumerate(row):
            row[i] = entry // g


class LinearSolver:
    """Reduced row echelon factorization of a matrix, reusable for many
    right-hand sides.

    Keeps the row-operation matrix E with E*M in reduced row echelon form, so
    each later solve is a matrix-vector product plus a consistency check.
    Free variables are zero in every returned solution (the deterministic
    minimal primitive used throughout the package).
    """

    def __init__(self, rows: Matrix, ncols: int | None = None):
        self.nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        self.ncols = ncols
        self._mat = [[Fraction(x) for x in row] for row in rows]
        self._elim(rows)

    def _elim(self, rows: Matrix) -> None:
        n, m = self.nrows, self.ncols
        # Integer Gauss-Jordan on [M | I]; row scaling does not disturb the
        # pivot structure and keeps the inner loop in machine integers.
        work = []
        for i, row in enumerate(rows):
            if len(row) != m:
                raise ValueError("ragged matrix")
            aug = list(row) + [ONE if j == i else ZERO for j in range(n)]
            work.append(_scaled_int_row(aug))
        pivots: list[tuple[int, int]] = []
        pivot_row = 0
        for col in range(m):
            found = -1
            for r in range(pivot_row, n):
                if work[r][col]:
                    found = r
                    break
            if found < 0:
                continue
            work[pivot_row], work[found] = work[found], work[pivot_row]
            prow = work[pivot_row]
            p = prow[col]
            for r in range(n):
                if r == pivot_row:
                    continue
                row = work[r]
                q = row[col]
                if q:
                    # The whole row is rescaled by p, including entries left of
                    # col (a previously placed pivot lives there).
                    for j in range(m + n):
                        row[j] = row[j] * p - prow[j] * q
                    _reduce_int_row(row)
            pivots.append((pivot_row, col))
            pivot_row += 1
            if pivot_row == n:
                break
        self.rank = len(pivots)
        self.pivot_cols = [c for _, c in pivots]
        # Normalize pivot rows to true RREF over Fractions; keep the E block.
        self.rref_rows: Matrix = []
        self.transform_rows: Matrix = []
        for r, c in pivots:
            p = work[r][c]
            self.rref_rows.append([Fraction(x, p) for x in work[r][:m]])
            self.transform_rows.append([Fraction(x, p) for x in work[r][m:]])
        self.null_rows: Matrix = []
        for r in range(self.rank, n):
            row = work[r]
            if any(row[:m]):
                raise AssertionError("elimination left a nonzero row below the rank")
            tail = row[m:]
            g = 0
            for x in tail:
                g = gcd(g, x)
            if g:
                lead = next(x for x in tail if x)
                if lead < 0:
                    g = -g
                self.null_rows.append([Fraction(x, g) for x in tail])
            else:
                self.null_rows.append([ZERO] * n)

    @property
    def kernel_dimension(self) -> int:
        return self.ncols - self.rank

    def residual_coordinates(self, b: Vector) -> Vector:
        """Left-null-space coordinates of b; all zero iff b is in the column span."""
        return [dot(row, b) for row in self.null_rows]

    def is_consistent(self, b: Vector) -> bool:
        return all(x == 0 for x in self.residual_coordinates(b))

    def solve(self, b: Vector) -> Vector | None:
        """Solve M x = b; None when inconsistent.  Free variables are zero."""
        if len(b) != self.nrows:
            raise ValueError("right-hand side has wrong length")
        if not self.is_consistent(b):
            return None
        return self._pivot_solution(b)

    def solve_partial(self, b: Vector) -> tuple[Vector, Vector]:
        """Best deterministic partial solution: x from the pivot rows plus the
        unremovable residual b - M x (zero iff the system was consistent)."""
        x = self._pivot_solution(b)
        return x, [bi - ri for bi, ri in zip(b, mat_vec(self._mat, x))]

    def null_functional(self, b: Vector) -> Vector | None:
        """A row functional vanishing on the column span of M but not on b."""
        for row in self.null_rows:
            if dot(row, b) != 0:
                return list(row)
        return None

    def _pivot_solution(self, b: Vector) -> Vector:
        x = zero_vector(self.ncols)
        for (erow, col) in zip(self.transform_rows, self.pivot_cols):
            x[col] = dot(erow, b)
        return x

    def kernel_basis(self) -> Matrix:
        basis = []
        pivot_set = set(self.pivot_cols)
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = zero_vector(self.ncols)
            v[free] = ONE
            for row, col in zip(self.rref_rows, self.pivot_cols):
                v[col] = -row[free]
            basis.append(v)
        return basis

def rank(mat: Matrix, ncols: int | None = None) -> int:
    return LinearSolver(mat, ncols).rank


def det(mat: Matrix) -> Fraction:
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("determinant of a non-square matrix")
    work = [[Fraction(x) for x in row] for row in mat]
    sign = 1
    result = ONE
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if work[r][col]:
                piv = r
                break
        if piv < 0:
            return ZERO
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            sign = -sign
        p = work[col][col]
        result *= p
        for r in range(col + 1, n):
            q = work[r][col]
            if q:
                factor = q / p
                row = work[r]
                prow = work[col]
                for j in range(col, n):
                    row[j] -= factor * prow[j]
    return result * sign


def symmetric_signature(mat: Matrix) -> tuple[int, int, int]:
    """Signature (positive, negative, zero) of a symmetric rational matrix,
    via exact congruence diagonalization."""
    n = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise ValueError("matrix is not symmetric")
    pos = neg = zero = 0
    k = 0
    while k < n:
        if a[k][k] == 0:
            swap = -1
            for j in range(k + 1, n):
                if a[j][j] != 0:
                    swap = j
                    break
            if swap >= 0:
                a[k], a[swap] = a[swap], a[k]
                for row in a:
                    row[k], row[swap] = row[swap], row[k]
            else:
                off = -1
                for j in range(k + 1, n):
                    if a[k][j] != 0:
                        off = j
                        break
                if off < 0:
                    # Row and column k vanish on the remaining block.
                    empty = all(
                        a[i][j] == 0
                        for i in range(k, n)
                        for j in range(k, n)
                    )
                    if empty:
                        zero += n - k
                        break
                    zero += 1
                    # Move the zero row/column to the end.
                    a.append(a.pop(k))
                    for row in a:
                        row.append(row.pop(k))
                    n -= 1
                    continue
                # a[k][k] = 0 but a[k][off] != 0: add row/col off into k.
                for j in range(len(a[k])):
                    a[k][j] += a[off][j]
                for row in a:
                    row[k] += row[off]
        p = a[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for r in range(k + 1, n):
            q = a[r][k]
            if q:
                factor = q / p
                for j in range(len(a[r])):
                    a[r][j] -= factor * a[k][j]
                for row in a:
                    row[r] -= factor * row[k]
        k += 1
    return pos, neg, zero


def row_space_solver(vectors: Matrix, ambient_dim: int) -> LinearSolver:
    """Solver whose columns are the given vectors: membership and coordinates
    in their span via solve()."""
    cols = [list(v) for v in vectors]
    rows = [[col[i] for col in cols] for i in range(ambient_dim)]
    return LinearSolver(rows, len(cols))


def extend_to_basis(vectors: Matrix, dim: int) -> list[int]:
    """Indices of standard basis vectors completing the span of `vectors` to
    the full space (lowest indices first)."""
    if not vectors:
        return list(range(dim))
    solver = LinearSolver([list(v) for v in vectors], dim)
    pivot_set = set(solver.pivot_cols)
    return [j for j in range(dim) if j not in pivot_set]
