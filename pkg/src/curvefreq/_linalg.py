"""Small exact linear algebra over Q and Z (row-major lists of Fractions/ints)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence[int | Fraction]]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence[int | Fraction]], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = to_fractions(rows)
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[int | Fraction]], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence[int | Fraction]], ncols: int) -> Matrix:
    """Basis of {x : A x = 0} as a list of vectors."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def primitive(v: Sequence[Fraction | int]) -> list[int]:
    """Scale a rational vector to the primitive integer vector with the same direction."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return [x // g for x in ints]


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Z-basis of the lattice {x in Z^ncols : A x = 0}.

    Column-style Hermite reduction: unimodular column operations bring A to
    lower-echelon form while the same operations act on an identity matrix U;
    the columns of U matching zero columns of A U span the integer kernel.
    """
    a = [[int(x) for x in row] for row in rows]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def col_op(j: int, k: int, p: int, q: int, r: int, s: int) -> None:
        # (col_j, col_k) <- (p col_j + q col_k, r col_j + s col_k), det = +-1
        for mat in (a, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    start = 0
    for row_idx in range(len(a)):
        if start >= ncols:
            break
        for k in range(start + 1, ncols):
            x, y = a[row_idx][start], a[row_idx][k]
            if y == 0:
                continue
            g, p, q = _xgcd(x, y)
            col_op(start, k, p, q, -y // g, x // g)
        if a[row_idx][start] != 0:
            start += 1
    return [[u[i][j] for i in range(ncols)] for j in range(start, ncols)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, p, q with p a + q b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def solve_in_basis(basis: Sequence[Sequence[int | Fraction]], v: Sequence[int | Fraction]) -> list[Fraction]:
    """Coordinates c with sum c_k basis[k] = v (basis linearly independent)."""
    k = len(basis)
    n = len(v)
    aug = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    red, pivots = rref(aug, k + 1)
    if k in pivots:
        raise ValueError("vector is not in the span of the basis")
    if len(pivots) != k:
        raise ValueError("basis vectors are linearly dependent")
    return [red[i][k] for i in range(k)]


def det(rows: Sequence[Sequence[int | Fraction]]) -> Fraction:
    m = to_fractions(rows)
    n = len(m)
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            result = -result
        result *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return result
