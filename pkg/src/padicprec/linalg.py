"""Matrices over Q_p: Smith decomposition, stable row reduction, LU,
determinants, comatrices and characteristic polynomials.

Everything here is generic over the two scalar backends of ``padic``: the
same code runs on exact rationals (ground truth) and on tracked scalars
(coordinate-wise precision).
"""

import json
from fractions import Fraction

from .errors import (
    AmbiguousPivot,
    AmbiguousRank,
    SingularPrincipalMinor,
)
from .padic import INF, PAdic, val_rational


class PMatrix:
    """Immutable rectangular matrix of p-adic scalars (row-major)."""

    __slots__ = ("p", "nrows", "ncols", "entries", "precision")

    def __init__(self, p, nrows, ncols, entries, precision=None):
        entries = tuple(entries)
        if len(entries) != nrows * ncols:
            raise ValueError("expected %d entries, got %d" % (nrows * ncols, len(entries)))
        for e in entries:
            if e.p != p:
                raise ValueError("entry over Q_%d in a matrix over Q_%d" % (e.p, p))
        self.p = p
        self.nrows = nrows
        self.ncols = ncols
        self.entries = entries
        self.precision = precision

    # constructors ---------------------------------------------------------

    @classmethod
    def from_rows(cls, rows, p, precision=None):
        """Build from nested lists of ints, Fractions, text or scalars.

        A finite ``precision`` caps every entry at ``O(p^precision)``.
        """
        rows = [list(r) for r in rows]
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        cap = INF if precision is None else precision
        entries = [PAdic.from_value(x, p, cap) for r in rows for x in r]
        return cls(p, nrows, ncols, entries, precision)

    @classmethod
    def identity(cls, n, p):
        one, zero = PAdic.one(p), PAdic.zero(p)
        return cls(p, n, n, [one if i == j else zero for i in range(n) for j in range(n)])

    @classmethod
    def zeros(cls, nrows, ncols, p):
        return cls(p, nrows, ncols, [PAdic.zero(p)] * (nrows * ncols))

    @classmethod
    def diagonal(cls, values, p):
        n = len(values)
        zero = PAdic.zero(p)
        ents = [zero] * (n * n)
        for i, x in enumerate(values):
            ents[i * n + i] = PAdic.from_value(x, p)
        return cls(p, n, n, ents)

    # access ---------------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.ncols + j]

    def rows(self):
        c = self.ncols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.nrows)]

    def row(self, i):
        return list(self.entries[i * self.ncols:(i + 1) * self.ncols])

    def column(self, j):
        return [self.entries[i * self.ncols + j] for i in range(self.nrows)]

    @property
    def is_exact(self):
        return all(e.is_exact for e in self.entries)

    def to_fractions(self):
        """Rows of exact values (rational representatives for tracked entries)."""
        return [[e.lift() for e in r] for r in self.rows()]

    def min_valuation(self):
        return min((e.valuation for e in self.entries), default=INF)

    def with_precision(self, prec):
        return PMatrix(self.p, self.nrows, self.ncols,
                       [e.with_precision(prec) for e in self.entries], prec)

    # algebra --------------------------------------------------------------

    def transpose(self):
        r, c = self.nrows, self.ncols
        return PMatrix(self.p, c, r, [self.entries[i * c + j] for j in range(c) for i in range(r)])

    T = property(transpose)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch %s @ %s" % (self.shape, other.shape))
        return PMatrix(self.p, self.nrows, other.ncols,
                       [x for r in mat_mul(self.rows(), other.rows(), self.p) for x in r])

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return PMatrix(self.p, self.nrows, self.ncols,
                       [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return PMatrix(self.p, self.nrows, self.ncols,
                       [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return PMatrix(self.p, self.nrows, self.ncols, [-a for a in self.entries])

    def scale(self, c):
        c = PAdic.from_value(c, self.p)
        return PMatrix(self.p, self.nrows, self.ncols, [c * a for a in self.entries])

    def submatrix(self, rows, cols):
        return PMatrix(self.p, len(rows), len(cols), [self[i, j] for i in rows for j in cols])

    def __eq__(self, other):
        if not isinstance(other, PMatrix):
            return NotImplemented
        return (self.p, self.shape, self.entries) == (other.p, other.shape, other.entries)

    def __hash__(self):
        return hash((self.p, self.shape, self.entries))

    def __repr__(self):
        return "PMatrix(p=%d, %s)" % (self.p, [[str(x) for x in r] for r in self.rows()])

    # JSON -----------------------------------------------------------------

    def to_json_obj(self):
        return {"p": self.p, "rows": [[str(x) for x in r] for r in self.rows()],
                "precision": self.precision}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        p = int(obj["p"])
        prec = obj.get("precision")
        rows = obj["rows"]
        parsed = [[PAdic.parse(str(x), p) for x in r] for r in rows]
        return cls.from_rows(parsed, p, prec)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


# --- list-of-lists helpers (scalars are PAdic) --------------------------------

def mat_mul(A, B, p):
    zero = PAdic.zero(p)
    n = len(B)
    m = len(B[0]) if B else 0
    out = []
    for row in A:
        r = []
        for j in range(m):
            acc = zero
            for k in range(n):
                a = row[k]
                if a.is_zero:
                    continue
                b = B[k][j]
                if b.is_zero:
                    continue
                acc = acc + a * b
            r.append(acc)
        out.append(r)
    return out


def _identity_rows(n, p):
    one, zero = PAdic.one(p), PAdic.zero(p)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _as_pmatrix(M, p=None):
    if isinstance(M, PMatrix):
        return M
    if p is None:
        raise ValueError("prime required for a raw matrix")
    return PMatrix.from_rows(M, p)


def _from_rows(rows, p, ncols=None):
    nrows = len(rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    return PMatrix(p, nrows, ncols, [x for r in rows for x in r])


# --- Smith decomposition -------------------------------------------------------

class SmithData:
    """``M = U * Delta * V`` with U, V unimodular and Delta diagonal."""

    __slots__ = ("U", "Delta", "V", "sigma")

    def __init__(self, U, Delta, V, sigma):
        self.U = U
        self.Delta = Delta
        self.V = V
        self.sigma = tuple(sigma)

    def __repr__(self):
        return "SmithData(sigma=%r)" % (self.sigma,)


def _pick_pivot(A, rows, cols):
    """Minimal-valuation certified pivot among rows x cols (row-major ties)."""
    best = None
    floor = INF  # smallest precision among inexact zeros
    for i in rows:
        Ai = A[i]
        for j in cols:
            x = Ai[j]
            if x.is_zero:
                continue
            if x.is_inexact_zero:
                if x.precision < floor:
                    floor = x.precision
                continue
            v = x.valuation
            if best is None or v < best[0]:
                best = (v, i, j)
    return best, floor


def smith_decompose(M, p=None):
    """Smith decomposition with minimal-valuation pivoting.

    Pivots are chosen with minimal valuation, ties in row-major order.  The
    diagonal of Delta holds exact powers ``p**sigma_i`` (zero past the rank),
    and ``U * Delta * V == M`` holds exactly on the exact backend.
    """
    M = _as_pmatrix(M, p)
    p = M.p
    m, n = M.nrows, M.ncols
    A = M.rows()
    U = _identity_rows(m, p)
    V = _identity_rows(n, p)
    zero = PAdic.zero(p)
    sigma = []
    for k in range(min(m, n)):
        best, floor = _pick_pivot(A, range(k, m), range(k, n))
        if best is None:
            if floor < INF:
                raise AmbiguousPivot("only inexact zeros remain at step %d" % k)
            break
        v, pi, pj = best
        if floor < v:
            raise AmbiguousPivot("O(%d^%d) may beat pivot of valuation %d" % (p, floor, v))
        # move the pivot to (k, k); swaps are their own inverses
        if pi != k:
            A[pi], A[k] = A[k], A[pi]
            for r in U:
                r[pi], r[k] = r[k], r[pi]
        if pj != k:
            for r in A:
                r[pj], r[k] = r[k], r[pj]
            V[pj], V[k] = V[k], V[pj]
        piv = A[k][k]
        # make the pivot exactly p^v: row k /= u, column k of U *= u
        u = piv / PAdic.exact(Fraction(p) ** v, p)
        if u != PAdic.one(p):
            A[k] = [x / u for x in A[k]]
            for r in U:
                r[k] = r[k] * u
        piv = A[k][k]
        # clear column k below the pivot (row ops) ...
        for i in range(k + 1, m):
            x = A[i][k]
            if x.is_zero:
                continue
            f = x / piv
            A[i] = [a - f * b for a, b in zip(A[i], A[k])]
            A[i][k] = zero
            for r in U:
                r[k] = r[k] + f * r[i]
        # ... and row k right of it (column ops)
        for j in range(k + 1, n):
            x = A[k][j]
            if x.is_zero:
                continue
            g = x / piv
            for r in A:
                r[j] = r[j] - g * r[k]
            A[k][j] = zero
            V[k] = [a + g * b for a, b in zip(V[k], V[j])]
        sigma.append(v)
    rank = len(sigma)
    sigma += [INF] * (max(m, n) - rank)
    D = [[zero] * n for _ in range(m)]
    for k in range(rank):
        D[k][k] = A[k][k]
    return SmithData(_from_rows(U, p, m), _from_rows(D, p, n), _from_rows(V, p, n), sigma)


def smith_sigma(M, p=None):
    return smith_decompose(M, p).sigma


def rank(M, p=None):
    return sum(1 for s in smith_sigma(M, p) if s != INF)


# --- row reduction --------------------------------------------------------------

def row_reduce(gens, p=None):
    """Row-reduce generators with maximal-norm pivoting.

    Returns ``(G, I, rank)``: G spans the row space, its columns ``I``
    (0-based, increasing) form the identity, and rows are ordered by pivot
    column.  Ties between equal-norm pivots go to the lowest column, then
    the lowest row.
    """
    gens = _as_pmatrix(gens, p)
    p = gens.p
    n = gens.ncols
    one, zero = PAdic.one(p), PAdic.zero(p)
    rows = [r for r in gens.rows() if any(not x.is_zero for x in r)]
    G, I = [], []
    while rows:
        best = None
        floor = INF
        for c in range(n):
            for ri, r in enumerate(rows):
                x = r[c]
                if x.is_zero:
                    continue
                if x.is_inexact_zero:
                    floor = min(floor, x.precision)
                    continue
                v = x.valuation
                if best is None or v < best[0]:
                    best = (v, c, ri)
        if best is None:
            raise AmbiguousRank("rows indistinguishable from zero remain")
        v, c, ri = best
        if floor < v:
            raise AmbiguousRank("O(%d^%d) may beat pivot of valuation %d" % (p, floor, v))
        piv = rows.pop(ri)
        pv = piv[c]
        piv = [x / pv for x in piv]
        piv[c] = one
        for r in G:
            f = r[c]
            if not f.is_zero:
                for j in range(n):
                    r[j] = r[j] - f * piv[j]
                r[c] = zero
        keep = []
        for r in rows:
            f = r[c]
            if not f.is_zero:
                r = [a - f * b for a, b in zip(r, piv)]
                r[c] = zero
            if any(not x.is_zero for x in r):
                keep.append(r)
        rows = keep
        G.append(piv)
        I.append(c)
        if len(I) == n:
            break
    order = sorted(range(len(I)), key=I.__getitem__)
    G = [G[k] for k in order]
    I = tuple(I[k] for k in order)
    return _from_rows(G, p, n), I, len(I)


# --- LU --------------------------------------------------------------------------

def lu_decompose(M, p=None):
    """``M = L * U`` with L unipotent lower and U upper triangular (no pivoting)."""
    M = _as_pmatrix(M, p)
    p = M.p
    n = M.nrows
    if M.ncols != n:
        raise ValueError("LU needs a square matrix")
    one, zero = PAdic.one(p), PAdic.zero(p)
    U = M.rows()
    L = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = U[k][k]
        if not piv.is_nonzero:
            raise SingularPrincipalMinor("leading minor of size %d vanishes" % (k + 1))
        for i in range(k + 1, n):
            x = U[i][k]
            if x.is_zero:
                continue
            f = x / piv
            L[i][k] = f
            U[i] = [a - f * b for a, b in zip(U[i], U[k])]
            U[i][k] = zero
    return _from_rows(L, p, n), _from_rows(U, p, n)


def inverse(M, p=None):
    """Inverse by Gauss-Jordan elimination with minimal-valuation pivots."""
    M = _as_pmatrix(M, p)
    p = M.p
    n = M.nrows
    A = [r + e for r, e in zip(M.rows(), _identity_rows(n, p))]
    for c in range(n):
        best = None
        for r in range(c, n):
            x = A[r][c]
            if x.is_nonzero and (best is None or x.valuation < best[0]):
                best = (x.valuation, r)
        if best is None:
            raise SingularPrincipalMinor("matrix is singular")
        r = best[1]
        A[c], A[r] = A[r], A[c]
        pv = A[c][c]
        A[c] = [x / pv for x in A[c]]
        for r in range(n):
            if r != c and not A[r][c].is_zero:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return _from_rows([r[n:] for r in A], p, n)


# --- determinant, comatrix, characteristic polynomial ----------------------------

def det_fractions(rows):
    """Exact determinant of a square matrix of Fractions (Gaussian elimination)."""
    A = [[Fraction(x) for x in r] for r in rows]
    n = len(A)
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = -d
        pv = A[c][c]
        d *= pv
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] / pv
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return d


def charpoly_fractions(rows):
    """Coefficients (constant term first) of det(X*I - M), division-free.

    Berkowitz's algorithm: only ring operations, so it is exact over any
    commutative ring and never divides by integers.
    """
    M = [[Fraction(x) for x in r] for r in rows]
    n = len(M)
    if n == 0:
        return [Fraction(1)]
    # vect holds coefficients highest degree first
    vect = [Fraction(1), -M[0][0]]
    for r in range(1, n):
        R = M[r][:r]           # row r, columns < r
        C = [M[i][r] for i in range(r)]  # column r, rows < r
        A = [row[:r] for row in M[:r]]
        a = M[r][r]
        # Toeplitz column: 1, -a, -R C, -R A C, ..., -R A^{r-1} C
        t = [Fraction(1), -a]
        v = C
        for _ in range(r):
            t.append(-sum(x * y for x, y in zip(R, v)))
            v = [sum(A[i][k] * v[k] for k in range(r)) for i in range(r)]
        # multiply the (r+2) x (r+1) lower-triangular Toeplitz matrix by vect
        new = []
        for i in range(r + 2):
            s = Fraction(0)
            for k in range(min(i, r) + 1):
                if i - k < len(t):
                    s += t[i - k] * vect[k]
            new.append(s)
        vect = new
    return list(reversed(vect))


def comatrix_coefficients(rows, chi=None):
    """Matrices ``B_k`` with ``com(X*I - M) = sum_k B_k X^(n-1-k)``.

    Uses ``B_0 = I`` and ``B_k = M B_(k-1) + c_k I`` where
    ``chi = X^n + c_1 X^(n-1) + ... + c_n``.
    """
    M = [[Fraction(x) for x in r] for r in rows]
    n = len(M)
    if chi is None:
        chi = charpoly_fractions(M)
    B = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    out = [B]
    for k in range(1, n):
        c = chi[n - k]
        B = [[sum(M[i][l] * B[l][j] for l in range(n)) + (c if i == j else 0)
              for j in range(n)] for i in range(n)]
        out.append(B)
    return out


class PolyMatrix:
    """Square matrix of univariate polynomials with exact rational coefficients.

    ``entries[i][j]`` is a tuple of coefficients, constant term first.
    """

    __slots__ = ("p", "size", "entries")

    def __init__(self, p, entries):
        self.p = p
        self.size = len(entries)
        self.entries = tuple(tuple(tuple(c) for c in row) for row in entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def coefficient_vectors(self):
        """All entries as coefficient vectors of length ``size`` (X^0..X^(n-1))."""
        n = self.size
        out = []
        for row in self.entries:
            for poly in row:
                v = list(poly[:n]) + [Fraction(0)] * (n - len(poly))
                out.append(v)
        return out

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)


def _trim(c):
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def comatrix_charpoly(M, p=None):
    """Comatrix of ``X*I - M`` and the characteristic polynomial, exactly.

    Returns ``(com, chi)`` with chi a tuple of coefficients (constant first).
    """
    M = _as_pmatrix(M, p)
    p = M.p
    n = M.nrows
    if M.ncols != n:
        raise ValueError("square matrix required")
    rows = M.to_fractions()
    chi = charpoly_fractions(rows)
    Bs = comatrix_coefficients(rows, chi)
    ent = []
    for i in range(n):
        row = []
        for j in range(n):
            coeffs = [Bs[n - 1 - e][i][j] for e in range(n)]
            row.append(_trim(coeffs))
        ent.append(row)
    return PolyMatrix(p, ent), tuple(chi)


def comatrix_fractions(rows):
    """Adjugate of a square Fraction matrix: ``com(M)[i][j] = (-1)^(i+j) det(minor_ji)``."""
    n = len(rows)
    if n == 1:
        return [[Fraction(1)]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            d = det_fractions(minor)
            out[i][j] = -d if (i + j) % 2 else d
    return out


def determinant(M, p=None):
    """Determinant; on tracked input the precision comes from the comatrix.

    With entries known to ``O(p^N_ij)`` the result is known to
    ``min_ij (N_ij + val com(M)_ji)``, which is ``N + sigma_1 + ... + sigma_(n-1)``
    for flat precision.
    """
    M = _as_pmatrix(M, p)
    p = M.p
    n = M.nrows
    if M.ncols != n:
        raise ValueError("square matrix required")
    if M.is_exact:
        return PAdic.exact(det_fractions(M.to_fractions()), p)
    rows = M.to_fractions()
    d = det_fractions(rows)
    com = comatrix_fractions(rows)
    prec = INF
    for i in range(n):
        for j in range(n):
            prec = min(prec, M[i, j].precision + val_rational(com[j][i], p))
    # the comatrix valuations of the lift are only meaningful below the precision
    smallest = min(M[i, j].precision for i in range(n) for j in range(n))
    if prec - smallest >= smallest:
        raise AmbiguousPivot("comatrix valuation not certified at this precision")
    return PAdic.exact(d, p).with_precision(prec)


# --- LU Jacobian ---------------------------------------------------------------------

def _frac_mul(A, B):
    n, m = len(B), len(B[0])
    return [[sum(r[k] * B[k][j] for k in range(n)) for j in range(m)] for r in A]


def _frac_inv(M):
    n = len(M)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(M)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c])
        A[c], A[piv] = A[piv], A[c]
        pv = A[c][c]
        A[c] = [x / pv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [r[n:] for r in A]


def lu_coordinates(n):
    """Coordinate order used for (L, U) pairs: row-major over (i, j);
    (i, j) is an L coordinate when i > j, a U coordinate otherwise."""
    return [(i, j) for i in range(n) for j in range(n)]


def lu_jacobian(M, p=None):
    """Matrix of ``dM -> (L low(dX), up(dX) U)``, ``dX = L^-1 dM U^-1``.

    Input and output coordinates are both indexed row-major by (i, j); the
    output coordinate (i, j) is the entry of dL when i > j and of dU when
    i <= j.  In this order the matrix is lower-triangular.
    """
    M = _as_pmatrix(M, p)
    p = M.p
    n = M.nrows
    L, U = lu_decompose(M)
    Lf, Uf = L.to_fractions(), U.to_fractions()
    Li, Ui = _frac_inv(Lf), _frac_inv(Uf)
    N = n * n
    J = [[Fraction(0)] * N for _ in range(N)]
    for a in range(n):
        for b in range(n):
            # L^-1 E_ab U^-1 = (column a of L^-1) (row b of U^-1)
            X = [[Li[i][a] * Ui[b][j] for j in range(n)] for i in range(n)]
            low = [[X[i][j] if i > j else 0 for j in range(n)] for i in range(n)]
            up = [[X[i][j] if i <= j else 0 for j in range(n)] for i in range(n)]
            dL = _frac_mul(Lf, low)
            dU = _frac_mul(up, Uf)
            col = a * n + b
            for i in range(n):
                for j in range(n):
                    J[i * n + j][col] = dL[i][j] if i > j else dU[i][j]
    return PMatrix.from_rows(J, p)


def lu_jacobian_inverse(L, U):
    """Matrix of ``(A, B) -> A U + L B`` in the coordinates of ``lu_jacobian``."""
    p = L.p
    n = L.nrows
    Lf, Uf = L.to_fractions(), U.to_fractions()
    N = n * n
    J = [[Fraction(0)] * N for _ in range(N)]
    for a in range(n):
        for b in range(n):
            col = a * n + b
            if a > b:      # A = E_ab (strictly lower)
                for j in range(n):
                    J[a * n + j][col] += Uf[b][j]
            else:          # B = E_ab (upper)
                for i in range(n):
                    J[i * n + b][col] += Lf[i][a]
    return PMatrix.from_rows(J, p)
