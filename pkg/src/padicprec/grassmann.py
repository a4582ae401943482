"""Subspaces of K^n as points of Grassmannians.

A d-dimensional subspace V is stored in the chart given by an index set I:
its generator matrix G (d x n) is the identity on the columns I, and the
chart coordinates are the remaining columns ``X = G[:, I^c]``.  The dual
description is the n x (n-d) matrix H whose rows off I are the identity,
so that V is the left kernel of H.

Differentials are computed in chart coordinates.  Every operation here
produces its output as the row space of some generator matrix A, so one
solver handles them all: if W has chart J and ``Y = G_W[:, J^c]``, then
``A = C G_W`` with ``C = A[:, J]`` and differentiating gives
``C dY = dA[:, J^c] - dA[:, J] Y``.

Arithmetic is generic over the exact and tracked scalar backends.
"""

import json
from fractions import Fraction

from .errors import NotFullRank, NotInTangentSpace, StratumViolated
from .lattice import Lattice
from .linalg import PMatrix, row_reduce
from .padic import PAdic


def _complement(I, n):
    s = set(I)
    return tuple(j for j in range(n) if j not in s)


def _zeros(r, c, p):
    z = PAdic.zero(p)
    return [[z] * c for _ in range(r)]


def _is_null(x):
    return x.is_zero or x.is_inexact_zero


class Subspace:
    """Row space of ``G`` (d x n), identity on the 0-based columns ``I``."""

    __slots__ = ("p", "n", "I", "G", "precision")

    def __init__(self, p, n, I, G, precision=None):
        I = tuple(I)
        if G.nrows != len(I) or G.ncols != n:
            raise ValueError("generator shape %s does not match chart" % (G.shape,))
        self.p = p
        self.n = n
        self.I = I
        self.G = G
        self.precision = precision

    @property
    def dim(self):
        return len(self.I)

    @property
    def Ic(self):
        return _complement(self.I, self.n)

    def chart_coords(self):
        """``X = G[:, I^c]`` as rows of scalars."""
        Ic = self.Ic
        return [[self.G[k, j] for j in Ic] for k in range(self.dim)]

    def chart_vector(self):
        return [x for r in self.chart_coords() for x in r]

    @classmethod
    def from_chart(cls, p, n, I, X, precision=None):
        I = tuple(I)
        Ic = _complement(I, n)
        one, zero = PAdic.one(p), PAdic.zero(p)
        rows = []
        for k in range(len(I)):
            r = [zero] * n
            r[I[k]] = one
            for t, j in enumerate(Ic):
                r[j] = PAdic.from_value(X[k][t], p)
            rows.append(r)
        G = PMatrix(p, len(I), n, [x for r in rows for x in r])
        return cls(p, n, I, G, precision)

    def with_precision(self, lattice):
        return Subspace(self.p, self.n, self.I, self.G, lattice)

    def key(self):
        """Exact reduced echelon form over Q (leftmost pivots): a chart-free key."""
        rows = [[x.lift() for x in r] for r in self.G.rows()]
        return _rref_key(rows, self.n)

    def same_space(self, other):
        return self.n == other.n and self.key() == other.key()

    def __eq__(self, other):
        return (isinstance(other, Subspace) and (self.p, self.n, self.I, self.G)
                == (other.p, other.n, other.I, other.G))

    def __hash__(self):
        return hash((self.p, self.n, self.I, self.G))

    def __repr__(self):
        return "Subspace(p=%d, n=%d, I=%s, G=%s)" % (
            self.p, self.n, [i + 1 for i in self.I], [[str(x) for x in r] for r in self.G.rows()])

    def to_json_obj(self):
        return {
            "p": self.p,
            "ambient": self.n,
            "I": [i + 1 for i in self.I],
            "G": [[str(x) for x in r] for r in self.G.rows()],
            "precision": None if self.precision is None else self.precision.to_json_obj(),
        }

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        p, n = int(obj["p"]), int(obj["ambient"])
        I = tuple(int(i) - 1 for i in obj["I"])
        rows = [[PAdic.parse(str(x), p) for x in r] for r in obj["G"]]
        G = PMatrix(p, len(rows), n, [x for r in rows for x in r])
        prec = obj.get("precision")
        lat = None if prec is None else Lattice.from_json_obj(prec)
        V = cls(p, n, I, G, lat)
        _check_chart(V)
        return V

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


def _check_chart(V):
    for k, i in enumerate(V.I):
        for t in range(V.dim):
            want = 1 if t == k else 0
            if V.G[t, i] != want:
                raise ValueError("G is not the identity on the chart columns")


def _rref_key(rows, n):
    A = [[Fraction(x) for x in r] for r in rows]
    out = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    for i in range(r):
        out.append(tuple(A[i]))
    return tuple(out)


class DualSubspace:
    """``V`` as the left kernel of H (n x (n-d)); rows of H off I form the identity."""

    __slots__ = ("p", "n", "I", "H")

    def __init__(self, p, n, I, H):
        self.p = p
        self.n = n
        self.I = tuple(I)
        self.H = H

    @property
    def codim(self):
        return self.n - len(self.I)

    def __eq__(self, other):
        return isinstance(other, DualSubspace) and (self.p, self.n, self.I, self.H) == (
            other.p, other.n, other.I, other.H)

    def __hash__(self):
        return hash((self.p, self.n, self.I, self.H))


# --- constructions -------------------------------------------------------------------

def subspace_from_generators(gens, p=None):
    """Row space of ``gens`` in its max-norm-pivot chart."""
    if not isinstance(gens, PMatrix):
        gens = PMatrix.from_rows(gens, p)
    G, I, _ = row_reduce(gens)
    return Subspace(gens.p, gens.ncols, I, G)


def zero_subspace(n, p):
    return Subspace(p, n, (), PMatrix(p, 0, n, []))


def full_subspace(n, p):
    return Subspace(p, n, tuple(range(n)), PMatrix.identity(n, p))


def to_dual(V):
    p, n = V.p, V.n
    Ic = V.Ic
    X = V.chart_coords()
    one, zero = PAdic.one(p), PAdic.zero(p)
    H = [[zero] * len(Ic) for _ in range(n)]
    for t, j in enumerate(Ic):
        H[j][t] = one
    for k, i in enumerate(V.I):
        for t in range(len(Ic)):
            H[i][t] = -X[k][t]
    return DualSubspace(p, n, V.I, PMatrix(p, n, len(Ic), [x for r in H for x in r]))


def from_dual(W):
    p, n = W.p, W.n
    X = [[-W.H[i, t] for t in range(W.codim)] for i in W.I]
    return Subspace.from_chart(p, n, W.I, X)


def orthogonal(V):
    """``V^perp`` in the dual space, in the complementary chart (G = H^T)."""
    p, n = V.p, V.n
    X = V.chart_coords()
    Xp = [[-X[k][t] for k in range(V.dim)] for t in range(n - V.dim)]
    return Subspace.from_chart(p, n, V.Ic, Xp)


def _stack(*Vs):
    rows = []
    for V in Vs:
        rows.extend(V.G.rows())
    return rows


def subspace_sum(V1, V2):
    if V1.n != V2.n:
        raise ValueError("ambient dimensions differ")
    rows = _stack(V1, V2)
    if not rows:
        return zero_subspace(V1.n, V1.p)
    return subspace_from_generators(PMatrix(V1.p, len(rows), V1.n, [x for r in rows for x in r]))


def intersection(V1, V2):
    return orthogonal(subspace_sum(orthogonal(V1), orthogonal(V2)))


def _image_generators(f, V):
    # rows of G_V f^T: images of the generators
    fr = f.rows()
    out = []
    for g in V.G.rows():
        out.append([_dot(g, fr[i]) for i in range(f.nrows)])
    return out


def _dot(a, b):
    acc = None
    for x, y in zip(a, b):
        if x.is_zero or y.is_zero:
            continue
        t = x * y
        acc = t if acc is None else acc + t
    return acc if acc is not None else PAdic.zero(a[0].p if a else b[0].p)


def direct_image(f, V):
    """``f(V)`` for a linear map f: K^n -> K^m given as an m x n matrix."""
    if f.ncols != V.n:
        raise ValueError("map and subspace dimensions differ")
    rows = _image_generators(f, V)
    if not rows:
        return zero_subspace(f.nrows, f.p)
    return subspace_from_generators(PMatrix(f.p, len(rows), f.nrows, [x for r in rows for x in r]))


def inverse_image(f, W):
    """``f^-1(W)``, through ``f^*(W^perp) = f^-1(W)^perp``."""
    if f.nrows != W.n:
        raise ValueError("map and subspace dimensions differ")
    return orthogonal(direct_image(f.transpose(), orthogonal(W)))


# --- differentials ---------------------------------------------------------------------

def _tangent_generators(V, dX):
    """``dG``: zero on the chart columns, ``dX`` elsewhere."""
    p = V.p
    dG = _zeros(V.dim, V.n, p)
    for k in range(V.dim):
        for t, j in enumerate(V.Ic):
            dG[k][j] = dX[k][t]
    return dG


def _as_rows(M, r, c, p):
    if M is None:
        return _zeros(r, c, p)
    if isinstance(M, PMatrix):
        return M.rows()
    return [[PAdic.from_value(x, p) for x in row] for row in M]


def _solve_chart(A, dAs, W):
    """Solve ``C dY = dA[:, J^c] - dA[:, J] Y`` (C = A[:, J]) for each dA.

    Raises NotInTangentSpace when a right-hand side is inconsistent.
    """
    p = W.p
    J, Jc = W.I, W.Ic
    e = len(J)
    Y = W.chart_coords()
    k = len(A)
    C = [[A[r][j] for j in J] for r in range(k)]
    rhs = []
    for dA in dAs:
        R = []
        for r in range(k):
            row = []
            for t, j in enumerate(Jc):
                acc = dA[r][j]
                for s, i in enumerate(J):
                    a = dA[r][i]
                    if not a.is_zero and not Y[s][t].is_zero:
                        acc = acc - a * Y[s][t]
                row.append(acc)
            R.append(row)
        rhs.append(R)
    return _solve_multi(C, rhs, e, len(Jc), p)


def _solve_multi(C, rhs, e, q, p):
    """Solve ``C Z = R`` for each R (C is k x e of full column rank)."""
    k = len(C)
    C = [list(r) for r in C]
    R = [[list(r) for r in M] for M in rhs]
    rows = list(range(k))
    order = []
    for c in range(e):
        best = None
        for r in rows:
            x = C[r][c]
            if x.is_nonzero and (best is None or x.valuation < best[0]):
                best = (x.valuation, r)
        if best is None:
            raise StratumViolated("generator matrix lost rank on the chart columns")
        r0 = best[1]
        rows.remove(r0)
        order.append(r0)
        pv = C[r0][c]
        for r in range(k):
            if r == r0 or C[r][c].is_zero:
                continue
            f = C[r][c] / pv
            C[r] = [a - f * b for a, b in zip(C[r], C[r0])]
            for M in R:
                M[r] = [a - f * b for a, b in zip(M[r], M[r0])]
    out = []
    for M in R:
        for r in rows:
            if not all(_is_null(x) for x in M[r]):
                raise NotInTangentSpace("tangent is not tangent to the stratum")
        Z = []
        for c, r0 in enumerate(order):
            pv = C[r0][c]
            Z.append([x / pv for x in M[r0]])
        out.append(Z)
    return out


def _di(f, V, dfs, dXs, chart=None):
    p = f.p
    A = _image_generators(f, V)
    W = _pick_output(A, f.nrows, p, chart)
    fr = f.rows()
    dAs = []
    for df, dX in zip(dfs, dXs):
        dG = _tangent_generators(V, dX) if dX is not None else None
        dfr = df if df is not None else None
        dA = []
        for k, g in enumerate(V.G.rows()):
            row = []
            for i in range(f.nrows):
                acc = PAdic.zero(p)
                if dG is not None:
                    acc = acc + _dot(dG[k], fr[i])
                if dfr is not None:
                    acc = acc + _dot(g, dfr[i])
                row.append(acc)
            dA.append(row)
        dAs.append(dA)
    return W, _solve_chart(A, dAs, W) if A else [[] for _ in dAs]


def _pick_output(A, n, p, chart):
    if not A:
        return zero_subspace(n, p)
    W = subspace_from_generators(PMatrix(p, len(A), n, [x for r in A for x in r]))
    if chart is not None and tuple(chart) != W.I:
        W = change_chart(W, chart)
    return W


def _sum(V1, V2, dX1s, dX2s, chart=None):
    p, n = V1.p, V1.n
    A = _stack(V1, V2)
    W = _pick_output(A, n, p, chart)
    dAs = []
    for dX1, dX2 in zip(dX1s, dX2s):
        d1 = _tangent_generators(V1, dX1) if dX1 is not None else _zeros(V1.dim, n, p)
        d2 = _tangent_generators(V2, dX2) if dX2 is not None else _zeros(V2.dim, n, p)
        dAs.append(d1 + d2)
    return W, _solve_chart(A, dAs, W) if A else [[] for _ in dAs]


def _perp(V, dXs):
    W = orthogonal(V)
    out = []
    for dX in dXs:
        if dX is None:
            out.append(_zeros(V.n - V.dim, V.dim, V.p))
        else:
            out.append([[-dX[k][t] for k in range(V.dim)] for t in range(V.n - V.dim)])
    return W, out


def _int(V1, V2, dX1s, dX2s):
    P1, d1 = _perp(V1, dX1s)
    P2, d2 = _perp(V2, dX2s)
    S, dS = _sum(P1, P2, d1, d2)
    return _perp(S, dS)


def _ii(f, W, dfs, dXs):
    P, dP = _perp(W, dXs)
    ft = f.transpose()
    dfts = [None if df is None else [list(r) for r in zip(*df)] for df in dfs]
    D, dD = _di(ft, P, dfts, dP)
    return _perp(D, dD)


def differential(op, base, tangents):
    """Differential of DI, II, SUM or INT at ``base`` applied to ``tangents``.

    DI and II: ``base = (f, V)``, ``tangents = (df, dX)``; SUM and INT:
    ``base = (V1, V2)``, ``tangents = (dX1, dX2)``.  Tangents of subspaces are
    chart coordinates (d x (n-d) rows); ``None`` means zero.  Returns the
    output subspace and its tangent in the output chart.
    """
    W, outs = _apply(op, base, [tangents])
    return W, outs[0]


def _apply(op, base, batch):
    a, b = base
    if op in ("DI", "II"):
        f = a
        p = f.p
        dfs = [None if t[0] is None else _as_rows(t[0], f.nrows, f.ncols, p) for t in batch]
        dXs = [None if t[1] is None else _as_rows(t[1], b.dim, b.n - b.dim, p) for t in batch]
        return (_di if op == "DI" else _ii)(f, b, dfs, dXs)
    if op in ("SUM", "INT"):
        p = a.p
        d1 = [None if t[0] is None else _as_rows(t[0], a.dim, a.n - a.dim, p) for t in batch]
        d2 = [None if t[1] is None else _as_rows(t[1], b.dim, b.n - b.dim, p) for t in batch]
        return (_sum if op == "SUM" else _int)(a, b, d1, d2)
    raise ValueError("unknown operation %r" % op)


def change_chart(V, J):
    """Same subspace in the chart J (raises StratumViolated if J is not admissible).

    A precision lattice is carried over through the transition differential.
    """
    p, n = V.p, V.n
    J = tuple(J)
    if len(J) != V.dim:
        raise StratumViolated("chart size differs from the dimension")
    Jc = _complement(J, n)
    A = V.G.rows()
    C = [[A[r][j] for j in J] for r in range(V.dim)]
    # G' = C^-1 G
    Z = _solve_multi(C, [[list(r) for r in A]], V.dim, n, p)[0]
    Y = [[Z[k][j] for j in Jc] for k in range(V.dim)]
    W = Subspace.from_chart(p, n, J, Y)
    if V.precision is not None:
        gens = []
        dAs = []
        for col in V.precision.cols:
            dX = _unflat(col, V.dim, n - V.dim, p)
            dAs.append(_tangent_generators(V, dX))
        for dY in _solve_chart(A, dAs, W):
            gens.append([x.lift() for r in dY for x in r])
        W = W.with_precision(Lattice.from_generators(gens, p, len(Y) * len(Jc)))
    return W


def _unflat(vec, r, c, p):
    return [[PAdic.from_value(vec[i * c + j], p) for j in range(c)] for i in range(r)]


def op_result(op, base):
    """The output subspace of an operation (no tangents)."""
    a, b = base
    if op == "DI":
        return direct_image(a, b)
    if op == "II":
        return inverse_image(a, b)
    if op == "SUM":
        return subspace_sum(a, b)
    if op == "INT":
        return intersection(a, b)
    raise ValueError("unknown operation %r" % op)


def propagate_precision(op, base, map_lattice=None):
    """Push the precision lattices of the inputs through ``op``.

    Subspace inputs carry their lattice in ``.precision`` (None = exact); a
    lattice for the map of DI / II (entries in row-major order) may be
    given.  Returns the output subspace with its precision lattice.
    """
    a, b = base
    p = b.p
    batch = []
    if op in ("DI", "II"):
        f, V = a, b
        if map_lattice is not None:
            for col in map_lattice.cols:
                batch.append((_unflat(col, f.nrows, f.ncols, p), None))
        if V.precision is not None:
            for col in V.precision.cols:
                batch.append((None, _unflat(col, V.dim, V.n - V.dim, p)))
    else:
        for which, V in ((0, a), (1, b)):
            if V.precision is None:
                continue
            for col in V.precision.cols:
                t = [None, None]
                t[which] = _unflat(col, V.dim, V.n - V.dim, p)
                batch.append(tuple(t))
    if not batch:
        return op_result(op, base)
    W, outs = _apply(op, base, batch)
    m = W.dim * (W.n - W.dim)
    if m == 0:
        return W
    gens = [[x.lift() for r in dY for x in r] for dY in outs]
    try:
        lat = Lattice.from_generators(gens, p, m)
    except NotFullRank:
        raise NotFullRank("propagated precision is not a full lattice") from None
    return W.with_precision(lat)


def jacobian(op, base, which):
    """Matrix of the differential with respect to one input.

    ``which`` is 0 or 1 (the position in ``base``).  Columns are indexed by
    the input coordinates (chart coordinates, or map entries row-major).
    """
    a, b = base
    src = base[which]
    p = b.p
    if isinstance(src, PMatrix):
        r, c = src.nrows, src.ncols
    else:
        r, c = src.dim, src.n - src.dim
    batch = []
    one, zero = PAdic.one(p), PAdic.zero(p)
    for u in range(r * c):
        E = [[one if i * c + j == u else zero for j in range(c)] for i in range(r)]
        t = [None, None]
        t[which] = E
        batch.append(tuple(t))
    W, outs = _apply(op, base, batch)
    cols = [[x for row in dY for x in row] for dY in outs]
    m = W.dim * (W.n - W.dim)
    return W, [[cols[u][i] for u in range(r * c)] for i in range(m)]


__all__ = [
    "Subspace", "DualSubspace", "subspace_from_generators", "zero_subspace", "full_subspace",
    "to_dual", "from_dual", "orthogonal", "subspace_sum", "intersection", "direct_image",
    "inverse_image", "differential", "propagate_precision", "change_chart", "jacobian",
    "op_result",
]


