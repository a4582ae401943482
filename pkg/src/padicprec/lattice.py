"""Full-rank O_K-lattices used as precision data.

A lattice in K^m is stored by a canonical column basis: upper triangular,
diagonal entries exactly ``p**a_i``, and every entry above the diagonal in
row i reduced modulo ``p**a_i``.  Two lattices are equal iff their bases
are.  Coordinates are exact rationals.
"""

import json
import random
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import NotFullRank, NotSublattice, NotSurjective, RankTooLow
from .linalg import (
    PMatrix,
    comatrix_charpoly,
    lu_decompose,
    lu_jacobian,
    smith_decompose,
)
from .padic import INF, ppow, val_rational


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if hasattr(x, "lift"):
        return x.lift()
    return Fraction(x)


def _reduce_mod(x, a, p):
    """Canonical representative of ``x`` modulo ``p**a`` (for any rational x)."""
    if not x:
        return x
    v = val_rational(x, p)
    if v >= a:
        return Fraction(0)
    scale = Fraction(p) ** v
    w = x / scale
    m = ppow(p, a - v)
    r = w.numerator * pow(w.denominator, -1, m) % m
    return r * scale


def _hnf(gens, m, p):
    """Canonical basis (columns) and exponents of the span of ``gens``."""
    gens = [list(g) for g in gens if any(g)]
    cols = [None] * m
    exps = [None] * m
    for i in range(m - 1, -1, -1):
        best = None
        for k, g in enumerate(gens):
            x = g[i]
            if x:
                v = val_rational(x, p)
                if best is None or v < best[0]:
                    best = (v, k)
        if best is None:
            raise NotFullRank("generators do not span coordinate %d" % i)
        a, k = best
        piv = gens.pop(k)
        s = Fraction(p) ** a / piv[i]
        if s != 1:
            piv = [x * s for x in piv]
        d = piv[i]
        rest = []
        for g in gens:
            x = g[i]
            if x:
                f = x / d
                g = [u - f * w for u, w in zip(g, piv)]
            if any(g):
                rest.append(g)
        gens = rest
        cols[i] = piv
        exps[i] = a
    # reduce above the diagonal: entry (i, j) mod p^a_i, i from j-1 down to 0
    for j in range(m):
        col = cols[j]
        for i in range(j - 1, -1, -1):
            x = col[i]
            if not x:
                continue
            r = _reduce_mod(x, exps[i], p)
            if r != x:
                f = (x - r) / cols[i][i]
                ci = cols[i]
                col = [u - f * w if t <= i else u for t, (u, w) in enumerate(zip(col, ci))]
                col[i] = r
        cols[j] = col
    return tuple(tuple(c) for c in cols), tuple(exps)


class Lattice:
    """A full-rank O_K-lattice in K^m with a canonical column basis."""

    __slots__ = ("p", "dim", "cols", "exps")

    def __init__(self, p, cols, exps):
        self.p = p
        self.dim = len(cols)
        self.cols = cols
        self.exps = exps

    @classmethod
    def from_generators(cls, gens, p, dim=None):
        """Span of coordinate vectors ``gens`` (each of length ``dim``)."""
        gens = [[_frac(x) for x in g] for g in gens]
        if dim is None:
            if not gens:
                raise NotFullRank("no generators")
            dim = len(gens[0])
        if dim == 0:
            return cls(p, (), ())
        cols, exps = _hnf(gens, dim, p)
        return cls(p, cols, exps)

    @classmethod
    def standard(cls, dim, p, shift=0):
        """``p**shift * O_K^dim``."""
        s = Fraction(p) ** shift
        cols = tuple(tuple(s if i == j else Fraction(0) for i in range(dim)) for j in range(dim))
        return cls(p, cols, (shift,) * dim)

    @property
    def basis(self):
        """Basis as a PMatrix whose columns generate the lattice."""
        m = self.dim
        return PMatrix.from_rows([[self.cols[j][i] for j in range(m)] for i in range(m)], self.p)

    def basis_rows(self):
        m = self.dim
        return [[self.cols[j][i] for j in range(m)] for i in range(m)]

    @property
    def det_valuation(self):
        return sum(self.exps)

    def coordinate_valuations(self):
        """``m_i``: the projection on coordinate i is ``p**m_i O_K``."""
        out = []
        for i in range(self.dim):
            out.append(min(val_rational(c[i], self.p) for c in self.cols))
        return out

    def contains(self, vec):
        """Membership of a coordinate vector (exact)."""
        x = [_frac(u) for u in vec]
        p = self.p
        for i in range(self.dim - 1, -1, -1):
            if not x[i]:
                continue
            c = x[i] / self.cols[i][i]
            if val_rational(c, p) < 0:
                return False
            ci = self.cols[i]
            for t in range(i + 1):
                x[t] -= c * ci[t]
        return True

    def issubset(self, other):
        return all(other.contains(c) for c in self.cols)

    def scaled(self, k):
        """``p**k`` times the lattice."""
        s = Fraction(self.p) ** k
        return Lattice.from_generators([[s * x for x in c] for c in self.cols], self.p, self.dim)

    def sample(self, rng, modulus):
        """A random element: basis combination with coefficients mod ``p**modulus``."""
        m = ppow(self.p, modulus)
        coeffs = [rng.randrange(m) for _ in range(self.dim)]
        out = [Fraction(0)] * self.dim
        for c, col in zip(coeffs, self.cols):
            if c:
                for i in range(self.dim):
                    if col[i]:
                        out[i] += c * col[i]
        return out

    def __eq__(self, other):
        return isinstance(other, Lattice) and (self.p, self.cols) == (other.p, other.cols)

    def __hash__(self):
        return hash((self.p, self.cols))

    def __repr__(self):
        return "Lattice(p=%d, exps=%r)" % (self.p, self.exps)

    def to_json_obj(self):
        return {"p": self.p, "basis": [[str(x) for x in r] for r in self.basis_rows()]}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        p = int(obj["p"])
        rows = [[Fraction(x) for x in r] for r in obj["basis"]]
        m = len(rows)
        return cls.from_generators([[rows[i][j] for i in range(m)] for j in range(m)], p, m)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


def lattice_from_generators(gens, p, dim=None):
    return Lattice.from_generators(gens, p, dim)


def _rows_of(J, p):
    if isinstance(J, PMatrix):
        return J.to_fractions(), J.p
    return [[_frac(x) for x in r] for r in J], p


def image_lattice(J, L, p=None):
    """``J * L`` for a surjective linear map J (m x k)."""
    rows, p = _rows_of(J, p if p is not None else L.p)
    m = len(rows)
    gens = []
    for col in L.cols:
        gens.append([sum(r[k] * col[k] for k in range(len(col)) if col[k]) for r in rows])
    try:
        return Lattice.from_generators(gens, p, m)
    except NotFullRank as e:
        raise NotSurjective(str(e)) from None


def quotient_length(L1, L2):
    """Length of ``L1 / L2`` for ``L2`` inside ``L1``."""
    if not L2.issubset(L1):
        raise NotSublattice("second lattice is not contained in the first")
    return L2.det_valuation - L1.det_valuation


def diffused_digits(H):
    """Length of ``H0 / H`` with H0 the smallest coordinate-diagonal lattice over H."""
    return H.det_valuation - sum(H.coordinate_valuations())


# --- matrix products -------------------------------------------------------------

def _flat(M):
    return [x for r in M for x in r]


def product_precision(A, B):
    """Image of ``M_rs(O) x M_st(O)`` under ``(dA, dB) -> dA B + A dB``.

    Built from the Smith decompositions of A and B; entries of the middle
    matrix have valuations ``min(a_i, b_j)``.  Coordinates are the entries of
    an r x t matrix in row-major order.  Returns ``(lattice, gain)``.
    """
    p = A.p
    r, s, t = A.nrows, A.ncols, B.ncols
    if B.nrows != s:
        raise ValueError("shape mismatch")
    SA, SB = smith_decompose(A), smith_decompose(B)
    a = list(SA.sigma[:r]) + [INF] * max(0, r - len(SA.sigma))
    b = list(SB.sigma[:t]) + [INF] * max(0, t - len(SB.sigma))
    UA = SA.U.to_fractions()
    VB = SB.V.to_fractions()
    gens = []
    gain = 0
    for i in range(r):
        for j in range(t):
            e = min(a[i], b[j])
            if e == INF:
                raise NotSurjective("the differential of the product is not surjective")
            gain += e
            c = Fraction(p) ** e
            # U_A (c E_ij) V_B = c * (column i of U_A) (row j of V_B)
            gens.append([c * UA[x][i] * VB[j][y] for x in range(r) for y in range(t)])
    return Lattice.from_generators(gens, p, r * t), gain


def product_precision_bruteforce(A, B):
    """Span of ``E_kl B`` and ``A E_kl`` over all elementary matrices."""
    p = A.p
    Af, Bf = A.to_fractions(), B.to_fractions()
    r, s, t = A.nrows, A.ncols, B.ncols
    gens = []
    for k in range(r):
        for l in range(s):
            M = [[Bf[l][y] if x == k else Fraction(0) for y in range(t)] for x in range(r)]
            gens.append(_flat(M))
    for k in range(s):
        for l in range(t):
            M = [[Af[x][k] if y == l else Fraction(0) for y in range(t)] for x in range(r)]
            gens.append(_flat(M))
    try:
        return Lattice.from_generators(gens, p, r * t)
    except NotFullRank as e:
        raise NotSurjective(str(e)) from None


# --- determinant -------------------------------------------------------------------

def det_precision(M):
    """``v`` with ``det'(M)(M_n(O)) = p**v O``: the sum of all but the last
    elementary divisor valuations."""
    n = M.nrows
    sigma = smith_decompose(M).sigma
    rk = sum(1 for x in sigma[:n] if x != INF)
    if rk < n - 1:
        raise RankTooLow("rank %d < %d" % (rk, n - 1))
    return sum(sigma[:n - 1])


# --- characteristic polynomial ---------------------------------------------------------

def charpoly_precision_lattice(M):
    """Span of the coefficient vectors (X^0..X^(n-1)) of the entries of com(X - M)."""
    com, _ = comatrix_charpoly(M)
    try:
        return Lattice.from_generators(com.coefficient_vectors(), M.p, M.nrows)
    except NotFullRank as e:
        raise NotSurjective(str(e)) from None


# --- LU ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class PrecisionReport:
    """Digits lost (negative means gained)."""

    lattice_loss: int
    coordinate_loss: int
    diffused: int

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def _det_val(rows, p):
    # valuation of the determinant by elimination
    from .linalg import det_fractions
    return val_rational(det_fractions(rows), p)


def lu_precision_report(M):
    """Lattice vs coordinate-wise precision loss of ``M -> (L, U)``."""
    p = M.p
    J = lu_jacobian(M).to_fractions()
    lat = -_det_val(J, p)
    coord = 0
    for row in J:
        coord -= min(val_rational(x, p) for x in row)
    return PrecisionReport(lat, coord, coord - lat)


def lu_precision_report_definitional(M):
    """Same report computed from the image lattice and its projections."""
    J = lu_jacobian(M)
    H = image_lattice(J, Lattice.standard(M.nrows ** 2, M.p))
    lat = H.det_valuation
    coord = sum(H.coordinate_valuations())
    return PrecisionReport(-lat, -coord, lat - coord)


# --- first-order property ------------------------------------------------------------------

class DiffMap:
    """A polynomial-ish map on flat coordinate vectors with its Jacobian."""

    def __init__(self, name, evaluate, jacobian, in_dim, out_dim):
        self.name = name
        self.evaluate = evaluate
        self.jacobian = jacobian
        self.in_dim = in_dim
        self.out_dim = out_dim


def _unflat(v, r, c):
    return [list(v[i * c:(i + 1) * c]) for i in range(r)]


def _fmul(A, B):
    return [[sum(a * B[k][j] for k, a in enumerate(row) if a) for j in range(len(B[0]))] for row in A]


def diff_map(name, shape, p):
    """Build one of the named maps ``matmul``, ``det``, ``lu``, ``charpoly``.

    ``shape`` is ``(r, s, t)`` for matmul and ``n`` otherwise.
    """
    from .linalg import charpoly_fractions, comatrix_fractions, det_fractions

    if name == "matmul":
        r, s, t = shape
        na = r * s

        def ev(v):
            return _flat(_fmul(_unflat(v[:na], r, s), _unflat(v[na:], s, t)))

        def jac(v):
            A, B = _unflat(v[:na], r, s), _unflat(v[na:], s, t)
            cols = []
            for k in range(r):
                for l in range(s):
                    cols.append(_flat([[B[l][y] if x == k else 0 for y in range(t)] for x in range(r)]))
            for k in range(s):
                for l in range(t):
                    cols.append(_flat([[A[x][k] if y == l else 0 for y in range(t)] for x in range(r)]))
            return [[c[i] for c in cols] for i in range(r * t)]

        return DiffMap(name, ev, jac, na + s * t, r * t)
    n = shape
    if name == "det":
        def ev(v):
            return [det_fractions(_unflat(v, n, n))]

        def jac(v):
            com = comatrix_fractions(_unflat(v, n, n))
            # d det = tr(com(M) dM): coefficient of dM_ij is com_ji
            return [[com[j][i] for i in range(n) for j in range(n)]]

        return DiffMap(name, ev, jac, n * n, 1)
    if name == "lu":
        def ev(v):
            L, U = lu_decompose(PMatrix.from_rows(_unflat(v, n, n), p))
            Lf, Uf = L.to_fractions(), U.to_fractions()
            return [Lf[i][j] if i > j else Uf[i][j] for i in range(n) for j in range(n)]

        def jac(v):
            return lu_jacobian(PMatrix.from_rows(_unflat(v, n, n), p)).to_fractions()

        return DiffMap(name, ev, jac, n * n, n * n)
    if name == "charpoly":
        def ev(v):
            return charpoly_fractions(_unflat(v, n, n))[:n]

        def jac(v):
            com, _ = comatrix_charpoly(PMatrix.from_rows(_unflat(v, n, n), p))
            # d chi = -tr(com(X - M) dM): coefficient of dM_ij is -com_ji
            out = [[Fraction(0)] * (n * n) for _ in range(n)]
            for i in range(n):
                for j in range(n):
                    poly = com[j, i]
                    for e, c in enumerate(poly):
                        out[e][i * n + j] = -c
            return out

        return DiffMap(name, ev, jac, n * n, n)
    raise ValueError("unknown map %r" % name)


@dataclass
class Verdict:
    passed: bool
    samples: int
    failures: int
    counterexample: object = None
    cosets_hit: int = 0
    cosets_total: int = 0
    detail: str = ""


def first_order_check(fmap, v0, H, modulus, samples, seed, p=None, require_cosets=False):
    """Sample ``h`` in H and test ``f(v0 + h) - f(v0)`` in ``f'(v0)(H)``.

    Coset coverage modulo ``p f'(v0)(H)`` is reported; it only decides the
    verdict when ``require_cosets`` is set.
    """
    p = p if p is not None else H.p
    v0 = [_frac(x) for x in v0]
    J = fmap.jacobian(v0)
    image = image_lattice(J, H, p)
    small = image.scaled(1)
    base = fmap.evaluate(v0)
    rng = random.Random("padicprec:first-order:%s:%d" % (fmap.name, seed))
    failures = 0
    example = None
    seen = set()
    for _ in range(samples):
        h = H.sample(rng, modulus)
        w = [a + b for a, b in zip(v0, h)]
        try:
            d = [a - b for a, b in zip(fmap.evaluate(w), base)]
        except ArithmeticError as e:  # e.g. a vanishing minor for LU
            failures += 1
            example = example or (h, repr(e))
            continue
        if not image.contains(d):
            failures += 1
            if example is None:
                example = (h, d)
            continue
        seen.add(_coset_key(d, small))
    total = ppow(p, image.dim)
    hit = len(seen)
    ok = failures == 0 and (not require_cosets or hit == total)
    return Verdict(ok, samples, failures, example, hit, total)


def _coset_key(d, lat):
    """Canonical representative of ``d`` modulo ``lat``."""
    x = list(d)
    p = lat.p
    for i in range(lat.dim - 1, -1, -1):
        if not x[i]:
            continue
        ci = lat.cols[i]
        # x_i mod p^a_i via the column with pivot p^a_i
        r = _reduce_mod(x[i], lat.exps[i], p)
        f = (x[i] - r) / ci[i]
        for t in range(i + 1):
            x[t] -= f * ci[t]
    return tuple(x)
