"""Newton, Hodge and precision polygons, growth functions and the
precision radii derived from them.

All quantities are exact rationals in valuation units: ``log`` is taken in
base p with ``log |p| = -1``, so a radius is recorded by a valuation and a
larger number means a smaller ball.
"""

import json
from fractions import Fraction

from .errors import MissingPlateau, NotSurjective, Unbounded
from .linalg import comatrix_charpoly, inverse, smith_decompose
from .padic import INF, val_rational


# --- polygons ------------------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(points):
    """Vertices of the lower convex hull of finite points (x increasing)."""
    best = {}
    for x, y in points:
        if y == INF:
            continue
        x, y = Fraction(x), Fraction(y)
        if x not in best or y < best[x]:
            best[x] = y
    hull = []
    for pt in sorted(best.items()):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    return hull


class Polygon:
    """Lower-convex polygon given by its vertices.

    A vertex may have ordinate ``INF``; it can only come first and means the
    polygon is infinite from that abscissa up to the next vertex (excluded).
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        vs = [(Fraction(x), y if y == INF else Fraction(y)) for x, y in vertices]
        for k, (x, y) in enumerate(vs):
            if y == INF and k != 0:
                raise ValueError("infinite ordinate away from the left edge")
            if k and x <= vs[k - 1][0]:
                raise ValueError("abscissae must increase")
        if vs and vs[0][1] == INF and len(vs) == 1:
            raise ValueError("polygon without finite vertex")
        self.vertices = tuple(vs)

    @classmethod
    def from_points(cls, points, start=None):
        """Lower hull of ``points``; an infinite left edge starts at ``start``."""
        hull = lower_hull(points)
        if not hull:
            raise ValueError("no finite point")
        if start is not None and Fraction(start) < hull[0][0]:
            hull = [(Fraction(start), INF)] + hull
        return cls(hull)

    @property
    def finite_vertices(self):
        return [v for v in self.vertices if v[1] != INF]

    @property
    def left(self):
        return self.vertices[0][0]

    @property
    def right(self):
        return self.vertices[-1][0]

    def slopes(self):
        fv = self.finite_vertices
        return [(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(fv, fv[1:])]

    def __call__(self, x):
        x = Fraction(x)
        fv = self.finite_vertices
        if x < self.left or x > self.right:
            raise ValueError("abscissa %s outside [%s, %s]" % (x, self.left, self.right))
        if x < fv[0][0]:
            return INF
        for a, b in zip(fv, fv[1:]):
            if a[0] <= x <= b[0]:
                return a[1] + (b[1] - a[1]) / (b[0] - a[0]) * (x - a[0])
        return fv[-1][1]

    def restrict(self, a, b):
        """The same polygon on ``[a, b]`` (inside its domain)."""
        a, b = Fraction(a), Fraction(b)
        inner = [v for v in self.vertices if a < v[0] < b]
        return Polygon([(a, self(a))] + inner + ([(b, self(b))] if b > a else []))

    def translate(self, n):
        return Polygon([(x - n, y) for x, y in self.vertices])

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return "Polygon(%s)" % ", ".join("(%s,%s)" % (x, "inf" if y == INF else y) for x, y in self.vertices)

    def to_json_obj(self):
        out = []
        for x, y in self.vertices:
            if y == INF:
                out.append("inf" if x == 0 else [x.numerator, x.denominator, "inf"])
            else:
                out.append([x.numerator, x.denominator, y.numerator, y.denominator])
        return {"vertices": out}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        vs = []
        for v in obj["vertices"]:
            if v == "inf":
                vs.append((Fraction(0), INF))
            elif len(v) == 3:
                vs.append((Fraction(v[0], v[1]), INF))
            else:
                vs.append((Fraction(v[0], v[1]), Fraction(v[2], v[3])))
        return cls(vs)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))

    def csv_rows(self, label):
        return [(label, x, y) for x, y in self.finite_vertices]


def newton_polygon(coeff_vals):
    """Lower hull of ``(i, v_i)``; leading infinite valuations give an infinite left edge."""
    pts = [(i, v) for i, v in enumerate(coeff_vals) if v != INF]
    if not pts:
        raise ValueError("all coefficients vanish")
    return Polygon.from_points(pts, start=0)


def newton_polygon_of(coeffs, p):
    return newton_polygon([val_rational(c, p) for c in coeffs])


def hodge_polygon(sigma):
    """Lower hull of ``(i, sigma_1 + ... + sigma_(n-i))`` for i = 0..n."""
    n = len(sigma)
    pts = []
    for i in range(n + 1):
        s = 0
        for x in sigma[:n - i]:
            s = s + x
        pts.append((i, s))
    return Polygon.from_points(pts, start=0)


def translate_polygon(P, n):
    return P.translate(n)


def precision_polygon(M):
    """Lower hull of the Newton polygons of all entries of com(X - M)."""
    com, _ = comatrix_charpoly(M)
    p = M.p
    pts = []
    for row in com.entries:
        for poly in row:
            for e, c in enumerate(poly):
                if c:
                    pts.append((e, val_rational(c, p)))
    return Polygon.from_points(pts, start=0)


def matrix_polygons(M):
    """``(NP, HP, PP)`` for a square exact matrix."""
    _, chi = comatrix_charpoly(M)
    NP = newton_polygon_of(chi, M.p)
    HP = hodge_polygon(smith_decompose(M).sigma[:M.nrows])
    PP = precision_polygon(M)
    return NP, HP, PP


def sandwich_violations(M, polys=None):
    """Abscissae in [0, n-1] where ``T_1(HP) <= PP <= NP`` or endpoint contact fails."""
    n = M.nrows
    NP, HP, PP = polys or matrix_polygons(M)
    T1 = HP.translate(1)
    bad = []
    for x in range(n):
        a, b, c = T1(x), PP(x), NP(x)
        if not (a <= b <= c):
            bad.append(x)
    if PP(0) != T1(0) or PP(n - 1) != T1(n - 1) or T1(n - 1) != 0:
        bad.append("endpoint")
    return bad


# --- growth functions ----------------------------------------------------------------

class GrowthFunction:
    """Convex piecewise-linear function, max of finitely many lines, equal
    to ``+inf`` right of ``cap``.  Lines are ``(slope, intercept)``."""

    __slots__ = ("lines", "cap", "pieces")

    def __init__(self, lines, cap=INF):
        lines = [(Fraction(a), Fraction(b)) for a, b in lines]
        if not lines:
            raise ValueError("empty growth function")
        self.cap = cap if cap in (INF, -INF) else Fraction(cap)
        self.pieces = _envelope(lines)
        self.lines = tuple((a, b) for _, a, b in self.pieces)

    @classmethod
    def line(cls, slope, intercept=0, cap=INF):
        return cls([(slope, intercept)], cap)

    @classmethod
    def identity(cls):
        return cls.line(1, 0)

    def __call__(self, x):
        if x == -INF:
            a, b = self.lines[0]
            if a > 0:
                return -INF
            if a == 0:
                return b
            return INF
        if x > self.cap:
            return INF
        x = Fraction(x)
        return max(a * x + b for a, b in self.lines)

    def breakpoints(self):
        return [s for s, _, _ in self.pieces[1:]]

    def slopes(self):
        return [a for a, _ in self.lines]

    def _piece_at(self, x):
        k = 0
        for i, (s, _, _) in enumerate(self.pieces):
            if s == -INF or s <= x:
                k = i
        return self.pieces[k]

    def shift(self, c):
        """``x -> self(x + c)``."""
        c = Fraction(c)
        cap = self.cap - c if self.cap not in (INF, -INF) else self.cap
        return GrowthFunction([(a, b + a * c) for a, b in self.lines], cap)

    def add_identity(self):
        return GrowthFunction([(a + 1, b) for a, b in self.lines], self.cap)

    def add_constant(self, c):
        return GrowthFunction([(a, b + c) for a, b in self.lines], self.cap)

    def sup_below(self, y):
        """``sup { x : self(x) <= y }`` (``-INF`` if empty)."""
        if y == INF:
            return self.cap
        y = Fraction(y)
        best = self.cap
        for a, b in self.lines:
            if a > 0:
                best = min(best, (y - b) / a)
            elif a == 0 and b > y:
                return -INF
        return best

    def inverse_at(self, y):
        return self.sup_below(y)

    def compose(self, inner):
        """``self o inner`` for inner nondecreasing."""
        cuts = set()
        for s, _, _ in inner.pieces[1:]:
            cuts.add(s)
        for s, _, _ in self.pieces[1:]:
            x = inner.sup_below(s)
            if x not in (INF, -INF):
                cuts.add(x)
        cap = min(inner.cap, inner.sup_below(self.cap)) if self.cap != INF else inner.cap
        cuts = sorted(c for c in cuts if cap == INF or c <= cap)
        # sample one interior point of every interval between cuts
        if cuts:
            probes = [cuts[0] - 1] + [(a + b) / 2 for a, b in zip(cuts, cuts[1:])] + [cuts[-1] + 1]
        else:
            probes = [Fraction(0)]
        lines = []
        for x in probes:
            a1, b1 = inner._piece_at(x)[1:]
            y = a1 * x + b1
            a2, b2 = self._piece_at(y)[1:]
            lines.append((a2 * a1, a2 * b1 + b2))
        if cap == -INF:
            raise Unbounded("composition is infinite everywhere")
        return GrowthFunction(lines, cap)

    def __eq__(self, other):
        return isinstance(other, GrowthFunction) and (self.lines, self.cap) == (other.lines, other.cap)

    def __repr__(self):
        parts = ["%s*x + %s" % (a, b) for a, b in self.lines]
        cap = "" if self.cap == INF else ", x <= %s" % self.cap
        return "GrowthFunction(max(%s)%s)" % (", ".join(parts), cap)


def _envelope(lines):
    """Upper envelope as pieces ``(start, slope, intercept)``, slopes increasing."""
    bys = {}
    for a, b in lines:
        if a not in bys or b > bys[a]:
            bys[a] = b
    ls = sorted(bys.items())
    hull = []  # (start, a, b)
    for a, b in ls:
        while hull:
            s, a0, b0 = hull[-1]
            x = (b0 - b) / (a - a0)  # where the new line overtakes
            if s != -INF and x <= s:
                hull.pop()
                continue
            break
        if not hull:
            hull.append((-INF, a, b))
        else:
            s, a0, b0 = hull[-1]
            hull.append(((b0 - b) / (a - a0), a, b))
    return tuple(hull)


def legendre_growth(P):
    """``x -> max_i (x_i x - y_i)`` over the finite vertices of P."""
    return GrowthFunction([(x, -y) for x, y in P.finite_vertices])


def truncate_ge(phi, v):
    """Largest convex minorant of phi with all slopes >= v.

    Slopes below v are replaced by the line of slope v through the first
    point where phi's slope reaches v; a finite cap counts as an infinite
    slope.  Raises Unbounded when no such point exists.
    """
    v = Fraction(v)
    keep = [(a, b) for a, b in phi.lines if a >= v]
    if keep and phi.lines[0][0] >= v:
        return phi
    t = next((s for s, a, b in phi.pieces if a >= v), INF)
    if t > phi.cap:
        # the cap comes before any steep piece
        keep = []
    if not keep:
        if phi.cap == INF:
            raise Unbounded("no slope reaches %s" % v)
        t = phi.cap
    y = phi(t)
    return GrowthFunction(keep + [(v, y - v * t)], phi.cap)


def alpha(p):
    """``p/(p-1)``: bounds the valuation of n! by alpha*n."""
    return Fraction(p, p - 1)


def plateau(Lg):
    """``(mu, nu)``: Lg equals mu on (-inf, nu]."""
    a, b = Lg.lines[0]
    if a != 0:
        raise MissingPlateau("growth function has no constant left part")
    if len(Lg.pieces) > 1:
        nu = Lg.pieces[1][0]
    else:
        nu = Lg.cap
    return b, nu


def lambda_f_bound(Lg, Lh, p):
    """``tau_nu((x + alpha) + Lg(Lh(x + alpha)))`` as a growth function."""
    mu, nu = plateau(Lg)
    a = alpha(p)
    inner = Lg.compose(Lh).add_identity().shift(a)
    if nu == INF:
        return inner
    cap = min(inner.cap, inner.sup_below(nu))
    if cap == -INF:
        raise Unbounded("bound is infinite everywhere")
    return GrowthFunction(inner.lines, cap)


def prop26_radius(Lg, Lh, p):
    """Slope-2 affine bound on the truncation at 2 of the growth function.

    Returns ``(bound, domain_end)`` with
    ``bound(x) = 2(x + alpha + mu) - min(Lh^-1(nu) + mu, nu)`` valid for
    ``x <= min(Lh^-1(nu) - alpha, nu - mu - alpha)``.
    """
    mu, nu = plateau(Lg)
    if nu == INF:
        raise Unbounded("no finite plateau end")
    a = alpha(p)
    hinv = Lh.sup_below(nu)
    if hinv in (INF, -INF):
        raise Unbounded("Lh^-1(nu) is not finite")
    y0 = min(hinv + mu, nu)
    end = min(hinv - a, nu - mu - a)
    return GrowthFunction([(2, 2 * (a + mu) - y0)], end), end


def delta_integral_poly(J, rho_val):
    """Valuation of ``delta = C * rho^-1`` for a surjective linear map J.

    ``val(C) = -sigma_max`` (largest of the first rank elementary divisor
    valuations), and the result is ``val(C) + rho_val``.
    """
    m = J.nrows
    sigma = smith_decompose(J).sigma[:m]
    if any(s == INF for s in sigma):
        raise NotSurjective("map is not surjective")
    valC = -max(sigma) if sigma else 0
    return valC + Fraction(rho_val)


def _log_norm(M):
    """log_p of the max entry norm: minus the min valuation."""
    return -M.min_valuation()


def lu_radius(L0, U0, p):
    """Valuation threshold on rho/r for the first-order LU estimate.

    ``log(rho/r)`` must exceed
    ``2p/(p-1) + max(|L|,|U|) + max(|L^-1|,|U^-1|) + 2 max(k(L)+|U^-1|, k(U)+|L^-1|)``
    (all in log_p of norms); the returned threshold is its negative, i.e.
    ``val(rho/r)`` must stay below it.
    """
    lL, lU = _log_norm(L0), _log_norm(U0)
    lLi, lUi = _log_norm(inverse(L0)), _log_norm(inverse(U0))
    kL, kU = lL + lLi, lU + lUi
    rhs = 2 * alpha(p) + max(lL, lU) + max(lLi, lUi) + 2 * max(kL + lUi, kU + lLi)
    return -rhs


# --- composition bound ----------------------------------------------------------------

def _series_mul(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b[:order + 1 - i]):
            if y:
                out[i + j] += x * y
    return out


def compose_series(g, f, order):
    """Coefficients of ``g(f(x))`` up to x^order (f has no constant term)."""
    f = [Fraction(c) for c in f[:order + 1]] + [Fraction(0)] * max(0, order + 1 - len(f))
    if f[0]:
        raise ValueError("f(0) must be 0")
    out = [Fraction(0)] * (order + 1)
    power = [Fraction(1)] + [Fraction(0)] * order
    for m, gm in enumerate(g):
        if m > order:
            break
        if gm:
            for r in range(order + 1):
                out[r] += Fraction(gm) * power[r]
        power = _series_mul(power, f, order)
    return out


def _partitions(r, m, smallest=1):
    """Multisets of m positive integers (nondecreasing) summing to r."""
    if m == 0:
        if r == 0:
            yield ()
        return
    for first in range(smallest, r // m + 1):
        for rest in _partitions(r - first, m - 1, first):
            yield (first,) + rest


def composition_bound_check(f, g, order, p):
    """Check ``val(h_r) >= min_(m, n_i) val(g_m) + sum val(f_(n_i))`` for h = g o f.

    Returns ``(passed, first_bad_r)``.
    """
    h = compose_series(g, f, order)
    fv = [val_rational(Fraction(c), p) for c in f] + [INF] * max(0, order + 1 - len(f))
    gv = [val_rational(Fraction(c), p) for c in g]
    for r in range(order + 1):
        bound = INF
        for m, gm in enumerate(gv):
            if gm == INF or m > r:
                continue
            if m == 0:
                if r == 0:
                    bound = min(bound, gm)
                continue
            for parts in _partitions(r, m):
                s = gm + sum(fv[k] for k in parts)
                if s < bound:
                    bound = s
        if val_rational(h[r], p) < bound:
            return False, r
    return True, None


__all__ = [
    "Polygon", "GrowthFunction", "lower_hull", "newton_polygon", "newton_polygon_of",
    "hodge_polygon", "translate_polygon", "precision_polygon", "matrix_polygons",
    "sandwich_violations", "legendre_growth", "truncate_ge", "alpha", "plateau",
    "lambda_f_bound", "prop26_radius", "delta_integral_poly", "lu_radius",
    "compose_series", "composition_bound_check",
]
