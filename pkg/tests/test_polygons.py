import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from padicprec.errors import MissingPlateau, Unbounded
from padicprec.linalg import PMatrix
from padicprec.padic import INF
from padicprec.polygons import (GrowthFunction, Polygon, composition_bound_check, compose_series,
                                delta_integral_poly, hodge_polygon, lambda_f_bound,
                                legendre_growth, lu_radius, matrix_polygons, newton_polygon,
                                newton_polygon_of, precision_polygon, prop26_radius,
                                sandwich_violations, translate_polygon, truncate_ge)
from padicprec.linalg import lu_decompose


def V(*pts):
    return [(Fraction(x), y if y == INF else Fraction(y)) for x, y in pts]


def test_newton_polygon_cubic():
    NP = newton_polygon_of([-8, 14, -7, 1], 2)
    # valuations 3, 1, 0, 0: slopes -2, -1, 0 are increasing, so (1, 1) is a vertex
    assert list(NP.vertices) == V((0, 3), (1, 1), (2, 0), (3, 0))
    assert NP.slopes() == [-2, -1, 0]


def test_newton_polygon_monomial_and_constant():
    P = newton_polygon([INF, INF, 0])
    assert list(P.vertices) == V((0, INF), (2, 0))
    assert list(newton_polygon([0]).vertices) == V((0, 0))


def test_hodge_polygon_examples():
    assert list(hodge_polygon((0, 1, 2)).vertices) == V((0, 3), (1, 1), (2, 0), (3, 0))
    assert all(y == 0 for _, y in hodge_polygon((0, 0, 0)).vertices)
    assert list(hodge_polygon((2,)).vertices) == V((0, 2), (1, 0))


def test_translate():
    HP = hodge_polygon((0, 1, 2))
    assert translate_polygon(HP, 0) == HP
    assert list(translate_polygon(HP, 1).vertices) == V((-1, 3), (0, 1), (1, 0), (2, 0))
    assert translate_polygon(translate_polygon(HP, 3), -3) == HP


def test_precision_polygon_diagonal():
    M = PMatrix.from_rows([[1, 0, 0], [0, 2, 0], [0, 0, 4]], 2)
    NP, HP, PP = matrix_polygons(M)
    T1 = HP.translate(1)
    assert all(PP(x) == T1(x) for x in range(3))
    assert sandwich_violations(M) == []


def test_precision_polygon_one_by_one_and_unimodular():
    PP = precision_polygon(PMatrix.from_rows([[5]], 2))
    assert list(PP.vertices) == V((0, 0))
    M = PMatrix.from_rows([[1, 2, 0], [3, 5, 1], [0, 1, 1]], 2)
    NP, HP, PP = matrix_polygons(M)
    assert all(PP(x) == 0 and HP.translate(1)(x) == 0 for x in range(3))


@given(st.integers(1, 5), st.sampled_from([2, 3]), st.randoms(use_true_random=False))
def test_sandwich_and_newton_above_hodge(n, p, rnd):
    rows = [[rnd.randrange(p ** 6) for _ in range(n)] for _ in range(n)]
    M = PMatrix.from_rows(rows, p)
    NP, HP, PP = matrix_polygons(M)
    assert sandwich_violations(M, (NP, HP, PP)) == []
    assert all(NP(x) >= HP(x) for x in range(n + 1))


def test_polygon_json_round_trip():
    for P in [newton_polygon([INF, 3, 1, 0]), hodge_polygon((0, 1, 2)).translate(1),
              Polygon(V((Fraction(1, 2), INF), (1, 2), (3, 0)))]:
        assert Polygon.from_json(P.to_json()) == P


# --- growth functions ----------------------------------------------------------------

def test_legendre_examples():
    assert legendre_growth(newton_polygon([INF, INF, 0]))(5) == 10
    L = legendre_growth(newton_polygon([INF, 1]))
    assert L(0) == -1 and L(3) == 2
    L = legendre_growth(newton_polygon([INF, 0, 1]))
    assert L(0) == 0 and L(1) == 1 and L(2) == 3
    assert L.breakpoints() == [1]


@given(st.lists(st.integers(0, 6), min_size=2, max_size=6))
def test_legendre_slopes_are_abscissae(vals):
    P = newton_polygon(vals)
    L = legendre_growth(P)
    assert sorted(L.slopes()) == [x for x, _ in P.finite_vertices]
    xs = [Fraction(k, 2) for k in range(-8, 9)]
    ys = [L(x) for x in xs]
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    assert all(2 * ys[i] <= ys[i - 1] + ys[i + 1] for i in range(1, len(ys) - 1))


def test_truncate_ge_examples():
    phi = GrowthFunction([(0, 0), (2, 0)])
    t = truncate_ge(phi, 2)
    assert t(0) == 0 and t(-3) == -6 and t(1) == 2
    assert truncate_ge(phi, 0) == phi
    with pytest.raises(Unbounded):
        truncate_ge(phi, 3)


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(-5, 5)), min_size=1, max_size=4),
       st.integers(0, 4))
def test_truncate_ge_is_largest_minorant(lines, v):
    phi = GrowthFunction(lines)
    try:
        t = truncate_ge(phi, v)
    except Unbounded:
        assert max(a for a, _ in lines) < v
        return
    assert all(s >= v for s in t.slopes())
    # grid infimum oracle for inf_(y >= 0) phi(x + y) - v y
    for k in range(-12, 13):
        x = Fraction(k, 2)
        inf = min(phi(x + Fraction(j, 4)) - v * Fraction(j, 4) for j in range(0, 200))
        assert t(x) <= phi(x)
        assert t(x) <= inf
        assert inf - t(x) <= Fraction(1, 4) * 4  # grid resolution


def test_lambda_f_bound_example():
    Lg = GrowthFunction([(0, 0), (1, 0)])
    Lf = lambda_f_bound(Lg, GrowthFunction.identity(), 2)
    assert Lf(-2) == 0 and Lf(-5) == -3 and Lf(-1) == INF
    Lf3 = lambda_f_bound(Lg, GrowthFunction.identity(), 3)
    assert Lf3(-2) == Fraction(-1, 2)


def test_lambda_f_bound_no_cut():
    Lf = lambda_f_bound(GrowthFunction.line(0, 0), GrowthFunction.identity(), 2)
    assert Lf(10) == 12


def test_lambda_f_bound_needs_plateau():
    with pytest.raises(MissingPlateau):
        lambda_f_bound(GrowthFunction.identity(), GrowthFunction.identity(), 2)


def test_prop26_radius():
    Lg = GrowthFunction([(0, 0), (1, 0)])
    bound, end = prop26_radius(Lg, GrowthFunction.identity(), 2)
    assert end == -2 and bound(-3) == -2 and bound(-2) == 0
    # Lh + 1 moves Lh^-1(nu) from 0 to -1
    b2, e2 = prop26_radius(Lg, GrowthFunction.identity().shift(1), 2)
    assert e2 == -3 and b2(-4) == bound(-4) + 1
    b3, e3 = prop26_radius(Lg, GrowthFunction.identity(), 5)
    assert b3(-3) < bound(-3) + 1


def test_delta_examples():
    assert delta_integral_poly(PMatrix.identity(2, 2), 3) == 3
    assert delta_integral_poly(PMatrix.from_rows([[1, 0], [0, 2]], 2), 0) == -1
    assert delta_integral_poly(PMatrix.from_rows([[2, 0], [0, 2]], 2), 0) == -1


def test_lu_radius_examples():
    I = PMatrix.identity(2, 2)
    assert lu_radius(I, I, 2) == -4
    U = PMatrix.from_rows([[1, 0], [0, 2]], 2)
    assert lu_radius(I, U, 2) == -7
    M = PMatrix.from_rows([[3, 1], [5, 7]], 2)
    L0, U0 = lu_decompose(M)
    L1, U1 = lu_decompose(M.scale(5))
    assert lu_radius(L0, U0, 2) == lu_radius(L1, U1, 2)


# --- series composition --------------------------------------------------------------

def test_composition_identity():
    g = [3, 1, 4, 1, 5]
    assert compose_series(g, [0, 1], 4)[:5] == [Fraction(x) for x in g]
    assert composition_bound_check([0, 1], g, 4, 2) == (True, None)


def test_composition_example():
    h = compose_series([0, 0, 1], [0, 1, 1], 4)
    assert h[:5] == [0, 0, 1, 2, 1]
    assert composition_bound_check([0, 1, 1], [0, 0, 1], 4, 2)[0]


def test_composition_random_pairs():
    rng = random.Random(3)
    for _ in range(50):
        f = [0] + [rng.randrange(-50, 50) for _ in range(6)]
        g = [rng.randrange(-50, 50) for _ in range(7)]
        assert composition_bound_check(f, g, 6, rng.choice([2, 3]))[0]
