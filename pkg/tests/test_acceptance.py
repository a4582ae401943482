"""Acceptance criteria: one PASS/FAIL line per criterion.

Run with ``pytest -v tests/test_acceptance.py`` (lines are printed even when
output is captured) or directly with ``python3 tests/test_acceptance.py``.
All randomness is seeded; nothing here is tuned to a particular seed.
"""

import random
import sys
import time
from fractions import Fraction

import pytest

from padicprec.errors import NotSurjective, PAdicError
from padicprec.experiments import ExperimentConfig, report_serialize, rng_for, run_experiment
from padicprec.grassmann import (from_dual, intersection, orthogonal, subspace_from_generators,
                                 subspace_sum, to_dual, zero_subspace)
from padicprec.lattice import (Lattice, det_precision, diff_map, first_order_check,
                               product_precision, product_precision_bruteforce)
from padicprec.linalg import PMatrix, comatrix_fractions, row_reduce
from padicprec.padic import val_rational
from padicprec.polygons import composition_bound_check, matrix_polygons, sandwich_violations

SEED = 0
TOL = Fraction(3, 10)
_capsys = None


@pytest.fixture(autouse=True)
def _grab(capsys):
    global _capsys
    _capsys = capsys
    yield
    _capsys = None


def verdict(num, title, ok, detail, elapsed, limit):
    timed = elapsed <= limit
    status = "PASS" if ok and timed else "FAIL"
    line = "[criterion %2d] %s  %s: %s (%.1fs, limit %ds)" % (num, status, title, detail, elapsed, limit)
    if _capsys is not None:
        with _capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, detail
    assert timed, "took %.1fs, limit %ds" % (elapsed, limit)


def near(value, ref):
    return abs(Fraction(value) - Fraction(ref)) <= TOL * abs(Fraction(ref))


def _fmt(x):
    return "%.2f" % float(x)


def _unit_entry(rng, p, vmax):
    u = rng.randrange(1, 10 ** 6)
    while u % p == 0:
        u = rng.randrange(1, 10 ** 6)
    return rng.choice([-1, 1]) * u * p ** rng.randrange(vmax + 1)


# 1 ------------------------------------------------------------------------------------

def test_c01_product_lattice_closed_form():
    t = time.time()
    rng = random.Random("acceptance:1")
    bad, degenerate = [], 0
    for i in range(500):
        p = rng.choice([2, 3])
        r, s, u = (rng.randrange(1, 4) for _ in range(3))
        A = PMatrix.from_rows([[_unit_entry(rng, p, 3) for _ in range(s)] for _ in range(r)], p)
        B = PMatrix.from_rows([[_unit_entry(rng, p, 3) for _ in range(u)] for _ in range(s)], p)
        try:
            closed, gain = product_precision(A, B)
        except NotSurjective:
            closed = None
        try:
            brute = product_precision_bruteforce(A, B)
        except NotSurjective:
            brute = None
        if closed is None and brute is None:
            degenerate += 1
            continue
        # the gain is the length of the quotient of the full lattice by the image
        if closed != brute or gain != closed.det_valuation:
            bad.append(i)
    verdict(1, "closed-form product lattice equals generator lattice", not bad,
            "%d mismatches in 500 pairs (%d not surjective in both)" % (len(bad), degenerate),
            time.time() - t, 30)


# 2 ------------------------------------------------------------------------------------

def test_c02_determinant_precision():
    t = time.time()
    rng = random.Random("acceptance:2")
    bad = 0
    count = 0
    while count < 500:
        p = rng.choice([2, 3])
        n = rng.randrange(1, 6)
        rows = [[rng.randrange(-p ** 5, p ** 5) for _ in range(n)] for _ in range(n)]
        if n > 1 and rng.random() < 0.3:
            # force rank n - 1 with a dependent last row
            c = [rng.randrange(-3, 4) for _ in range(n - 1)]
            rows[-1] = [sum(c[k] * rows[k][j] for k in range(n - 1)) for j in range(n)]
        M = PMatrix.from_rows(rows, p)
        if row_reduce(M)[2] < n - 1:
            continue
        count += 1
        com = comatrix_fractions(M.to_fractions())
        oracle = min(val_rational(x, p) for r in com for x in r)
        if det_precision(M) != oracle:
            bad += 1
    verdict(2, "determinant precision equals comatrix minimum valuation", bad == 0,
            "%d mismatches in 500 matrices" % bad, time.time() - t, 30)


# 3 ------------------------------------------------------------------------------------

def test_c03_polygon_sandwich():
    t = time.time()
    rng = random.Random("acceptance:3")
    bad = []
    for i in range(10 ** 4):
        p = rng.choice([2, 3])
        n = rng.randrange(1, 7)
        k = rng.choice([2, 8, 64])
        M = PMatrix.from_rows([[rng.randrange(p ** k) for _ in range(n)] for _ in range(n)], p)
        try:
            polys = matrix_polygons(M)
        except PAdicError:
            continue
        if sandwich_violations(M, polys):
            bad.append(i)
    verdict(3, "precision polygon lies between shifted Hodge and Newton", not bad,
            "%d violations in 10000 matrices" % len(bad), time.time() - t, 300)


# 4 ------------------------------------------------------------------------------------

MATMUL_REF = {10: (Fraction("2.8"), Fraction("2.4")), 100: (Fraction("16.7"), Fraction("5.0")),
              1000: (Fraction("157.8"), Fraction("7.9"))}


def test_c04_matmul_chain_losses():
    t = time.time()
    got = {}
    for n in (10, 100, 1000):
        rep = run_experiment(ExperimentConfig("matmul", prime=2, dim=2, chain=n, trials=1000, seed=SEED))
        got[n] = (rep.mean("coordinate"), rep.mean("lattice"), rep.notes.get("discarded", 0))
    ok = all(near(got[n][0], MATMUL_REF[n][0]) and near(got[n][1], MATMUL_REF[n][1]) for n in got)
    grow_c = got[1000][0] / got[100][0]
    grow_l = got[1000][1] / got[100][1]
    ok = ok and grow_c >= 5 and grow_l <= Fraction(5, 2)
    detail = "; ".join("n=%d coord %s (ref %s) lattice %s (ref %s) discarded %d" % (
        n, _fmt(c), MATMUL_REF[n][0], _fmt(l), MATMUL_REF[n][1], d) for n, (c, l, d) in got.items())
    detail += "; growth 100->1000 coord x%s lattice x%s" % (_fmt(grow_c), _fmt(grow_l))
    verdict(4, "matrix product chain losses", ok, detail, time.time() - t, 600)


# 5 ------------------------------------------------------------------------------------

LU_REF = {2: (Fraction("3.0"), Fraction("1.5")), 3: (Fraction("9.4"), Fraction("2.3")),
          4: (Fraction(20), Fraction("3.8"))}


def test_c05_lu_losses():
    t = time.time()
    got = {}
    for d in (2, 3, 4):
        rep = run_experiment(ExperimentConfig("lu", prime=2, dim=d, trials=2000, seed=SEED))
        got[d] = (rep.mean("coordinate"), rep.mean("lattice"))
    ok = all(near(got[d][0], LU_REF[d][0]) and near(got[d][1], LU_REF[d][1]) for d in got)
    detail = "; ".join("d=%d coord %s (ref %s%s) lattice %s (ref %s%s)" % (
        d, _fmt(c), LU_REF[d][0], "" if near(c, LU_REF[d][0]) else " OUT",
        _fmt(l), LU_REF[d][1], "" if near(l, LU_REF[d][1]) else " OUT")
        for d, (c, l) in got.items())
    verdict(5, "LU factorization losses", ok, detail, time.time() - t, 600)


# 6 ------------------------------------------------------------------------------------

GRASS_REF = {10: (Fraction("7.3"), Fraction("2.7")), 20: (Fraction("14.8"), Fraction("5.5"))}


def test_c06_subspace_chain_losses():
    t = time.time()
    got = {}
    for n in (10, 20):
        rep = run_experiment(ExperimentConfig("grassmann", prime=2, chain=n, trials=500, seed=SEED))
        got[n] = (rep.mean("coordinate"), rep.mean("projected"), rep.mean("diffused"),
                  rep.mean("diffused_negative_fraction"), rep.notes.get("discarded", 0))
    ok = all(near(c, GRASS_REF[n][0]) and near(pr, GRASS_REF[n][1]) and neg >= Fraction(95, 100)
             for n, (c, pr, _, neg, _) in got.items())
    detail = "; ".join(
        "n=%d coord %s (ref %s) projected %s (ref %s) diffused %s x 2, negative in %s%% of trials, "
        "discarded %d" % (n, _fmt(c), GRASS_REF[n][0], _fmt(pr), GRASS_REF[n][1], _fmt(df),
                          _fmt(100 * neg), disc)
        for n, (c, pr, df, neg, disc) in got.items())
    verdict(6, "subspace intersection chain losses", ok, detail, time.time() - t, 900)


# 7 ------------------------------------------------------------------------------------

def test_c07_charpoly_statistics():
    t = time.time()
    r4 = run_experiment(ExperimentConfig("charpoly-stats", prime=2, dim=4, trials=10 ** 4, seed=SEED))
    r3 = run_experiment(ExperimentConfig("charpoly-stats", prime=2, dim=3, trials=10 ** 4, seed=SEED))
    eq = r4.mean("pp_equals_t1hp")
    diff = r3.mean("diffused_positive")
    ok = Fraction(985, 1000) <= eq <= 1 and Fraction(5, 100) <= diff <= Fraction(20, 100)
    verdict(7, "characteristic polynomial statistics", ok,
            "d=4 polygon equality %s (band 0.985-1); d=3 diffused fraction %s (band 0.05-0.20)"
            % ("%.4f" % float(eq), "%.4f" % float(diff)), time.time() - t, 600)


# 8 ------------------------------------------------------------------------------------

def test_c08_first_order_property():
    t = time.time()
    p, shift, guard, samples = 2, 10, 4, 20
    summary = []
    failing = {}
    for name, shape in (("matmul", (2, 2, 2)), ("det", 3), ("lu", 3)):
        f = diff_map(name, shape, p)
        H = Lattice.standard(f.in_dim, p, shift)
        fails = []
        for i in range(100):
            rng = rng_for(SEED, "acceptance-first-order-" + name, i)
            v0 = [rng.randrange(p ** 64) for _ in range(f.in_dim)]
            try:
                v = first_order_check(f, v0, H, shift + guard, samples, i, p)
            except PAdicError:
                continue  # LU undefined at this base point
            if not v.passed:
                fails.append(i)
        failing[name] = fails
        summary.append("%s %d/100 base points failed" % (name, len(fails)))
    ok = not any(failing.values())
    detail = "; ".join(summary)
    if not ok:
        detail += " (failing base points: %s)" % {k: v for k, v in failing.items() if v}
    verdict(8, "first-order precision property", ok, detail, time.time() - t, 300)


# 9 ------------------------------------------------------------------------------------

def test_c09_series_composition_bound():
    t = time.time()
    rng = random.Random("acceptance:9")
    bad = []
    for i in range(200):
        p = rng.choice([2, 3, 5])
        f = [0] + [rng.randrange(-p ** 6, p ** 6) for _ in range(8)]
        g = [rng.randrange(-p ** 6, p ** 6) for _ in range(9)]
        ok, r = composition_bound_check(f, g, 8, p)
        if not ok:
            bad.append((i, r))
    verdict(9, "composed series coefficient bound", not bad,
            "%d violations in 200 pairs" % len(bad), time.time() - t, 60)


# 10 -----------------------------------------------------------------------------------

def _random_subspace(rng, n, p):
    d = rng.randrange(0, n + 1)
    if d == 0:
        return zero_subspace(n, p)
    return subspace_from_generators(
        PMatrix.from_rows([[rng.randrange(-p ** 4, p ** 4) for _ in range(n)] for _ in range(d)], p))


def test_c10_subspace_duality_laws():
    t = time.time()
    rng = random.Random("acceptance:10")
    bad = {"duality": 0, "dimension": 0, "round trip": 0}
    for _ in range(1000):
        p = rng.choice([2, 3])
        n = rng.randrange(1, 6)
        V1, V2 = _random_subspace(rng, n, p), _random_subspace(rng, n, p)
        s, i = subspace_sum(V1, V2), intersection(V1, V2)
        if not orthogonal(s).same_space(intersection(orthogonal(V1), orthogonal(V2))):
            bad["duality"] += 1
        if s.dim + i.dim != V1.dim + V2.dim:
            bad["dimension"] += 1
        if from_dual(to_dual(V1)) != V1 or from_dual(to_dual(V2)) != V2:
            bad["round trip"] += 1
    verdict(10, "subspace duality and dimension laws", not any(bad.values()),
            "failures in 1000 pairs: %s" % bad, time.time() - t, 120)


# 11 -----------------------------------------------------------------------------------

def test_c11_worker_determinism():
    t = time.time()
    configs = [ExperimentConfig("matmul", chain=20, trials=24, seed=11),
               ExperimentConfig("lu", dim=3, trials=24, seed=11),
               ExperimentConfig("grassmann", chain=5, trials=24, seed=11),
               ExperimentConfig("charpoly-stats", dim=3, trials=24, seed=11)]
    diffs = []
    for cfg in configs:
        a, b = run_experiment(cfg, workers=1), run_experiment(cfg, workers=8)
        for fmt in ("csv", "json", "table"):
            if report_serialize(a, fmt) != report_serialize(b, fmt):
                diffs.append("%s/%s" % (cfg.experiment, fmt))
    verdict(11, "reports identical under 1 and 8 workers", not diffs,
            "differences: %s" % (diffs or "none"), time.time() - t, 600)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

