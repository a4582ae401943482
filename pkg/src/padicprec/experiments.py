"""Seeded precision-loss experiments.

Each trial draws its randomness from its own stream, derived from
``(seed, experiment, trial index)``, so trials can run in any order or in
parallel; results are collected by index and averaged with exact
rational arithmetic before any rounding.
"""

import csv
import io
import json
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .errors import InvariantViolation, PAdicError, PrecisionExhausted
from .grassmann import Subspace, _apply
from .lattice import charpoly_precision_lattice, diffused_digits
from .linalg import PMatrix, det_fractions, lu_jacobian, mat_mul
from .padic import PAdic, ppow, val_int, val_rational
from .polygons import matrix_polygons, sandwich_violations

log = logging.getLogger(__name__)

ENTRY_DIGITS = 64


def rng_for(seed, stream, index):
    return random.Random("padicprec:%d:%s:%d" % (seed, stream, index))


def _random_rows(rng, d, p, digits=ENTRY_DIGITS):
    m = ppow(p, digits)
    return [[rng.randrange(m) for _ in range(d)] for _ in range(d)]


def random_integral_matrix(d, p, seed, index, stream="matrix"):
    """d x d matrix with entries uniform modulo p^64 (exact backend)."""
    return PMatrix.from_rows(_random_rows(rng_for(seed, stream, index), d, p), p)


# --- configuration and reports ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str
    prime: int = 2
    dim: int = 2
    chain: int = 10
    trials: int = 100
    seed: int = 0
    precision: int = None
    det_valuation: int = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @property
    def working_precision(self):
        if self.precision is not None:
            return self.precision
        return 64 + 4 * self.chain


CSV_COLUMNS = ["experiment", "prime", "dim", "chain", "trials", "seed", "precision",
               "method", "mean", "stddev", "n"]


@dataclass
class StatsReport:
    config: dict
    rows: list = field(default_factory=list)   # dicts: method, mean (Fraction), stddev, n
    notes: dict = field(default_factory=dict)

    def row(self, method):
        return next(r for r in self.rows if r["method"] == method)

    def mean(self, method):
        return self.row(method)["mean"]

    def to_json_obj(self):
        return {
            "config": self.config,
            "rows": [{"method": r["method"], "mean": str(r["mean"]), "stddev": r["stddev"],
                      "n": r["n"]} for r in self.rows],
            "notes": self.notes,
        }

    @classmethod
    def from_json_obj(cls, obj):
        rows = [{"method": r["method"], "mean": Fraction(r["mean"]), "stddev": r["stddev"],
                 "n": r["n"]} for r in obj["rows"]]
        return cls(obj["config"], rows, obj.get("notes", {}))

    def __eq__(self, other):
        return isinstance(other, StatsReport) and self.to_json_obj() == other.to_json_obj()


def summarize(method, values):
    """Exact mean and population standard deviation of a list of rationals."""
    values = [Fraction(v) for v in values]
    n = len(values)
    if n == 0:
        return {"method": method, "mean": Fraction(0), "stddev": 0.0, "n": 0}
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return {"method": method, "mean": mean, "stddev": round(math.sqrt(var), 6), "n": n}


def _fmt(x):
    return "%.6f" % float(x)


def report_serialize(report, fmt="csv"):
    """Deterministic bytes for a report (csv, json or table)."""
    if fmt == "json":
        return (json.dumps(report.to_json_obj(), sort_keys=True, indent=2) + "\n").encode()
    cfg = report.config
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in report.rows:
            w.writerow([cfg.get("experiment"), cfg.get("prime"), cfg.get("dim"), cfg.get("chain"),
                        cfg.get("trials"), cfg.get("seed"), cfg.get("precision"),
                        r["method"], _fmt(r["mean"]), _fmt(r["stddev"]), r["n"]])
        return buf.getvalue().encode()
    if fmt == "table":
        lines = ["%s  p=%s dim=%s chain=%s trials=%s seed=%s precision=%s" % (
            cfg.get("experiment"), cfg.get("prime"), cfg.get("dim"), cfg.get("chain"),
            cfg.get("trials"), cfg.get("seed"), cfg.get("precision"))]
        lines.append("%-22s %12s %12s %8s" % ("method", "mean", "stddev", "n"))
        for r in report.rows:
            mean = "%.3f" % float(r["mean"])
            if r["method"] == "diffused" and cfg.get("experiment") == "grassmann":
                mean += " x 2"
            lines.append("%-22s %12s %12.3f %8d" % (r["method"], mean, r["stddev"], r["n"]))
        for k in sorted(report.notes):
            lines.append("# %s: %s" % (k, report.notes[k]))
        return ("\n".join(lines) + "\n").encode()
    raise ValueError("unknown format %r" % fmt)


def report_deserialize(data):
    return StatsReport.from_json_obj(json.loads(data))


# --- driver -----------------------------------------------------------------------------

def _run_trials(trial_fn, cfg, workers):
    d = asdict(cfg)
    idx = range(cfg.trials)
    if workers is None or workers <= 1:
        return [trial_fn(d, i) for i in idx]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(trial_fn, [d] * cfg.trials, idx, chunksize=max(1, cfg.trials // (4 * workers))))


def _config_dict(cfg):
    d = asdict(cfg)
    d["precision"] = cfg.working_precision
    return d


def _collect(cfg, results, methods):
    ok = [r for r in results if "error" not in r]
    bad = [r for r in results if "error" in r]
    rep = StatsReport(_config_dict(cfg))
    for m in methods:
        rep.rows.append(summarize(m, [r[m] for r in ok]))
    if bad:
        rep.notes["discarded"] = len(bad)
        rep.notes["discarded_reasons"] = sorted({r["error"] for r in bad})
        for r in bad:
            log.warning("trial %d discarded: %s", r["index"], r["error"])
    return rep, ok


# --- Algorithm 1: product of matrices --------------------------------------------------

def _echelon_mod(gens, dim, p, R):
    """A basis (dim vectors) of span(gens) + p^R O^dim, by elimination mod p^R."""
    mod = ppow(p, R)
    gens = [[x % mod for x in g] for g in gens]
    gens = [g for g in gens if any(g)]
    basis = []
    for c in range(dim):
        best, bv = None, R
        for k, g in enumerate(gens):
            x = g[c]
            if x:
                v = val_int(x, p)
                if v < bv:
                    bv, best = v, k
        if best is None:
            basis.append([mod if t == c else 0 for t in range(dim)])
            continue
        piv = gens.pop(best)
        pk = ppow(p, bv)
        u = piv[c] // pk
        rest = []
        for g in gens:
            x = g[c]
            if x:
                # u g - (x / p^bv) piv: scaling g by the unit u keeps the lattice
                f = x // pk
                g = [(u * a - f * b) % mod for a, b in zip(g, piv)]
                if not any(g):
                    continue
            rest.append(g)
        gens = rest
        basis.append(piv)
    return basis


def _matmul_int(A, B, mod):
    n = len(B)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) % mod for j in range(len(B[0]))]
            for i in range(len(A))]


def matmul_trial(cfg, index):
    p, d, n = cfg["prime"], cfg["dim"], cfg["chain"]
    N = cfg["precision"] if cfg["precision"] is not None else 64 + 4 * n
    rng = rng_for(cfg["seed"], "matmul", index)
    Ms = [_random_rows(rng, d, p) for _ in range(n)]
    try:
        coord = _matmul_coordinatewise(Ms, p, d, N)
        lat = matmul_lattice_loss(Ms, p, d, N)
    except PrecisionExhausted as e:
        return {"index": index, "error": "PrecisionExhausted: %s" % e}
    return {"index": index, "coordinate": coord, "lattice": lat}


def _check_matmul(results):
    for r in results:
        if "error" not in r and r["lattice"] > r["coordinate"]:
            raise InvariantViolation("trial %d: lattice loss %d exceeds coordinate-wise loss %d"
                                     % (r["index"], r["lattice"], r["coordinate"]))


def _matmul_coordinatewise(Ms, p, d, N):
    one, zero = PAdic.one(p), PAdic.zero(p)
    P = [[one if i == j else zero for j in range(d)] for i in range(d)]
    for M in Ms:
        T = [[PAdic.exact(x, p).with_precision(N) for x in r] for r in M]
        P = mat_mul(P, T, p)
    x = P[0][0]
    if not x.is_nonzero:
        raise PrecisionExhausted("top-left entry is O(%d^%d)" % (p, x.precision))
    # relative digits lost with respect to the inputs' N
    return N - x.relative_precision


def matmul_lattice_loss(Ms, p, d, R):
    """Lattice loss at the top-left entry, tracking only the first row.

    Right multiplication acts row by row, so the projection of H_i onto the
    first row obeys K_(i+1) = K_i M_(i+1) + p^v(row 0 of P_i) O^d.  Works on
    H / p^N (the recurrence is homogeneous) modulo p^R.
    """
    mod = ppow(p, R)
    r = [int(j == 0) for j in range(d)]
    basis = []
    for M in Ms:
        gens = [[sum(b[k] * M[k][j] for k in range(d)) % mod for j in range(d)] for b in basis]
        c = min((val_int(x, p) for x in r if x), default=R)
        gens += [[ppow(p, c) if j == t else 0 for j in range(d)] for t in range(d)]
        basis = _echelon_mod(gens, d, p, R)
        r = [sum(r[k] * M[k][j] for k in range(d)) % mod for j in range(d)]
    return _top_left_loss(r[0], basis, p, R)


def _top_left_loss(x, basis, p, R):
    m = min(val_int(b[0], p) if b[0] else R for b in basis)
    if not x or m >= R:
        raise PrecisionExhausted("working precision %d too small" % R)
    return val_int(x, p) - m


def matmul_lattice_loss_full(Ms, p, d, R):
    """Same loss from the full d^2-dimensional lattice (reference implementation).

    H_1 = M_d(O), H_(i+1) = H_i M_(i+1) + P_i M_d(O), computed modulo p^R.
    """
    mod = ppow(p, R)
    dim = d * d
    P = [[int(i == j) for j in range(d)] for i in range(d)]
    basis = []
    for M in Ms:
        gens = []
        for b in basis:
            B = [b[i * d:(i + 1) * d] for i in range(d)]
            gens.append([x for r in _matmul_int(B, M, mod) for x in r])
        # P * E_jk: column k receives column j of P
        for j in range(d):
            for k in range(d):
                gens.append([P[i][j] if c == k else 0 for i in range(d) for c in range(d)])
        basis = _echelon_mod(gens, dim, p, R)
        P = _matmul_int(P, M, mod)
    return _top_left_loss(P[0][0] % mod, basis, p, R)


def run_matmul_experiment(cfg, workers=1):
    res = _run_trials(matmul_trial, cfg, workers)
    _check_matmul(res)
    rep, _ = _collect(cfg, res, ["coordinate", "lattice"])
    return rep


# --- LU ---------------------------------------------------------------------------------

def lu_trial(cfg, index):
    p, d = cfg["prime"], cfg["dim"]
    rng = rng_for(cfg["seed"], "lu", index)
    resampled = 0
    while True:
        M = PMatrix.from_rows(_random_rows(rng, d, p), p)
        try:
            J = lu_jacobian(M).to_fractions()
            break
        except PAdicError:
            resampled += 1
    n2 = d * d
    # lower-triangular in the interleaved order: the determinant is the diagonal product
    lat = -sum(val_rational(J[u][u], p) for u in range(n2))
    coord = -sum(min(val_rational(x, p) for x in J[u]) for u in range(n2))
    return {"index": index, "lattice": lat, "coordinate": coord, "diffused": coord - lat,
            "resampled": resampled}


def run_lu_experiment(cfg, workers=1):
    res = _run_trials(lu_trial, cfg, workers)
    rep, ok = _collect(cfg, res, ["coordinate", "lattice", "diffused"])
    rep.notes["resampled"] = sum(r["resampled"] for r in ok)
    return rep


# --- Algorithm 2: subspaces --------------------------------------------------------------

def _pm(rows, p):
    return PMatrix.from_rows(rows, p)


def grassmann_step(L, tangents, mats):
    """``(a(L) + b(L)) cap (c(L) + d(L))`` carrying chart tangents along."""
    a, b, c, d = mats
    A, dA = _apply("DI", (a, L), [(None, t) for t in tangents])
    B, dB = _apply("DI", (b, L), [(None, t) for t in tangents])
    C, dC = _apply("DI", (c, L), [(None, t) for t in tangents])
    D, dD = _apply("DI", (d, L), [(None, t) for t in tangents])
    V1, d1 = _apply("SUM", (A, B), list(zip(dA, dB)))
    V2, d2 = _apply("SUM", (C, D), list(zip(dC, dD)))
    return _apply("INT", (V1, V2), list(zip(d1, d2)))


def grassmann_walk(cfg, index):
    """Run the seeded chain of steps; returns (subspace, tangents, precision)."""
    p, n = cfg["prime"], cfg["chain"]
    N = cfg["precision"] if cfg["precision"] is not None else 64 + 4 * n
    rng = rng_for(cfg["seed"], "grassmann", index)
    one, zero = PAdic.one(p), PAdic.zero(p)
    L = Subspace.from_chart(p, 3, (0,), [[PAdic.inexact_zero(p, N), PAdic.inexact_zero(p, N)]])
    tangents = [[[one, zero]], [[zero, one]]]
    for _ in range(n):
        mats = [_pm(_random_rows(rng, 3, p), p) for _ in range(4)]
        L, tangents = grassmann_step(L, tangents, mats)
        if L.dim != 1:
            raise PAdicError("intersection has dimension %d" % L.dim)
    return L, tangents, N


def grassmann_trial(cfg, index):
    try:
        L, tangents, N = grassmann_walk(cfg, index)
    except PAdicError as e:
        return {"index": index, "error": "%s: %s" % (type(e).__name__, e)}
    X = L.chart_vector()
    coord = Fraction(sum(N - x.precision for x in X), len(X))
    # columns of J are the tangents: J[i][j] = tangents[j] flattened at i
    J = [[t[0][i] for t in tangents] for i in range(len(X))]
    mins = [min(x.valuation for x in row) for row in J]
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    dv = det.valuation
    if dv >= N or any(m >= N for m in mins):
        return {"index": index, "error": "PrecisionExhausted: Jacobian not certified"}
    projected = Fraction(-sum(mins), len(X))
    diffused_total = dv - sum(mins)       # length(H0/H) of the output lattice
    return {"index": index, "coordinate": coord, "projected": projected,
            "diffused": Fraction(-diffused_total, 2 * len(X)),
            "volume": Fraction(-dv, len(X)), "chart": list(L.I),
            "gain": int(diffused_total > 0)}


def run_grassmann_experiment(cfg, workers=1):
    if cfg.chain == 0:
        rep = StatsReport(_config_dict(cfg))
        for m in ("coordinate", "projected", "diffused", "volume"):
            rep.rows.append(summarize(m, [0] * cfg.trials))
        return rep
    res = _run_trials(grassmann_trial, cfg, workers)
    rep, ok = _collect(cfg, res, ["coordinate", "projected", "diffused", "volume"])
    rep.rows.append(summarize("diffused_negative_fraction", [r["gain"] for r in ok]))
    return rep


# --- characteristic polynomial statistics ----------------------------------------------

def _draw_charpoly_matrix(rng, d, p, target):
    if target is None:
        return _random_rows(rng, d, p), False
    for _ in range(10 ** 4):
        M = _random_rows(rng, d, p)
        if val_rational(det_fractions(M), p) == target:
            return M, False
    # fallback: rescale the first row so that the determinant valuation hits the target
    while True:
        M = _random_rows(rng, d, p)
        v = val_rational(det_fractions(M), p)
        if v <= target:
            M[0] = [x * ppow(p, target - v) for x in M[0]]
            return M, True


def charpoly_trial(cfg, index):
    p, d = cfg["prime"], cfg["dim"]
    rng = rng_for(cfg["seed"], "charpoly", index)
    rows, fallback = _draw_charpoly_matrix(rng, d, p, cfg.get("det_valuation"))
    M = PMatrix.from_rows(rows, p)
    NP, HP, PP = matrix_polygons(M)
    T1 = HP.translate(1)
    equal = all(PP(x) == T1(x) for x in range(d))
    bad = sandwich_violations(M, (NP, HP, PP))
    try:
        diff = diffused_digits(charpoly_precision_lattice(M))
    except PAdicError as e:
        return {"index": index, "error": "%s: %s" % (type(e).__name__, e)}
    # empirical: is PP bounded by T_1(NP)?  (reported, never asserted)
    T1NP = NP.translate(1)
    above = any(PP(x) > T1NP(x) for x in range(max(0, int(T1NP.left)), d))
    return {"index": index, "pp_equals_t1hp": int(equal), "diffused_positive": int(diff > 0),
            "diffused": diff, "sandwich_violations": len(bad), "pp_above_t1np": int(above),
            "fallback": int(fallback)}


def run_charpoly_stats(cfg, workers=1):
    res = _run_trials(charpoly_trial, cfg, workers)
    rep, ok = _collect(cfg, res, ["pp_equals_t1hp", "diffused_positive", "diffused",
                                  "sandwich_violations", "pp_above_t1np"])
    rep.notes["fallback_trials"] = sum(r["fallback"] for r in ok)
    total = sum(r["sandwich_violations"] for r in ok)
    rep.notes["sandwich_violations_total"] = total
    if total:
        bad = [r["index"] for r in ok if r["sandwich_violations"]]
        raise InvariantViolation("sandwich violated in trials %s" % bad[:10])
    return rep


RUNNERS = {
    "matmul": run_matmul_experiment,
    "lu": run_lu_experiment,
    "grassmann": run_grassmann_experiment,
    "charpoly-stats": run_charpoly_stats,
}


def run_experiment(cfg, workers=1):
    return RUNNERS[cfg.experiment](cfg, workers)

