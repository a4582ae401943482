"""Command line entry point: ``padicprec <subcommand>``.

Exit status: 0 on success, 2 when a checked property fails, 1 on bad usage
or unreadable input.
"""

import argparse
import csv
import io
import json
import logging
import sys

from .errors import InvariantViolation, PAdicError
from .experiments import ExperimentConfig, rng_for, report_serialize, run_experiment
from .grassmann import Subspace, op_result, orthogonal, propagate_precision
from .lattice import (Lattice, charpoly_precision_lattice, det_precision, diff_map,
                      diffused_digits, first_order_check, lu_precision_report)
from .linalg import PMatrix, comatrix_charpoly, determinant, lu_decompose, smith_decompose
from .padic import INF
from .polygons import composition_bound_check, matrix_polygons

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


def _read_json(args):
    if not args.input:
        raise UsageError("--input FILE is required")
    try:
        with open(args.input) as fh:
            return json.load(fh)
    except (OSError, ValueError) as e:
        raise UsageError("cannot read %s: %s" % (args.input, e)) from None


def _matrix(args):
    obj = _read_json(args)
    if args.prime is not None:
        obj.setdefault("p", args.prime)
    if "p" not in obj:
        raise UsageError("matrix JSON needs a prime ('p' or --prime)")
    try:
        return PMatrix.from_json_obj(obj)
    except (KeyError, ValueError, TypeError) as e:
        raise UsageError("bad matrix JSON: %s" % e) from None


def _emit(args, data):
    if isinstance(data, str):
        data = data.encode()
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _dump(args, obj):
    """JSON for json/csv requests; a short key: value listing for tables."""
    if args.format == "table":
        lines = ["%s: %s" % (k, json.dumps(v)) for k, v in obj.items()]
        return "\n".join(lines) + "\n"
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _sigma_json(sigma):
    return ["inf" if s == INF else s for s in sigma]


# --- library subcommands ----------------------------------------------------------------

def cmd_smith(args):
    M = _matrix(args)
    S = smith_decompose(M)
    out = {"sigma": _sigma_json(S.sigma), "U": S.U.to_json_obj(),
           "Delta": S.Delta.to_json_obj(), "V": S.V.to_json_obj()}
    _emit(args, _dump(args, out))


def cmd_lu(args):
    M = _matrix(args)
    L, U = lu_decompose(M)
    out = {"L": L.to_json_obj(), "U": U.to_json_obj()}
    if M.is_exact:
        out["precision_report"] = json.loads(lu_precision_report(M).to_json())
    _emit(args, _dump(args, out))


def cmd_det(args):
    M = _matrix(args)
    out = {"det": str(determinant(M))}
    if M.is_exact:
        out["det_precision"] = det_precision(M)
    _emit(args, _dump(args, out))


def cmd_charpoly(args):
    M = _matrix(args)
    _, chi = comatrix_charpoly(M)
    out = {"chi": [str(c) for c in chi]}
    H = charpoly_precision_lattice(M)
    out["precision_lattice"] = H.to_json_obj()
    out["diffused"] = diffused_digits(H)
    _emit(args, _dump(args, out))


def cmd_polygon(args):
    M = _matrix(args)
    NP, HP, PP = matrix_polygons(M)
    polys = {"newton": NP, "hodge": HP, "precision": PP}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["polygon", "x", "y"])
        for name, P in polys.items():
            for label, x, y in P.csv_rows(name):
                w.writerow([label, str(x), str(y)])
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dump(args, {k: P.to_json_obj() for k, P in polys.items()}))


_OPS = {"sum": "SUM", "intersection": "INT", "direct_image": "DI", "inverse_image": "II"}


def cmd_subspace(args):
    obj = _read_json(args)
    op = obj.get("op")
    try:
        if op == "orthogonal":
            W = orthogonal(Subspace.from_json_obj(obj["V"]))
        elif op in ("sum", "intersection"):
            base = (Subspace.from_json_obj(obj["V1"]), Subspace.from_json_obj(obj["V2"]))
            W = propagate_precision(_OPS[op], base)
        elif op in ("direct_image", "inverse_image"):
            f = PMatrix.from_json_obj(obj["f"])
            V = Subspace.from_json_obj(obj["V"])
            W = propagate_precision(_OPS[op], (f, V)) if V.precision else op_result(_OPS[op], (f, V))
        else:
            raise UsageError("unknown subspace op %r" % op)
    except KeyError as e:
        raise UsageError("missing field %s" % e) from None
    _emit(args, _dump(args, W.to_json_obj()))


# --- experiments --------------------------------------------------------------------------

def cmd_experiment(args):
    cfg = ExperimentConfig(args.kind, prime=args.prime or 2, dim=args.dim, chain=args.chain,
                           trials=args.trials, seed=args.seed, precision=args.precision,
                           det_valuation=args.det_valuation)
    rep = run_experiment(cfg, workers=args.workers)
    _emit(args, report_serialize(rep, args.format))


# --- checks ----------------------------------------------------------------------------

def _map_shape(name, dim):
    return (dim, dim, dim) if name == "matmul" else dim


def cmd_first_order(args):
    p = args.prime or 2
    shape = _map_shape(args.map, args.dim)
    fmap = diff_map(args.map, shape, p)
    if args.input:
        points = [[x for r in _matrix(args).to_fractions() for x in r]]
    else:
        points = []
        for i in range(args.trials):
            rng = rng_for(args.seed, "first-order-" + args.map, i)
            points.append([rng.randrange(p ** 64) for _ in range(fmap.in_dim)])
    H = Lattice.standard(fmap.in_dim, p, args.shift)
    failed = 0
    lines = []
    for i, v0 in enumerate(points):
        v = first_order_check(fmap, v0, H, args.shift + args.guard, args.samples, args.seed + i, p)
        failed += not v.passed
        lines.append("%d\t%s\t%d/%d failures\tcosets %d/%d" % (
            i, "pass" if v.passed else "FAIL", v.failures, v.samples, v.cosets_hit, v.cosets_total))
    lines.append("%s: %d of %d base points failed" % (args.map, failed, len(points)))
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_FAIL if failed else EXIT_OK


def random_series_pair(rng, order, p, digits=6):
    """Integral truncated series f (no constant term) and g."""
    m = p ** digits
    f = [0] + [rng.randrange(m) for _ in range(order)]
    g = [rng.randrange(m) for _ in range(order + 1)]
    return f, g


def cmd_composition(args):
    p = args.prime or 2
    bad = []
    for i in range(args.trials):
        f, g = random_series_pair(rng_for(args.seed, "composition", i), args.order, p)
        ok, r = composition_bound_check(f, g, args.order, p)
        if not ok:
            bad.append((i, r))
    msg = "%d of %d pairs violate the bound" % (len(bad), args.trials)
    if bad:
        msg += "; first: trial %d at degree %d" % bad[0]
    _emit(args, msg + "\n")
    return EXIT_FAIL if bad else EXIT_OK


# --- parser -----------------------------------------------------------------------------

def _common(sp):
    sp.add_argument("--prime", "-p", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--chain", type=int, default=10)
    sp.add_argument("--precision", type=int, default=None)
    sp.add_argument("--format", choices=["csv", "json", "table"], default="json")
    sp.add_argument("--input", metavar="FILE")
    sp.add_argument("--output", metavar="FILE")


def build_parser():
    ap = argparse.ArgumentParser(prog="padicprec", description="p-adic precision tools")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, doc in [("smith", cmd_smith, "Smith decomposition of a matrix"),
                          ("lu", cmd_lu, "LU factorization"),
                          ("det", cmd_det, "determinant with tracked precision"),
                          ("charpoly", cmd_charpoly, "characteristic polynomial and its precision lattice"),
                          ("polygon", cmd_polygon, "Newton, Hodge and precision polygons"),
                          ("subspace", cmd_subspace, "subspace operations from a JSON request")]:
        sp = sub.add_parser(name, help=doc)
        _common(sp)
        sp.set_defaults(func=fn)

    ex = sub.add_parser("experiment", help="seeded precision-loss experiments")
    ex.add_argument("kind", choices=["matmul", "lu", "grassmann", "charpoly-stats"])
    _common(ex)
    ex.set_defaults(func=cmd_experiment, format="csv")
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--det-valuation", type=int, default=None,
                    help="charpoly-stats: only keep matrices with this determinant valuation")

    ck = sub.add_parser("check", help="property checks")
    cks = ck.add_subparsers(dest="check", required=True)
    fo = cks.add_parser("first-order", help="sampled first-order precision property")
    _common(fo)
    fo.add_argument("--map", choices=["matmul", "det", "lu", "charpoly"], default="det")
    fo.add_argument("--shift", type=int, default=10, help="H = p^shift * O^dim")
    fo.add_argument("--guard", type=int, default=4)
    fo.add_argument("--samples", type=int, default=20)
    fo.set_defaults(func=cmd_first_order)
    cb = cks.add_parser("composition-bound", help="valuation bound for composed series")
    _common(cb)
    cb.add_argument("--order", type=int, default=8)
    cb.set_defaults(func=cmd_composition, trials=200)
    return ap


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        code = args.func(args)
    except UsageError as e:
        print("padicprec: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, AssertionError) as e:
        print("padicprec: invariant failed: %s" % e, file=sys.stderr)
        return EXIT_FAIL
    except PAdicError as e:
        print("padicprec: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        print("padicprec: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
