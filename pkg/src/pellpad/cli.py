"""Command line entry point: `pellpad <command> ...`.

Exit codes: 0 success, 1 certified mismatch, 2 usage error, 3 precision exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import __version__
from .bigreal import PrecisionExhausted, PrecisionPolicy
from .contfrac import expand, sqrt_cf
from .padovan import binet_residual, padovan, representations
from .pell import EqKind, Family, fundamental, recover_d

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj, fmt: str = "json", out=None) -> None:
    out = out or sys.stdout
    if fmt == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        if rows:
            w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
        return
    json.dump(obj, out, indent=2, default=str)
    out.write("\n")


def _kind(text: str) -> EqKind:
    try:
        return EqKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _family(text: str) -> Family:
    try:
        return Family(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"family must be unit or quad, not {text!r}")


def _convention(text: str):
    from .pipeline import Convention

    try:
        return Convention(text)
    except ValueError:
        raise argparse.ArgumentTypeError("convention must be reference or certified")


# -- padovan ---------------------------------------------------------------------

def cmd_padovan(args) -> int:
    if args.action == "value":
        if args.n < 0:
            raise UsageError("n must be nonnegative")
        print(padovan(args.n))
    elif args.action == "reps":
        _emit({"x": str(args.n), "reps": [list(r) for r in representations(args.n, args.nmax)]})
    else:
        e = binet_residual(args.n, shift=args.shift)
        _emit({"n": args.n, "shift": args.shift, "residual": e.e_n.to_string(15),
               "bound": e.bound.to_string(15), "holds": e.holds})
    return EXIT_OK


# -- pell --------------------------------------------------------------------------

def cmd_pell(args) -> int:
    if args.action == "fundamental":
        if args.d is None:
            raise UsageError("-d is required")
        f = fundamental(args.d, args.family)
        _emit({"d": str(f.d), "family": f.family.value, "x1": str(f.x1), "y1": str(f.y1), "eps": f.eps})
    else:
        if args.x1 is None:
            raise UsageError("--x1 is required")
        pairs = recover_d(args.x1, args.family, args.sign)
        _emit({"x1": str(args.x1), "sign": args.sign, "d_y": [[str(d), str(y)] for d, y in pairs]})
    return EXIT_OK


# -- cf ----------------------------------------------------------------------------

def cmd_cf(args) -> int:
    if args.action == "sqrt":
        cf = sqrt_cf(args.d)
        _emit({"d": str(args.d), "a0": cf.quotients[0], "period": list(cf.period)})
        return EXIT_OK
    from .pipeline import _tau

    cf = expand(_tau(args.family), args.terms, source="tau")
    _emit({"family": args.family.value, "quotients": list(cf.quotients)})
    return EXIT_OK


# -- reduce ------------------------------------------------------------------------

def cmd_reduce(args) -> int:
    from . import pipeline as pl
    from .reduction import gl_resolve

    if args.action == "gl":
        b = gl_resolve(args.r, Fraction(args.H))
        _emit({"r": args.r, "H": args.H, "bound": b.to_string(12)})
    elif args.action == "bd":
        row = pl.bd_row(args.family, (args.x1, args.eps), args.convention, int(Fraction(args.M)),
                        int(Fraction(args.M2 or args.M)))
        _emit({"unit": [args.x1, args.eps], "b_t": row["b_t"], "n2": row["n2"], "argmax_w": row["argmax_w"],
               "homogeneous_w": row["homogeneous_w"]})
    else:
        E = pl.error_constants(args.family, args.convention)
        o = pl.gamma4_lll(args.family, args.lam, int(Fraction(args.M)), E.coef_bound, args.base)
        _emit({"lambda": args.lam, "lower_bound": o.certified_bound.to_string(8), "inputs": o.inputs})
    return EXIT_OK


# -- pipeline ------------------------------------------------------------------------

def _certificate(res: dict) -> dict:
    from .pipeline import PREC

    return {"schema": 1, "tool_version": __version__, "precision_bits": PREC,
            "eq_kind": res["stages"][0].eq_kind.slug, "convention": res["convention"], "sample": res["sample"],
            "box": {k: str(v) for k, v in res["box"].items()},
            "candidates": [[str(x), e] for x, e in res["candidates"]],
            "stages": [s.as_dict() for s in res["stages"]],
            "solutions": {str(d): [r.as_dict() for r in recs] for d, recs in sorted(res["solutions"].items())},
            "report": res["report"].as_dict()}


def cmd_pipeline(args) -> int:
    from . import pipeline as pl

    if args.action == "certify":
        res = pl.certify(args.eq, args.convention, sample=args.sample, strict=False)
        cert = _certificate(res)
        if args.out:
            with open(args.out, "w") as fh:
                _emit(cert, out=fh)
        else:
            _emit(cert)
        return EXIT_OK if res["report"].ok else EXIT_MISMATCH
    cert = pl.final_certificate(EqKind(args.family, 1), args.convention, sample=True)
    _emit(cert.symbols["rows"], args.format)
    return EXIT_OK


# -- search ---------------------------------------------------------------------------

def _records(found) -> list:
    return [r.as_dict() for d in sorted(found) for r in found[d]]


def cmd_search(args) -> int:
    from .search import compare_with_stated, scan_final, small_d_sweep

    if args.action == "sweep":
        found = small_d_sweep(args.eq or EqKind(Family.UNIT, 1), args.dmax, args.kmax, args.nmax)
        _emit(_records(found), args.format)
        return EXIT_OK
    if not args.cert:
        raise UsageError("--cert is required")
    cert = _load(args.cert)
    kind = EqKind.parse(cert["eq_kind"])
    if args.eq is not None and args.eq != kind:
        raise UsageError(f"certificate is for {kind.slug}, not {args.eq.slug}")
    box = {k: int(v) for k, v in cert["box"].items()}
    found = scan_final(kind, box, _candidates(cert, kind.family))
    _emit(_records(found), args.format)
    return EXIT_OK if compare_with_stated(kind, found).ok else EXIT_MISMATCH


def _candidates(cert: dict, family: Family) -> list:
    from .pell import unit_value

    return [unit_value(int(x), family, e) for x, e in cert.get("candidates", [])]


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read certificate {path}: {exc}")


# -- verify ------------------------------------------------------------------------------

def cmd_verify(args) -> int:
    """Re-run the search in the stored box and compare with the stored report."""
    from .search import compare_with_stated, scan_final

    cert = _load(args.cert)
    kind = EqKind.parse(cert["eq_kind"])
    box = {k: int(v) for k, v in cert["box"].items()}
    found = scan_final(kind, box, _candidates(cert, kind.family))
    report = compare_with_stated(kind, found).as_dict()
    same = report == cert["report"] and _records(found) == [r for recs in cert["solutions"].values() for r in recs]
    _emit({"eq_kind": kind.slug, "reproduced": same, "ok": report["ok"]})
    return EXIT_OK if same and report["ok"] else EXIT_MISMATCH


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pellpad", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pellpad {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("padovan", help="Padovan numbers and sums")
    q.add_argument("action", choices=["value", "reps", "binet"])
    q.add_argument("n", type=int)
    q.add_argument("--nmax", type=int, default=500)
    q.add_argument("--shift", type=int, default=1)
    q.set_defaults(func=cmd_padovan)

    q = sub.add_parser("pell", help="fundamental solutions")
    q.add_argument("action", choices=["fundamental", "recover"])
    q.add_argument("-d", type=int)
    q.add_argument("--x1", type=int)
    q.add_argument("--sign", type=int, choices=[1, -1], default=1)
    q.add_argument("--family", type=_family, default=Family.UNIT)
    q.set_defaults(func=cmd_pell)

    q = sub.add_parser("cf", help="continued fractions")
    q.add_argument("action", choices=["tau", "sqrt"])
    q.add_argument("-d", type=int)
    q.add_argument("--family", type=_family, default=Family.UNIT)
    q.add_argument("--terms", type=int, default=24)
    q.set_defaults(func=cmd_cf)

    q = sub.add_parser("reduce", help="single reduction steps")
    q.add_argument("action", choices=["gl", "bd", "lll"])
    q.add_argument("--r", type=int, default=10)
    q.add_argument("--H", default="4.64e137")
    q.add_argument("--family", type=_family, default=Family.UNIT)
    q.add_argument("--convention", type=_convention, default="reference")
    q.add_argument("--x1", type=int, default=2)
    q.add_argument("--eps", type=int, choices=[1, -1], default=1)
    q.add_argument("--M", default="5e42")
    q.add_argument("--M2")
    q.add_argument("--lam", type=int, default=100)
    q.add_argument("--base", type=int, default=20)
    q.set_defaults(func=cmd_reduce)

    q = sub.add_parser("pipeline", help="bounds, reductions and certificates")
    q.add_argument("action", choices=["certify", "tables"])
    q.add_argument("--eq", type=_kind, default=EqKind(Family.UNIT, 1))
    q.add_argument("--family", type=_family, default=Family.UNIT)
    q.add_argument("--convention", type=_convention, default="reference")
    q.add_argument("--sample", action="store_true", help="sample the lattice sweeps (CI mode)")
    q.add_argument("--out")
    q.add_argument("--format", choices=["json", "csv"], default="json")
    q.set_defaults(func=cmd_pipeline)

    q = sub.add_parser("search", help="searches in the final box")
    q.add_argument("action", choices=["final", "sweep"])
    q.add_argument("--eq", type=_kind, help="defaults to unit-plus, or to the certificate's equation")
    q.add_argument("--cert")
    q.add_argument("--dmax", type=int, default=1000)
    q.add_argument("--kmax", type=int, default=133)
    q.add_argument("--nmax", type=int, default=408)
    q.add_argument("--format", choices=["json", "csv"], default="json")
    q.set_defaults(func=cmd_search)

    q = sub.add_parser("verify", help="re-check a stored certificate")
    q.add_argument("--cert", required=True)
    q.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        PrecisionPolicy.from_env()
        return args.func(args)
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
