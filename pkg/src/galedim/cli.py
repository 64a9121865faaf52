"""``galedim`` command line.

Exit status: 0 on success, 1 when a validation fails, 2 on usage or input
errors.  Reports are deterministic JSON on standard output.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .compiler import (
    NotAntichainError,
    UnvalidatedGaleError,
    cover_to_supergale,
    kraft_exponent,
    kraft_sum,
    supergale_to_cover,
)
from .complexity import NoEstimateError, cdim_point_estimate, cdim_via_gales, kr_profile, parse_estimator
from .cover import CoverError, parse_point, validate_nice_axioms
from .dimension import dim_search, gale_upper_bound
from .formats import FormatError, antichain_to_list, dumps, gale_to_dict, load_cover, read_antichain, read_gale, read_set
from .gale import GaleError, evaluate_success, is_gale, validate_supergale
from .numbers import DEFAULT_TOLERANCE, make_arith, precision

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _grid(text: str) -> list[Fraction]:
    """``a,b,c`` or ``start:stop:step`` (inclusive)."""
    if ":" in text:
        start, stop, step = (_fraction(p) for p in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        out, v = [], start
        while v <= stop:
            out.append(v)
            v += step
        return out
    return [_fraction(p) for p in text.split(",") if p]


def _precision_meta(exact: bool, tol=DEFAULT_TOLERANCE) -> dict:
    if exact:
        return {"mode": "exact", "bits": None, "tolerance": "0"}
    return {"mode": "float", "bits": precision(), "tolerance": str(tol)}


def _cover(args):
    if getattr(args, "cover", None) is None:
        return None
    return load_cover(args.cover)


def _require_cover(args):
    cover = _cover(args)
    if cover is None:
        raise UsageError("--cover is required")
    return cover


def _gale(args, cover):
    exact = False if getattr(args, "float", False) else None
    gale = read_gale(args.gale, cover, exact)
    if getattr(args, "s", None) is not None and gale.s != args.s:
        raise UsageError(f"--s {args.s} does not match the gale file's s = {gale.s}")
    return gale


# -- subcommands ------------------------------------------------------------------------


def cmd_validate_cover(args, out) -> int:
    cover = _require_cover(args)
    report = validate_nice_axioms(cover, args.depth)
    out({"command": "validate-cover", "cover": str(cover), "depth": args.depth, **report.to_dict()})
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_validate_gale(args, out) -> int:
    gale = _gale(args, _cover(args))
    report = validate_supergale(gale.cover, gale, args.depth, args.tol)
    result = {
        "command": "validate-gale",
        "cover": str(gale.cover),
        "s": str(gale.s),
        "depth": args.depth,
        "precision": _precision_meta(gale.exact, args.tol),
        **report.to_dict(),
    }
    if report.ok:
        result["gale"] = is_gale(gale.cover, gale, args.depth, args.tol)
    out(result)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_compile(args, out) -> int:
    cover = _require_cover(args)
    target = read_antichain(args.antichain)
    gale = cover_to_supergale(cover, target, args.s, args.k, extension=args.extension, exact=False if args.float else None)
    record = gale_to_dict(gale)
    record["meta"] = gale.meta
    if args.out:
        Path(args.out).write_text(dumps(record))
        out({"command": "compile", "written": args.out, "entries": len(gale), "precision": _precision_meta(gale.exact), **gale.meta})
    else:
        out(record)
    return EXIT_OK


def cmd_extract(args, out) -> int:
    gale = _gale(args, _cover(args))
    depth = args.depth if args.depth is not None else gale.support_depth + 1
    try:
        result = supergale_to_cover(gale.cover, gale, args.k, depth, args.tol)
    except UnvalidatedGaleError as exc:
        out({"command": "extract", "ok": False, "error": str(exc)})
        return EXIT_INVALID
    elements = antichain_to_list(result)
    if args.out:
        Path(args.out).write_text(dumps(elements))
    arith = gale.arith
    kraft = kraft_sum(gale.cover, result, gale.s, arith=arith)
    out(
        {
            "command": "extract",
            "ok": True,
            "antichain": elements,
            "kraft_sum": arith.format(kraft),
            "root_capital": arith.format(gale.root_capital),
            "precision": _precision_meta(gale.exact),
            **result.meta,
        }
    )
    return EXIT_OK


def cmd_kraft(args, out) -> int:
    cover = _require_cover(args)
    target = read_antichain(args.antichain)
    arith = make_arith(cover.base, args.s, exact=False if args.float else None)
    kraft = kraft_sum(cover, target, args.s, arith=arith)
    result = {
        "command": "kraft",
        "cover": str(cover),
        "s": str(args.s),
        "size": len(target),
        "kraft_sum": arith.format(kraft),
        "kraft_sum_float": float(kraft),
        "precision": _precision_meta(arith.exact),
    }
    if len(target):
        result["max_k"] = kraft_exponent(cover, kraft, args.s)
    out(result)
    return EXIT_OK


def cmd_dim(args, out) -> int:
    cover = _require_cover(args)
    desc = read_set(args.set, cover)
    est = dim_search(cover, desc, args.n)
    result = {"command": "dim", "cover": str(cover), "n": args.n, "precision": {"mode": "float", "bits": 53}, **est.to_dict()}
    out(result)
    if args.table:
        lines = ["n\tN_n\testimate"]
        for n, count in est.counts[1:]:
            value = 0.0 if count == 0 else _log_ratio(count, n, cover)
            lines.append(f"{n}\t{count}\t{value:.9f}")
        Path(args.table).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _log_ratio(count: int, n: int, cover) -> float:
    import math

    return math.log(count) / (n * math.log(cover.base))


def cmd_success(args, out) -> int:
    gale = _gale(args, _cover(args))
    cover = gale.cover
    thresholds = [Fraction(2) ** k for k in args.k]
    if args.set is not None:
        desc = read_set(args.set, cover)
        report = gale_upper_bound(cover, gale, desc, args.samples, args.depth, ks=args.k, certify_k=args.k[0], seed=args.seed, threads=args.threads)
        out({"command": "success", "precision": _precision_meta(gale.exact), "seed": args.seed, **report.to_dict()})
        return EXIT_OK
    if args.point is None:
        raise UsageError("success needs --point or --set")
    point = parse_point(args.point)
    trace = evaluate_success(cover, gale, point, args.depth, thresholds=())
    capital = gale.root_capital
    verdicts = {}
    for k, t in zip(args.k, thresholds):
        first = trace.first_exceeding(gale.arith.value(t) * capital) if capital != 0 else None
        verdicts[f"2^{k}"] = (
            f"succeeds empirically at threshold 2^{k} x capital by depth {first}" if first is not None else f"no success at threshold 2^{k} x capital by depth {args.depth}"
        )
    out(
        {
            "command": "success",
            "point": point.identity(),
            "depth": args.depth,
            "root_capital": gale.format_value(capital),
            "values": [gale.format_value(v) for v in trace.values],
            "running_max": [gale.format_value(v) for v in trace.running_max],
            "verdicts": verdicts,
            "precision": _precision_meta(gale.exact),
        }
    )
    return EXIT_OK


def cmd_kr_profile(args, out) -> int:
    cover = _require_cover(args)
    point = parse_point(args.point)
    est = parse_estimator(args.estimator)
    profile = kr_profile(cover, point, args.r_min, args.r_max, est)
    result = {"command": "kr-profile", "cover": str(cover), **profile.to_dict()}
    try:
        pe = cdim_point_estimate(profile, args.tail)
        result["estimate"] = pe.estimate
        result["tail_from"] = pe.tail_from
    except NoEstimateError as exc:
        result["estimate"] = None
        result["error"] = str(exc)
    out(result)
    if args.table:
        lines = ["r\tbits\tratio"]
        for r, bits, ratio in profile.table():
            lines.append(f"{r}\t{'' if bits is None else bits}\t{'' if ratio is None else f'{ratio:.6f}'}")
        Path(args.table).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_cdim(args, out) -> int:
    cover = _require_cover(args)
    point = parse_point(args.point)
    est = parse_estimator(args.estimator)
    report = cdim_via_gales(cover, point, args.grid, args.depth, est, k=args.k, tail_fraction=args.tail)
    out({"command": "cdim", "cover": str(cover), "precision": _precision_meta(False), **report.to_dict()})
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="galedim", description="Gales, nice covers and effective dimension.")
    p.add_argument("--version", action="version", version=f"galedim {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, cover_required=True):
        sp.add_argument("--cover", required=cover_required, help="symbolic:K, cube:N:B, or a cover record file")
        sp.add_argument("--seed", type=int, default=0, help="seed for any sampling (default 0)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
        return sp

    sp = common(sub.add_parser("validate-cover", help="check the nice-cover axioms to a depth"))
    sp.add_argument("--depth", type=int, default=6, help="levels to check (default 6)")
    sp.set_defaults(func=cmd_validate_cover)

    sp = common(sub.add_parser("validate-gale", help="check the supergale inequality"), cover_required=False)
    sp.add_argument("--gale", required=True, help="gale record file")
    sp.add_argument("--s", type=_fraction, help="expected exponent; must match the file")
    sp.add_argument("--depth", type=int, default=10, help="validation depth (default 10)")
    sp.add_argument("--tol", type=_fraction, default=DEFAULT_TOLERANCE, help="relative tolerance in float mode (default 2^-64)")
    sp.add_argument("--float", action="store_true", help="force floating-point mode")
    sp.set_defaults(func=cmd_validate_gale)

    sp = common(sub.add_parser("compile", help="antichain to supergale d_k"))
    sp.add_argument("--antichain", required=True, help="antichain file (JSON array or one address per line)")
    sp.add_argument("--s", type=_fraction, required=True, help="exponent, e.g. 1/2 or 0.63")
    sp.add_argument("--k", type=int, default=0, help="label k; needs kraft < c^(1+s) 2^-k")
    sp.add_argument("--extension", choices=("uniform-split", "zero"), default="uniform-split")
    sp.add_argument("--float", action="store_true", help="force floating-point mode")
    sp.add_argument("--out", help="write the gale here instead of stdout")
    sp.set_defaults(func=cmd_compile)

    sp = common(sub.add_parser("extract", help="supergale to antichain D_k"), cover_required=False)
    sp.add_argument("--gale", required=True, help="gale record file")
    sp.add_argument("--s", type=_fraction, help="expected exponent; must match the file")
    sp.add_argument("--k", type=int, required=True, help="threshold 2^k times the root capital")
    sp.add_argument("--depth", type=int, help="search depth (default: support depth + 1)")
    sp.add_argument("--tol", type=_fraction, default=DEFAULT_TOLERANCE, help="relative tolerance in float mode")
    sp.add_argument("--out", help="write the antichain here instead of stdout")
    sp.set_defaults(func=cmd_extract)

    sp = common(sub.add_parser("kraft", help="Kraft sum of an antichain"))
    sp.add_argument("--antichain", required=True, help="antichain file")
    sp.add_argument("--s", type=_fraction, required=True, help="exponent")
    sp.add_argument("--float", action="store_true", help="force floating-point mode")
    sp.set_defaults(func=cmd_kraft)

    sp = common(sub.add_parser("dim", help="Hausdorff dimension of a described set"))
    sp.add_argument("--set", required=True, help="set description file")
    sp.add_argument("--n", type=int, default=40, help="largest level (default 40)")
    sp.add_argument("--table", help="also write an (n, N_n, estimate) table here")
    sp.set_defaults(func=cmd_dim)

    sp = common(sub.add_parser("success", help="gale values along a point or sampled set points"), cover_required=False)
    sp.add_argument("--gale", required=True, help="gale record file")
    sp.add_argument("--s", type=_fraction, help="expected exponent; must match the file")
    sp.add_argument("--point", help="periodic:PRE(PERIOD), rational:X,Y or stream:SEED")
    sp.add_argument("--set", help="set description file to sample points from")
    sp.add_argument("--samples", type=int, default=64, help="points to sample with --set (default 64)")
    sp.add_argument("--depth", type=int, default=40, help="levels to follow (default 40)")
    sp.add_argument("--k", type=int, nargs="+", default=[1], help="thresholds 2^k to report (default 1)")
    sp.set_defaults(func=cmd_success)

    sp = common(sub.add_parser("kr-profile", help="estimated K_r(x) over a precision range"))
    sp.add_argument("--point", required=True, help="periodic:PRE(PERIOD), rational:X,Y or stream:SEED")
    sp.add_argument("--r-min", type=int, default=1, help="smallest precision in bits (default 1)")
    sp.add_argument("--r-max", type=int, default=256, help="largest precision in bits (default 256)")
    sp.add_argument("--estimator", default="compressor:zlib", help="compressor:NAME, oracle:FILE or oracle:linear:ALPHA")
    sp.add_argument("--tail", type=_fraction, default=Fraction(1, 2), help="tail fraction for the liminf surrogate (default 1/2)")
    sp.add_argument("--table", help="also write an (r, bits, ratio) table here")
    sp.set_defaults(func=cmd_kr_profile)

    sp = common(sub.add_parser("cdim", help="two-sided constructive dimension estimate"))
    sp.add_argument("--point", required=True, help="periodic:PRE(PERIOD), rational:X,Y or stream:SEED")
    sp.add_argument("--grid", type=_grid, default=_grid("1/10:1:1/10"), help="a:b:step or comma-separated exponents (default 1/10:1:1/10)")
    sp.add_argument("--depth", type=int, default=1024, help="prefix length to enumerate and follow (default 1024)")
    sp.add_argument("--estimator", default="compressor:zlib", help="compressor:NAME, oracle:FILE or oracle:linear:ALPHA")
    sp.add_argument("--k", type=int, default=1, help="success threshold 2^k (default 1)")
    sp.add_argument("--tail", type=_fraction, default=Fraction(1, 2), help="tail fraction for the liminf surrogate (default 1/2)")
    sp.set_defaults(func=cmd_cdim)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def out(obj) -> None:
        stdout.write(dumps(obj))

    try:
        precision()
        return args.func(args, out)
    except (OSError, FormatError, UsageError, CoverError, GaleError, NotAntichainError, json.JSONDecodeError) as exc:
        stderr.write(f"galedim {args.command}: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        stderr.write(f"galedim {args.command}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
