"""``acalc`` command line.

Exit codes: 0 success, 2 input or validation error, 3 inconclusive under
``--strict``.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from contextlib import contextmanager
from typing import Iterator, Sequence, TextIO

import numpy as np

from . import __version__
from .algebra import (
    AlgebraSpec,
    Element,
    Kind,
    as_generated,
    classify,
    load_algebra,
    preset,
)
from .coeffs import parse_coeffs
from .errors import ACalcError, NotGenerated
from .power_series import Grid, Slice, estimate_radii, evaluate, region_scan
from .series import Status
from .transcendental import identity_suite, pythagorean_report, special_functions

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 2, 3
PYTHAGOREAN_TOL = 1e-8


class UsageError(ACalcError):
    pass


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump(payload: dict) -> str:
    body = {"schema": SCHEMA, **payload}
    return json.dumps(_clean(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


@contextmanager
def _output(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _element(alg: AlgebraSpec, text: str, what: str) -> Element:
    """Comma-separated coordinates; a single number means that multiple of the unity."""
    vals = _floats(text, what)
    if len(vals) == 1 and alg.dim != 1:
        return vals[0] * alg.one()
    if len(vals) != alg.dim:
        raise UsageError(f"{what}: expected {alg.dim} coordinates, got {len(vals)}")
    return Element(alg, vals)


def _algebra(args) -> AlgebraSpec:
    if args.algebra:
        return load_algebra(args.algebra)
    return preset(args.preset or "complex")


def _slice(alg: AlgebraSpec, text: str | None) -> Slice:
    parts = {"origin": alg.zero(), "u": alg.basis(0), "v": alg.basis(1) if alg.dim > 1 else alg.basis(0)}
    if text:
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            key, sep, val = chunk.partition("=")
            key = key.strip()
            if not sep or key not in parts:
                raise UsageError(f"--slice: expected u=..;v=..;origin=.., got {chunk!r}")
            parts[key] = _element(alg, val, f"--slice {key}")
    return Slice(parts["origin"], parts["u"], parts["v"])


def _grid(text: str) -> Grid:
    vals = _floats(text, "--grid")
    if len(vals) != 6 or not vals[4].is_integer() or not vals[5].is_integer():
        raise UsageError("--grid: expected umin,umax,vmin,vmax,nu,nv")
    return Grid(vals[0], vals[1], vals[2], vals[3], int(vals[4]), int(vals[5]))


def _require_json(args, command: str) -> None:
    if args.format == "csv":
        raise UsageError(f"{command} only writes JSON")


# -- commands --------------------------------------------------------------


def cmd_check(args) -> int:
    _require_json(args, "check")
    alg = _algebra(args)  # loading validates the axioms
    rng = np.random.default_rng(args.seed)
    # small integer coordinates hit zero divisors like 1+j that continuous sampling misses
    census = {k.value: 0 for k in Kind}
    samples = rng.integers(-1, 2, size=(args.samples, alg.dim)).astype(float)
    for row in samples:
        census[classify(Element(alg, row)).value] += 1
    report = {
        "algebra": alg.name,
        "dim": alg.dim,
        "commutative": alg.commutative,
        "m_theoretical": alg.m_theoretical,
        "m_empirical": alg.m_empirical,
        "census": {"samples": args.samples, "coordinates": [-1, 0, 1], "counts": census},
        "valid": True,
    }
    with _output(args.out) as fh:
        fh.write(_dump(report))
    return EXIT_OK


def cmd_series(args) -> int:
    _require_json(args, "series")
    alg = _algebra(args)
    center = _element(alg, args.center, "--center") if args.center else None
    p = parse_coeffs(args.coeffs).build(alg, center)
    radii = estimate_radii(p, probe=args.probe)
    report: dict = {"algebra": alg.name, "coeffs": args.coeffs, "radii": radii.to_dict()}
    status = None
    if args.point is not None:
        z = _element(alg, args.point, "--point")
        res = evaluate(p, z, tol=args.tol)
        status = res.status
        report["eval"] = {
            "point": z.coords,
            "status": res.status.value,
            "value": res.value.coords,
            "terms_used": res.terms_used,
            "tail_estimate": res.tail_estimate,
            "settled_at": res.settled_at,
        }
    with _output(args.out) as fh:
        fh.write(_dump(report))
    if args.strict and status is Status.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_region(args) -> int:
    alg = _algebra(args)
    center = _element(alg, args.center, "--center") if args.center else None
    p = parse_coeffs(args.coeffs).build(alg, center)
    scan = region_scan(p, _slice(alg, args.slice), _grid(args.grid), tol=args.tol)
    counts = {s.value: scan.count(s) for s in Status}
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(
                _dump(
                    {
                        "algebra": alg.name,
                        "coeffs": args.coeffs,
                        "grid": [scan.grid.u_min, scan.grid.u_max, scan.grid.v_min, scan.grid.v_max, scan.grid.nu, scan.grid.nv],
                        "counts": counts,
                        "verdicts": ["".join(row) for row in scan.codes()],
                    }
                )
            )
        else:
            scan.write_csv(fh)
    print(
        f"converged={counts['Converged']} diverged={counts['Diverged']} inconclusive={counts['Inconclusive']}",
        file=sys.stderr,
    )
    if args.strict and counts["Inconclusive"]:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_identities(args) -> int:
    _require_json(args, "identities")
    alg = _algebra(args)
    rep = identity_suite(alg, trials=args.trials, tol=args.tol, seed=args.seed)
    report = rep.to_dict()
    passed = rep.passed
    try:
        g = as_generated(alg)
    except NotGenerated:
        g = None
    if g is not None:
        pyth = pythagorean_report(g, trials=args.trials, seed=args.seed)
        pyth["tol"] = PYTHAGOREAN_TOL
        pyth["passed"] = pyth["max_residual"] < PYTHAGOREAN_TOL
        report["pythagorean"] = pyth
        passed = passed and pyth["passed"]
    report["passed"] = passed
    with _output(args.out) as fh:
        fh.write(_dump(report))
    return EXIT_OK if passed else EXIT_INPUT


def cmd_special(args) -> int:
    alg = _algebra(args)
    g = as_generated(alg)
    vals = _floats(args.t, "--t")
    if len(vals) != 3 or not vals[2].is_integer() or vals[2] < 1:
        raise UsageError("--t: expected tmin,tmax,count")
    table = special_functions(g, np.linspace(vals[0], vals[1], int(vals[2])))
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(
                _dump(
                    {
                        "algebra": alg.name,
                        "N": g.dim,
                        "c": g.power_value,
                        "t": table.t_grid,
                        "values": table.values,
                        "reconstruction_residual": table.reconstruction_residual(),
                    }
                )
            )
        else:
            table.write_csv(fh)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--preset", help="preset name, e.g. complex, hyperbolic, dual, H_N:3, C_N:4, Gamma_N:3")
    src.add_argument("--algebra", metavar="FILE", help="JSON algebra definition")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="acalc", description="Calculus over finite-dimensional real algebras.")
    parser.add_argument("--version", action="version", version=f"acalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate an algebra and report norm constants")
    p.add_argument("--samples", type=int, default=200, help="census sample count")
    p.set_defaults(func=cmd_check)

    series_opts = argparse.ArgumentParser(add_help=False)
    series_opts.add_argument("--coeffs", required=True, help="real:EXPR | element:[...] | builtin:NAME")
    series_opts.add_argument("--center", help="series center, comma-separated coordinates")
    series_opts.add_argument("--tol", type=float, default=1e-12)
    series_opts.add_argument("--strict", action="store_true", help="exit 3 on an inconclusive verdict")

    p = sub.add_parser("series", parents=[common, series_opts], help="radii and a point evaluation")
    p.add_argument("--point", help="evaluation point, comma-separated coordinates")
    p.add_argument("--probe", type=int, default=200)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("region", parents=[common, series_opts], help="convergence scan over a 2-D slice")
    p.add_argument("--slice", help="u=CSV;v=CSV;origin=CSV (default: first two basis vectors through 0)")
    p.add_argument("--grid", default="-2,2,-2,2,81,81", help="umin,umax,vmin,vmax,nu,nv")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("identities", parents=[common], help="function identities and the Pythagorean determinant")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("special", parents=[common], help="special-function table of a generated algebra")
    p.add_argument("--t", default="-2,2,41", help="tmin,tmax,count")
    p.set_defaults(func=cmd_special)
    return parser


_VALUE_FLAGS = ("--grid", "--t", "--point", "--center", "--slice")


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """``--grid -2,2,...`` would read as an unknown option; rewrite it as ``--grid=-2,2,...``."""
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(a)
            elif nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{a}={nxt}")
            else:
                out.extend([a, nxt])
        else:
            out.append(a)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except (ACalcError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"acalc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """Run in-process and capture ``(exit_code, stdout, stderr)``; handy for tests."""
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        try:
            code = main(argv)
        except SystemExit as exc:
            code = int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    finally:
        sys.stdout, sys.stderr = old
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
