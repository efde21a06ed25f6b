"""Command-line front end: ``nsreg <subcommand> [options]``.

Exit status 0 on success, 1 on invalid input, 2 on numerical failure.  Any
failure prints one line to stderr::

    nsreg: status=<code> error=<ExceptionClass> reason="<message>"
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__
from .criteria import (
    DEFAULT_EXPONENTS,
    VARIANTS,
    IterationParams,
    decay_trace,
    eps_regularity,
    evaluate_criterion,
    report,
    validate_criterion_exponents,
)
from .errors import NsregError, NumericalError, ValidationError
from .exponents import ExponentPair
from .field import FlowParams, SpaceTimeField
from .generate import FIELD_KINDS, generate_field, random_solenoidal
from .grid import Grid3
from .harmonic import point_source_library, polynomial_library
from .inequalities import (
    build_test_function,
    check_energy_bound,
    check_global_bounds,
    check_harmonic_lemma,
    check_interpolation,
    check_poincare_reduction,
    check_pressure_decay,
    local_energy_terms,
    InequalityCheck,
)
from .io import load_field, persist_field
from .pressure import decompose_sec3, pressure_field, pressure_residual
from .quantities import QUANTITY_KINDS, quantity_sweep
from .regions import geometric_ladder
from .solver import ns_evolve

LEMMAS = ("2.1", "3.1", "3.2", "3.3", "3.4", "3.5", "3.6", "3.7", "4.1", "4.2", "4.3", "4.4")
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


# -- argument helpers -------------------------------------------------------------------


def _floats(text: str, count: int | None = None) -> tuple:
    try:
        out = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"cannot parse {text!r} as comma-separated numbers") from exc
    if count is not None and len(out) != count:
        raise ValidationError(f"expected {count} comma-separated numbers, got {text!r}")
    return out


def _add_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input field (exactly one of --field or --kind)")
    g.add_argument("--field", help="field directory written by `generate` or `evolve`")
    g.add_argument("--kind", choices=FIELD_KINDS + ("random",), help="generate the input in memory")
    g.add_argument("-n", type=int, default=32, help="nodes per axis for generated input")
    g.add_argument("--nu", type=float, default=1.0)
    g.add_argument("--dt", type=float, default=1.0 / 64)
    g.add_argument("--end-time", type=float, default=0.25)
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0, help="seed for --kind random")


def _add_exponents(p: argparse.ArgumentParser, default=None) -> None:
    p.add_argument("-p", default=None if default is None else str(default[0]), help="spatial exponent (e.g. 9, 9/2, inf)")
    p.add_argument("-q", default=None if default is None else str(default[1]), help="temporal exponent")


def _add_iteration(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r0", type=float, default=0.5, help="largest scale of the ladder")
    p.add_argument("--theta", type=float, default=1.0 / 16, help="ladder ratio, 0 < theta < 1/8")
    p.add_argument("--count", type=int, default=4, help="number of ladder scales")
    p.add_argument("--delta", type=float, default=1e-2)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--eps1", type=float, default=0.05, help="smallness threshold")
    p.add_argument("--z0", default="0,0,0", help="centre x1,x2,x3")


def _pq(args, fallback=None) -> ExponentPair:
    p, q = args.p, args.q
    if p is None or q is None:
        if fallback is None:
            raise ValidationError("exponents -p and -q are required")
        p = p if p is not None else fallback[0]
        q = q if q is not None else fallback[1]
    return ExponentPair(p, q)


def _source(args) -> SpaceTimeField:
    if (args.field is None) == (args.kind is None):
        raise ValidationError("give exactly one input: --field DIR or --kind KIND")
    if args.field is not None:
        return load_field(args.field)
    grid = Grid3(args.n)
    if args.kind == "random":
        return random_solenoidal(grid, args.seed, amplitude=args.amplitude)
    params = FlowParams(nu=args.nu, end_time=args.end_time, dt=args.dt, amplitude=args.amplitude)
    return generate_field(args.kind, params, grid)


def _out(args) -> Path:
    path = Path(args.out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _iteration(args, variant="case1") -> IterationParams:
    return IterationParams(
        theta=args.theta, delta=args.delta, eps=args.eps, eps1=args.eps1, variant=variant, count=args.count
    )


def _write(path: Path, text: str) -> None:
    path.write_text(text)


# -- subcommands -----------------------------------------------------------------------


def cmd_generate(args) -> int:
    F = _source(args)
    persist_field(F, _out(args))
    return EXIT_OK


def cmd_evolve(args) -> int:
    F = _source(args)
    params = FlowParams(nu=args.nu, end_time=args.evolve_time, dt=args.evolve_dt, dealias=not args.no_dealias)
    U, P = ns_evolve(F, params, save_every=args.save_every)
    out = _out(args)
    persist_field(U, out / "velocity")
    persist_field(P, out / "pressure")
    return EXIT_OK


def cmd_quantities(args) -> int:
    F = _source(args)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    for k in kinds:
        if k not in QUANTITY_KINDS:
            raise ValidationError(f"unknown quantity kind {k!r}; choose from {QUANTITY_KINDS}")
    pq = _pq(args, (2, 2))
    scales = geometric_ladder(args.r0, args.theta, args.count)
    rep = quantity_sweep(kinds, F, pq, _floats(args.z0, 3), scales, args.geometry)
    out = _out(args)
    _write(out / "quantities.csv", rep.to_csv())
    _write(out / "quantities.json", rep.to_json() + "\n")
    return EXIT_OK


def cmd_pressure(args) -> int:
    U = _source(args)
    P = pressure_field(U).materialize()
    out = _out(args)
    persist_field(P, out / "pressure")
    dec = decompose_sec3(U.snapshot(len(U) - 1))
    doc = {
        "field_id": U.field_id,
        "n": U.grid.n,
        "poisson_residual": pressure_residual(U.snapshot(len(U) - 1), P.snapshot(len(P) - 1)),
        "identities": dec.identity_residuals(),
    }
    _write(out / "pressure.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _harmonic_family(spec: str):
    m = re.fullmatch(r"\s*degree\s*<=\s*(\d+)\s*", spec or "degree<=6")
    if spec == "sources":
        return point_source_library()
    if not m:
        raise ValidationError(f"unknown harmonic family {spec!r}; use degree<=N or sources")
    degree = int(m.group(1))
    if degree > 6:
        raise ValidationError("the harmonic library stops at degree 6")
    return polynomial_library(degree)


def _verify_checks(args) -> list:
    lemma = args.lemma
    if lemma not in LEMMAS:
        raise ValidationError(f"unknown lemma {lemma!r}; choose from {LEMMAS}")
    if lemma == "4.3":
        out = []
        for f in _harmonic_family(args.family):
            out.extend(check_harmonic_lemma(f, args.resolution))
        return out
    U = _source(args)
    z0 = _floats(args.z0, 3)
    r, rho = args.r, args.rho
    if lemma == "3.1":
        ell = args.ell if args.ell is not None else 6
        return [check_interpolation(U.snapshot(len(U) - 1), ell)]
    if lemma == "4.2":
        return [check_interpolation(U, geometry="cylinder", pq=_pq(args, (2, 4)), r=r, center=z0)]
    if lemma == "2.1":
        phi = build_test_function(r, rho, args.test_function, z0, float(U.times[-1]))
        terms = local_energy_terms(U, None, phi)
        check = InequalityCheck(
            f"local_energy[{args.test_function}]",
            terms["lhs"],
            {"heat": max(terms["rhs_heat"], 0.0), "flux_plus": max(terms["rhs_flux"], 0.0)},
            {"field_id": U.field_id, "n": U.grid.n, "residual": terms["residual"], "r": r, "rho": rho},
        )
        if terms["residual"] < -args.tolerance * max(terms["dissipation"], 1e-300):
            raise NumericalError(
                f"local energy inequality violated: residual {terms['residual']:.3e} "
                f"against dissipation {terms['dissipation']:.3e}"
            )
        return [check]
    if lemma == "3.2":
        return [check_energy_bound(U, None, r, rho, _pq(args, (9, 3)), "case1", z0)]
    if lemma == "3.6":
        return [check_energy_bound(U, None, r, rho, _pq(args, (2, 4)), "grad", z0)]
    if lemma == "4.1":
        return [check_energy_bound(U, None, r, rho, _pq(args, (2, 4)), "cylinder", z0)]
    if lemma == "3.3":
        return check_pressure_decay(U, None, r, rho, _pq(args, (9, 3)), "L33", z0)
    if lemma == "3.7":
        return check_pressure_decay(U, None, r, rho, _pq(args, (2, 4)), "L37", z0)
    if lemma == "4.4":
        return check_pressure_decay(U, None, r, rho, _pq(args, (2, 4)), "L44", z0)
    if lemma == "3.4":
        return check_global_bounds(U, None, _pq(args, (9, 3)), args.r0, z0)
    return check_poincare_reduction(U, r, rho, _pq(args, (2, 4)), z0)


def cmd_verify(args) -> int:
    checks = _verify_checks(args)
    rep = report(checks=checks)
    out = _out(args)
    _write(out / "checks.csv", rep.checks_csv())
    _write(out / "report.json", rep.to_json())
    bad = [c.name for c in checks if c.implied_constant == float("inf")]
    if bad:
        raise NumericalError(f"right side vanishes while the left does not: {', '.join(bad)}")
    return EXIT_OK


def cmd_criteria(args) -> int:
    params = _iteration(args)
    z0 = _floats(args.z0, 3)
    pq = _pq(args)
    if args.prop is not None:
        if args.prop != "2.2":
            raise ValidationError(f"unknown proposition {args.prop!r}; only 2.2")
        verdict = eps_regularity(_source(args), args.mode, pq, z0, params)
    else:
        if args.theorem == "1.1":
            if args.case not in (1, 2, 3):
                raise ValidationError("theorem 1.1 needs --case 1, 2 or 3")
            criterion = f"T11_case{args.case}"
        elif args.theorem == "1.2":
            criterion = "T12"
        else:
            raise ValidationError("give --theorem 1.1 --case N, --theorem 1.2, or --prop 2.2")
        # exponents are checked before any field is read
        validate_criterion_exponents(criterion, pq)
        verdict = evaluate_criterion(_source(args), criterion, pq, args.r0, params, z0)
    rep = report(verdicts=[verdict])
    out = _out(args)
    _write(out / "verdicts.csv", rep.verdicts_csv())
    _write(out / "report.json", rep.to_json())
    return EXIT_OK


def cmd_trace(args) -> int:
    U = _source(args)
    params = _iteration(args, args.variant)
    pq = _pq(args, DEFAULT_EXPONENTS[args.variant])
    tr = decay_trace(U, None, params, _floats(args.z0, 3), pq=pq, r0=args.r0)
    rep = report(traces=[tr])
    out = _out(args)
    _write(out / "trace.csv", rep.trace_csv())
    _write(out / "report.json", rep.to_json())
    return EXIT_OK


def cmd_report(args) -> int:
    merged = {"verdicts": [], "traces": [], "checks": []}
    for src in args.inputs:
        path = Path(src)
        if path.is_dir():
            path = path / "report.json"
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ValidationError(f"no report at {path}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"corrupt report {path}: {exc}") from exc
        for key in merged:
            merged[key].extend(doc.get(key, []))
    out = _out(args)
    _write(out / "report.json", json.dumps(merged, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nsreg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a generated field to disk")
    _add_source(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evolve", help="evolve a field with the spectral solver")
    _add_source(p)
    p.add_argument("--evolve-time", type=float, default=0.25)
    p.add_argument("--evolve-dt", type=float, default=1.0 / 64)
    p.add_argument("--save-every", type=int, default=1)
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("quantities", help="scale sweep of the scale-invariant quantities")
    _add_source(p)
    _add_exponents(p)
    _add_iteration(p)
    p.add_argument("--kinds", default=",".join(QUANTITY_KINDS))
    p.add_argument("--geometry", choices=("ball", "vertical"), default="ball")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantities)

    p = sub.add_parser("pressure", help="pressure solve and decomposition identities")
    _add_source(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("verify", help="run one inequality suite by lemma number")
    _add_source(p)
    _add_exponents(p)
    _add_iteration(p)
    p.add_argument("--lemma", required=True, help=f"one of {', '.join(LEMMAS)}")
    p.add_argument("--family", default="degree<=6", help="harmonic family: degree<=N or sources")
    p.add_argument("--resolution", type=int, default=24, help="ball quadrature resolution")
    p.add_argument("--r", type=float, default=1.0 / 16)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--ell", type=float, default=None)
    p.add_argument("--test-function", choices=("heat3", "heat2h"), default="heat3")
    p.add_argument("--tolerance", type=float, default=0.05, help="allowed negative residual / dissipation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("criteria", help="evaluate a regularity criterion")
    _add_source(p)
    _add_exponents(p)
    _add_iteration(p)
    p.add_argument("--theorem", choices=("1.1", "1.2"))
    p.add_argument("--case", type=int)
    p.add_argument("--prop", help="2.2 for the epsilon-regularity conditions")
    p.add_argument("--mode", choices=("velocity", "vorticity"), default="velocity")
    p.add_argument("--out", default="nsreg-out")
    p.set_defaults(func=cmd_criteria)

    p = sub.add_parser("trace", help="decay iteration trace F(r)")
    _add_source(p)
    _add_exponents(p)
    _add_iteration(p)
    p.add_argument("--variant", choices=VARIANTS, default="case1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("report", help="merge report.json files")
    p.add_argument("inputs", nargs="+", help="report files or directories holding report.json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    reason = str(exc).replace("\n", " ").replace('"', "'")
    print(f'nsreg: status={code} error={type(exc).__name__} reason="{reason}"', file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; normalise its status
        return EXIT_OK if exc.code in (0, None) else _fail(EXIT_VALIDATION, ValidationError("bad arguments"))
    try:
        return args.func(args)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, exc)
    except (NumericalError, FloatingPointError, ZeroDivisionError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except NsregError as exc:
        return _fail(EXIT_NUMERICAL, exc)


if __name__ == "__main__":
    sys.exit(main())
