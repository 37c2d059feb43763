"""Command-line interface: ``smoothext {mesh,analyze,solve,bench}``."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import analysis, bench, fem, mesh as meshmod, optimize, transmission as tm

_GEOMETRIES = {
    "square-split": meshmod.generate_square_split,
    "disk-annulus": meshmod.generate_disk_annulus,
    "corner-halfdisk": meshmod.generate_corner_halfdisk,
    "corner": meshmod.generate_corner_halfdisk,
}


class CliError(Exception):
    pass


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _optimizer_options(args) -> optimize.OptimizerOptions:
    overrides = {}
    if args.method is not None:
        overrides["method"] = args.method
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    return optimize.OptimizerOptions.preset(args.preset, **overrides)


def _schedule(args, case) -> optimize.Schedule | None:
    if args.C is None and args.q is None:
        return None
    C = args.C if args.C is not None else case.schedule.C
    q = args.q if args.q is not None else case.schedule.q
    return optimize.Schedule(C, q, case.q_interval)


def cmd_mesh(args) -> int:
    m = _GEOMETRIES[args.geom](args.n)
    for _ in range(args.refine):
        m = meshmod.refine_uniform(m)
    report = meshmod.validate(m)
    if args.out:
        Path(args.out).write_text(meshmod.write_mesh(m))
    print(f"vertices={m.n_vertices}")
    print(f"triangles={m.n_triangles}")
    print(f"h={m.h:.12g}")
    print("\n".join(report.lines()))
    return 0 if report.conforming else 1


def cmd_analyze(args) -> int:
    if args.kappa == 0:
        raise CliError("kappa must be nonzero")
    if args.geometry == "annulus":
        v = analysis.annulus_wellposed(args.kappa, args.tol)
        q = optimize.recommended_q(1.0, 1.0)
    else:
        v = analysis.corner_wellposed(args.kappa)
        q = optimize.recommended_q(v.sigma_d, 1.0) if v.well_posed else None
    print("\n".join(v.lines()))
    if q is not None:
        print(f"q_interval=({q[0]:g},{q[1]:.6g})")
    return 0


def _case(args, **kw):
    try:
        return bench.make_case(args.case, args.kappa, **kw)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_solve(args) -> int:
    case = _case(args)
    schedule = _schedule(args, case)
    if args.mesh:
        m = meshmod.read_mesh(Path(args.mesh).read_text())
    else:
        m = case.geometry(args.n if args.n is not None else case.base_n)
    ops = tm.prepare(case.problem(args.eps_ext), m)
    lam = optimize.lambda_of(schedule or case.schedule, m.h)
    w, state, hist = optimize.minimize(ops, lam, None, _optimizer_options(args))
    comp = tm.composite(ops, state)
    if args.out:
        with open(args.out, "w") as fh:
            fem.export_solution(comp, fh)
    if args.history:
        Path(args.history).write_text(hist.to_csv())
    l2, h1 = fem.error_norms(comp, case.exact, case.error_rule)
    print(f"case={case.name}")
    print(f"kappa={case.kappa:.17g}")
    print(f"vertices={m.n_vertices}")
    print(f"h={m.h:.12g}")
    print(f"lambda={lam:.12g}")
    print(f"iterations={hist.iterations}")
    print(f"termination={hist.reason}")
    print(f"cost={hist.rows[-1][1]:.12g}")
    print(f"misfit={tm.misfit(ops, state):.12g}")
    print(f"control_norm={tm.control_norm(ops, w):.12g}")
    print(f"relL2={l2:.12g}")
    print(f"relH1={h1:.12g}")
    return 0


def cmd_bench(args) -> int:
    case = _case(args)
    schedule = _schedule(args, case)
    if schedule is not None:
        case = _case(args, schedule=schedule)
    report = bench.run_convergence(case, args.levels, args.base_n, _optimizer_options(args),
                                   warm_start=args.warm_start, jobs=args.jobs)
    if args.out:
        _write(args.out, report.to_csv())
    for r in report.levels:
        print(f"level={r.level} h={r.h:.6g} N={r.N} iters={r.iters} "
              f"relL2={r.rel_l2:.6g} relH1={r.rel_h1:.6g}")
    print(f"rate_L2={report.rate_l2.slope:.6f}")
    print(f"rate_H1={report.rate_h1.slope:.6f}")
    return 0


def _add_optimizer_flags(p):
    p.add_argument("--preset", default="default", choices=sorted(optimize.PRESETS))
    p.add_argument("--method", choices=("lbfgs", "cg"))
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--C", type=float, help="regularization constant in C*h^q")
    p.add_argument("--q", type=float, help="regularization exponent in C*h^q")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothext", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a mesh and print its quality report")
    p.add_argument("--geom", required=True, choices=sorted(_GEOMETRIES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("analyze", help="well-posedness verdict for a contrast")
    p.add_argument("geometry", choices=("annulus", "corner"))
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="solve one benchmark problem")
    p.add_argument("--case", default="flat", choices=bench.CASES)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--mesh", help="mesh file instead of the case generator")
    p.add_argument("--eps-ext", type=float)
    p.add_argument("--out", help="solution file, one 'x y value' line per vertex")
    p.add_argument("--history", help="optimizer history CSV")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="convergence study on nested meshes")
    p.add_argument("--case", required=True, choices=bench.CASES)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--base-n", type=int)
    p.add_argument("--warm-start", action="store_true",
                   help="start each level from the prolonged coarser control")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="report CSV")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except (CliError, ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
