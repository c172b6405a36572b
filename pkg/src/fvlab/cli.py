"""
Command-line front end: ``fvlab solve|study|verify|mesh-gen``.

Exit codes: 0 success, 1 usage error, 2 numerical failure (solver
non-convergence, or a failed inequality under ``verify --strict``).
Every successful run ends with one ``RESULT key=value ...`` line on stdout.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from fvlab.errors import CapacityError, ConvergenceError, StudyAborted
from fvlab.mesh import MeshFunction, TensorMesh, read_mesh_file, write_mesh_file
from fvlab.norms import norms
from fvlab.problem import BUILTIN_NAMES, builtin, gauss_legendre, load_solution_file
from fvlab.solver import SolveOptions, solve_poisson
from fvlab.stencil import assemble_Lh, write_matrix_market
from fvlab.study import StudyConfig, emit_csv, emit_svg, run_study, verify_suite


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _levels(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def _common(p):
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--solution", default="sine_product",
                   help=f"one of {', '.join(BUILTIN_NAMES)}; difference:<a>:<b> also accepted")
    p.add_argument("--params", metavar="JSON", help='file with {"name": ..., "params": {...}}')
    p.add_argument("--mesh", choices=("uniform", "random"), default="uniform")
    p.add_argument("--perturb", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quad-order", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--threads", type=int, default=None)


def build_parser():
    parser = _Parser(prog="fvlab", description="Finite volume Poisson solver on tensor meshes")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve once and report error norms")
    _common(p)
    p.add_argument("--M", type=int, default=16)
    p.add_argument("--mesh-file")
    p.add_argument("--dump-solution", metavar="CSV")
    p.add_argument("--dump-matrix", metavar="MTX")

    p = sub.add_parser("study", help="refinement study with observed orders")
    _common(p)
    p.add_argument("--levels", type=_levels, default=(4, 8, 16, 32))
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--svg", help="log-log SVG output path")

    p = sub.add_parser("verify", help="randomized check of the stability inequalities")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=_levels, default=(3, 8),
                   help="min,max mesh steps per axis for the sampled meshes")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("mesh-gen", help="write a mesh file")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--mesh", choices=("uniform", "random"), default="uniform")
    p.add_argument("--perturb", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _threads(args):
    n = args.threads
    if n is None:
        env = os.environ.get("FVLAB_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    if n < 1:
        raise UsageError("--threads must be at least 1")
    return n


def _solution(args, dim):
    if args.params:
        return load_solution_file(args.params, dim)
    name = args.solution
    if name.startswith("difference:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise UsageError("use difference:<first>:<second>")
        return builtin("difference", dim, {"first": parts[1], "second": parts[2]})
    return builtin(name, dim)


def _result(**fields):
    def fmt(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)

    print("RESULT " + " ".join(f"{k}={fmt(v)}" for k, v in fields.items()))


_AXIS_NAMES = "ijk"
_COORD_NAMES = "xyz"


def _dump_solution(path, mesh, uh, exact):
    d = mesh.dim
    idx_names = [_AXIS_NAMES[a] if a < 3 else f"i{a}" for a in range(d)]
    crd_names = [_COORD_NAMES[a] if a < 3 else f"x{a}" for a in range(d)]
    coords = mesh.node_coordinates().reshape(-1, d)
    index = np.indices(mesh.shape).reshape(d, -1).T
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(idx_names + crd_names + ["u_h", "u_exact", "abs_err"])
        for ijk, x, a, b in zip(index, coords, uh.values, exact.values):
            w.writerow([*map(str, ijk), *(f"{c:.17g}" for c in x),
                        f"{a:.17g}", f"{b:.17g}", f"{abs(a - b):.17g}"])


def _cmd_solve(args):
    if args.mesh_file:
        mesh = read_mesh_file(args.mesh_file)
    elif args.mesh == "uniform":
        mesh = TensorMesh.uniform(args.dim, args.M)
    else:
        mesh = TensorMesh.random(args.dim, args.M, args.perturb, args.seed)
    sol = _solution(args, mesh.dim)
    uh, report = solve_poisson(
        mesh, sol, SolveOptions(rel_tolerance=args.tol), gauss_legendre(args.quad_order)
    )
    exact = MeshFunction.from_callable(mesh, sol.u)
    err = norms(mesh, exact - uh)
    if args.dump_solution:
        _dump_solution(args.dump_solution, mesh, uh, exact)
    if args.dump_matrix:
        write_matrix_market(assemble_Lh(mesh, volume_scaled=True), args.dump_matrix)
    _result(dim=mesh.dim, n=mesh.n_interior, h=mesh.h, l2=err.l2, h1semi=err.h1_semi,
            h1h=err.h1, max=err.max, iters=report.iterations, method=report.method,
            residual=report.residual)
    return 0


def _cmd_study(args):
    sol = _solution(args, args.dim)
    config = StudyConfig(
        dim=args.dim, solution=sol, levels=args.levels, family=args.mesh,
        perturbation=args.perturb, seed=args.seed, quad_order=args.quad_order,
        solve_options=SolveOptions(rel_tolerance=args.tol), threads=_threads(args),
    )
    try:
        rows = run_study(config)
    except StudyAborted as exc:
        if args.out and exc.rows:
            emit_csv(exc.rows, args.out)
        raise
    if args.out:
        emit_csv(rows, args.out)
    if args.svg:
        emit_svg(rows, args.svg, title=f"{sol.name}, d={args.dim}, {args.mesh}")
    last = rows[-1]

    def q(v):
        return float("nan") if v is None else v

    _result(levels=len(rows), M=last.M, h=last.h, h1h=last.h1h, l2=last.l2, max=last.max,
            ord_h1h=q(last.ord_h1h), ord_l2=q(last.ord_l2), ord_max=q(last.ord_max))
    return 0


def _cmd_verify(args):
    _threads(args)
    if len(args.levels) != 2 or args.levels[0] < 2 or args.levels[1] < args.levels[0]:
        raise UsageError("--levels for verify takes min,max with 2 <= min <= max")
    report = verify_suite(args.dim, trials=args.trials, m_range=args.levels, seed=args.seed)
    for line in report.lines():
        print(line)
    worst = {name: c.worst for name, c in report.checks.items()}
    _result(passed=report.passed, **{k: (float("nan") if v is None else v) for k, v in worst.items()})
    if args.strict and not report.passed:
        return 2
    return 0


def _cmd_mesh_gen(args):
    if args.mesh == "uniform":
        mesh = TensorMesh.uniform(args.dim, args.M)
    else:
        mesh = TensorMesh.random(args.dim, args.M, args.perturb, args.seed)
    write_mesh_file(mesh, args.out)
    _result(dim=mesh.dim, M=args.M, ratio=mesh.quasi_uniformity_ratio, out=args.out)
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "study": _cmd_study,
    "verify": _cmd_verify,
    "mesh-gen": _cmd_mesh_gen,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fvlab: usage error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, StudyAborted) as exc:
        print(f"fvlab: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, CapacityError) as exc:
        print(f"fvlab: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
