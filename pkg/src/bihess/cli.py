"""Command line entry point: ``bihess study`` and ``bihess adaptive``."""
import argparse
import logging
import sys
import time

from . import kernels
from .bench import CSV_FIELDS, DEFAULT_L, adaptive_study, convergence_study, write_convergence_csv
from .c0ip import default_gamma
from .mesh import MeshPattern, write_mesh


def _n_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("mesh sizes must be positive")
    return values


def _common(p):
    p.add_argument("--degree", type=int, choices=(2, 3, 4), default=2)
    p.add_argument("--gamma", type=float, default=None, help="penalty (default 3.25 k (k-1))")
    p.add_argument("--solver", choices=("direct", "iterative"), default="direct")
    p.add_argument("--same-type-sampling", action="store_true",
                   help="recover from nodes of the same translation class only")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="bihess", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("study", help="convergence study on the unit square")
    s.add_argument("--pattern", default="regular", choices=[p.value for p in MeshPattern])
    s.add_argument("--n", type=_n_list, default=[16, 32, 64], help="e.g. 16,32,64")
    s.add_argument("--L", type=float, default=DEFAULT_L, help="boundary layer width")
    s.add_argument("--seed", type=int, default=0, help="Delaunay point cloud seed")
    s.add_argument("--interior-by-nodes", action="store_true",
                   help="Omega1 needs all Lagrange nodes (not just corners) near the boundary")
    s.add_argument("--pointwise", choices=("max", "frobenius"), default="max",
                   help="matrix norm inside (H^re)_inf")
    s.add_argument("--dump-solution", metavar="PATH", help="coefficients of u_h on the finest mesh")
    s.add_argument("--dump-matrix", metavar="PATH", help="constrained matrix on the finest mesh")
    s.add_argument("--dump-mesh", metavar="PATH", help="finest mesh")
    _common(s)

    a = sub.add_parser("adaptive", help="adaptive run on the L-shaped domain")
    a.add_argument("--theta", type=float, default=0.5)
    a.add_argument("--marking", choices=("theta2", "theta"), default="theta2",
                   help="bulk criterion: theta^2 (default) or theta times the squared total")
    a.add_argument("--max-dofs", type=int, default=200_000)
    a.add_argument("--n0", type=int, default=2, help="initial mesh cells per unit length")
    a.add_argument("--dump-mesh-every", type=int, default=None, metavar="K")
    a.add_argument("--mesh-dir", default="meshes", help="where mesh dumps go")
    _common(a)
    return parser


def _run_study(args):
    finest = max(args.n)

    def on_solve(n, u_h, system):
        if n != finest:
            return
        if args.dump_solution:
            u_h.write(args.dump_solution)
        if args.dump_matrix:
            system.matrix.write(args.dump_matrix)
        if args.dump_mesh:
            write_mesh(u_h.space.mesh, args.dump_mesh)

    gamma = default_gamma(args.degree) if args.gamma is None else args.gamma
    rows = convergence_study(args.pattern, args.degree, args.n, gamma, args.L, args.seed, args.solver,
                             args.same_type_sampling, args.interior_by_nodes, on_solve,
                             pointwise=args.pointwise)
    print(f"# pattern={args.pattern} k={args.degree} gamma={gamma:g} L={args.L:g} backend={kernels.BACKEND}")
    print(",".join(CSV_FIELDS) + ",dofs,seconds")
    for r in rows:
        vals = [f"{getattr(r, f):.4e}" if f.endswith(("0", "Inf")) else f"{getattr(r, f):.2f}"
                for f in CSV_FIELDS[1:]]
        print(f"{r.inv_h}," + ",".join(vals) + f",{r.dofs},{r.seconds:.1f}")
    if args.out:
        write_convergence_csv(rows, args.out)


def _run_adaptive(args):
    gamma = default_gamma(args.degree) if args.gamma is None else args.gamma
    mesh_dir = args.mesh_dir if args.dump_mesh_every else None
    t0 = time.perf_counter()
    records, hits = adaptive_study(args.theta, args.max_dofs, args.out, mesh_dir, args.dump_mesh_every,
                                   args.degree, gamma, args.n0, args.marking == "theta2",
                                   args.same_type_sampling, args.solver)
    print(f"# L-shape k={args.degree} gamma={gamma:g} theta={args.theta:g} "
          f"marking={args.marking}; effective h = dofs^(-1/2)")
    print("iter,dofs,eta_total,h2_error,kappa")
    for r in records:
        print(f"{r.iter},{r.dofs},{r.eta_total:.4e},{r.h2_error:.4e},{r.kappa:.4f}")
    if hits:
        print(f"# corner element marked in {sum(hits)}/{len(hits)} refinements; "
              f"{time.perf_counter() - t0:.1f}s")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "study":
            _run_study(args)
        else:
            _run_adaptive(args)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"bihess: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
