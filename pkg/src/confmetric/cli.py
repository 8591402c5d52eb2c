"""Command line front end: solve, delaunay, generate, report.

Exit codes: 0 success/converged, 2 parse or validation failure,
3 non-convergence within budgets, 4 internal invariant breach
(flip budget exhausted, symmetry corruption, degenerate geometry).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .cover import build_double_cover, restrict_to_single_cover
from .generate import generate
from .halfedge import MeshError, build_from_face_lists
from .io import (
    ParseError,
    ProblemFile,
    bundle_from_solution,
    bundle_to_csv,
    gauss_bonnet_deviation,
    problem_to_mesh,
    read_bundle,
    read_mesh_file,
    read_targets_file,
    sidecar_path,
    write_bundle,
    write_problem_files,
)
from .metric import FlipBudgetError, MetricError, make_delaunay
from .solver import SolverConfig, find_conformal_metric, scale_conformally
from .symmetry import SymmetryError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INVARIANT = 4

_OPT_NAMES = {
    "tol": ("eps_tol", float),
    "max_steps": ("max_newton_steps", int),
    "max_halvings": ("max_halvings", int),
    "min_decrement": ("min_decrement", float),
    "flip_budget": ("flip_budget_factor", float),
    "eps_flip": ("eps_flip", float),
}


def _build_config(options: dict, args) -> SolverConfig:
    cfg = SolverConfig()
    for name, value in options.items():
        if name not in _OPT_NAMES:
            raise ParseError(f"unknown solver option {name!r}")
        field, cast = _OPT_NAMES[name]
        setattr(cfg, field, cast(value))
    if getattr(args, "tol", None) is not None:
        cfg.eps_tol = args.tol
    if getattr(args, "max_steps", None) is not None:
        cfg.max_newton_steps = args.max_steps
    if getattr(args, "max_halvings", None) is not None:
        cfg.max_halvings = args.max_halvings
    if getattr(args, "flip_budget", None) is not None:
        cfg.flip_budget_factor = args.flip_budget
    return cfg


def _result_path(mesh_path: str, out: str | None, many: bool) -> str:
    if out and not many:
        return out
    stem = mesh_path.rsplit(".", 1)[0] if "." in os.path.basename(mesh_path) else mesh_path
    name = stem + ".result"
    if out:  # directory mode for batches
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, os.path.basename(name))
    return name


def _load_problem(mesh_path: str, targets_path: str | None, need_targets: bool) -> ProblemFile:
    prob = read_mesh_file(mesh_path)
    tpath = targets_path or sidecar_path(mesh_path)
    if os.path.exists(tpath):
        read_targets_file(tpath, prob)
    elif need_targets:
        raise ParseError(f"no targets file at {tpath}")
    return prob


def _solve_one(mesh_path: str, args, many: bool) -> int:
    try:
        prob = _load_problem(mesh_path, args.targets if not many else None, True)
        mesh, metric = problem_to_mesh(prob)
        cfg = _build_config(prob.options, args)
    except (ParseError, OSError) as exc:
        print(f"{mesh_path}: error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    two_pi = 2.0 * math.pi
    n = mesh.n_vertices
    try:
        if not mesh.boundary_faces:
            if prob.kappa_targets:
                theta = [two_pi - prob.kappa_targets.get(v, 0.0) for v in range(n)]
            else:
                theta = [prob.theta_targets.get(v, two_pi) for v in range(n)]
            deviation = gauss_bonnet_deviation(mesh, theta)
            if abs(deviation) > 1e-8 * max(1, n):
                print(
                    f"{mesh_path}: error: targets violate Gauss-Bonnet "
                    f"(deviation {deviation!r})",
                    file=sys.stderr,
                )
                return EXIT_PARSE
            mesh, scaled, u, report = find_conformal_metric(mesh, metric, theta, cfg)
            code = EXIT_OK if report.converged else EXIT_NO_CONVERGENCE
            bundle = bundle_from_solution(mesh, scaled, u, report, code)
        else:
            boundary = {
                mesh.vertex_of(h)
                for h in range(mesh.n_halfedges())
                if mesh.is_boundary_halfedge(h)
            }
            if prob.kappa_targets:
                kappa = [prob.kappa_targets.get(v, 0.0) for v in range(n)]
            else:
                kappa = [
                    (math.pi if v in boundary else two_pi) - prob.theta_targets.get(v, two_pi)
                    for v in range(n)
                ]
            chi = mesh.n_vertices - mesh.n_edges() + mesh.n_faces()
            deviation = math.fsum(kappa) - two_pi * chi
            if abs(deviation) > 1e-8 * max(1, n):
                print(
                    f"{mesh_path}: error: targets violate Gauss-Bonnet "
                    f"(deviation {deviation!r})",
                    file=sys.stderr,
                )
                return EXIT_PARSE
            cover, cmetric, targets = build_double_cover(mesh, metric, kappa, kappa)
            cmesh, cscaled, u, report = find_conformal_metric(
                cover.mesh, cmetric, targets.theta_hat, cfg, refl=cover.refl
            )
            code = EXIT_OK if report.converged else EXIT_NO_CONVERGENCE
            if args.keep_double_cover:
                bundle = bundle_from_solution(cmesh, cscaled, u, report, code)
            else:
                rmesh, rmetric, ru = restrict_to_single_cover(cover, cmetric, u)
                bundle = bundle_from_solution(rmesh, rmetric, ru, report, code)
    except (FlipBudgetError, SymmetryError, MetricError, MeshError) as exc:
        print(f"{mesh_path}: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    out_path = _result_path(mesh_path, args.out, many)
    write_bundle(bundle, out_path)
    print(
        f"{mesh_path}: {report.termination} steps={report.newton_steps} "
        f"residual={report.final_residual:.3e} flips={bundle.flip_totals[0]} -> {out_path}"
    )
    return code


def cmd_solve(args) -> int:
    many = len(args.inputs) > 1
    if args.targets and many:
        print("error: --targets only applies to a single input", file=sys.stderr)
        return EXIT_PARSE
    if args.batch and many:
        with ThreadPoolExecutor(max_workers=args.batch) as pool:
            codes = list(pool.map(lambda p: _solve_one(p, args, True), args.inputs))
    else:
        codes = [_solve_one(p, args, many) for p in args.inputs]
    return max(codes)


def cmd_delaunay(args) -> int:
    try:
        prob = _load_problem(args.input, None, False)
        mesh, metric = problem_to_mesh(prob)
    except (ParseError, OSError) as exc:
        print(f"{args.input}: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    u = [0.0] * mesh.n_vertices
    try:
        log = make_delaunay(mesh, metric, u)
    except (FlipBudgetError, MetricError, MeshError) as exc:
        print(f"{args.input}: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    bundle = bundle_from_solution(mesh, metric, u, None, EXIT_OK, flips=log)
    out_path = _result_path(args.input, args.out, False)
    write_bundle(bundle, out_path)
    print(f"{args.input}: {log.total} flips -> {out_path}")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        inst = generate(args.kind, args.seed, args.size)
    except MeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    mesh_path = args.out or f"{args.kind}-s{args.seed}.mesh"
    targets_path = write_problem_files(inst, mesh_path)
    print(f"{mesh_path} + {targets_path}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        bundle = read_bundle(args.result)
    except (ParseError, OSError) as exc:
        print(f"{args.result}: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    csv = bundle_to_csv(bundle)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
        print(args.out)
    else:
        sys.stdout.write(csv)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="confmetric",
        description="Discrete conformal metrics with prescribed angle sums.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run the Newton pipeline on problem files")
    sp.add_argument("inputs", nargs="+", help="mesh files (targets in <stem>.targets)")
    sp.add_argument("--targets", help="explicit targets file (single input only)")
    sp.add_argument("--out", help="result path (single input) or directory (batch)")
    sp.add_argument("--tol", type=float, help="convergence tolerance on max angle error")
    sp.add_argument("--max-steps", type=int, help="Newton step budget")
    sp.add_argument("--max-halvings", type=int, help="line-search halving budget")
    sp.add_argument("--flip-budget", type=float, help="flip budget factor per retriangulation")
    sp.add_argument("--seed", type=int, default=0, help="accepted for interface parity; solving is deterministic")
    sp.add_argument("--keep-double-cover", action="store_true", help="emit the symmetric cover instead of restricting")
    sp.add_argument("--batch", type=int, metavar="N", help="solve inputs on N worker threads")
    sp.set_defaults(func=cmd_solve)

    dp = sub.add_parser("delaunay", help="retriangulate to intrinsic Delaunay at u = 0")
    dp.add_argument("input")
    dp.add_argument("--out")
    dp.set_defaults(func=cmd_delaunay)

    gp = sub.add_parser("generate", help="write a random problem instance")
    gp.add_argument("kind", help="sphere-random-angles | disk-random-boundary | single-cone-genus-<g>")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--size", type=int, help="approximate vertex count")
    gp.add_argument("--out", help="mesh file path (targets go to <stem>.targets)")
    gp.set_defaults(func=cmd_generate)

    rp = sub.add_parser("report", help="dump per-iteration CSV from a result bundle")
    rp.add_argument("result")
    rp.add_argument("--out", help="CSV path (default stdout)")
    rp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
