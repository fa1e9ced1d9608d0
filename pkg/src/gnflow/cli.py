"""Command-line interface.

Subcommands:

    solve                       one run of the curved-pipe solver
    verify {tensors,korn,poincare,sobolev,sigma,apriori}
    study {dean,delta-approx,uniqueness}
    mesh {build,info}

Every subcommand honors ``--seed`` and ``--threads`` (N = 1 is the
bit-reproducible mode), ``--dry-run`` (print the resolved configuration and
exit) and ``--config FILE`` (``key = value`` lines; explicit flags win).
``GNF_OUT_DIR`` overrides the output directory.  Exit status: 0 on success,
1 on computational failure (non-convergence or a failed record), 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .constants import kappa_constants
from .dean import SigmaSpec, dean_scaling_study, delta_approx_study, solve_dean
from .geometry import build_cross_section
from .harness import (apriori_campaign, fuzz_inequalities, fuzz_korn,
                      fuzz_poincare, fuzz_sigma_estimates, fuzz_sobolev,
                      fuzz_tensor_inequalities, fuzz_jacobian_order,
                      records_to_csv, rows_to_csv, summarize, uniqueness_probe)
from .meshing import write_mesh, write_vtk
from .solver import FlowParams, SolverOptions, solve_full


class UsageError(Exception):
    pass


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default="gnf-out")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--config", default=None,
                   help="key = value file; explicit flags override it")


def _add_mesh_opts(p):
    p.add_argument("--shape", choices=["disk", "rectangle", "file"],
                   default="disk")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--rect", default="1.0,1.0",
                   help="rectangle dimensions a,b")
    p.add_argument("--mesh-file", default=None)


def _add_flow_opts(p, with_re=True):
    p.add_argument("--p", type=float, default=2.0)
    if with_re:
        p.add_argument("--re", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--gamma-dot", type=float, default=1.0)


def _add_solver_opts(p):
    p.add_argument("--scheme", default="picard-then-newton",
                   choices=["picard", "newton", "picard-then-newton"])
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--guess", default="axial", choices=["zero", "axial"])
    p.add_argument("--no-continuation", action="store_true")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gnflow",
        description="Curved-pipe generalized-Newtonian flow solver and "
                    "verification harness")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve the curved-pipe system")
    _add_flow_opts(ps)
    _add_mesh_opts(ps)
    _add_solver_opts(ps)
    _add_common(ps)

    pv = sub.add_parser("verify", help="run an inequality/bound campaign")
    vsub = pv.add_subparsers(dest="suite", required=True)
    for name in ("tensors", "korn", "poincare", "sobolev", "sigma",
                 "apriori", "all"):
        q = vsub.add_parser(name)
        q.add_argument("--n", type=int, default=10_000)
        q.add_argument("--fields", type=int, default=50)
        q.add_argument("--delta", type=float, default=None,
                       help="restrict curvature ratios to one value")
        q.add_argument("--p-list", default="1.5,1.75,2,2.5,3,4")
        q.add_argument("--grid", default="default",
                       help="apriori grid: default or p:...;delta:...;"
                            "refrac:...;g:...")
        _add_mesh_opts(q)
        _add_common(q)

    pt = sub.add_parser("study", help="curvature-ratio studies")
    ssub = pt.add_subparsers(dest="study", required=True)
    sd = ssub.add_parser("dean")
    sd.add_argument("--re", default="5", help="comma list of Reynolds numbers")
    sd.add_argument("--deltas", default="0.2,0.1,0.05,0.025")
    _add_flow_opts(sd, with_re=False)
    _add_mesh_opts(sd)
    _add_solver_opts(sd)
    _add_common(sd)
    sa = ssub.add_parser("delta-approx")
    sa.add_argument("--deltas", default="0.2,0.1,0.05,0.025")
    sa.add_argument("--re-frac", type=float, default=0.25,
                    help="Reynolds number as a fraction of the uniqueness "
                         "threshold")
    sa.add_argument("--sigma", default="dean",
                    help="dean | power:c0,alpha")
    _add_flow_opts(sa)
    _add_mesh_opts(sa)
    _add_solver_opts(sa)
    _add_common(sa)
    su = ssub.add_parser("uniqueness")
    su.add_argument("--re-frac", type=float, default=0.4)
    su.add_argument("--n-guesses", type=int, default=4)
    _add_flow_opts(su)
    _add_mesh_opts(su)
    _add_solver_opts(su)
    _add_common(su)

    pm = sub.add_parser("mesh", help="build or inspect meshes")
    msub = pm.add_subparsers(dest="action", required=True)
    mb = msub.add_parser("build")
    _add_mesh_opts(mb)
    mb.add_argument("--delta", type=float, default=0.0)
    mb.add_argument("--out", default="mesh.txt")
    _add_common(mb)
    mi = msub.add_parser("info")
    _add_mesh_opts(mi)
    mi.add_argument("--delta", type=float, default=0.0)
    _add_common(mi)
    return ap


def _apply_config_file(args, parser):
    """Fill non-overridden options from a key = value file."""
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    overrides = {}
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"malformed config line: {line!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        overrides[key.replace("-", "_")] = val
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in sys.argv[1:] if a.startswith("--")}
    for key, val in overrides.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, val.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(val))
        elif isinstance(current, float):
            setattr(args, key, float(val))
        else:
            setattr(args, key, val)
    return args


def _canonical_config(args, skip=("dry_run", "config")):
    items = {k: v for k, v in sorted(vars(args).items())
             if k not in skip and v is not None}
    return "\n".join(f"{k} = {v}" for k, v in items.items())


def _out_dir(args):
    out = os.environ.get("GNF_OUT_DIR", args.out_dir)
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cross_section(args, delta=None):
    rect = tuple(float(t) for t in args.rect.split(","))
    if len(rect) != 2:
        raise UsageError("--rect needs two comma-separated numbers")
    return build_cross_section(shape=args.shape, h=args.h,
                               delta=args.delta if delta is None else delta,
                               rect=rect, mesh_file=args.mesh_file)


def _solver_options(args):
    return SolverOptions(scheme=args.scheme, damping=args.damping,
                         rtol=args.rtol, atol=args.atol,
                         max_iter=args.max_iter, initial_guess=args.guess,
                         continuation=not args.no_continuation)


def _flow_params(args):
    return FlowParams(p=args.p, re=args.re, delta=args.delta, g=args.g,
                      gamma_dot=args.gamma_dot)


def _parse_sigma(spec, params):
    if spec == "dean":
        return SigmaSpec.dean_default(params)
    if spec.startswith("power:"):
        c0, alpha = (float(t) for t in spec[len("power:"):].split(","))
        return SigmaSpec.power(c0, alpha)
    raise UsageError(f"unknown sigma spec {spec!r}")


def _print_records(records, label):
    summary = summarize(records)
    failures = sum(v["failures"] for v in summary.values())
    for claim in sorted(summary):
        v = summary[claim]
        state = "PASS" if v["failures"] == 0 else "FAIL"
        print(f"[{state}] {claim}: {v['n']} checks, "
              f"worst margin {v['worst_margin']:.3e}")
    print(f"{label}: {len(records)} records, {failures} failures")
    return failures == 0


def cmd_solve(args):
    cs = _cross_section(args)
    params = _flow_params(args)
    opts = _solver_options(args)
    u, pc, rep = solve_full(params, cs, opts)
    out = _out_dir(args)
    nodes = cs.mesh.num_nodes
    pressure_nodes = np.zeros(nodes)
    pressure_nodes[:cs.num_vertices] = pc
    edge = cs.mesh.edges
    pressure_nodes[cs.num_vertices:] = 0.5 * (pc[edge[:, 0]] + pc[edge[:, 1]])
    write_vtk(out / "fields.vtk", cs.mesh, point_vectors={"velocity": u},
              point_scalars={"pressure": pressure_nodes})
    fileio.write_coefficients(out / "coefficients.txt", u, pc)
    fileio.write_report(out / "report.json", {
        "params": {"p": params.p, "re": params.re, "delta": params.delta,
                   "g": params.g, "gamma_dot": params.gamma_dot,
                   "dean": params.dean},
        "mesh": {"shape": cs.mesh.shape, "cells": cs.num_cells,
                 "vertices": cs.num_vertices, "area": cs.area,
                 "m": cs.m, "n": cs.n, "b_l1": cs.b_l1},
        "report": rep.as_dict(),
    })
    print(f"converged = {rep.converged} after {rep.iterations} iterations "
          f"({rep.wall_time:.2f} s)")
    for key in ("dstar_2B", "dstar_pB", "grad_u3_2B", "du_2B",
                "pressure_pprime"):
        print(f"  {key} = {rep.norms[key]:.6e}")
    for b in rep.bounds:
        print(f"  [{'PASS' if b.passed else 'FAIL'}] {b.statement}: "
              f"{b.lhs:.4e} <= {b.rhs:.4e}")
    print(f"  unidirectional = {rep.flags['unidirectional']}, "
          f"uniqueness_guaranteed = {rep.flags['uniqueness_guaranteed']}")
    print(f"outputs in {out}")
    return 0 if rep.converged and rep.flags["all_bounds_pass"] else 1


def _parse_grid(spec):
    grid = {"p": (1.5, 2.0, 3.0), "delta": (0.0, 0.1, 0.3),
            "refrac": (0.0, 0.3), "g": (0.5, 1.0)}
    if spec and spec != "default":
        for part in spec.split(";"):
            key, vals = part.split(":")
            if key not in grid:
                raise UsageError(f"unknown grid axis {key!r}")
            grid[key] = tuple(float(t) for t in vals.split(","))
    return grid


def cmd_verify(args):
    plist = tuple(float(t) for t in args.p_list.split(","))
    deltas = (args.delta,) if args.delta is not None else (0.0, 0.3, 0.7)
    cache = {}

    def cs_factory(d):
        if d not in cache:
            cache[d] = _cross_section(args, delta=d)
        return cache[d]

    if args.suite == "tensors":
        records = fuzz_tensor_inequalities(args.seed, args.n, plist)
        records += fuzz_jacobian_order(args.seed)
    elif args.suite == "korn":
        records = fuzz_korn(cs_factory, args.seed, args.fields, deltas)
        from .harness import fuzz_korn_inequality
        records += fuzz_korn_inequality(
            cs_factory, args.seed, max(10, args.fields // 2),
            deltas=tuple(d for d in deltas if d < 0.5) or (0.0,))
    elif args.suite == "poincare":
        records = fuzz_poincare(cs_factory, args.seed, args.fields,
                                deltas=tuple(d for d in deltas))
    elif args.suite == "sobolev":
        records = fuzz_sobolev(cs_factory, args.seed, args.fields)
    elif args.suite == "sigma":
        records = fuzz_sigma_estimates(cs_factory, args.seed, args.fields)
    elif args.suite == "apriori":
        grid = _parse_grid(args.grid)
        cs = cs_factory(0.0)
        records = apriori_campaign(
            cs, p_list=grid["p"], deltas=grid["delta"],
            re_fracs=grid["refrac"], g_list=grid["g"], threads=args.threads)
    else:
        records = fuzz_inequalities(cs_factory, args.seed, args.n, args.fields)

    out = _out_dir(args)
    path = out / f"verify_{args.suite}.csv"
    with open(path, "w") as f:
        records_to_csv(records, f)
    ok = _print_records(records, f"verify {args.suite}")
    print(f"records written to {path}")
    return 0 if ok else 1


def cmd_study(args):
    out = _out_dir(args)
    opts = _solver_options(args)
    if args.study == "dean":
        cs = _cross_section(args, delta=0.0)
        res = [float(t) for t in args.re.split(",")]
        deltas = [float(t) for t in args.deltas.split(",")]
        params = FlowParams(p=args.p, re=0.0, delta=0.0, g=args.g,
                            gamma_dot=args.gamma_dot)
        study = dean_scaling_study(params, cs, res, deltas, opts)
        cols = ["p", "re", "delta", "de", "norm_Du_2B", "bound", "bound_ratio"]
        with open(out / "study_dean.csv", "w") as f:
            rows_to_csv(study.rows, cols, f)
        for re, slope in sorted(study.slopes.items()):
            print(f"re = {re:g}: slope of log|Du| vs log delta = {slope:.4f}")
        print(f"bounds hold everywhere: {study.all_bounds_hold}; "
              f"complete: {study.complete}")
        print(f"rows written to {out / 'study_dean.csv'}")
        return 0 if study.complete and study.all_bounds_hold else 1
    if args.study == "delta-approx":
        cs = _cross_section(args, delta=0.0)
        deltas = [float(t) for t in args.deltas.split(",")]
        kt = kappa_constants(_flow_params(args).replace(delta=max(deltas)), cs)
        params = _flow_params(args).replace(re=args.re_frac * kt.re_unique)
        sigma = _parse_sigma(args.sigma, params)
        study = delta_approx_study(params, cs, sigma, deltas, opts)
        cols = ["p", "re", "delta", "de", "norm_Du_2B", "norm_Dw_2",
                "diff_D2", "diff_Dp", "slope_D2", "slope_Dp"]
        with open(out / "study_delta_approx.csv", "w") as f:
            rows_to_csv(list(study.rows()), cols, f)
        print(f"sigma = {study.sigma_name}, Re = {params.re:.6g} "
              f"(cap {study.re_cap:.6g})")
        print(f"observed orders: diff_D2 ~ delta^{study.slope_d2:.3f}, "
              f"diff_Dp ~ delta^{study.slope_dp:.3f} "
              f"(guaranteed {study.order_dp_expected:.3g} in the p-norm)")
        print(f"rows written to {out / 'study_delta_approx.csv'}")
        return 0 if study.complete else 1
    if args.study == "uniqueness":
        cs = _cross_section(args)
        kt = kappa_constants(_flow_params(args), cs)
        params = _flow_params(args).replace(re=args.re_frac * kt.re_unique)
        worst, records, reports = uniqueness_probe(
            params, cs, opts, n_guesses=args.n_guesses, seed=args.seed)
        with open(out / "study_uniqueness.csv", "w") as f:
            records_to_csv(records, f)
        print(f"Re = {params.re:.6g} (threshold {kt.re_unique:.6g}); "
              f"max pairwise distance = {worst:.3e}")
        ok = records[0].passed and all(r.converged for r in reports)
        print(f"all solves agree: {ok}")
        return 0 if ok else 1
    raise UsageError(f"unknown study {args.study!r}")


def cmd_mesh(args):
    cs = _cross_section(args)
    if args.action == "build":
        write_mesh(cs.mesh, args.out)
        print(f"mesh written to {args.out}")
    lo, mean, hi = cs.mesh.edge_length_stats()
    print(f"shape = {cs.mesh.shape}, cells = {cs.num_cells}, "
          f"vertices = {cs.num_vertices}, nodes = {cs.mesh.num_nodes}")
    print(f"edge lengths: min {lo:.4g}, mean {mean:.4g}, max {hi:.4g}")
    print(f"area = {cs.area:.12g}, m = {cs.m:.12g}, n = {cs.n:.12g}, "
          f"b_l1 = {cs.b_l1:.12g} (delta = {cs.delta:g})")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(args, parser)
        if getattr(args, "dry_run", False):
            print(_canonical_config(args))
            return 0
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "study":
            return cmd_study(args)
        if args.command == "mesh":
            return cmd_mesh(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
