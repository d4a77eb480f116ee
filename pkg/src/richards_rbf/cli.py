"""Command-line interface: ``richards-rbf {run,oracle,compare,dump-matrix}``."""
import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .constitutive import kirchhoff, saturation_from_suction
from .config import load_config
from .errors import ConfigurationError, RichardsError
from .metrics import compare_profiles
from .oracle_fd import FdConfig, solve_fd_1d
from .output import (profile_path, write_mass_series, write_plot_script,
                     write_profile, write_profiles, write_run_meta, write_summary)
from .system import dump_matrix
from .timestepper import initial_field, make_context, run_transient

log = logging.getLogger("richards_rbf")

THREADS_ENV = "RICHARDS_RBF_THREADS"


def configure_threads(environ=os.environ):
    """Apply the thread cap from ``RICHARDS_RBF_THREADS`` (0 or unset = auto)."""
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be a non-negative integer") from None
    if n < 0:
        raise ConfigurationError(f"{THREADS_ENV} must be a non-negative integer")
    if n == 0:
        return None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def oracle_config(scenario):
    return FdConfig(scenario.oracle_N_z, scenario.oracle_dt, scenario.T, scenario.soil,
                    scenario.L, tuple(scenario.output_times))


def depth_profile(field, nodes):
    """Solver profile as a function of depth (mean over x in 2D)."""
    if nodes.dim == 1:
        return nodes.z, field.theta
    n_z, n_x = nodes.shape
    return nodes.coords[::n_x, 1], field.theta.reshape(n_z, n_x).mean(axis=1)


def compare(scenario):
    """Run solver and oracle; returns ``(trajectory, oracle, [(t, report)])``."""
    traj = run_transient(scenario)
    ref = solve_fd_1d(oracle_config(scenario))
    entries = []
    for f, t_ref, th_ref in zip(traj.fields, ref.times, ref.theta):
        z, th = depth_profile(f, traj.nodes)
        entries.append((f.t, compare_profiles(z, th, ref.z, th_ref)))
    return traj, ref, entries


def _run_meta_extra(traj, ctx=None):
    extra = [("version", __version__), ("N", traj.nodes.N), ("n_i", traj.nodes.n_i)]
    if ctx is not None:
        extra.append(("max_condition", float(ctx.assembler.ops.cond.max())))
    if traj.reports:
        its = [r.iterations for r in traj.reports]
        extra += [("steps", len(its)), ("picard_max", max(its)),
                  ("picard_mean", float(np.mean(its)))]
    return extra


def _write_oracle(ref, scenario, directory):
    os.makedirs(directory, exist_ok=True)
    soil = scenario.soil
    for t, th, h in zip(ref.times, ref.theta, ref.h):
        write_profile(profile_path(directory, t), ref.z, th,
                      saturation_from_suction(h, soil), h, kirchhoff(h, soil))
    path = os.path.join(directory, "oracle_meta.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("key,value\n")
        for k, v in [("N_z", scenario.oracle_N_z), ("dt", scenario.oracle_dt),
                     ("inflow", ref.inflow), ("storage_change", ref.storage_change),
                     ("mass_balance_error", ref.mass_balance_error),
                     ("max_step_imbalance", ref.max_step_imbalance)]:
            fh.write(f"{k},{v!r}\n")


def _solver_outputs(args, scenario, traj, ctx=None, reference=None):
    os.makedirs(args.out, exist_ok=True)
    write_profiles(traj, traj.nodes, args.out)
    write_mass_series(traj, traj.nodes, os.path.join(args.out, "mass_series.csv"))
    write_run_meta(os.path.join(args.out, "run_meta.csv"), scenario,
                   _run_meta_extra(traj, ctx))
    if args.plot_script:
        write_plot_script(args.out)
    if args.figures:
        from .plotting import render_figures
        render_figures(traj, traj.nodes, args.out, reference)


def cmd_run(args, scenario):
    ctx = make_context(scenario)
    traj = run_transient(scenario, ctx)
    _solver_outputs(args, scenario, traj, ctx)
    if traj.reports:
        log.warning("run finished: %d steps, max Picard iterations %d",
                    len(traj.reports), max(r.iterations for r in traj.reports))
    return 0


def cmd_oracle(args, scenario):
    ref = solve_fd_1d(oracle_config(scenario))
    _write_oracle(ref, scenario, args.out)
    log.warning("oracle finished: mass balance error %.3e", ref.mass_balance_error)
    return 0


def cmd_compare(args, scenario):
    traj, ref, entries = compare(scenario)
    reference = [(t, ref.z, th) for t, th in zip(ref.times, ref.theta)]
    _solver_outputs(args, scenario, traj, reference=reference)
    _write_oracle(ref, scenario, os.path.join(args.out, "oracle"))
    write_summary(os.path.join(args.out, "summary.csv"), entries)
    for t, r in entries:
        log.warning("t=%g rmse=%.4e rel_l1=%.4e", t, r.rmse, r.rel_l1)
    return 0


def cmd_dump_matrix(args, scenario):
    ctx = make_context(scenario)
    f0 = initial_field(ctx.assembler.nodes, ctx.soil)
    system = ctx.assembler.assemble(f0.h, f0.u, scenario.dt, ctx.bc_values)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "matrix_coo.txt"), "w", encoding="utf-8") as fh:
        dump_matrix(system, fh)
    with open(os.path.join(args.out, "rhs.txt"), "w", encoding="utf-8") as fh:
        fh.writelines(f"{v!r}\n" for v in system.rhs.tolist())
    return 0


COMMANDS = {"run": (cmd_run, "solve a scenario with the RBF collocation solver"),
            "oracle": (cmd_oracle, "run the 1D finite-difference reference solver"),
            "compare": (cmd_compare, "run both and write summary.csv with RMSE and relative L1"),
            "dump-matrix": (cmd_dump_matrix, "write the first Picard system in row/col/value form")}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="richards-rbf",
        description="Meshless RBF solver for unsaturated flow in 1D and 2D soils.",
        epilog=f"Environment: {THREADS_ENV} caps BLAS/LAPACK threads (0 = auto).")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        p.add_argument("--config", required=True, help="scenario file (key = value lines)")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--quiet", action="store_true", help="only print warnings and errors")
        p.add_argument("--plot-script", action="store_true",
                       help="also write plot_results.py next to the CSV files")
        p.add_argument("--figures", action="store_true",
                       help="also render PNG figures with matplotlib")
    return parser


def cli_main(argv=None):
    """Entry point; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr,
                        force=True)
    try:
        limits = configure_threads()
        scenario = load_config(args.config)
        func = COMMANDS[args.command][0]
        status = func(args, scenario)
        if limits is not None:
            limits.restore_original_limits()
        return status
    except ConfigurationError as exc:
        print(f"richards-rbf: configuration error: {exc}", file=sys.stderr)
        return 2
    except (RichardsError, OSError) as exc:
        print(f"richards-rbf: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
