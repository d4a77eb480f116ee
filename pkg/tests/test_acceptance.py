"""Acceptance criteria 1-9.

Each test prints one ``CRITERION n: PASS|FAIL`` line (also listed in the
terminal summary) and fails when its criterion fails.  The expensive runs
are cached in module-scoped fixtures.
"""
import time
from dataclasses import dataclass

import numpy as np
import pytest

from richards_rbf import pointset as ps
from richards_rbf import timestepper
from richards_rbf.config import parse_config
from richards_rbf.constitutive import SOILS, kirchhoff, kirchhoff_inverse
from richards_rbf.metrics import compare_profiles, rmse, total_mass
from richards_rbf.oracle_fd import FdConfig, self_convergence, solve_fd_1d
from richards_rbf.rbf_stencil import boundary_row, interior_row, mq, mq_dz, mq_grad, mq_laplacian
from richards_rbf.system import residual, solve
from richards_rbf.timestepper import initial_field, make_context, run_transient

from test_constitutive import quad_kirchhoff
from test_rbf_stencil import fd_dz, fd_laplacian

pytestmark = pytest.mark.slow

SC, LOAM = SOILS["sandy_clay"], SOILS["loam"]
TIMES_2D = "0, 10, 20, 30, 40, 50, 60"


def record(log, n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    log.append(line)
    assert ok, line


@dataclass
class Run:
    name: str
    scenario: object
    ctx: object = None
    trajectory: object = None
    seconds: float = 0.0
    residual_ratio: float = 0.0
    error: Exception = None


def run_recorded(name, text):
    """Run a scenario while checking every sparse solve's residual."""
    sc = parse_config(text)
    out = Run(name, sc, make_context(sc))
    ratios = [0.0]

    def checked(system):
        u = solve(system)
        ratios.append(residual(system, u) / (1.0 + np.abs(system.rhs).max()))
        return u

    with pytest.MonkeyPatch.context() as mp:
        mp.setattr(timestepper, "solve", checked)
        t0 = time.perf_counter()
        try:
            out.trajectory = run_transient(sc, out.ctx)
        except Exception as exc:  # recorded and reported by criterion 8
            out.error = exc
            out.trajectory = getattr(exc, "trajectory", None)
        out.seconds = time.perf_counter() - t0
    out.residual_ratio = max(ratios)
    return out


def one_d(soil, T, times, N_z=201):
    return (f"dimension=1\nsoil={soil}\nT={T}\nN_z={N_z}\nn_s=3\ndt=0.05\neps=0.6\n"
            f"output_times={times}\n")


@pytest.fixture(scope="module")
def oracle():
    """Oracle runs and their self-checks (criterion 9)."""
    results, diffs, rms = self_convergence(SC, 600.0, grids=(101, 201, 401), dt=0.01)
    loam = solve_fd_1d(FdConfig(401, 0.01, 1000.0, LOAM, output_times=(100.0, 1000.0)))
    runs = list(results) + [loam]
    return dict(sandy=results[-1], loam=loam, diffs=diffs, rms=rms,
                balance=max(r.mass_balance_error for r in runs),
                step=max(r.max_step_imbalance for r in runs))


@pytest.fixture(scope="module")
def oracle_ok(oracle):
    d = oracle["diffs"]
    return (oracle["balance"] <= 1e-6 and oracle["step"] <= 1e-8 * SC.d_theta * 100.0
            and all(b < a for a, b in zip(d, d[1:])))


@pytest.fixture(scope="module")
def runs_1d():
    return {
        "sandy_clay": run_recorded("1D sandy_clay", one_d(
            "sandy_clay", 600, ", ".join(str(t) for t in range(0, 601, 50)))),
        "loam": run_recorded("1D loam", one_d(
            "loam", 1000, ", ".join(str(t) for t in range(0, 1001, 50)))),
    }


@pytest.fixture(scope="module")
def runs_2d():
    out = {}
    for soil in ("sandy_clay", "loam"):
        two = run_recorded(f"2D {soil}", (
            f"dimension=2\nsoil={soil}\nT=60\nN_x=101\nN_z=101\nl=100\nL=100\n"
            f"dt=0.05\neps=0.6\nn_s=5\noutput_times={TIMES_2D}\n"))
        one = run_recorded(f"1D {soil} N_z=101", one_d(soil, 60, TIMES_2D, N_z=101))
        out[soil] = (two, one)
    return out


def test_criterion_9_oracle_self_checks(oracle, oracle_ok, acceptance_log):
    d = oracle["diffs"]
    record(acceptance_log, 9, oracle_ok,
           f"mass balance {oracle['balance']:.2e} (<=1e-6), max step imbalance "
           f"{oracle['step']:.2e}, successive max diffs {d[0]:.3e} > {d[1]:.3e}")


def test_criterion_1_sandy_clay(oracle, oracle_ok, runs_1d, acceptance_log):
    run = runs_1d["sandy_clay"]
    ok = oracle_ok and run.error is None
    detail = "oracle self-checks failed" if not oracle_ok else f"run error {run.error}"
    if ok:
        f = run.trajectory.fields[-1]
        ref = oracle["sandy"]
        rep = compare_profiles(run.trajectory.nodes.z, f.theta, ref.z, ref.theta[-1])
        ok = rep.rmse <= 2e-2 and rep.rel_l1 <= 2e-2 and run.seconds <= 120
        detail = (f"T=600 rmse={rep.rmse:.4e} rel_l1={rep.rel_l1:.4e} (<=2e-2) "
                  f"runtime {run.seconds:.1f}s (<=120s)")
    record(acceptance_log, 1, ok, detail)


def test_criterion_2_loam(oracle, oracle_ok, runs_1d, acceptance_log):
    run = runs_1d["loam"]
    ok = oracle_ok and run.error is None
    detail = "oracle self-checks failed" if not oracle_ok else f"run error {run.error}"
    if ok:
        ref = oracle["loam"]
        parts = []
        for t, th_ref in zip(ref.times, ref.theta):
            f = run.trajectory.fields[run.trajectory.times.index(t)]
            rep = compare_profiles(run.trajectory.nodes.z, f.theta, ref.z, th_ref)
            ok &= rep.rmse <= 2e-2 and rep.rel_l1 <= 2e-2
            parts.append(f"T={t:g} rmse={rep.rmse:.4e} rel_l1={rep.rel_l1:.4e}")
        detail = "; ".join(parts) + " (<=2e-2)"
    record(acceptance_log, 2, ok, detail)


def test_criterion_3_x_invariance(oracle_ok, runs_2d, acceptance_log):
    ok, parts = oracle_ok, []
    for soil, (two, one) in runs_2d.items():
        if two.error or one.error:
            ok = False
            parts.append(f"{soil}: run error {two.error or one.error}")
            continue
        n_z, n_x = two.trajectory.nodes.shape
        spread, err = 0.0, 0.0
        for f2, f1 in zip(two.trajectory.fields, one.trajectory.fields):
            th = f2.theta.reshape(n_z, n_x)
            spread = max(spread, float((th.max(axis=1) - th.min(axis=1)).max()))
            err = max(err, rmse(th.mean(axis=1), f1.theta))
        ok &= spread <= 1e-6 and err <= 1e-3 and two.seconds <= 900
        parts.append(f"{soil}: spread={spread:.2e} (<=1e-6) rmse_vs_1d={err:.3e} (<=1e-3) "
                     f"runtime {two.seconds:.0f}s (<=900s)")
    record(acceptance_log, 3, ok, "; ".join(parts))


def test_criterion_4_mass_curves(oracle_ok, runs_2d, acceptance_log):
    ok, parts = oracle_ok, []
    for soil, (two, one) in runs_2d.items():
        if two.error or one.error:
            ok = False
            parts.append(f"{soil}: run error")
            continue
        rel = max(abs(total_mass(f2, two.trajectory.nodes) / total_mass(f1, one.trajectory.nodes) - 1)
                  for f2, f1 in zip(two.trajectory.fields, one.trajectory.fields))
        ok &= rel <= 0.01
        parts.append(f"{soil}: max relative mass difference {rel:.3e} (<=1e-2)")
    record(acceptance_log, 4, ok, "; ".join(parts))


def test_criterion_5_kernel_derivatives(acceptance_log):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for dim in (1, 2):
        for _ in range(50):
            x, xk = rng.uniform(-5, 5, dim), rng.uniform(-5, 5, dim)
            for exact, approx in ((mq_dz(x, xk, 0.6), fd_dz(x, xk, 0.6)),
                                  (mq_laplacian(x, xk, 0.6, dim), fd_laplacian(x, xk, 0.6))):
                worst = max(worst, abs(exact - approx) / max(abs(exact), 1e-300))
    record(acceptance_log, 5, worst <= 1e-6,
           f"max relative error {worst:.2e} over 50 points x 2 dims (<=1e-6)")


def test_criterion_6_transform(acceptance_log):
    worst, trip = 0.0, 0.0
    for soil in (SC, LOAM):
        hs = np.geomspace(soil.h_cap / 10, 1e4 * soil.h_cap, 100)
        u = kirchhoff(hs, soil)
        ref = np.array([quad_kirchhoff(h, soil) for h in hs])
        worst = max(worst, float(np.max(np.abs(u - ref) / np.abs(ref))))
        back = kirchhoff_inverse(u, soil)
        big = hs > soil.h_cap
        trip = max(trip, float(np.max(np.abs(back[big] - hs[big]) / hs[big])))
    ok = worst <= 1e-8 and trip <= 1e-10
    record(acceptance_log, 6, ok,
           f"quadrature rel error {worst:.2e} (<=1e-8), round trip {trip:.2e} (<=1e-10)")


def _basis_exactness(nodes, stencils, eps, samples):
    worst = 0.0
    for s in samples:
        xs = nodes.coords[s]
        if nodes.kind[s] == ps.NEUMANN_SIDE:
            row = boundary_row(stencils[s], nodes, eps, "neumann", nodes.normals[s])
            op = lambda xk: mq_grad(xs, xk, eps) @ nodes.normals[s]
        else:
            A_s, B_s, dt = 2.3, -0.1, 0.05
            row = interior_row(stencils[s], nodes, eps, A_s, B_s, dt)
            op = lambda xk: ((A_s / dt) * mq(np.linalg.norm(xs - xk), eps)
                             - mq_laplacian(xs, xk, eps, nodes.dim) - B_s * mq_dz(xs, xk, eps))
        for k in stencils[s].neighbors:
            xk = nodes.coords[k]
            vals = mq(np.linalg.norm(nodes.coords - xk, axis=1), eps)
            exact = op(xk)
            worst = max(worst, abs(row.apply(vals) - exact) / max(abs(exact), 1.0))
    return worst


def test_criterion_7_collocation_identities(runs_1d, runs_2d, acceptance_log):
    runs = list(runs_1d.values()) + [r for pair in runs_2d.values() for r in pair]
    card, exact = 0.0, 0.0
    for run in runs:
        asm = run.ctx.assembler
        f0 = initial_field(asm.nodes, run.ctx.soil)
        M = asm.assemble(f0.h, f0.u, run.scenario.dt, run.ctx.bc_values).matrix.tocsr()
        for d in np.flatnonzero(asm.dirichlet):
            row = M.getrow(d).toarray().ravel()
            row[d] -= 1.0
            card = max(card, float(np.abs(row).max()))
        nodes = asm.nodes
        interior = np.flatnonzero(nodes.kind == ps.INTERIOR)
        side = np.flatnonzero(nodes.kind == ps.NEUMANN_SIDE)
        samples = np.r_[interior[::max(1, interior.size // 20)], side[::max(1, side.size // 10)]]
        stencils = ps.build_stencils(nodes, run.scenario.n_s)
        exact = max(exact, _basis_exactness(nodes, stencils, run.scenario.eps, samples))
    res = max(r.residual_ratio for r in runs)
    ok = card <= 1e-12 and exact <= 1e-9 and res <= 1e-10
    record(acceptance_log, 7, ok,
           f"Dirichlet cardinality {card:.1e} (<=1e-12), basis exactness {exact:.1e} (<=1e-9), "
           f"max solve residual / (1+|rhs|) {res:.1e} (<=1e-10)")


def test_criterion_8_robustness(runs_1d, runs_2d, acceptance_log):
    runs = list(runs_1d.values()) + [r for pair in runs_2d.values() for r in pair]
    problems = []
    for run in runs:
        if run.error is not None:
            problems.append(f"{run.name}: {type(run.error).__name__}")
            continue
        traj, soil = run.trajectory, run.scenario.soil
        its = max(r.iterations for r in traj.reports)
        if not all(r.converged for r in traj.reports) or its > 50:
            problems.append(f"{run.name}: Picard {its} iterations")
        S_lo = min(f.S.min() for f in traj.fields)
        S_hi = max(f.S.max() for f in traj.fields)
        if S_lo < soil.S_0 - 1e-6 or S_hi > 1 + 1e-6:
            problems.append(f"{run.name}: S in [{S_lo:.6g}, {S_hi:.6g}]")
        masses = np.array([total_mass(f, traj.nodes) for f in traj.fields])
        if np.any(np.diff(masses) < -1e-9 * masses[0]):
            problems.append(f"{run.name}: mass decreases")
        if traj.nodes.dim == 1:
            th = np.array([f.theta for f in traj.fields])
            if np.any(np.diff(th, axis=1) > 1e-6) or np.any(np.diff(th, axis=0) < -1e-6):
                problems.append(f"{run.name}: front not monotone")
    worst = max(max(r.iterations for r in run.trajectory.reports)
                for run in runs if run.error is None)
    record(acceptance_log, 8, not problems,
           f"{len(runs)} runs, max Picard iterations {worst}; " + ("; ".join(problems) or "no violations"))
