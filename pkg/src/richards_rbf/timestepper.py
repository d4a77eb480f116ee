"""Backward Euler time stepping with Picard linearisation.

Each Picard iteration solves the linear collocation system

    (A/dt) u - lap(u) - B du/dz = (A/dt) u^n

with ``A`` and ``B`` evaluated at the previous iterate.  The fixed-point
iteration is accelerated with Anderson mixing applied to ``log(-u)``; the
stopping rule is unchanged, ``max|G(u^m) - u^m| <= tol`` where ``G`` is one
plain Picard solve, and the accepted iterate is always a Picard output.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from . import pointset as ps
from .constitutive import (kirchhoff, kirchhoff_inverse, moisture_content,
                           saturation_from_suction, suction_from_saturation)
from .errors import ConfigurationError, DomainError, NonConvergenceError, StateError
from .system import Assembler, residual, solve

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KirchhoffField:
    """Kirchhoff variable and derived quantities at one time level."""

    t: float
    u: np.ndarray
    h: np.ndarray
    S: np.ndarray
    theta: np.ndarray

    @classmethod
    def from_u(cls, t, u, soil):
        u = np.array(u, dtype=float)
        try:
            h = kirchhoff_inverse(u, soil)
        except DomainError:
            bad = int(np.flatnonzero(~(u < 0))[0])
            raise StateError(bad, f"Kirchhoff value {u[bad]!r} is not negative") from None
        S = saturation_from_suction(h, soil)
        arrays = [u, h, S, moisture_content(S, soil)]
        for a in arrays:
            a.flags.writeable = False
        return cls(float(t), *arrays)


@dataclass(frozen=True)
class PicardReport:
    """Convergence history of one time step."""

    iterations: int
    deltas: tuple
    converged: bool
    residual: float = 0.0


@dataclass
class StepContext:
    """Everything a Picard step needs besides the previous field."""

    assembler: Assembler
    soil: object
    bc_values: np.ndarray
    tol: float = 1e-8
    max_picard: int = 50
    anderson_depth: int = 5


def boundary_values(nodes, soil):
    """Kirchhoff values at Dirichlet nodes: theta_s on top, theta_0 at the bottom."""
    u_top = kirchhoff(soil.h_cap, soil)
    u_bot = kirchhoff(suction_from_saturation(soil.S_0, soil), soil)
    bc = np.full(nodes.N, np.nan)
    bc[nodes.kind == ps.DIRICHLET_TOP] = u_top
    bc[nodes.kind == ps.DIRICHLET_BOTTOM] = u_bot
    return bc


def initial_field(nodes, soil, scenario=None):
    """Uniform initial moisture ``theta_0`` with boundary values imposed."""
    if not soil.theta_r < soil.theta_0 <= soil.theta_s:
        raise ConfigurationError("initial moisture must satisfy theta_r < theta_0 <= theta_s")
    u0 = kirchhoff(suction_from_saturation(soil.S_0, soil), soil)
    u = np.full(nodes.N, float(u0))
    bc = boundary_values(nodes, soil)
    d = nodes.dirichlet
    u[d] = bc[d]
    return KirchhoffField.from_u(0.0, u, soil)


def _anderson(X, F):
    """Anderson-mixed update from histories of iterates and residuals."""
    x, f = X[-1], F[-1]
    if len(X) == 1:
        return x + f
    dX = np.diff(np.array(X), axis=0).T
    dF = np.diff(np.array(F), axis=0).T
    gamma = np.linalg.lstsq(dF, f, rcond=None)[0]
    return x + f - (dX + dF) @ gamma


def picard_step(field_n, dt, ctx):
    """Advance ``field_n`` by ``dt``; returns ``(field, PicardReport)``."""
    soil = ctx.soil
    u_prev = field_n.u
    dmask = ctx.assembler.dirichlet
    um = np.array(u_prev)
    h = field_n.h
    deltas = []
    X, F = [], []
    for _ in range(ctx.max_picard):
        system = ctx.assembler.assemble(h, u_prev, dt, ctx.bc_values)
        g = solve(system)
        g[dmask] = ctx.bc_values[dmask]
        delta = float(np.max(np.abs(g - um)))
        deltas.append(delta)
        if not np.isfinite(delta):
            break
        if delta <= ctx.tol:
            out = KirchhoffField.from_u(field_n.t + dt, g, soil)
            return out, PicardReport(len(deltas), tuple(deltas), True,
                                     residual(system, g))
        if ctx.anderson_depth > 0 and np.all(g < 0) and np.all(um < 0):
            X.append(np.log(-um))
            F.append(np.log(-g) - X[-1])
            del X[:-(ctx.anderson_depth + 1)], F[:-(ctx.anderson_depth + 1)]
            cand = -np.exp(_anderson(X, F))
            um = cand if np.all(np.isfinite(cand)) and np.all(cand < 0) else g
        else:
            X.clear()
            F.clear()
            um = g
        h = KirchhoffField.from_u(0.0, um, soil).h
    raise NonConvergenceError(
        f"Picard iteration did not reach tol={ctx.tol:g} in {ctx.max_picard} "
        f"iterations at t={field_n.t + dt:g} (last delta {deltas[-1]:.3e})",
        deltas)


@dataclass
class Trajectory:
    """Fields at the scheduled output times plus per-step diagnostics."""

    nodes: object
    soil: object
    fields: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def times(self):
        return [f.t for f in self.fields]


def step_schedule(T, dt, output_times):
    """Number of steps and the step indices at which output is due."""
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ConfigurationError(f"T={T} is not a multiple of dt={dt}")
    marks = []
    for t in output_times:
        k = int(round(t / dt))
        if abs(k * dt - t) > 1e-9 * max(1.0, t):
            raise ConfigurationError(f"output time {t} is not a multiple of dt={dt}")
        marks.append(k)
    return n_steps, marks


def build_nodes(scenario):
    if scenario.dimension == 1:
        return ps.grid_1d(scenario.L, scenario.N_z)
    return ps.grid_2d(scenario.l, scenario.L, scenario.N_x, scenario.N_z)


def make_context(scenario, nodes=None):
    nodes = nodes if nodes is not None else build_nodes(scenario)
    soil = scenario.soil
    stencils = ps.build_stencils(nodes, scenario.n_s)
    assembler = Assembler(nodes, stencils, scenario.eps, soil, neumann=scenario.neumann)
    return StepContext(assembler, soil, boundary_values(nodes, soil),
                       scenario.tol, scenario.max_picard, scenario.anderson_depth)


def run_transient(scenario, ctx=None):
    """Integrate ``scenario`` to ``scenario.T``.

    Returns a :class:`Trajectory` holding the fields at
    ``scenario.output_times``.  On failure the raised error carries the
    partial trajectory in its ``trajectory`` attribute.
    """
    ctx = ctx or make_context(scenario)
    nodes = ctx.assembler.nodes
    soil = ctx.soil
    n_steps, marks = step_schedule(scenario.T, scenario.dt, scenario.output_times)
    traj = Trajectory(nodes, soil)
    f = initial_field(nodes, soil)
    if 0 in marks:
        traj.fields.append(f)
    try:
        for n in range(1, n_steps + 1):
            f, report = picard_step(f, scenario.dt, ctx)
            f = KirchhoffField.from_u(n * scenario.dt, f.u, soil)
            traj.reports.append(report)
            log.info("step %d t=%g picard=%d delta=%.3e residual=%.3e",
                     n, f.t, report.iterations, report.deltas[-1], report.residual)
            if n in marks:
                traj.fields.append(f)
    except Exception as exc:
        exc.trajectory = traj
        raise
    return traj
