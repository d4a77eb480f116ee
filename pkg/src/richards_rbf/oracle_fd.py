"""Independent 1D finite-volume reference solver in (theta, h) variables.

Vertex-centred grid on [0, L] with Dirichlet nodes at both ends and control
volumes of width dz around interior nodes.  Each backward Euler step solves
the mixed-form balance

    dz (theta(h) - theta^n) / dt = q_{j-1/2} - q_{j+1/2},
    q = K_face (dh/dz + 1)           (downward flux, z positive down)

with Newton's method in ``w = log h`` and a backtracking line search.  The
face conductivity is the integral mean of K over the two nodal suctions,
which stays finite when one side is at the very dry initial state.  Only the
soil functions are shared with the collocation solver.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .constitutive import (moisture_content, relative_permeability,
                           saturation_from_suction, suction_from_saturation)
from .errors import ConfigurationError, OracleError

log = logging.getLogger(__name__)

NEWTON_MAXIT = 60
STEP_CLIP = 5.0
RES_TOL = 1e-13


@dataclass(frozen=True)
class FdConfig:
    """Grid and schedule of an oracle run (boundary data fixed by the soil)."""

    N_z: int
    dt: float
    T: float
    soil: object
    L: float = 100.0
    output_times: tuple = ()

    def __post_init__(self):
        if int(self.N_z) != self.N_z or self.N_z < 3:
            raise ConfigurationError(f"N_z must be an integer >= 3 (got {self.N_z})")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive (got {self.dt})")
        if not self.T >= 0:
            raise ConfigurationError(f"T must be non-negative (got {self.T})")
        if not self.L > 0:
            raise ConfigurationError(f"L must be positive (got {self.L})")


@dataclass
class FdResult:
    """Oracle profiles and mass-balance diagnostics."""

    z: np.ndarray
    times: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    h: list = field(default_factory=list)
    inflow: float = 0.0
    storage_change: float = 0.0
    max_step_imbalance: float = 0.0
    iterations: list = field(default_factory=list)

    @property
    def mass_balance_error(self):
        """Relative mismatch between net boundary inflow and storage gain."""
        ref = max(abs(self.storage_change), abs(self.inflow))
        if ref == 0:
            return 0.0
        return abs(self.inflow - self.storage_change) / ref


class _Soil:
    """Conductivity functions of one soil in (h) form."""

    def __init__(self, soil):
        self.soil = soil
        self.hc, self.m, self.Ks = soil.h_cap, soil.m, soil.K_s

    def theta(self, h):
        return moisture_content(saturation_from_suction(h, self.soil), self.soil)

    def dtheta(self, h):
        S = saturation_from_suction(h, self.soil)
        return np.where(h > self.hc, -self.soil.d_theta * self.soil.lam / h * S, 0.0)

    def K(self, h):
        return self.Ks * relative_permeability(h, self.soil)

    def dK(self, h):
        return np.where(h > self.hc, -self.m / h * self.K(h), 0.0)

    def U(self, h):
        # antiderivative of K with U(inf) = 0; m > 1 on the dry branch
        hc, m = self.hc, self.m
        dry = -(hc / (m - 1.0)) * (np.maximum(h, hc) / hc) ** (1.0 - m)
        return self.Ks * np.where(h >= hc, dry, (h - hc) - hc / (m - 1.0))

    def face(self, h1, h2):
        """Integral-mean face conductivity and its partial derivatives."""
        dh = h2 - h1
        close = np.abs(dh) <= 1e-6 * np.minimum(h1, h2)
        dhs = np.where(close, 1.0, dh)
        mid = 0.5 * (h1 + h2)
        kb = np.where(close, self.K(mid), (self.U(h2) - self.U(h1)) / dhs)
        d_mid = 0.5 * self.dK(mid)
        d1 = np.where(close, d_mid, (kb - self.K(h1)) / dhs)
        d2 = np.where(close, d_mid, (self.K(h2) - kb) / dhs)
        return kb, d1, d2


def solve_fd_1d(cfg):
    """Run the oracle; profiles are stored at ``cfg.output_times`` (default T)."""
    soil = cfg.soil
    if soil.m <= 1.0:
        raise ConfigurationError("the oracle needs m > 1")
    fn = _Soil(soil)
    N, dt = int(cfg.N_z), float(cfg.dt)
    z = np.arange(N) * (cfg.L / (N - 1))
    z[-1] = cfg.L
    dz = z[1] - z[0]
    n_steps = int(round(cfg.T / dt))
    if abs(n_steps * dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise ConfigurationError(f"T={cfg.T} is not a multiple of dt={dt}")
    marks = {int(round(t / dt)) for t in (cfg.output_times or (cfg.T,))}

    h = np.full(N, float(suction_from_saturation(soil.S_0, soil)))
    h[0] = soil.h_cap

    def residual(hm, theta_n):
        kb, d1, d2 = fn.face(hm[:-1], hm[1:])
        grad = (hm[1:] - hm[:-1]) / dz + 1.0
        q = kb * grad
        R = (fn.theta(hm) - theta_n)[1:-1] * dz / dt - q[:-1] + q[1:]
        return R, q, kb, d1, d2, grad

    res = FdResult(z=z)

    def record(t, hh):
        res.times.append(t)
        res.h.append(hh.copy())
        res.theta.append(fn.theta(hh))

    storage0 = dz * fn.theta(h)[1:-1].sum()
    if 0 in marks:
        record(0.0, h)
    for n in range(1, n_steps + 1):
        theta_n = fn.theta(h)
        hm = h.copy()
        R, q, kb, d1, d2, grad = residual(hm, theta_n)
        for it in range(NEWTON_MAXIT):
            if np.max(np.abs(R)) * dt < RES_TOL:
                break
            # Jacobian in w = log h (chain rule factor h)
            dql = (d1 * grad - kb / dz) * hm[:-1]
            dqr = (d2 * grad + kb / dz) * hm[1:]
            diag = fn.dtheta(hm)[1:-1] * hm[1:-1] * dz / dt - dqr[:-1] + dql[1:]
            ab = np.zeros((3, N - 2))
            ab[0, 1:] = dqr[1:-1]
            ab[1] = diag
            ab[2, :-1] = -dql[1:-1]
            dw = np.clip(solve_banded((1, 1), ab, -R), -STEP_CLIP, STEP_CLIP)
            r0 = np.linalg.norm(R)
            alpha = 1.0
            while True:
                trial = hm.copy()
                trial[1:-1] = hm[1:-1] * np.exp(alpha * dw)
                out = residual(trial, theta_n)
                if np.linalg.norm(out[0]) <= (1 - 1e-4 * alpha) * r0 or alpha < 1e-4:
                    break
                alpha *= 0.5
            hm = trial
            R, q, kb, d1, d2, grad = out
        else:
            raise OracleError(
                f"Newton did not converge at step {n} (t={n * dt:g}); "
                f"max residual {np.max(np.abs(R)):.3e}")
        res.iterations.append(it)
        imbalance = abs(np.sum(R)) * dt
        res.max_step_imbalance = max(res.max_step_imbalance, imbalance)
        res.inflow += (q[0] - q[-1]) * dt
        h = hm
        if n in marks:
            record(n * dt, h)
    res.storage_change = dz * fn.theta(h)[1:-1].sum() - storage0
    log.info("oracle N_z=%d dt=%g: mass balance error %.3e, max Newton its %d",
             N, dt, res.mass_balance_error, max(res.iterations, default=0))
    return res


def self_convergence(soil, T, grids=(101, 201, 401), dt=0.01, L=100.0):
    """Successive max and RMS differences of oracle profiles at time ``T``.

    All profiles are sampled at the nodes of the coarsest grid, which are
    shared by every grid in ``grids`` when the counts double as (n-1)*2+1.
    """
    results = [solve_fd_1d(FdConfig(N, dt, T, soil, L)) for N in grids]
    z0 = results[0].z
    profiles = [np.interp(z0, r.z, r.theta[-1]) for r in results]
    diffs = [float(np.max(np.abs(b - a))) for a, b in zip(profiles, profiles[1:])]
    rms = [float(np.sqrt(np.mean((b - a) ** 2))) for a, b in zip(profiles, profiles[1:])]
    return results, diffs, rms
