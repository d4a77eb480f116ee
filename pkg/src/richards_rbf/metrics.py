"""Error metrics, total mass and profile regridding."""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigurationError, DomainError, UnsupportedError


@dataclass(frozen=True)
class ComparisonReport:
    """Agreement between a solver profile and a reference profile."""

    rmse: float
    rel_l1: float
    n_points: int
    interpolated: bool


def _pair(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ConfigurationError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ConfigurationError("vectors must not be empty")
    return a, b


def rmse(a, b):
    """Root mean squared difference."""
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def rel_l1(a, b_ref):
    """``sum|a - b_ref| / sum|b_ref|``."""
    a, b = _pair(a, b_ref)
    norm = np.sum(np.abs(b))
    if not norm > 0:
        raise DomainError("reference vector has zero L1 norm")
    return float(np.sum(np.abs(a - b)) / norm)


def total_mass(field, nodes):
    """Trapezoidal integral of theta over depth (per unit width in 2D)."""
    theta = np.asarray(field.theta if hasattr(field, "theta") else field, dtype=float)
    if nodes.shape is None:
        raise UnsupportedError("total_mass needs a tensor-grid node set")
    if nodes.dim == 1:
        return float(trapezoid(theta, nodes.z))
    n_z, n_x = nodes.shape
    grid = theta.reshape(n_z, n_x)
    x = nodes.coords[:n_x, 0]
    z = nodes.coords[::n_x, 1]
    per_depth = trapezoid(grid, x, axis=1) / (x[-1] - x[0])
    return float(trapezoid(per_depth, z))


def regrid_linear(z, values, targets):
    """Piecewise-linear interpolation of ``values(z)`` onto ``targets``."""
    z = np.asarray(z, dtype=float)
    values = np.asarray(values, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if z.shape != values.shape or z.ndim != 1 or z.size < 2:
        raise ConfigurationError("z and values must be matching 1D arrays")
    if np.any(np.diff(z) <= 0):
        raise DomainError("sample positions must be strictly increasing")
    if targets.size and (targets.min() < z[0] or targets.max() > z[-1]):
        raise DomainError("targets outside the sampled range; extrapolation refused")
    return np.interp(targets, z, values)


def compare_profiles(z, theta, z_ref, theta_ref):
    """Regrid the reference onto ``z`` if needed and compute the metrics."""
    z = np.asarray(z, dtype=float)
    same = np.shape(z) == np.shape(z_ref) and np.array_equal(z, z_ref)
    ref = np.asarray(theta_ref, dtype=float) if same else regrid_linear(z_ref, theta_ref, z)
    return ComparisonReport(rmse(theta, ref), rel_l1(theta, ref), int(z.size), not same)
