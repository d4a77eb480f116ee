"""Multiquadric kernel, local interpolation matrices and collocation weights.

For a stencil centred at ``x_s`` with nodes ``x_k`` the weight row ``w`` of a
linear operator ``L`` solves ``Phi^T w = psi`` with ``psi_k = L Phi_k(x_s)``,
so that ``w @ u[stencil]`` approximates ``(L u)(x_s)``.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from . import pointset as ps
from .errors import ConfigurationError, IllConditionedStencil

log = logging.getLogger(__name__)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class KernelParams:
    """Shape parameter of the multiquadric kernel [1/cm]."""

    epsilon: float = 0.6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError(f"eps must be positive (got {self.epsilon})")


def _eps(eps):
    if isinstance(eps, KernelParams):
        return eps.epsilon
    return KernelParams(float(eps)).epsilon


@dataclass(frozen=True)
class WeightRow:
    """Sparse operator row: ``weights`` applied at global ``indices``."""

    indices: np.ndarray
    weights: np.ndarray

    def apply(self, values):
        return float(self.weights @ np.asarray(values)[self.indices])


def mq(r, eps):
    """Multiquadric ``sqrt(1 + (eps r)^2)``."""
    e = _eps(eps)
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + (e * r) ** 2)


def _diff(x, x_k):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_k = np.atleast_1d(np.asarray(x_k, dtype=float))
    if x.shape[-1] != x_k.shape[-1]:
        raise ConfigurationError("positions must share their dimension")
    return x - x_k


def mq_grad(x, x_k, eps):
    """Gradient of ``Phi(|x - x_k|)`` with respect to ``x``."""
    e = _eps(eps)
    d = _diff(x, x_k)
    r = np.linalg.norm(d, axis=-1)
    return e**2 * d / mq(r, e)[..., None]


def mq_dz(x, x_k, eps):
    """Vertical derivative ``eps^2 (z - z_k) / Phi``; z is the last coordinate."""
    return mq_grad(x, x_k, eps)[..., -1]


def mq_laplacian(x, x_k, eps, dim):
    """Laplacian of ``Phi(|x - x_k|)`` in ``dim`` dimensions.

    Equals ``eps^2 (dim + (dim - 1) eps^2 r^2) / (1 + eps^2 r^2)^(3/2)``.
    """
    if dim not in (1, 2):
        raise ConfigurationError(f"unsupported dimension {dim}")
    e = _eps(eps)
    r = np.linalg.norm(_diff(x, x_k), axis=-1)
    q = (e * r) ** 2
    return e**2 * (dim + (dim - 1) * q) / (1.0 + q) ** 1.5


def _stencil_points(stencil, nodes):
    idx = np.asarray(stencil.neighbors, dtype=np.int64)
    return idx, nodes.coords[idx]


def _check_condition(Phi, center):
    cond = np.linalg.cond(Phi)
    if not np.all(np.isfinite(cond)) or np.any(cond > COND_LIMIT):
        bad = np.atleast_1d(cond)
        worst = int(np.argmax(np.where(np.isfinite(bad), bad, np.inf)))
        c = center if np.ndim(center) == 0 else int(np.asarray(center)[worst])
        raise IllConditionedStencil(c, float(bad[worst]))
    return cond


def local_matrix(stencil, nodes, eps):
    """Symmetric interpolation matrix ``Phi_ij = Phi(|x_i - x_j|)``."""
    _, pts = _stencil_points(stencil, nodes)
    r = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    Phi = mq(r, eps)
    _check_condition(Phi, stencil.center)
    return Phi


def _weights(stencil, nodes, eps, psi):
    idx, _ = _stencil_points(stencil, nodes)
    Phi = local_matrix(stencil, nodes, eps)
    w = scipy.linalg.solve(Phi.T, psi)
    return WeightRow(idx, w)


def interior_row(stencil, nodes, eps, A_s, B_s, dt):
    """Row of ``L = A_s/dt - lap - B_s d/dz`` at the stencil centre."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive (got {dt})")
    idx, pts = _stencil_points(stencil, nodes)
    xs = nodes.coords[stencil.center]
    psi = (A_s / dt) * mq(np.linalg.norm(xs - pts, axis=-1), eps) \
        - mq_laplacian(xs, pts, eps, nodes.dim) - B_s * mq_dz(xs, pts, eps)
    return _weights(stencil, nodes, eps, psi)


def boundary_row(stencil, nodes, eps, kind, normal=None):
    """Dirichlet (point evaluation) or Neumann (``n . grad``) row.

    Parameters
    ----------
    kind : {"dirichlet", "neumann"}
    normal : array_like, optional
        Outward unit normal, required for ``kind="neumann"``.
    """
    idx, pts = _stencil_points(stencil, nodes)
    xs = nodes.coords[stencil.center]
    if kind == "dirichlet":
        psi = mq(np.linalg.norm(xs - pts, axis=-1), eps)
    elif kind == "neumann":
        if normal is None:
            raise ConfigurationError("neumann rows need a normal vector")
        psi = mq_grad(xs, pts, eps) @ np.asarray(normal, dtype=float)
    else:
        raise ConfigurationError(f"unknown boundary kind {kind!r}")
    return _weights(stencil, nodes, eps, psi)


def _batch_weights(pts, xs, normals, e, dim):
    """Elementary weights for stacked stencils ``pts`` of shape (n, n_s, d)."""
    r = np.linalg.norm(pts[:, :, None, :] - pts[:, None, :, :], axis=-1)
    Phi = mq(r, e)
    cond = np.linalg.cond(Phi)
    xs = xs[:, None, :]
    rs = np.linalg.norm(xs - pts, axis=-1)
    grad = mq_grad(xs, pts, e)
    psi = np.stack([
        mq(rs, e),
        mq_laplacian(xs, pts, e, dim),
        grad[..., -1],
        np.einsum("nkd,nd->nk", grad, normals),
    ], axis=-1)
    W = np.linalg.solve(np.transpose(Phi, (0, 2, 1)), psi)
    return W, cond


class StencilOperators:
    """Weights of the elementary operators for every stencil of a geometry.

    Local matrices are factorised once.  The interior row for any ``A``,
    ``B`` and ``dt`` is then the linear combination
    ``(A/dt) w_eval - w_lap - B w_dz``, which equals :func:`interior_row`
    by linearity of the weight solve.

    Parameters
    ----------
    neumann : {"reflect", "collocate"}
        ``"collocate"`` gives Neumann nodes the row ``n . grad`` on their
        nearest-neighbour stencil.  ``"reflect"`` instead collocates the PDE
        on a stencil that includes mirror images across the boundary (see
        :func:`pointset.reflected_stencil`); the image weights are added to
        the node they mirror, which enforces zero normal flux by symmetry.

    Attributes
    ----------
    indices : ndarray, shape (N, n_s)
        Global column of every weight; may repeat within a reflected row.
    w_eval, w_lap, w_dz, w_normal : ndarray, shape (N, n_s)
        Weights of point evaluation, Laplacian, d/dz and ``n . grad``.
    pde_rows : ndarray of bool
        Rows that collocate the PDE (interior and reflected Neumann nodes).
    cond : ndarray, shape (N,)
        Condition numbers of the local matrices.
    """

    def __init__(self, nodes, stencils, eps, neumann="reflect"):
        if neumann not in ("reflect", "collocate"):
            raise ConfigurationError(f"unknown neumann mode {neumann!r}")
        e = _eps(eps)
        idx = np.array(stencils.indices)
        pts = nodes.coords[idx]
        W, cond = _batch_weights(pts, nodes.coords, nodes.normals, e, nodes.dim)
        neu = np.flatnonzero(nodes.kind == ps.NEUMANN_SIDE)
        self.pde_rows = nodes.kind == ps.INTERIOR
        if neumann == "reflect" and neu.size:
            n_s = idx.shape[1]
            tree = cKDTree(nodes.coords)
            pairs = [ps.reflected_stencil(nodes, s, n_s, tree) for s in neu]
            src = np.array([p[0] for p in pairs])
            rpts = np.array([p[1] for p in pairs])
            Wr, cond_r = _batch_weights(rpts, nodes.coords[neu],
                                        np.zeros((neu.size, nodes.dim)), e, nodes.dim)
            idx[neu], W[neu], cond[neu] = src, Wr, cond_r
            self.pde_rows = self.pde_rows | (nodes.kind == ps.NEUMANN_SIDE)
        if not np.all(np.isfinite(cond)) or np.any(cond > COND_LIMIT):
            bad = np.where(np.isfinite(cond), cond, np.inf)
            worst = int(np.argmax(bad))
            raise IllConditionedStencil(worst, float(bad[worst]))
        self.indices = idx
        self.eps = e
        self.neumann = neumann
        self.cond = cond
        self.w_eval, self.w_lap, self.w_dz, self.w_normal = (
            np.ascontiguousarray(W[..., j]) for j in range(4))
        card = self.w_eval[~self.pde_rows].copy()
        card[:, 0] -= 1.0
        self.cardinal_error = float(np.abs(card).max()) if card.size else 0.0
        log.info("local matrices: N=%d n_s=%d eps=%g max condition %.3e",
                 len(idx), idx.shape[1], e, float(cond.max()))
