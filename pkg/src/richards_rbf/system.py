"""Global sparse collocation system for one Picard iteration."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import pointset as ps
from .constitutive import coefficients
from .errors import ConfigurationError, SolverError, StateError
from .rbf_stencil import StencilOperators

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class SparseSystem:
    """``matrix @ u = rhs`` with one row per node, in node order."""

    matrix: sp.csr_matrix
    rhs: np.ndarray


class Assembler:
    """Caches the stencil weights and sparsity pattern of one geometry.

    Only the interior row values change between Picard iterations; they are
    rebuilt from the cached elementary weights in a single vectorised pass.
    """

    def __init__(self, nodes, stencils, eps, soil, operators=None, neumann="reflect"):
        self.nodes = nodes
        self.stencils = stencils
        self.soil = soil
        self.ops = operators or StencilOperators(nodes, stencils, eps, neumann)
        N, n_s = self.ops.indices.shape
        self.indptr = np.arange(0, N * n_s + 1, n_s, dtype=np.int64)
        self.col = self.ops.indices.ravel()
        self.interior = self.ops.pde_rows
        self.neumann = (nodes.kind == ps.NEUMANN_SIDE) & ~self.interior
        self.dirichlet = nodes.dirichlet
        base = np.zeros((N, n_s))
        base[self.dirichlet, 0] = 1.0
        base[self.neumann] = self.ops.w_normal[self.neumann]
        self._base = base

    def assemble(self, state_h, u_prev, dt, bc_values):
        """Build the system for suction ``state_h`` at the current iterate.

        Parameters
        ----------
        state_h : ndarray
            Suction head of the current Picard iterate (sets A and B).
        u_prev : ndarray
            Kirchhoff values at the previous time level.
        dt : float
            Time step [min].
        bc_values : ndarray
            Kirchhoff values imposed at Dirichlet nodes (other entries ignored).
        """
        if not dt > 0:
            raise ConfigurationError(f"dt must be positive (got {dt})")
        state_h = np.asarray(state_h, dtype=float)
        _first_bad(state_h, "suction head is not finite")
        A, B = coefficients(state_h, self.soil)
        _first_bad(A, "coefficient A is not finite")
        _first_bad(B, "coefficient B is not finite")
        ops = self.ops
        data = self._base.copy()
        it = self.interior
        data[it] = ((A[it] / dt)[:, None] * ops.w_eval[it] - ops.w_lap[it]
                    - B[it][:, None] * ops.w_dz[it])
        rhs = np.zeros(self.nodes.N)
        rhs[it] = A[it] / dt * np.asarray(u_prev, dtype=float)[it]
        rhs[self.dirichlet] = np.asarray(bc_values, dtype=float)[self.dirichlet]
        N = self.nodes.N
        M = sp.csr_matrix((data.ravel(), self.col.copy(), self.indptr.copy()),
                          shape=(N, N))
        M.sum_duplicates()
        return SparseSystem(M, rhs)


def _first_bad(values, message):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise StateError(int(bad[0]), message)


def assemble(nodes, stencils, eps, state_h, u_prev, dt, bc_values, soil,
             neumann="reflect"):
    """One-shot assembly; see :meth:`Assembler.assemble`."""
    return Assembler(nodes, stencils, eps, soil, neumann=neumann).assemble(
        state_h, u_prev, dt, bc_values)


def residual(system, u):
    return float(np.max(np.abs(system.matrix @ u - system.rhs)))


def solve(system):
    """Direct sparse LU solve with a residual check.

    Raises
    ------
    SolverError
        If the factorisation fails or ``|M u - rhs|_inf`` exceeds
        ``1e-10 * (1 + |rhs|_inf)``.
    """
    try:
        lu = spla.splu(system.matrix.tocsc(), permc_spec="MMD_AT_PLUS_A")
        u = lu.solve(system.rhs)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorisation failed: {exc}") from exc
    res = residual(system, u) if np.all(np.isfinite(u)) else np.inf
    limit = RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(system.rhs))))
    if not res <= limit:
        raise SolverError(f"residual {res:.3e} exceeds {limit:.3e}", residual=res)
    return u


def dump_matrix(system, stream):
    """Write ``row col value`` lines (0-based) followed by nothing else."""
    coo = system.matrix.tocoo()
    for i, j, v in zip(coo.row, coo.col, coo.data):
        stream.write(f"{i} {j} {float(v)!r}\n")
