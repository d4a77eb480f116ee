"""Collocation node sets and nearest-neighbour stencils."""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigurationError

INTERIOR = 0
DIRICHLET_TOP = 1
DIRICHLET_BOTTOM = 2
NEUMANN_SIDE = 3
KIND_NAMES = {INTERIOR: "interior", DIRICHLET_TOP: "dirichlet_top",
              DIRICHLET_BOTTOM: "dirichlet_bottom", NEUMANN_SIDE: "neumann_side"}

# Relative distance tolerance under which two neighbours count as tied.
TIE_RTOL = 1e-12


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


class NodeSet:
    """Immutable collocation point cloud with boundary tags.

    Parameters
    ----------
    coords : array_like, shape (N, d)
        Node positions in cm.  In 2D the columns are ``(x, z)``; ``z`` is the
        last column in every dimension and points downward.
    kind : array_like of int, shape (N,)
        One of ``INTERIOR``, ``DIRICHLET_TOP``, ``DIRICHLET_BOTTOM``,
        ``NEUMANN_SIDE``.
    normals : array_like, shape (N, d), optional
        Outward unit normals, used on Neumann nodes only.
    shape : tuple, optional
        ``(N_z,)`` or ``(N_z, N_x)`` when the nodes form a tensor grid.
    """

    def __init__(self, coords, kind, normals=None, shape=None, extent=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[1] not in (1, 2):
            raise ConfigurationError("coords must have shape (N, 1) or (N, 2)")
        kind = np.asarray(kind)
        if kind.shape != (coords.shape[0],):
            raise ConfigurationError("kind must have one entry per node")
        if not np.isin(kind, list(KIND_NAMES)).all():
            raise ConfigurationError("unknown node kind")
        if normals is None:
            normals = np.zeros_like(coords)
        if coords.shape[0] > 1:
            dmin = cKDTree(coords).query(coords, k=2)[0][:, 1].min()
            if not dmin > 0:
                raise ConfigurationError("node set contains coincident nodes")
        self.coords = _frozen(coords, float)
        self.kind = _frozen(kind, np.int8)
        self.normals = _frozen(normals, float)
        self.shape = tuple(shape) if shape is not None else None
        self.extent = tuple(extent) if extent is not None else None

    @property
    def N(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]

    @property
    def n_i(self):
        return int(np.count_nonzero(self.kind == INTERIOR))

    @property
    def z(self):
        return self.coords[:, -1]

    def mask(self, kind):
        return self.kind == kind

    @property
    def dirichlet(self):
        return (self.kind == DIRICHLET_TOP) | (self.kind == DIRICHLET_BOTTOM)

    def __repr__(self):
        return f"NodeSet(N={self.N}, dim={self.dim}, n_i={self.n_i}, shape={self.shape})"


def _check_count(name, n):
    if int(n) != n or n < 3:
        raise ConfigurationError(f"{name} must be an integer >= 3 (got {n})")


def grid_1d(L, N_z):
    """Uniform nodes ``z_j = j L / (N_z - 1)`` on [0, L]."""
    _check_count("N_z", N_z)
    if not L > 0:
        raise ConfigurationError(f"L must be positive (got {L})")
    z = np.arange(N_z) * (L / (N_z - 1))
    z[-1] = L
    kind = np.full(N_z, INTERIOR)
    kind[0], kind[-1] = DIRICHLET_TOP, DIRICHLET_BOTTOM
    return NodeSet(z[:, None], kind, shape=(N_z,), extent=(L,))


def grid_2d(l, L, N_x, N_z):
    """Tensor grid on [0, l] x [0, L], row-major with x fastest.

    Node ``(i, j)`` has index ``j * N_x + i``.  The top and bottom rows
    (corners included) are Dirichlet; the remaining nodes on ``x = 0`` and
    ``x = l`` are no-flux Neumann nodes.
    """
    _check_count("N_x", N_x)
    _check_count("N_z", N_z)
    if not (l > 0 and L > 0):
        raise ConfigurationError("l and L must be positive")
    x = np.arange(N_x) * (l / (N_x - 1))
    x[-1] = l
    z = np.arange(N_z) * (L / (N_z - 1))
    z[-1] = L
    X, Z = np.meshgrid(x, z)
    coords = np.column_stack([X.ravel(), Z.ravel()])
    kind = np.full((N_z, N_x), INTERIOR)
    normals = np.zeros((N_z, N_x, 2))
    kind[:, 0] = kind[:, -1] = NEUMANN_SIDE
    normals[:, 0, 0] = -1.0
    normals[:, -1, 0] = 1.0
    kind[0, :] = DIRICHLET_TOP
    kind[-1, :] = DIRICHLET_BOTTOM
    normals[0, :] = normals[-1, :] = 0.0
    return NodeSet(coords, kind.ravel(), normals.reshape(-1, 2),
                   shape=(N_z, N_x), extent=(l, L))


@dataclass(frozen=True)
class Stencil:
    """Local neighbourhood of one node; ``neighbors[0] == center``."""

    center: int
    neighbors: tuple

    def __len__(self):
        return len(self.neighbors)


class StencilSet:
    """All stencils of a node set, stored as an ``(N, n_s)`` index array."""

    def __init__(self, indices):
        self.indices = _frozen(indices, np.int64)

    @property
    def n_s(self):
        return self.indices.shape[1]

    def __len__(self):
        return self.indices.shape[0]

    def __getitem__(self, s):
        row = self.indices[s]
        return Stencil(int(row[0]), tuple(int(i) for i in row))

    def __iter__(self):
        return (self[s] for s in range(len(self)))


def _order_candidates(dist, idx, scale):
    """Sort candidate rows by distance, breaking near-ties by node index."""
    order = np.argsort(dist, axis=1, kind="stable")
    d = np.take_along_axis(dist, order, axis=1)
    i = np.take_along_axis(idx, order, axis=1)
    gap = np.diff(d, axis=1) > TIE_RTOL * scale
    cluster = np.concatenate([np.zeros((d.shape[0], 1), int),
                              np.cumsum(gap, axis=1)], axis=1)
    order = np.lexsort((i, cluster), axis=-1)
    return (np.take_along_axis(i, order, axis=1),
            np.take_along_axis(cluster, order, axis=1))


def build_stencils(nodes, n_s):
    """The ``n_s`` nearest nodes of every node, centre first.

    Distances that agree to ``TIE_RTOL`` relative to the domain size are
    treated as equal and resolved in favour of the lower node index, so the
    result does not depend on rounding in the grid coordinates.
    """
    N = nodes.N
    if int(n_s) != n_s or n_s < 1:
        raise ConfigurationError(f"n_s must be a positive integer (got {n_s})")
    if n_s > N:
        raise ConfigurationError(f"n_s={n_s} exceeds the number of nodes N={N}")
    coords = nodes.coords
    scale = float(np.ptp(coords, axis=0).max()) or 1.0
    tree = cKDTree(coords)
    k = min(N, 2 * n_s + 4)
    pending = np.arange(N)
    out = np.empty((N, n_s), dtype=np.int64)
    while pending.size:
        _, idx = tree.query(coords[pending], k=k)
        idx = np.asarray(idx).reshape(pending.size, k)
        # exact distances from coordinates rather than from the tree
        dist = np.linalg.norm(coords[idx] - coords[pending][:, None, :], axis=2)
        ordered, cluster = _order_candidates(dist, idx, scale)
        complete = (cluster[:, n_s - 1] < cluster[:, -1]) | (k == N)
        out[pending[complete]] = ordered[complete, :n_s]
        pending = pending[~complete]
        k = min(N, 2 * k)
    # the centre is always at distance 0 and hence first
    if not np.array_equal(out[:, 0], np.arange(N)):
        raise ConfigurationError("stencil centre is not its own nearest node")
    return StencilSet(out)


def reflected_stencil(nodes, s, n_s, tree=None):
    """Stencil of a Neumann node built on the nodes and their mirror images.

    Nodes are reflected across the boundary line through node ``s`` with the
    node's outward normal.  The ``n_s`` nearest points of the augmented set
    are returned as ``(sources, points)``: the real node index each point
    derives from and its position.  A mirror image that coincides with a real
    node is dropped, and among tied points real nodes precede images.
    """
    normal = nodes.normals[s]
    if not np.any(normal):
        raise ConfigurationError(f"node {s} has no boundary normal")
    coords = nodes.coords
    xs = coords[s]
    scale = float(np.ptp(coords, axis=0).max()) or 1.0
    k = min(nodes.N, 4 * n_s + 4)
    tree = tree if tree is not None else cKDTree(coords)
    _, cand = tree.query(xs, k=k)
    cand = np.atleast_1d(cand)
    real = coords[cand]
    offset = (real - xs) @ normal
    image = real - 2.0 * offset[:, None] * normal
    keep = offset < -TIE_RTOL * scale
    src = np.concatenate([cand, cand[keep]])
    pts = np.concatenate([real, image[keep]])
    is_image = np.concatenate([np.zeros(cand.size, int), np.ones(int(keep.sum()), int)])
    dist = np.linalg.norm(pts - xs, axis=1)
    order = np.argsort(dist, kind="stable")
    gap = np.diff(dist[order]) > TIE_RTOL * scale
    cluster = np.empty(order.size, int)
    cluster[order] = np.concatenate([[0], np.cumsum(gap)])
    order = np.lexsort((src, is_image, cluster))[:n_s]
    return src[order], pts[order]
