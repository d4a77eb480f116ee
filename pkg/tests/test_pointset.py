import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from richards_rbf import pointset as ps
from richards_rbf.errors import ConfigurationError


def brute_force_grid(n_x, n_z, hx, hz, s, n_s):
    """Oracle on a uniform grid: exact integer distances, then lower index."""
    j, i = divmod(s, n_x)
    keys = []
    for k in range(n_x * n_z):
        jk, ik = divmod(k, n_x)
        # squared distance in units where hx^2 and hz^2 are rationals
        keys.append(((ik - i) ** 2 * hx ** 2 + (jk - j) ** 2 * hz ** 2, k))
    return [k for _, k in sorted(keys)[:n_s]]


def test_grid_1d_examples():
    g = ps.grid_1d(100.0, 3)
    np.testing.assert_array_equal(g.z, [0.0, 50.0, 100.0])
    assert list(g.kind) == [ps.DIRICHLET_TOP, ps.INTERIOR, ps.DIRICHLET_BOTTOM]
    g = ps.grid_1d(100.0, 201)
    assert g.z[1] - g.z[0] == pytest.approx(0.5)
    assert g.n_i == 199 and g.N == 201
    with pytest.raises(ConfigurationError):
        ps.grid_1d(100.0, 2)
    with pytest.raises(ConfigurationError):
        ps.grid_1d(-1.0, 10)


def test_grid_2d_small():
    g = ps.grid_2d(100.0, 100.0, 3, 3)
    assert g.N == 9 and g.n_i == 1
    kinds = g.kind.reshape(3, 3)
    assert list(kinds[0]) == [ps.DIRICHLET_TOP] * 3
    assert list(kinds[2]) == [ps.DIRICHLET_BOTTOM] * 3
    assert list(kinds[1]) == [ps.NEUMANN_SIDE, ps.INTERIOR, ps.NEUMANN_SIDE]
    np.testing.assert_array_equal(g.normals[3], [-1.0, 0.0])
    np.testing.assert_array_equal(g.normals[5], [1.0, 0.0])


def test_grid_2d_200x200_size_and_ordering():
    g = ps.grid_2d(100.0, 100.0, 200, 200)
    assert g.N == 40000
    assert g.n_i == (200 - 2) * (200 - 2) == 39204
    i, j = 7, 11
    np.testing.assert_allclose(g.coords[j * 200 + i], [i * 100 / 199, j * 100 / 199])
    counts = np.bincount(g.kind, minlength=4)
    assert counts.sum() == g.N


def test_nodes_are_immutable_and_distinct():
    g = ps.grid_1d(1.0, 5)
    with pytest.raises(ValueError):
        g.coords[0, 0] = 3.0
    with pytest.raises(ConfigurationError):
        ps.NodeSet([[0.0], [0.0]], [ps.INTERIOR, ps.INTERIOR])


def test_stencil_1d_interior():
    st_ = ps.build_stencils(ps.grid_1d(100.0, 11), 3)
    for j in range(1, 10):
        assert st_[j].neighbors == (j, j - 1, j + 1)
    assert st_[0].neighbors == (0, 1, 2)
    assert st_[10].neighbors == (10, 9, 8)


def test_stencil_2d_star_and_corner():
    n = 9
    st_ = ps.build_stencils(ps.grid_2d(1.0, 1.0, n, n), 5)
    s = 4 * n + 4
    assert st_[s].neighbors == (s, s - n, s - 1, s + 1, s + n)
    assert st_[0].neighbors == tuple(brute_force_grid(n, n, 1, 1, 0, 5))
    assert st_[0].neighbors == (0, 1, n, n + 1, 2)


@pytest.mark.parametrize("shape", [(7, 9, 1.0, 1.0), (12, 5, 2.0, 3.0), (20, 20, 0.5025, 0.5025)])
def test_stencils_match_brute_force_on_grids(shape):
    n_x, n_z, lx, lz = shape
    g = ps.grid_2d(lx, lz, n_x, n_z)
    hx, hz = lx / (n_x - 1), lz / (n_z - 1)
    for n_s in (5, 9):
        st_ = ps.build_stencils(g, n_s)
        for s in range(g.N):
            assert list(st_.indices[s]) == brute_force_grid(n_x, n_z, hx, hz, s, n_s)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=400), st.integers(min_value=1, max_value=12),
       st.integers(min_value=0, max_value=2**31))
def test_stencils_match_brute_force_random(n, n_s, seed):
    n_s = min(n_s, n)
    pts = np.random.default_rng(seed).random((n, 2))
    nodes = ps.NodeSet(pts, np.zeros(n, int))
    st_ = ps.build_stencils(nodes, n_s)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    for s in range(n):
        assert list(st_.indices[s]) == list(np.argsort(d[s], kind="stable")[:n_s])


def test_stencil_properties_and_determinism():
    g = ps.grid_2d(3.0, 2.0, 15, 11)
    a = ps.build_stencils(g, 5)
    b = ps.build_stencils(g, 5)
    np.testing.assert_array_equal(a.indices, b.indices)
    for s, stencil in enumerate(a):
        assert stencil.center == s == stencil.neighbors[0]
        assert len(set(stencil.neighbors)) == 5


def test_build_stencils_errors():
    g = ps.grid_1d(1.0, 4)
    with pytest.raises(ConfigurationError):
        ps.build_stencils(g, 5)
    with pytest.raises(ConfigurationError):
        ps.build_stencils(g, 0)


def test_reflected_stencil_is_symmetric_star():
    n = 7
    g = ps.grid_2d(6.0, 6.0, n, n)
    s = 3 * n  # left side, middle row
    src, pts = ps.reflected_stencil(g, s, 5)
    assert src[0] == s
    assert sorted(src.tolist()) == sorted([s, s - n, s + n, s + 1, s + 1])
    np.testing.assert_allclose(sorted(pts[:, 0]), [-1.0, 0.0, 0.0, 0.0, 1.0])
    s = 4 * n - 1  # right side
    src, pts = ps.reflected_stencil(g, s, 5)
    np.testing.assert_allclose(sorted(pts[:, 0]), [5.0, 6.0, 6.0, 6.0, 7.0])
    with pytest.raises(ConfigurationError):
        ps.reflected_stencil(g, 3 * n + 3, 5)
