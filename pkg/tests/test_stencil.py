import numpy as np
import pytest
import scipy.io
from hypothesis import given, settings
from hypothesis import strategies as st

from fvlab.mesh import MeshFunction, TensorMesh, axis_from_coords, axis_uniform
from fvlab.stencil import (
    apply_Lh,
    assemble_Lh,
    backward_diff,
    forward_diff,
    mu_transverse,
    write_matrix_market,
)

from oracles import Lh_3d, mu_3d

meshes = st.builds(
    lambda dim, Ms, p, seed: TensorMesh.random(dim, tuple(Ms[:dim]), p, seed),
    st.integers(2, 4),
    st.lists(st.integers(2, 6), min_size=4, max_size=4),
    st.floats(0.0, 0.45),
    st.integers(0, 2**31),
)


def _line_mesh():
    return TensorMesh((axis_from_coords([0, 0.25, 0.75, 1]), axis_uniform(2)))


def _spike(mesh, node):
    g = np.zeros(mesh.shape)
    g[node] = 1.0
    return g


def test_backward_diff_hand_values():
    mesh = _line_mesh()
    v = _spike(mesh, (1, 1))
    np.testing.assert_allclose(backward_diff(mesh, v, 0)[:, 0], [4, -2, 0], rtol=1e-15)


def test_forward_diff_hand_value():
    mesh = _line_mesh()
    v = _spike(mesh, (1, 1))
    assert forward_diff(mesh, v, 0, index=1)[0] == pytest.approx(-8 / 3, rel=1e-15)
    np.testing.assert_allclose(forward_diff(mesh, v, 0)[:, 0], [-8 / 3, 0], rtol=1e-15)


@pytest.mark.parametrize("index", [0, 3])
def test_forward_diff_boundary_index_rejected(index):
    with pytest.raises(ValueError):
        forward_diff(_line_mesh(), np.zeros((4, 3)), 0, index=index)


@pytest.mark.parametrize("diff", [backward_diff, forward_diff])
def test_differences_linear_and_constant(diff):
    mesh = TensorMesh.uniform(3, 4)
    x = MeshFunction.from_callable(mesh, lambda p: p[..., 1])
    np.testing.assert_allclose(diff(mesh, x, 1), 1.0, rtol=1e-14)
    assert np.all(diff(mesh, np.full(mesh.shape, 3.7), 1) == 0)
    assert np.all(diff(mesh, x, 0) == 0)


def test_mu_spike_center_and_corner():
    mesh = TensorMesh.uniform(3, 4)
    v = _spike(mesh, (2, 2, 2))
    mu = mu_transverse(mesh, v, 0)  # the y-z average
    assert mu.shape == (5, 3, 3)
    # transverse outputs are interior-indexed: node j maps to j - 1
    assert mu[2, 1, 1] == 0.75
    assert mu[2, 0, 0] == pytest.approx(1 / 16, rel=1e-15)
    assert mu[1, 1, 1] == 0.0


def test_mu_matches_loop_oracle_3d():
    mesh = TensorMesh.random(3, (4, 5, 3), 0.4, 11)
    u = np.random.default_rng(0).standard_normal(mesh.shape)
    pairs = {0: "yz", 1: "xz", 2: "xy"}
    for axis, pair in pairs.items():
        mu = mu_transverse(mesh, u, axis)
        for idx in np.ndindex(*mu.shape):
            node = [i + 1 for i in idx]
            node[axis] = idx[axis]
            assert mu[idx] == pytest.approx(mu_3d(mesh, u, pair, *node), rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_apply_matches_loop_oracle_3d(seed):
    rng = np.random.default_rng(seed)
    Ms = tuple(int(m) for m in rng.integers(2, 6, size=3))
    mesh = TensorMesh.random(3, Ms, 0.4, seed)
    u = rng.standard_normal(mesh.shape)
    expected = Lh_3d(mesh, u)
    got = apply_Lh(mesh, u)
    scale = np.abs(expected).max()
    assert np.abs(got - expected).max() <= 1e-13 * scale


def test_spike_value_72():
    mesh = TensorMesh.uniform(3, 4)
    Lv = apply_Lh(mesh, _spike(mesh, (2, 2, 2)))
    assert Lv[1, 1, 1] == pytest.approx(72.0, rel=1e-14)
    assert Lh_3d(mesh, _spike(mesh, (2, 2, 2)))[1, 1, 1] == pytest.approx(72.0, rel=1e-14)


def test_assembled_diagonal_3d():
    mesh = TensorMesh.uniform(3, 4)
    unscaled = assemble_Lh(mesh, volume_scaled=False)
    scaled = assemble_Lh(mesh, volume_scaled=True)
    center = np.ravel_multi_index((1, 1, 1), mesh.interior_shape)
    assert unscaled.diagonal()[center] == pytest.approx(72.0, rel=1e-14)
    assert scaled.diagonal()[center] == pytest.approx(1.125, rel=1e-14)


def test_assembled_matches_matrix_free_2d():
    mesh = TensorMesh.uniform(2, 8)
    A = assemble_Lh(mesh, volume_scaled=False)
    rng = np.random.default_rng(3)
    for _ in range(10):
        v = MeshFunction.from_interior(mesh, rng.standard_normal(mesh.n_interior))
        np.testing.assert_allclose(A @ v.interior_values(), apply_Lh(mesh, v).ravel(), rtol=1e-13, atol=1e-13 * 64)


@settings(max_examples=40, deadline=None)
@given(mesh=meshes, seed=st.integers(0, 2**31))
def test_assembled_matches_matrix_free(mesh, seed):
    A = assemble_Lh(mesh, volume_scaled=False)
    v = MeshFunction.from_interior(mesh, np.random.default_rng(seed).standard_normal(mesh.n_interior))
    free = apply_Lh(mesh, v).ravel()
    assembled = A @ v.interior_values()
    assert np.linalg.norm(assembled - free) <= 1e-13 * np.linalg.norm(free)


@settings(max_examples=40, deadline=None)
@given(mesh=meshes, c=st.floats(-1e3, 1e3, allow_nan=False))
def test_constants_preserved_and_annihilated(mesh, c):
    g = np.full(mesh.shape, c)
    for a in range(mesh.dim):
        np.testing.assert_allclose(mu_transverse(mesh, g, a), c, rtol=1e-14, atol=0)
    hmin = min(ax.steps.min() for ax in mesh.axes)
    assert np.abs(apply_Lh(mesh, g)).max() <= 1e-12 * abs(c) / hmin**2


def test_row_sum_zero_for_fully_interior_stencil():
    mesh = TensorMesh.random(3, 6, 0.3, 4)
    A = assemble_Lh(mesh, volume_scaled=False)
    ones = np.ones(mesh.n_interior)
    rows = (A @ ones).reshape(mesh.interior_shape)
    # nodes whose 3x3x3 neighbourhood avoids the boundary
    inner = rows[1:-1, 1:-1, 1:-1]
    hmin = min(ax.steps.min() for ax in mesh.axes)
    assert np.abs(inner).max() <= 1e-12 / hmin**2
    # next to the boundary the dropped coefficients show up
    assert np.abs(rows[0, 0, 0]) > 1.0


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_stencil_width(dim):
    mesh = TensorMesh.random(dim, 5, 0.3, 1)
    A = assemble_Lh(mesh)
    assert np.diff(A.indptr).max() <= 3**dim


@settings(max_examples=30, deadline=None)
@given(mesh=meshes)
def test_volume_scaled_matrix_is_symmetric(mesh):
    A = assemble_Lh(mesh, volume_scaled=True).matrix
    diff = abs(A - A.T).max() if A.nnz else 0.0
    assert diff <= 1e-12 * abs(A).max()


@settings(max_examples=30, deadline=None)
@given(mesh=meshes, seed=st.integers(0, 2**31))
def test_positive_definite_witness(mesh, seed):
    A = assemble_Lh(mesh, volume_scaled=True)
    v = np.random.default_rng(seed).standard_normal(mesh.n_interior)
    assert v @ (A @ v) > 0


def test_two_dimensional_single_node():
    A = assemble_Lh(TensorMesh.uniform(2, 2))
    np.testing.assert_allclose(A.toarray(), [[3.0]], rtol=1e-15)


def test_matrix_market_round_trip(tmp_path):
    mesh = TensorMesh.random(3, 4, 0.3, 2)
    A = assemble_Lh(mesh)
    path = tmp_path / "A.mtx"
    write_matrix_market(A, path)
    back = scipy.io.mmread(str(path)).tocsr()
    assert back.shape == (A.n, A.n)
    assert abs(back - A.matrix).max() == 0.0
