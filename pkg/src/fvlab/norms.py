"""
Discrete inner products and norms on tensor meshes.

``(v, w)`` weights interior nodes by their cell volume ``prod hbar``.
The one-sided product ``(v, w]_a`` runs over ``i = 1..M`` along axis ``a``
with weight ``h_i`` and over interior indices transversally with ``hbar``.
The H1 seminorm collects the backward differences in these one-sided
products, and the H^-1 norm is the dual of the full discrete H1 norm.

Reductions use ``np.sum`` on a fixed memory layout (pairwise summation),
so repeated evaluations are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from fvlab.errors import CapacityError
from fvlab.mesh import MeshFunction, TensorMesh, _outer
from fvlab.stencil import SparseOperator, _grid, backward_diff

__all__ = [
    "NormReport",
    "inner",
    "onesided_inner",
    "onesided_norm_sq",
    "h1_seminorm",
    "norms",
    "h1_gram",
    "hminus1_dense",
    "DEFAULT_DOF_CAP",
]

DEFAULT_DOF_CAP = 4096


@dataclass(frozen=True)
class NormReport:
    l2: float
    h1_semi: float
    h1: float
    max: float


def _check_mesh(mesh, *fns):
    for f in fns:
        if isinstance(f, MeshFunction) and f.mesh != mesh:
            raise ValueError("mesh function belongs to a different mesh")


def inner(mesh: TensorMesh, v, w) -> float:
    _check_mesh(mesh, v, w)
    gv = _grid(mesh, v)[mesh.interior]
    gw = _grid(mesh, w)[mesh.interior]
    return float(np.sum(mesh.cell_volumes() * gv * gw))


def _onesided_shape(mesh, axis):
    shape = list(mesh.interior_shape)
    shape[axis] = mesh.axes[axis].M
    return tuple(shape)


def _onesided_values(mesh, v, axis):
    """Accept a full node grid (take ``i = 1..M``) or an already one-sided array."""
    if isinstance(v, MeshFunction):
        v = v.grid
    arr = np.asarray(v, dtype=float)
    target = _onesided_shape(mesh, axis)
    if arr.shape == target:
        return arr
    if arr.shape == mesh.shape or arr.size == mesh.n_nodes:
        arr = arr.reshape(mesh.shape)
        idx = [slice(1, -1)] * mesh.dim
        idx[axis] = slice(1, None)
        return arr[tuple(idx)]
    raise ValueError(f"array of shape {arr.shape} fits neither the node grid nor {target}")


def _onesided_weights(mesh, axis):
    return _outer(
        [ax.steps if m == axis else ax.half_steps for m, ax in enumerate(mesh.axes)]
    )


def onesided_inner(mesh: TensorMesh, v, w, axis: int) -> float:
    _check_mesh(mesh, v, w)
    a = _onesided_values(mesh, v, axis)
    b = _onesided_values(mesh, w, axis)
    return float(np.sum(_onesided_weights(mesh, axis) * a * b))


def onesided_norm_sq(mesh: TensorMesh, v, axis: int) -> float:
    return onesided_inner(mesh, v, v, axis)


def h1_seminorm(mesh: TensorMesh, v) -> float:
    _check_mesh(mesh, v)
    total = sum(
        onesided_norm_sq(mesh, backward_diff(mesh, v, a), a) for a in range(mesh.dim)
    )
    return float(np.sqrt(total))


def norms(mesh: TensorMesh, v) -> NormReport:
    """L2, H1 seminorm, H1 norm and nodal max norm of a mesh function."""
    l2 = np.sqrt(inner(mesh, v, v))
    semi = h1_seminorm(mesh, v)
    return NormReport(
        l2=float(l2),
        h1_semi=semi,
        h1=float(np.sqrt(l2 * l2 + semi * semi)),
        max=float(np.max(np.abs(_grid(mesh, v)))),
    )


def _backward_1d(ax):
    """``(M) x (M-1)`` map from interior values to ``D-`` at ``i = 1..M``."""
    M = ax.M
    inv_h = 1.0 / ax.steps
    B = sp.diags([inv_h[: M - 1], -inv_h[1:]], [0, -1], shape=(M, M - 1), format="csr")
    return B


def h1_gram(mesh: TensorMesh) -> SparseOperator:
    """SPD matrix ``G`` with ``v^T G v = ||v||_{1,h}^2`` over interior values."""
    d = mesh.dim
    hbar = [sp.diags(ax.half_steps) for ax in mesh.axes]
    G = sp.diags(mesh.cell_volumes().reshape(-1))
    for a, ax in enumerate(mesh.axes):
        B = _backward_1d(ax)
        K = B.T @ sp.diags(ax.steps) @ B
        factors = [K if m == a else hbar[m] for m in range(d)]
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        G = G + term
    return SparseOperator(sp.csr_matrix(G), volume_scaled=False, dim=d)


def _interior_vector(mesh, v):
    if isinstance(v, MeshFunction):
        _check_mesh(mesh, v)
        return v.interior_values()
    arr = np.asarray(v, dtype=float)
    if arr.size == mesh.n_interior:
        return arr.reshape(-1)
    if arr.size == mesh.n_nodes:
        return arr.reshape(mesh.shape)[mesh.interior].reshape(-1)
    raise ValueError(f"cannot interpret {arr.size} values on this mesh")


def hminus1_dense(mesh: TensorMesh, v, cap: int = DEFAULT_DOF_CAP) -> float:
    """Discrete H^-1 norm ``sup_w (v, w) / ||w||_{1,h}`` by dense Cholesky.

    ``v`` may be a mesh function, a node grid, or an interior vector.
    Raises :class:`CapacityError` above ``cap`` interior nodes.
    """
    n = mesh.n_interior
    if n > cap:
        raise CapacityError(f"{n} interior nodes exceed the dense H^-1 cap of {cap}")
    m = mesh.cell_volumes().reshape(-1) * _interior_vector(mesh, v)
    if not np.any(m):
        return 0.0
    G = h1_gram(mesh).toarray()
    factor = scipy.linalg.cho_factor(G)
    y = scipy.linalg.cho_solve(factor, m)
    return float(np.sqrt(np.sum(m * y)))
