"""
Divided differences, transverse averaging, and the discrete operator ``L^h``.

For a node grid ``v`` the scheme's operator is::

    L^h v = - sum_a  D+_a D-_a  mu_a v

where ``D-_a`` is the backward difference over the step ``h``, ``D+_a`` the
forward difference over the half-step ``hbar``, and ``mu_a`` averages over
the ``d-1`` axes transverse to ``a``::

    mu_a v = 2**-(d+1) * ( 3 * 2**(d-1) * v
                           + sum_{corners s} prod_m (h_m(s) / hbar_m) * v[shift s] )

with ``h_m(s) = h_{i_m}`` for a step back and ``h_{i_m+1}`` for a step forward.
The corner weights sum to ``2**(d-1)``, so ``mu_a`` preserves constants.

Array conventions: node grids have the full mesh shape. ``mu_transverse``
returns the full range along ``axis`` and interior indices transversally;
``backward_diff`` returns ``i = 1..M`` along ``axis``; ``forward_diff`` and
``apply_Lh`` return interior indices only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from fvlab.mesh import MeshFunction, TensorMesh

__all__ = [
    "SparseOperator",
    "backward_diff",
    "forward_diff",
    "mu_transverse",
    "apply_Lh",
    "assemble_Lh",
    "write_matrix_market",
]

CENTRAL_WEIGHT = 0.75  # 3 * 2**(d-1) / 2**(d+1), the same for every d


@dataclass(frozen=True)
class SparseOperator:
    """Square CSR matrix over the interior nodes of a mesh."""

    matrix: sp.csr_matrix
    volume_scaled: bool = False
    dim: int | None = None

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=float)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def indptr(self):
        return self.matrix.indptr

    @property
    def indices(self):
        return self.matrix.indices

    @property
    def data(self):
        return self.matrix.data

    def diagonal(self):
        return self.matrix.diagonal()

    def toarray(self):
        return self.matrix.toarray()

    def __matmul__(self, x):
        return self.matrix @ x


def _grid(mesh: TensorMesh, v) -> np.ndarray:
    if isinstance(v, MeshFunction):
        if v.mesh != mesh:
            raise ValueError("mesh function belongs to a different mesh")
        return v.grid
    g = np.asarray(v, dtype=float)
    if g.shape != mesh.shape:
        g = g.reshape(mesh.shape)
    return g


def _along(vec, axis, ndim):
    """Reshape a 1D vector so it broadcasts along ``axis``."""
    shape = [1] * ndim
    shape[axis] = -1
    return np.asarray(vec).reshape(shape)


def _transverse_interior(mesh, axis, along):
    """Index: ``along`` on ``axis``, interior everywhere else."""
    idx = [slice(1, -1)] * mesh.dim
    idx[axis] = along
    return tuple(idx)


def backward_diff(mesh: TensorMesh, v, axis: int) -> np.ndarray:
    """``(v_i - v_{i-1}) / h_i`` for ``i = 1..M`` along ``axis``."""
    g = _grid(mesh, v)[_transverse_interior(mesh, axis, slice(None))]
    h = mesh.axes[axis].steps
    return np.diff(g, axis=axis) / _along(h, axis, mesh.dim)


def forward_diff(mesh: TensorMesh, v, axis: int, index: int | None = None) -> np.ndarray:
    """``(v_{i+1} - v_i) / hbar_i`` at interior ``i`` along ``axis``.

    With ``index`` given, only that slice is returned; it must be interior.
    """
    ax = mesh.axes[axis]
    g = _grid(mesh, v)[_transverse_interior(mesh, axis, slice(None))]
    if index is not None:
        if not 0 < index < ax.M:
            raise ValueError(f"forward difference undefined at boundary index {index}")
        lo = np.take(g, index, axis=axis)
        hi = np.take(g, index + 1, axis=axis)
        return (hi - lo) / ax.half_steps[index - 1]
    d = np.diff(g, axis=axis)
    d = np.take(d, np.arange(1, ax.M), axis=axis)
    return d / _along(ax.half_steps, axis, mesh.dim)


def mu_transverse(mesh: TensorMesh, v, axis: int) -> np.ndarray:
    """Average over the axes transverse to ``axis``.

    Output covers every index along ``axis`` and the interior transversally.
    """
    d = mesh.dim
    g = _grid(mesh, v)
    others = [m for m in range(d) if m != axis]
    out = CENTRAL_WEIGHT * g[_transverse_interior(mesh, axis, slice(None))]
    scale = 1.0 / 2 ** (d + 1)
    for signs in itertools.product((-1, 1), repeat=d - 1):
        idx = [slice(None)] * d
        weight = np.ones(())
        for m, s in zip(others, signs):
            ax = mesh.axes[m]
            M = ax.M
            # step back uses h_i, step forward uses h_{i+1}; i = 1..M-1
            h = ax.steps[:-1] if s < 0 else ax.steps[1:]
            w = h / ax.half_steps
            weight = weight * _along(w, m, d)
            idx[m] = slice(0, M - 1) if s < 0 else slice(2, M + 1)
        out = out + scale * weight * g[tuple(idx)]
    return out


def apply_Lh(mesh: TensorMesh, v) -> np.ndarray:
    """Matrix-free ``L^h v`` at interior nodes (interior-shaped array)."""
    total = np.zeros(mesh.interior_shape)
    for a, ax in enumerate(mesh.axes):
        w = mu_transverse(mesh, v, a)
        grad = np.diff(w, axis=a) / _along(ax.steps, a, mesh.dim)
        total -= np.diff(grad, axis=a) / _along(ax.half_steps, a, mesh.dim)
    return total


def _second_difference_1d(ax):
    h, hb = ax.steps, ax.half_steps
    lower = 1.0 / (hb[1:] * h[1:-1])
    upper = 1.0 / (hb[:-1] * h[1:-1])
    main = -(1.0 / h[:-1] + 1.0 / h[1:]) / hb
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")


def _corner_sum_1d(ax):
    h, hb = ax.steps, ax.half_steps
    lower = h[1:-1] / hb[1:]
    upper = h[1:-1] / hb[:-1]
    return sp.diags([lower, upper], [-1, 1], shape=(ax.M - 1, ax.M - 1), format="csr")


def _kron_all(factors):
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def assemble_Lh(mesh: TensorMesh, volume_scaled: bool = True) -> SparseOperator:
    """Assemble ``L^h`` over interior nodes, dropping boundary columns.

    With ``volume_scaled`` every row is multiplied by its cell volume, which
    makes the matrix the conservative finite volume balance.
    """
    d = mesh.dim
    eyes = [sp.identity(ax.M - 1, format="csr") for ax in mesh.axes]
    corners = [_corner_sum_1d(ax) for ax in mesh.axes]
    L = sp.csr_matrix((mesh.n_interior, mesh.n_interior))
    for a, ax in enumerate(mesh.axes):
        T = _second_difference_1d(ax)
        central = [T if m == a else eyes[m] for m in range(d)]
        corner = [T if m == a else corners[m] for m in range(d)]
        L = L - CENTRAL_WEIGHT * _kron_all(central) - _kron_all(corner) / 2 ** (d + 1)
    if volume_scaled:
        L = sp.diags(mesh.cell_volumes().reshape(-1)) @ L
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return SparseOperator(L, volume_scaled=volume_scaled, dim=d)


def write_matrix_market(op: SparseOperator, path) -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(op.matrix), symmetry="general", precision=17)
