"""
Krylov solvers for the assembled finite volume system.

``solve`` picks preconditioned CG when the matrix is symmetric to within
``symmetry_tolerance`` and BiCGStab otherwise. The relative residual is
always recomputed from ``A`` and ``b`` before a solve is declared
converged; recurrence residuals only decide when to look.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
import scipy.sparse as sp

from fvlab.errors import ConvergenceError
from fvlab.mesh import MeshFunction, TensorMesh
from fvlab.problem import ManufacturedSolution, QuadratureRule, gauss_legendre, rhs_cell_average
from fvlab.stencil import SparseOperator, assemble_Lh

__all__ = [
    "SolveOptions",
    "SolveReport",
    "symmetry_defect",
    "solve",
    "solve_poisson",
]


@dataclass(frozen=True)
class SolveOptions:
    rel_tolerance: float = 1e-10
    max_iterations: int | None = None
    method: str = "auto"
    preconditioner: str = "jacobi"
    symmetry_tolerance: float = 1e-12

    def __post_init__(self):
        if not self.rel_tolerance > 0 or not self.symmetry_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if self.method not in ("auto", "cg", "bicgstab"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.preconditioner not in ("none", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")


@dataclass
class SolveReport:
    iterations: int
    residual: float
    symmetry_defect: float
    method: str
    converged: bool = True

    def as_dict(self):
        return asdict(self)


def _csr(A):
    if isinstance(A, SparseOperator):
        return A.matrix
    return sp.csr_matrix(A, dtype=float)


def symmetry_defect(A) -> float:
    """``max |A_ij - A_ji| / max |A|`` over stored entries."""
    m = _csr(A)
    if m.shape[0] != m.shape[1]:
        raise ValueError("symmetry defect needs a square matrix")
    scale = abs(m).max() if m.nnz else 0.0
    if scale == 0.0:
        return 0.0
    diff = m - m.T
    return float(abs(diff).max() / scale) if diff.nnz else 0.0


def _default_max_iterations(n, dim):
    d = dim or 1
    return int(20 * math.ceil(n ** (1.0 / d)) * d)


def _pcg(A, b, x, inv_diag, tol_abs, max_iter):
    r = b - A @ x
    z = r * inv_diag
    p = z.copy()
    rz = float(np.dot(r, z))
    for k in range(1, max_iter + 1):
        Ap = A @ p
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0:
            return x, k, False
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        if np.linalg.norm(r) <= tol_abs:
            return x, k, True
        z = r * inv_diag
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, max_iter, False


def _bicgstab(A, b, x, inv_diag, tol_abs, max_iter):
    r = b - A @ x
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    for k in range(1, max_iter + 1):
        rho_new = float(np.dot(r_hat, r))
        if rho_new == 0.0:
            return x, k, False
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        y = p * inv_diag
        v = A @ y
        alpha = rho_new / float(np.dot(r_hat, v))
        s = r - alpha * v
        if np.linalg.norm(s) <= tol_abs:
            return x + alpha * y, k, True
        z = s * inv_diag
        t = A @ z
        tt = float(np.dot(t, t))
        if tt == 0.0:
            return x + alpha * y, k, False
        omega = float(np.dot(t, s)) / tt
        x = x + alpha * y + omega * z
        r = s - omega * t
        rho = rho_new
        if np.linalg.norm(r) <= tol_abs:
            return x, k, True
        if omega == 0.0:
            return x, k, False
    return x, max_iter, False


def solve(A, b, opts: SolveOptions | None = None, x0=None):
    """Solve ``A x = b``; returns ``(x, SolveReport)``.

    Raises :class:`~fvlab.errors.ConvergenceError` (carrying the report) if
    the verified relative residual does not reach ``opts.rel_tolerance``
    within ``max_iterations`` total iterations.
    """
    opts = opts or SolveOptions()
    M = _csr(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    n = M.shape[0]
    if b.size != n:
        raise ValueError(f"right-hand side has {b.size} entries, matrix has {n} rows")
    defect = symmetry_defect(M)
    method = opts.method
    if method == "auto":
        method = "cg" if defect <= opts.symmetry_tolerance else "bicgstab"

    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, defect, method)

    dim = A.dim if isinstance(A, SparseOperator) else None
    max_iter = opts.max_iterations
    if max_iter is None:
        max_iter = _default_max_iterations(n, dim)
    if opts.preconditioner == "jacobi":
        diag = M.diagonal()
        if np.any(diag == 0.0):
            raise ValueError("Jacobi preconditioning needs a zero-free diagonal")
        inv_diag = 1.0 / diag
    else:
        inv_diag = np.ones(n)

    kernel = _pcg if method == "cg" else _bicgstab
    tol_abs = opts.rel_tolerance * bnorm
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    used = 0
    residual = float(np.linalg.norm(b - M @ x)) / bnorm
    # restart from the true residual whenever the recurrence over-reports
    while residual > opts.rel_tolerance and used < max_iter:
        x, its, ok = kernel(M, b, x, inv_diag, 0.5 * tol_abs, max_iter - used)
        used += its
        residual = float(np.linalg.norm(b - M @ x)) / bnorm
        if not ok and residual > opts.rel_tolerance:
            break

    report = SolveReport(used, residual, defect, method, residual <= opts.rel_tolerance)
    if not report.converged:
        raise ConvergenceError(
            f"{method} stopped after {used} iterations at relative residual {residual:.3e}",
            report,
        )
    return x, report


def solve_poisson(
    mesh: TensorMesh,
    sol_or_f,
    opts: SolveOptions | None = None,
    rule: QuadratureRule | None = None,
):
    """Assemble, integrate the source, solve; returns ``(u_h, SolveReport)``.

    ``sol_or_f`` is a :class:`ManufacturedSolution` or a point evaluator of ``f``.
    The system solved is ``(volume-scaled L^h) u = volume * cell average of f``.
    """
    rule = rule or gauss_legendre(4)
    A = assemble_Lh(mesh, volume_scaled=True)
    avg = rhs_cell_average(mesh, sol_or_f, rule)
    b = mesh.cell_volumes().reshape(-1) * avg.interior_values()
    x, report = solve(A, b, opts)
    return MeshFunction.from_interior(mesh, x), report
