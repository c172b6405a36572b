"""
Randomized checks of the discrete stability inequalities.

Four ratios are sampled over random quasi-uniform meshes and random mesh
functions (standard normal values, zero where the inequality requires it):

``coercivity``
    ``(mu_a v, v]_a / ||v|]_a^2`` for every axis ``a``; lower bound
    ``(3 * 2**(d-2) - 1) / 2**d``.
``poincare``
    ``||v||^2 / |v|_{1,h}^2``; upper bound ``1/d``.
``dual_stability``
    ``||v||_{1,h} / ||L^h v||_{-1,h}``; upper bound
    ``2**d (1+d) / (d (3 * 2**(d-2) - 1))``.
``solution_stability``
    ``||u_h||_{1,h} / ||2 * cell average of f||_{-1,h}`` for the computed
    solution with ``f`` from ``sine_product``; upper bound half of the
    previous one.

The sampled worst case is what the suite reports. The exact extremes over
all mesh functions are available from :func:`coercivity_exact_min` and
:func:`dual_stability_exact_max` for small meshes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from fvlab.mesh import MeshFunction, TensorMesh
from fvlab.norms import h1_gram, h1_seminorm, hminus1_dense, inner, norms, onesided_inner
from fvlab.problem import builtin, gauss_legendre, paper_T
from fvlab.solver import SolveOptions, solve_poisson
from fvlab.stencil import _corner_sum_1d, apply_Lh, assemble_Lh, mu_transverse

__all__ = [
    "InequalityCheck",
    "VerifyReport",
    "coercivity_constant",
    "poincare_constant",
    "dual_stability_constant",
    "solution_stability_constant",
    "coercivity_ratio",
    "poincare_ratio",
    "dual_stability_ratio",
    "solution_stability_ratio",
    "coercivity_exact_min",
    "dual_stability_exact_max",
    "verify_suite",
]


def coercivity_constant(d: int) -> float:
    return (3 * 2 ** (d - 2) - 1) / 2**d


def poincare_constant(d: int) -> float:
    return 1.0 / d


def dual_stability_constant(d: int) -> float:
    return 2**d * (1 + d) / (d * (3 * 2 ** (d - 2) - 1))


def solution_stability_constant(d: int) -> float:
    return dual_stability_constant(d) / 2


def _ratio(num, den):
    if den == 0.0:
        return None
    return num / den


def coercivity_ratio(mesh: TensorMesh, v, axis: int):
    """``(mu_axis v, v]_axis / ||v|]_axis^2``; ``v`` must vanish on the transverse faces."""
    g = np.asarray(v.grid if isinstance(v, MeshFunction) else v, dtype=float)
    g = g.reshape(mesh.shape)
    mu = mu_transverse(mesh, g, axis)
    mu = np.take(mu, np.arange(1, mesh.axes[axis].M + 1), axis=axis)
    return _ratio(onesided_inner(mesh, mu, g, axis), onesided_inner(mesh, g, g, axis))


def poincare_ratio(mesh: TensorMesh, v):
    semi = h1_seminorm(mesh, v)
    return _ratio(inner(mesh, v, v), semi * semi)


def dual_stability_ratio(mesh: TensorMesh, v):
    Lv = apply_Lh(mesh, v)
    return _ratio(norms(mesh, v).h1, hminus1_dense(mesh, Lv))


def solution_stability_ratio(mesh: TensorMesh, sol, opts: SolveOptions | None = None):
    rule = gauss_legendre(4)
    uh, _ = solve_poisson(mesh, sol, opts, rule)
    T = paper_T(mesh, sol, rule)
    return _ratio(norms(mesh, uh).h1, hminus1_dense(mesh, T))


def coercivity_exact_min(mesh: TensorMesh, axis: int) -> float:
    """Smallest possible coercivity ratio on ``mesh`` for ``axis``.

    The form only couples transverse indices, so this is the smallest
    generalized eigenvalue of the weighted transverse average against its
    weight.
    """
    others = [m for m in range(mesh.dim) if m != axis]
    d = mesh.dim
    W = sp.identity(1)
    S = sp.identity(1)
    for m in others:
        ax = mesh.axes[m]
        W = sp.kron(W, sp.diags(ax.half_steps))
        S = sp.kron(S, _corner_sum_1d(ax))
    W = W.toarray()
    A = W @ (0.75 * np.eye(len(W)) + S.toarray() / 2 ** (d + 1))
    A = 0.5 * (A + A.T)
    return float(scipy.linalg.eigh(A, W, eigvals_only=True)[0])


def dual_stability_exact_max(mesh: TensorMesh) -> float:
    """``max_v ||v||_{1,h} / ||L^h v||_{-1,h}`` by a dense eigenproblem."""
    A = assemble_Lh(mesh, volume_scaled=True).toarray()
    G = h1_gram(mesh).toarray()
    K = A.T @ scipy.linalg.solve(G, A, assume_a="pos")
    K = 0.5 * (K + K.T)
    lam = scipy.linalg.eigh(K, G, eigvals_only=True)[0]
    return float(1.0 / np.sqrt(lam))


@dataclass
class InequalityCheck:
    name: str
    kind: str  # "lower" or "upper" bound
    constant: float
    slack: float
    trials: int = 0
    skipped: int = 0
    worst: float | None = None
    worst_by_case: dict = field(default_factory=dict)

    def _pick(self, old, new):
        if old is None:
            return new
        return min(old, new) if self.kind == "lower" else max(old, new)

    def record(self, ratio, case=None):
        """Fold one sampled ratio in; ``None`` (zero denominator) counts as skipped."""
        if ratio is None:
            self.skipped += 1
            return
        self.trials += 1
        self.worst = self._pick(self.worst, ratio)
        if case is not None:
            self.worst_by_case[case] = self._pick(self.worst_by_case.get(case), ratio)

    @property
    def passed(self) -> bool:
        if self.worst is None:
            return True
        if self.kind == "lower":
            return self.worst >= self.constant * (1 - self.slack)
        return self.worst <= self.constant * (1 + self.slack)


@dataclass
class VerifyReport:
    dim: int
    seed: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def lines(self):
        for c in self.checks.values():
            bound = ">=" if c.kind == "lower" else "<="
            worst = "n/a" if c.worst is None else f"{c.worst:.15g}"
            yield (
                f"{'PASS' if c.passed else 'FAIL'} {c.name}: worst {worst} {bound} "
                f"{c.constant:.15g} over {c.trials} trials ({c.skipped} skipped)"
            )


def _random_mesh(rng, dim, m_range, p_range):
    Ms = rng.integers(m_range[0], m_range[1] + 1, size=dim)
    p = rng.uniform(*p_range)
    return TensorMesh.random(dim, tuple(int(m) for m in Ms), p, int(rng.integers(2**32)))


def _vanishing_on(mesh, values, axes):
    g = values.reshape(mesh.shape).copy()
    for m in axes:
        idx = [slice(None)] * mesh.dim
        idx[m] = [0, -1]
        g[tuple(idx)] = 0.0
    return g


def verify_suite(
    dim: int = 3,
    trials: int = 200,
    m_range=(3, 8),
    seed: int = 0,
    dual_trials: int = 50,
    dual_m_range=(3, 6),
    stability_trials: int = 20,
    stability_m_range=(3, 5),
    perturbation_range=(0.0, 0.4),
) -> VerifyReport:
    """Sample all four inequalities; failures are reported, never raised.

    ``trials`` meshes with ``M`` per axis drawn from ``m_range`` feed the
    coercivity and Poincare checks. The two dual-norm checks use their own,
    smaller meshes because they factor the dense H1 Gram matrix.
    """
    rng = np.random.default_rng(seed)
    report = VerifyReport(dim=dim, seed=seed)
    checks = report.checks
    checks["coercivity"] = InequalityCheck("coercivity", "lower", coercivity_constant(dim), 1e-12)
    checks["poincare"] = InequalityCheck("poincare", "upper", poincare_constant(dim), 1e-12)
    checks["dual_stability"] = InequalityCheck(
        "dual_stability", "upper", dual_stability_constant(dim), 1e-10
    )
    checks["solution_stability"] = InequalityCheck(
        "solution_stability", "upper", solution_stability_constant(dim), 1e-8
    )

    for _ in range(trials):
        mesh = _random_mesh(rng, dim, m_range, perturbation_range)
        for a in range(dim):
            raw = rng.standard_normal(mesh.n_nodes)
            v = _vanishing_on(mesh, raw, [m for m in range(dim) if m != a])
            checks["coercivity"].record(coercivity_ratio(mesh, v, a), case=a)
        v = MeshFunction.from_interior(mesh, rng.standard_normal(mesh.n_interior))
        checks["poincare"].record(poincare_ratio(mesh, v))

    for _ in range(dual_trials):
        mesh = _random_mesh(rng, dim, dual_m_range, perturbation_range)
        v = MeshFunction.from_interior(mesh, rng.standard_normal(mesh.n_interior))
        checks["dual_stability"].record(dual_stability_ratio(mesh, v))

    sol = builtin("sine_product", dim)
    opts = SolveOptions(rel_tolerance=1e-13)
    for _ in range(stability_trials):
        mesh = _random_mesh(rng, dim, stability_m_range, perturbation_range)
        checks["solution_stability"].record(solution_stability_ratio(mesh, sol, opts))
    return report
