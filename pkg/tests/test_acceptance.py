"""Acceptance suite: one test per numbered criterion, each printing a PASS/FAIL line.

The lines are also gathered into an "acceptance criteria" section of the
pytest terminal summary.
"""

import itertools
import time

import numpy as np
import pytest

from fvlab.mesh import MeshFunction, TensorMesh, cell_of
from fvlab.problem import builtin, derivative_check, gauss_legendre, rhs_cell_average
from fvlab.solver import solve_poisson
from fvlab.stencil import apply_Lh, assemble_Lh, mu_transverse
from fvlab.study import (
    StudyConfig,
    fit_order,
    observed_orders,
    run_study,
    verify_suite,
)

SEED = 7
ERROR_COLUMNS = ("l2", "h1semi", "h1h", "max")
SHRINKABLE = ("gaussian_cube", "mollifier", "hicks_henne")
SMOOTH = {"gaussian_cube", "mollifier"}


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def sine_uniform_3d():
    cfg = StudyConfig(dim=3, solution="sine_product", levels=(4, 8, 16, 32), family="uniform", threads=1)
    return _timed(run_study, cfg)


def test_criterion_01_coercivity(criterion):
    c = criterion(1, "coercivity constant 5/8 over 200 random meshes")
    report, secs = _timed(
        verify_suite, 3, trials=200, m_range=(3, 8), seed=SEED, dual_trials=0, stability_trials=0
    )
    check = report.checks["coercivity"]
    c.check(check.trials + check.skipped == 600, f"{check.trials} ratios sampled")
    for axis in range(3):
        worst = check.worst_by_case[axis]
        c.check(worst >= 5 / 8 - 1e-12, f"axis {axis} worst {worst:.6f} >= 0.625")
    c.check(secs < 30, f"{secs:.1f}s < 30s")
    c.done()


def test_criterion_02_poincare(criterion):
    c = criterion(2, "discrete Poincare constant 1/d")
    for dim, bound in ((3, 1 / 3), (2, 1 / 2)):
        report = verify_suite(dim, trials=200, m_range=(3, 8), seed=SEED, dual_trials=0, stability_trials=0)
        check = report.checks["poincare"]
        c.check(check.trials == 200, f"d={dim}: {check.trials} trials")
        c.check(check.worst <= bound + 1e-12, f"d={dim} worst {check.worst:.6f} <= {bound:.6f}")
    c.done()


def test_criterion_03_dual_stability(criterion):
    c = criterion(3, "dual stability constant 32/15 on 50 meshes up to 6^3")
    report, secs = _timed(
        verify_suite, 3, trials=0, seed=SEED, dual_trials=50, dual_m_range=(3, 6), stability_trials=0
    )
    check = report.checks["dual_stability"]
    c.check(check.trials == 50, f"{check.trials} meshes")
    c.check(check.worst <= 32 / 15 * (1 + 1e-10), f"worst {check.worst:.6f} <= {32 / 15:.6f}")
    c.check(secs < 60, f"{secs:.1f}s < 60s")
    c.done()


def test_criterion_04_solution_stability(criterion):
    c = criterion(4, "solution stability constant 32/30 on 20 meshes up to 5^3")
    report = verify_suite(
        3, trials=0, seed=SEED, dual_trials=0, stability_trials=20, stability_m_range=(3, 5)
    )
    check = report.checks["solution_stability"]
    c.check(check.trials == 20, f"{check.trials} meshes")
    c.check(check.worst <= 32 / 30 * (1 + 1e-8), f"worst {check.worst:.6f} <= {32 / 30:.6f}")
    c.done()


def test_criterion_05_smooth_rate(criterion, sine_uniform_3d):
    c = criterion(5, "second order on uniform 3D meshes")
    rows, secs = sine_uniform_3d
    last = rows[-1]
    c.check(1.8 <= last.ord_h1h <= 2.2, f"H1 order {last.ord_h1h:.3f} in [1.8, 2.2]")
    c.check(last.ord_l2 >= 1.9, f"L2 order {last.ord_l2:.3f} >= 1.9")
    c.check(secs < 300, f"{secs:.1f}s < 300s")
    c.done()


def test_criterion_06_random_meshes(criterion):
    c = criterion(6, "second order survives random perturbation")
    for seed in (0, 1, 2):
        cfg = StudyConfig(
            dim=3, solution="sine_product", levels=(4, 8, 16, 32), family="random",
            perturbation=0.3, seed=seed, threads=1,
        )
        q = run_study(cfg)[-1].ord_h1h
        c.check(q >= 1.7, f"seed {seed}: H1 order {q:.3f} >= 1.7")
    c.done()


def test_criterion_07_max_norm(criterion, sine_uniform_3d):
    c = criterion(7, "max-norm order")
    rows, _ = sine_uniform_3d
    q = rows[-1].ord_max
    c.check(q >= 1.4, f"max order {q:.3f} >= 1.4")
    c.done()


def _experiment_cases():
    cases = [(name, {}) for name in SHRINKABLE]
    cases += [
        ("difference", {"first": a, "second": b}) for a, b in itertools.product(SHRINKABLE, repeat=2)
    ]
    return cases


def _label(name, params):
    return f"{params['first']}-{params['second']}" if params else name


def _smooth(name, params):
    if name == "difference":
        return params["first"] in SMOOTH and params["second"] in SMOOTH
    return name in SMOOTH


def test_criterion_08_experiments(criterion):
    c = criterion(8, "monotone errors and L2 order for the experiment functions")
    studies, orders = 0, []
    for family in ("uniform", "random"):
        for dim, levels in ((2, (8, 16, 32, 64)), (3, (8, 16, 32))):
            for name, params in _experiment_cases():
                rows = run_study(StudyConfig(
                    dim=dim, solution=name, params=params, levels=levels, family=family, seed=1,
                ))
                tag = f"{family} d={dim} {_label(name, params)}"
                for key in ERROR_COLUMNS:
                    vals = [getattr(r, key) for r in rows]
                    c.check(all(b < a for a, b in zip(vals, vals[1:])), f"{tag}: {key} decreasing")
                if _smooth(name, params):
                    q = rows[-1].ord_l2
                    orders.append(q)
                    c.check(q >= 1.5, f"{tag}: L2 order {q:.3f} >= 1.5")
                studies += 1
    c.done(f"{studies} studies decrease in all error norms; smooth L2 orders >= {min(orders):.3f}")


def _random_mesh(rng):
    dim = int(rng.integers(2, 5))
    Ms = tuple(int(m) for m in rng.integers(2, 9 if dim < 4 else 6, size=dim))
    return TensorMesh.random(dim, Ms, float(rng.uniform(0, 0.45)), int(rng.integers(2**32)))


def test_criterion_09_oracles(criterion):
    c = criterion(9, "matrix/matrix-free, quadrature, derivative and rate oracles")
    rng = np.random.default_rng(SEED)

    worst = 0.0
    for _ in range(100):
        mesh = _random_mesh(rng)
        v = MeshFunction.from_interior(mesh, rng.standard_normal(mesh.n_interior))
        free = apply_Lh(mesh, v).ravel()
        assembled = assemble_Lh(mesh, volume_scaled=False) @ v.interior_values()
        worst = max(worst, np.linalg.norm(assembled - free) / np.linalg.norm(free))
    c.check(worst <= 1e-13, f"operator mismatch {worst:.1e} <= 1e-13 over 100 pairs")

    worst = 0.0
    for p in range(1, 6):
        for powers in itertools.product(range(2 * p), repeat=2):
            mesh = TensorMesh.random(2, 3, 0.3, p)

            def f(x, powers=powers):
                return x[..., 0] ** powers[0] * x[..., 1] ** powers[1]

            avg = rhs_cell_average(mesh, f, gauss_legendre(p)).interior_values()
            for flat, node in enumerate(np.ndindex(*mesh.interior_shape)):
                (x0, x1), (y0, y1) = cell_of(mesh, [i + 1 for i in node]).bounds
                kx, ky = powers
                exact = ((x1 ** (kx + 1) - x0 ** (kx + 1)) / ((kx + 1) * (x1 - x0))
                         * (y1 ** (ky + 1) - y0 ** (ky + 1)) / ((ky + 1) * (y1 - y0)))
                worst = max(worst, abs(avg[flat] - exact) / abs(exact))
    c.check(worst <= 1e-12, f"quadrature error {worst:.1e} <= 1e-12 up to degree 2p-1")

    for dim in (2, 3):
        sols = [builtin(n, dim) for n in ("sine_product",) + SHRINKABLE]
        sols += [builtin("difference", dim, p) for _, p in _experiment_cases()[3:]]
        sols += [builtin("difference", dim, {"first": "sine_product", "second": s}) for s in SHRINKABLE]
        defect = max(derivative_check(s) for s in sols)
        c.check(defect <= 1e-5, f"d={dim}: derivative defect {defect:.1e} <= 1e-5 over {len(sols)} builtins")

    h = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    worst = 0.0
    for q in (1.0, 1.5, 2.0, 2.5):
        e = [3.7 * x**q for x in h]
        worst = max(worst, max(abs(o - q) for o in observed_orders(h, e)), abs(fit_order(h, e) - q))
    c.check(worst <= 1e-12, f"rate estimator error {worst:.1e} <= 1e-12")
    c.done()


def test_criterion_10_exactness(criterion):
    c = criterion(10, "zero source, constant annihilation and preservation")
    rng = np.random.default_rng(SEED)
    for _ in range(10):
        mesh = _random_mesh(rng)
        uh, _ = solve_poisson(mesh, lambda x: np.zeros(x.shape[:-1]))
        c.check(not np.any(uh.values), f"d={mesh.dim}: zero source gives zero")
        const = float(rng.uniform(-10, 10))
        g = np.full(mesh.shape, const)
        hmin = min(ax.steps.min() for ax in mesh.axes)
        residue = np.abs(apply_Lh(mesh, g)).max()
        c.check(residue <= 1e-12 * abs(const) / hmin**2, f"d={mesh.dim}: L^h const = {residue:.1e}")
        drift = max(np.abs(mu_transverse(mesh, g, a) / const - 1).max() for a in range(mesh.dim))
        c.check(drift <= 1e-14, f"d={mesh.dim}: mu const drift {drift:.1e}")
    c.done("10 random meshes in 2 to 4 dimensions")
