"""Mesh refinement studies against manufactured solutions."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from fvlab.errors import ConvergenceError, StudyAborted
from fvlab.mesh import MeshFunction, TensorMesh
from fvlab.norms import norms
from fvlab.problem import ManufacturedSolution, builtin, gauss_legendre
from fvlab.solver import SolveOptions, solve_poisson

__all__ = [
    "StudyConfig",
    "StudyRow",
    "build_mesh",
    "observed_orders",
    "fit_order",
    "run_study",
]


@dataclass(frozen=True)
class StudyConfig:
    """Inputs of a refinement study.

    ``solution`` is a :class:`ManufacturedSolution` or a builtin name
    (with ``params``). ``family`` is ``"uniform"`` or ``"random"``; random
    meshes perturb each node by at most ``perturbation / M``.
    """

    dim: int
    solution: object
    levels: tuple
    family: str = "uniform"
    perturbation: float = 0.3
    seed: int = 0
    params: dict = field(default_factory=dict)
    quad_order: int = 4
    solve_options: SolveOptions = field(default_factory=SolveOptions)
    threads: int = 1
    csv_path: str | None = None
    svg_path: str | None = None

    def __post_init__(self):
        levels = tuple(int(m) for m in self.levels)
        if len(levels) < 2:
            raise ValueError("a study needs at least two levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"levels must be strictly increasing, got {levels}")
        if self.family not in ("uniform", "random"):
            raise ValueError(f"unknown mesh family {self.family!r}")
        object.__setattr__(self, "levels", levels)

    def manufactured(self) -> ManufacturedSolution:
        if isinstance(self.solution, ManufacturedSolution):
            return self.solution
        return builtin(self.solution, self.dim, self.params)


@dataclass
class StudyRow:
    dim: int
    family: str
    seed: int
    M: int
    h: float
    l2: float
    l2_rel: float
    h1semi: float
    h1h: float
    max: float
    iters: int
    ord_l2: float | None = None
    ord_h1semi: float | None = None
    ord_h1h: float | None = None
    ord_max: float | None = None


def build_mesh(dim, M, family="uniform", perturbation=0.3, seed=0) -> TensorMesh:
    if family == "uniform":
        return TensorMesh.uniform(dim, M)
    return TensorMesh.random(dim, M, perturbation, seed)


def observed_orders(h, errors):
    """Pairwise orders ``log(e_k/e_{k+1}) / log(h_k/h_{k+1})``; ``None`` where undefined."""
    out = []
    for (h0, e0), (h1, e1) in zip(zip(h, errors), zip(h[1:], errors[1:])):
        if e0 > 0 and e1 > 0 and h0 != h1:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            out.append(None)
    return out


def fit_order(h, errors) -> float:
    """Least-squares slope of ``log e`` against ``log h``."""
    slope, _ = np.polyfit(np.log(h), np.log(errors), 1)
    return float(slope)


def _level(config, sol, M):
    mesh = build_mesh(config.dim, M, config.family, config.perturbation, config.seed)
    uh, report = solve_poisson(
        mesh, sol, config.solve_options, gauss_legendre(config.quad_order)
    )
    exact = MeshFunction.from_callable(mesh, sol.u)
    err = norms(mesh, exact - uh)
    ref = norms(mesh, exact)
    return StudyRow(
        dim=config.dim,
        family=config.family,
        seed=config.seed,
        M=M,
        h=mesh.h,
        l2=err.l2,
        l2_rel=err.l2 / ref.l2 if ref.l2 > 0 else 0.0,
        h1semi=err.h1_semi,
        h1h=err.h1,
        max=err.max,
        iters=report.iterations,
    )


def run_study(config: StudyConfig) -> list[StudyRow]:
    """Solve on every level and compare with the exact solution at the nodes.

    Raises :class:`~fvlab.errors.StudyAborted` if a level fails to solve;
    the finished levels are attached.
    """
    sol = config.manufactured()
    rows = []

    def work(M):
        return _level(config, sol, M)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = pool.map(work, config.levels)
            rows = _collect(results, config.levels)
    else:
        rows = _collect(map(work, config.levels), config.levels)

    h = [r.h for r in rows]
    for name in ("l2", "h1semi", "h1h", "max"):
        orders = observed_orders(h, [getattr(r, name) for r in rows])
        for row, q in zip(rows[1:], orders):
            setattr(row, f"ord_{name}", q)

    if config.csv_path or config.svg_path:
        from fvlab.study.output import emit_csv, emit_svg

        if config.csv_path:
            emit_csv(rows, config.csv_path)
        if config.svg_path:
            emit_svg(rows, config.svg_path)
    return rows


def _collect(results, levels):
    rows = []
    it = iter(results)
    for M in levels:
        try:
            rows.append(next(it))
        except ConvergenceError as exc:
            raise StudyAborted(
                f"level M={M} failed: {exc}", rows, M, exc.report
            ) from exc
    return rows
