"""
Manufactured solutions with closed-form right-hand sides, and cell averaging.

Every builtin ``u`` vanishes on the boundary of the unit cube and comes with
``f = -Laplace(u)`` derived by hand:

* separable products ``u = prod g(x_i)`` use
  ``Laplace(u) = sum_i g''(x_i) prod_{j != i} g(x_j)``;
* radial profiles ``u = phi(r)``, ``r = |x - 0.5|``, use
  ``Laplace(u) = phi''(r) + (d - 1) phi'(r) / r``. For the two profiles
  here ``phi'(r) / r`` is a regular expression in ``r**2``, so ``r = 0``
  needs no special case.

:func:`derivative_check` compares these formulas with a Richardson
extrapolated finite-difference Laplacian.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from fvlab.mesh import MeshFunction, TensorMesh

__all__ = [
    "ManufacturedSolution",
    "QuadratureRule",
    "BUILTIN_NAMES",
    "builtin",
    "load_solution_file",
    "derivative_check",
    "gauss_legendre",
    "rhs_cell_average",
    "paper_T",
]

BUILTIN_NAMES = ("sine_product", "gaussian_cube", "mollifier", "hicks_henne", "difference")


@dataclass(frozen=True, eq=False)
class ManufacturedSolution:
    """Paired evaluators ``u`` and ``f = -Laplace(u)``.

    Both take an array of points of shape ``(..., dim)`` and return ``(...)``.
    ``kinks`` lists ``(center, radius)`` spheres across which the solution is
    only finitely smooth; cell averaging refines cells that cut them.
    """

    name: str
    dim: int
    u: Callable
    f: Callable
    params: dict = field(default_factory=dict)
    expected_h1h_order: float = 2.0
    kinks: tuple = ()


def _cube_mask(x):
    return np.all((x >= 0.0) & (x <= 1.0), axis=-1)


def _sine_product(dim, params):
    _no_params("sine_product", params)

    def u(x):
        return np.prod(np.sin(np.pi * x), axis=-1)

    def f(x):
        return dim * np.pi**2 * u(x)

    return u, f, ()


def _gaussian_factor(x, c):
    """``g = exp(-c cot^2(pi x))`` and ``g''`` on [0, 1] (zero outside)."""
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    t = 1.0 / np.tan(np.pi * xs)
    t2 = t * t
    g = np.where(inside, np.exp(-c * t2), 0.0)
    # g'' = 2 c pi^2 g (1 + t^2) (2 c t^2 (1 + t^2) - (1 + 3 t^2))
    with np.errstate(over="ignore", invalid="ignore"):
        g2 = 2 * c * np.pi**2 * g * (1 + t2) * (2 * c * t2 * (1 + t2) - (1 + 3 * t2))
    g2 = np.where(g > 0.0, g2, 0.0)
    return g, g2


def _gaussian_cube(dim, params):
    params = dict(params)
    c = float(params.pop("c", 1.0))
    _no_params("gaussian_cube", params)
    if not c > 0:
        raise ValueError(f"gaussian_cube width c must be positive, got {c}")

    def u(x):
        g, _ = _gaussian_factor(x, c)
        return np.prod(g, axis=-1)

    def f(x):
        g, g2 = _gaussian_factor(x, c)
        lap = np.zeros(x.shape[:-1])
        for i in range(dim):
            others = np.prod(np.delete(g, i, axis=-1), axis=-1)
            lap = lap + g2[..., i] * others
        return -lap

    return u, f, ()


def _r2(x):
    return np.sum((x - 0.5) ** 2, axis=-1)


def _mollifier(dim, params):
    _no_params("mollifier", params)

    def u(x):
        r2 = _r2(x)
        inside = r2 < 0.25
        q = np.where(inside, 1.0 - 4.0 * r2, 1.0)
        return np.where(inside, np.exp(-1.0 / q), 0.0)

    def f(x):
        r2 = _r2(x)
        inside = r2 < 0.25
        q = np.where(inside, 1.0 - 4.0 * r2, 1.0)
        phi = np.where(inside, np.exp(-1.0 / q), 0.0)
        # phi'/r = -8 phi / q^2 ; phi'' = -8 phi/q^2 + 64 r^2 phi/q^4 - 128 r^2 phi/q^3
        d1_over_r = -8.0 * phi / q**2
        d2 = d1_over_r + 64.0 * r2 * phi / q**4 - 128.0 * r2 * phi / q**3
        return -(d2 + (dim - 1) * d1_over_r)

    return u, f, (((0.5,) * dim, 0.5),)


def _hicks_henne(dim, params):
    _no_params("hicks_henne", params)

    def u(x):
        r2 = _r2(x)
        s = 2.0 * np.pi * (0.25 - r2)
        return np.where(r2 <= 0.25, np.sin(s) ** 3, 0.0)

    def f(x):
        r2 = _r2(x)
        s = 2.0 * np.pi * (0.25 - r2)
        sn, cs = np.sin(s), np.cos(s)
        # s' = -4 pi r, s'' = -4 pi
        d1_over_r = -12.0 * np.pi * sn**2 * cs
        d2 = (6.0 * sn * cs**2 - 3.0 * sn**3) * 16.0 * np.pi**2 * r2 + d1_over_r
        return np.where(r2 <= 0.25, -(d2 + (dim - 1) * d1_over_r), 0.0)

    return u, f, (((0.5,) * dim, 0.5),)


_FACTORIES = {
    "sine_product": _sine_product,
    "gaussian_cube": _gaussian_cube,
    "mollifier": _mollifier,
    "hicks_henne": _hicks_henne,
}


# the shrunk copy is extended by zero outside [0.25, 0.75]^d; sine_product
# meets zero with nonzero slope there, which would leave u only C^0
_SHRINKABLE = ("gaussian_cube", "mollifier", "hicks_henne")


def _no_params(name, params):
    if params:
        raise ValueError(f"{name} takes no parameters {sorted(params)}")


def _difference(dim, params):
    """``G1(x) - 3 G2(2x - 0.5)``; ``first``/``second`` name the components."""
    params = dict(params)
    first = params.pop("first", None)
    second = params.pop("second", None)
    if first not in _FACTORIES or second not in _SHRINKABLE:
        raise ValueError(
            f"difference needs 'first' among {sorted(_FACTORIES)} and 'second' "
            f"among {sorted(_SHRINKABLE)}"
        )
    inner_params = params.pop("component_params", {})
    _no_params("difference", params)
    u1, f1, k1 = _FACTORIES[first](dim, dict(inner_params.get("first", {})))
    u2, f2, k2 = _FACTORIES[second](dim, dict(inner_params.get("second", {})))

    def shrink(x):
        return 2.0 * x - 0.5

    def masked(fn, x):
        y = shrink(x)
        return np.where(_cube_mask(y), fn(y), 0.0)

    def u(x):
        return u1(x) - 3.0 * masked(u2, x)

    def f(x):
        # Laplace of G(2x - 0.5) is 4 (Laplace G)(2x - 0.5)
        return f1(x) - 12.0 * masked(f2, x)

    kinks = tuple(k1) + tuple(
        (tuple((np.asarray(c) + 0.5) / 2.0), r / 2.0) for c, r in k2
    )
    return u, f, kinks


def builtin(name: str, dim: int, params: dict | None = None) -> ManufacturedSolution:
    """Look up a builtin manufactured solution.

    ``difference`` requires ``params = {"first": ..., "second": ...}`` and
    accepts ``component_params = {"first": {...}, "second": {...}}``.
    ``gaussian_cube`` accepts ``c`` (default 1) in ``exp(-c sum cot^2(pi x_i))``.
    """
    params = dict(params or {})
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dim must be an integer >= 2, got {dim!r}")
    if name == "difference":
        u, f, kinks = _difference(dim, params)
    elif name in _FACTORIES:
        u, f, kinks = _FACTORIES[name](dim, params)
    else:
        raise ValueError(f"unknown solution {name!r}; choose from {BUILTIN_NAMES}")
    return ManufacturedSolution(
        name=name, dim=int(dim), u=u, f=f, params=params, kinks=kinks
    )


def load_solution_file(path, dim: int) -> ManufacturedSolution:
    """Read ``{"name": ..., "params": {...}}`` and build the builtin."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict) or "name" not in doc:
        raise ValueError(f"{path}: expected a JSON object with a 'name' key")
    return builtin(doc["name"], dim, doc.get("params", {}))


def derivative_check(
    sol: ManufacturedSolution,
    n_points: int = 100,
    h_fd: float = 1e-3,
    seed: int = 0,
    box=(0.2, 0.8),
    margin: float = 0.1,
) -> float:
    """Max defect of ``f`` against a finite-difference ``-Laplace(u)``.

    Points are drawn in ``box**dim`` and kept at least ``margin`` away from
    every kink sphere. The second differences with steps ``h`` and ``h/2``
    are Richardson-extrapolated. The defect is normalised by ``max |f|``
    over the sample.
    """
    rng = np.random.default_rng(seed)
    pts = np.empty((0, sol.dim))
    while len(pts) < n_points:
        cand = rng.uniform(box[0], box[1], size=(4 * n_points, sol.dim))
        keep = np.ones(len(cand), dtype=bool)
        for center, radius in sol.kinks:
            r = np.sqrt(np.sum((cand - np.asarray(center)) ** 2, axis=-1))
            keep &= np.abs(r - radius) >= margin
        pts = np.vstack([pts, cand[keep]])
    pts = pts[:n_points]

    def fd_laplacian(h):
        u0 = sol.u(pts)
        total = np.zeros(len(pts))
        for i in range(sol.dim):
            e = np.zeros(sol.dim)
            e[i] = h
            total += (sol.u(pts + e) - 2.0 * u0 + sol.u(pts - e)) / h**2
        return total

    lap = (4.0 * fd_laplacian(h_fd / 2) - fd_laplacian(h_fd)) / 3.0
    f = sol.f(pts)
    scale = np.max(np.abs(f))
    if scale == 0.0:
        return float(np.max(np.abs(lap)))
    return float(np.max(np.abs(f + lap)) / scale)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Per-axis rule on [-1/2, 1/2] with weights summing to one."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def subdivided(self, parts: int = 2) -> "QuadratureRule":
        """Composite rule over ``parts`` equal subintervals."""
        shifts = (np.arange(parts) + 0.5) / parts - 0.5
        nodes = (shifts[:, None] + self.nodes[None, :] / parts).ravel()
        weights = np.tile(self.weights / parts, parts)
        return QuadratureRule(self.order, nodes, weights)


def gauss_legendre(order: int = 4) -> QuadratureRule:
    """Gauss-Legendre rule with ``order`` points, exact to degree ``2*order - 1``."""
    if int(order) != order or order < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {order!r}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    return QuadratureRule(int(order), x / 2.0, w / 2.0)


_CHUNK_POINTS = 1 << 20


def _tensor_rule(rule, dim):
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    w = rule.weights
    for _ in range(dim - 1):
        w = np.multiply.outer(w, rule.weights)
    return nodes, w.ravel()


def _averages(mesh, f, rule, cells):
    """Cell averages of ``f`` for cells given by ``(K, dim)`` interior indices."""
    nodes, weights = _tensor_rule(rule, mesh.dim)
    lo = [ax.coords[1:-1] - ax.steps[:-1] / 2 for ax in mesh.axes]
    width = [ax.half_steps for ax in mesh.axes]
    out = np.empty(len(cells))
    chunk = max(1, _CHUNK_POINTS // len(weights))
    for start in range(0, len(cells), chunk):
        idx = cells[start : start + chunk]
        mid = np.stack([lo[a][idx[:, a]] + width[a][idx[:, a]] / 2 for a in range(mesh.dim)], -1)
        wid = np.stack([width[a][idx[:, a]] for a in range(mesh.dim)], -1)
        pts = mid[:, None, :] + wid[:, None, :] * nodes[None, :, :]
        vals = np.asarray(f(pts), dtype=float).reshape(len(idx), len(weights))
        out[start : start + len(idx)] = vals @ weights
    return out


def _cuts_sphere(mesh, center, radius):
    """Interior cells whose box meets the sphere surface."""
    dmin2 = np.zeros(())
    dmax2 = np.zeros(())
    for a, ax in enumerate(mesh.axes):
        lo = ax.coords[1:-1] - ax.steps[:-1] / 2
        hi = ax.coords[1:-1] + ax.steps[1:] / 2
        c = center[a]
        near = np.where(c < lo, lo - c, np.where(c > hi, c - hi, 0.0))
        far = np.maximum(np.abs(lo - c), np.abs(hi - c))
        shape = [1] * mesh.dim
        shape[a] = -1
        dmin2 = dmin2 + (near**2).reshape(shape)
        dmax2 = dmax2 + (far**2).reshape(shape)
    return (dmin2 <= radius**2) & (dmax2 >= radius**2)


def rhs_cell_average(
    mesh: TensorMesh, f, rule: QuadratureRule | None = None, kinks=None
) -> MeshFunction:
    """Average of ``f`` over each control volume, zero on the boundary.

    ``f`` is a point evaluator or a :class:`ManufacturedSolution` (whose
    ``f`` and ``kinks`` are then used). Cells that cut a kink sphere are
    integrated with the rule subdivided twice per axis.
    """
    if isinstance(f, ManufacturedSolution):
        kinks = f.kinks if kinks is None else kinks
        f = f.f
    rule = rule or gauss_legendre(4)
    cells = np.indices(mesh.interior_shape).reshape(mesh.dim, -1).T
    avg = _averages(mesh, f, rule, cells)
    if kinks:
        flagged = np.zeros(mesh.interior_shape, dtype=bool)
        for center, radius in kinks:
            flagged |= _cuts_sphere(mesh, center, radius)
        flat = np.flatnonzero(flagged.ravel())
        if flat.size:
            avg[flat] = _averages(mesh, f, rule.subdivided(2), cells[flat])
    return MeshFunction.from_interior(mesh, avg)


def paper_T(mesh: TensorMesh, f, rule: QuadratureRule | None = None, kinks=None) -> MeshFunction:
    """Right-hand side in the factor-two convention: twice the cell average."""
    return 2.0 * rhs_cell_average(mesh, f, rule, kinks)
