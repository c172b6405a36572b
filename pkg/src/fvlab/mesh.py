"""
Tensor-product meshes of the unit cube.

A mesh is the Cartesian product of ``d`` one-dimensional partitions
``0 = x_0 < x_1 < ... < x_M = 1``. Each interior node ``x_i`` owns the
control volume ``(x_i - h_i/2, x_i + h_{i+1}/2)`` along that axis, whose
width is the half-step ``hbar_i = (h_i + h_{i+1}) / 2``.

Node values are stored row-major over the full ``(M_0+1) x ... x (M_{d-1}+1)``
grid (axis 0 slowest), boundary nodes included, so that Dirichlet zeros are
explicit data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from fvlab.errors import InvalidMeshError, MeshFormatError

__all__ = [
    "Axis",
    "TensorMesh",
    "MeshFunction",
    "Cell",
    "axis_uniform",
    "axis_random",
    "axis_from_coords",
    "cell_of",
    "read_mesh_file",
    "write_mesh_file",
]


@dataclass(frozen=True, eq=False)
class Axis:
    """A validated partition of [0, 1].

    Attributes:
        coords: node coordinates, length ``M + 1``.
        steps: ``h_i = coords[i] - coords[i-1]`` for ``i = 1..M`` (length ``M``).
        half_steps: ``hbar_i = (h_i + h_{i+1}) / 2`` for ``i = 1..M-1``
            (length ``M - 1``). ``half_steps[i-1]`` belongs to node ``i``.
    """

    coords: np.ndarray
    steps: np.ndarray = field(init=False, repr=False)
    half_steps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).ravel()
        if c.size < 3:
            raise InvalidMeshError(f"an axis needs at least 3 points, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise InvalidMeshError("coordinates must be finite")
        if c[0] != 0.0 or c[-1] != 1.0:
            raise InvalidMeshError(
                f"endpoints must be 0 and 1, got {c[0]!r} and {c[-1]!r}"
            )
        steps = np.diff(c)
        if np.any(steps <= 0.0):
            bad = int(np.argmin(steps)) + 1
            raise InvalidMeshError(f"coordinates not strictly increasing at index {bad}")
        c.setflags(write=False)
        steps.setflags(write=False)
        half = 0.5 * (steps[:-1] + steps[1:])
        half.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "half_steps", half)

    @property
    def M(self) -> int:
        return self.coords.size - 1

    def __eq__(self, other):
        return isinstance(other, Axis) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())


def axis_uniform(M: int) -> Axis:
    """Uniform partition with ``M`` steps of width ``1/M``."""
    M = _check_M(M)
    return Axis(np.arange(M + 1) / M)


def axis_random(M: int, max_perturbation: float, seed) -> Axis:
    """Uniform partition with each interior node jittered.

    Node ``i`` moves by a uniform draw from ``[-p/M, p/M]`` with
    ``p = max_perturbation``, so every step lies in ``[(1-2p)/M, (1+2p)/M]``
    and the max/min step ratio is at most ``(1+2p)/(1-2p)``.
    """
    M = _check_M(M)
    p = float(max_perturbation)
    if not 0.0 <= p < 0.5:
        raise ValueError(f"max_perturbation must lie in [0, 0.5), got {p}")
    rng = np.random.default_rng(seed)
    delta = rng.uniform(-p / M, p / M, size=M - 1)
    coords = np.arange(M + 1) / M
    coords[1:-1] += delta
    return Axis(coords)


def axis_from_coords(coords: Sequence[float]) -> Axis:
    return Axis(np.asarray(coords, dtype=float))


def _check_M(M) -> int:
    if int(M) != M or M < 2:
        raise ValueError(f"M must be an integer >= 2, got {M!r}")
    return int(M)


@dataclass(frozen=True, eq=False)
class TensorMesh:
    """Cartesian product of ``dim`` axes (``dim >= 2``)."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if len(axes) < 2:
            raise ValueError(f"a tensor mesh needs dim >= 2, got {len(axes)}")
        if not all(isinstance(a, Axis) for a in axes):
            raise TypeError("axes must be Axis instances")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def uniform(cls, dim: int, M) -> "TensorMesh":
        Ms = _per_axis(dim, M)
        return cls(tuple(axis_uniform(m) for m in Ms))

    @classmethod
    def random(cls, dim: int, M, max_perturbation: float, seed: int) -> "TensorMesh":
        """Independently perturbed axes; axis ``a`` uses seed ``(seed, a)``."""
        Ms = _per_axis(dim, M)
        return cls(tuple(axis_random(m, max_perturbation, (seed, a)) for a, m in enumerate(Ms)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.M + 1 for a in self.axes)

    @property
    def interior_shape(self) -> tuple:
        return tuple(a.M - 1 for a in self.axes)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.interior_shape))

    @property
    def h(self) -> float:
        """Largest step over all axes."""
        return max(float(a.steps.max()) for a in self.axes)

    @property
    def quasi_uniformity_ratio(self) -> float:
        hmin = min(float(a.steps.min()) for a in self.axes)
        return self.h / hmin

    @property
    def interior(self) -> tuple:
        """Index tuple selecting the interior block of a full node grid."""
        return (slice(1, -1),) * self.dim

    def cell_volumes(self) -> np.ndarray:
        """``prod hbar`` at every interior node, shaped like the interior block."""
        return _outer([a.half_steps for a in self.axes])

    def node_coordinates(self) -> np.ndarray:
        """Array of shape ``self.shape + (dim,)`` with the node positions."""
        grids = np.meshgrid(*[a.coords for a in self.axes], indexing="ij")
        return np.stack(grids, axis=-1)

    def __eq__(self, other):
        return isinstance(other, TensorMesh) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)


def _per_axis(dim, M):
    if np.ndim(M) == 0:
        return (M,) * dim
    Ms = tuple(M)
    if len(Ms) != dim:
        raise ValueError(f"expected {dim} values of M, got {len(Ms)}")
    return Ms


def _outer(vectors) -> np.ndarray:
    out = np.asarray(vectors[0], dtype=float)
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


@dataclass(frozen=True, eq=False)
class MeshFunction:
    """Real values at every node of ``mesh`` (flat, row-major)."""

    mesh: TensorMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size != self.mesh.n_nodes:
            raise ValueError(
                f"expected {self.mesh.n_nodes} node values, got {v.size}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, mesh: TensorMesh) -> "MeshFunction":
        return cls(mesh, np.zeros(mesh.n_nodes))

    @classmethod
    def from_interior(cls, mesh: TensorMesh, interior_values) -> "MeshFunction":
        """Embed interior values, with zeros on the boundary."""
        grid = np.zeros(mesh.shape)
        grid[mesh.interior] = np.asarray(interior_values, dtype=float).reshape(
            mesh.interior_shape
        )
        return cls(mesh, grid)

    @classmethod
    def from_callable(cls, mesh: TensorMesh, func: Callable) -> "MeshFunction":
        """Evaluate ``func`` on an ``(..., dim)`` array of node positions."""
        return cls(mesh, func(mesh.node_coordinates()))

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape(self.mesh.shape)

    def interior_values(self) -> np.ndarray:
        return self.grid[self.mesh.interior].reshape(-1)

    def __array__(self, dtype=None, copy=None):
        return self.grid if dtype is None else self.grid.astype(dtype)

    def __neg__(self):
        return MeshFunction(self.mesh, -self.values)

    def __add__(self, other):
        return MeshFunction(self.mesh, self.values + _values_of(self.mesh, other))

    def __sub__(self, other):
        return MeshFunction(self.mesh, self.values - _values_of(self.mesh, other))

    def __mul__(self, scalar):
        return MeshFunction(self.mesh, self.values * float(scalar))

    __rmul__ = __mul__


def _values_of(mesh, other):
    if isinstance(other, MeshFunction):
        if other.mesh != mesh:
            raise ValueError("mesh functions live on different meshes")
        return other.values
    return np.asarray(other, dtype=float).reshape(-1)


@dataclass(frozen=True)
class Cell:
    """Axis-aligned control volume; ``bounds[a] = (lower, upper)``."""

    bounds: tuple
    volume: float


def cell_of(mesh: TensorMesh, node: Sequence[int]) -> Cell:
    """Control volume of an interior node given by its multi-index."""
    node = tuple(int(i) for i in node)
    if len(node) != mesh.dim:
        raise ValueError(f"node index must have {mesh.dim} entries")
    bounds = []
    volume = 1.0
    for ax, i in zip(mesh.axes, node):
        if not 0 < i < ax.M:
            raise ValueError(f"node {node} is not interior")
        lo = ax.coords[i] - ax.steps[i - 1] / 2
        hi = ax.coords[i] + ax.steps[i] / 2
        bounds.append((float(lo), float(hi)))
        volume *= ax.half_steps[i - 1]
    return Cell(tuple(bounds), float(volume))


def write_mesh_file(mesh: TensorMesh, path) -> None:
    lines = [f"dim {mesh.dim}"]
    for ax in mesh.axes:
        lines.append(f"axis {ax.M}")
        lines.append(" ".join(f"{c:.17g}" for c in ax.coords))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh_file(path) -> TensorMesh:
    """Parse the ``dim``/``axis`` text format; see :func:`write_mesh_file`."""
    tokens = []  # (lineno, token)
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens.extend((lineno, t) for t in stripped.split())

    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][0] if tokens else 1
            raise MeshFormatError(f"unexpected end of file, expected {what}", last)
        tok = tokens[pos]
        pos += 1
        return tok

    def take_int(what):
        lineno, tok = take(what)
        try:
            return lineno, int(tok)
        except ValueError:
            raise MeshFormatError(f"expected integer {what}, got {tok!r}", lineno) from None

    lineno, kw = take("'dim'")
    if kw != "dim":
        raise MeshFormatError(f"expected 'dim', got {kw!r}", lineno)
    lineno, dim = take_int("dimension")
    if dim < 2:
        raise MeshFormatError(f"dim must be >= 2, got {dim}", lineno)

    axes = []
    for _ in range(dim):
        lineno, kw = take("'axis'")
        if kw != "axis":
            raise MeshFormatError(f"expected 'axis', got {kw!r}", lineno)
        axis_line, M = take_int("step count")
        coords = []
        for _ in range(M + 1):
            lineno, tok = take("coordinate")
            try:
                coords.append(float(tok))
            except ValueError:
                raise MeshFormatError(f"bad coordinate {tok!r}", lineno) from None
        try:
            axes.append(Axis(np.array(coords)))
        except InvalidMeshError as exc:
            raise MeshFormatError(str(exc), axis_line) from None
    if pos != len(tokens):
        lineno, tok = tokens[pos]
        raise MeshFormatError(
            f"trailing content {tok!r} after {dim} axis blocks", lineno
        )
    return TensorMesh(tuple(axes))
