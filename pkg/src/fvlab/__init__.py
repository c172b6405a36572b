"""Cell-centered finite volume scheme for the Dirichlet Poisson problem on
non-uniform tensor meshes of the unit cube, with the discrete norms used to
check its stability and convergence."""

from fvlab.mesh import (
    Axis,
    MeshFunction,
    TensorMesh,
    axis_from_coords,
    axis_random,
    axis_uniform,
    cell_of,
    read_mesh_file,
    write_mesh_file,
)
from fvlab.norms import NormReport, h1_gram, h1_seminorm, hminus1_dense, inner, norms
from fvlab.problem import (
    ManufacturedSolution,
    QuadratureRule,
    builtin,
    derivative_check,
    gauss_legendre,
    paper_T,
    rhs_cell_average,
)
from fvlab.solver import SolveOptions, SolveReport, solve, solve_poisson, symmetry_defect
from fvlab.stencil import SparseOperator, apply_Lh, assemble_Lh, mu_transverse

__version__ = "0.1.0"
