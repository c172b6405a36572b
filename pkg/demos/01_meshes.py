"""
Tensor meshes on the unit cube
==============================

Uniform and randomly perturbed partitions, control volumes, and the
plain-text mesh format.
"""

import tempfile
from pathlib import Path

import numpy as np

from fvlab import TensorMesh, cell_of, read_mesh_file, write_mesh_file
from fvlab.mesh import axis_from_coords, axis_random

# one axis: steps h_i and the half-steps hbar_i = (h_i + h_{i+1}) / 2
ax = axis_from_coords([0, 0.25, 0.75, 1])
print("steps      ", ax.steps)
print("half steps ", ax.half_steps)

# jittered axis: every node moves by at most p/M, so steps stay in [(1-2p)/M, (1+2p)/M]
ax = axis_random(8, 0.3, seed=1)
print("random steps", np.round(ax.steps, 4), "min", ax.steps.min().round(4))

# a 3D mesh with a different draw per axis
mesh = TensorMesh.random(3, 6, 0.3, seed=4)
print("shape", mesh.shape, "interior nodes", mesh.n_interior)
print("h = %.4f, max/min step ratio = %.3f" % (mesh.h, mesh.quasi_uniformity_ratio))

# the box around an interior node
cell = cell_of(TensorMesh.uniform(3, 4), (2, 2, 2))
print("cell", cell.bounds, "volume", cell.volume)

# round trip through the text format; coordinates survive bit for bit
path = Path(tempfile.mkdtemp()) / "mesh.txt"
write_mesh_file(mesh, path)
print(path.read_text().splitlines()[:3])
assert read_mesh_file(path) == mesh
