"""
The averaged difference operator
================================

Apply ``L^h`` without a matrix, assemble it, and look at the stencil.
"""

import numpy as np

from fvlab import TensorMesh, apply_Lh, assemble_Lh
from fvlab.solver import symmetry_defect
from fvlab.stencil import mu_transverse

mesh = TensorMesh.uniform(3, 4)

# a unit spike at the centre node
spike = np.zeros(mesh.shape)
spike[2, 2, 2] = 1.0

# transverse average: 12/16 at the centre, 1/16 on the diagonal corners
mu = mu_transverse(mesh, spike, axis=0)
print("mu at centre", mu[2, 1, 1], "corner", mu[2, 0, 0])

# L^h of the spike at the centre is (9/2) / h^2
print("L^h spike", apply_Lh(mesh, spike)[1, 1, 1])

# constants: mu keeps them, L^h kills them
c = np.full(mesh.shape, 2.5)
print("mu const", np.unique(mu_transverse(mesh, c, 1)), "L^h const", np.abs(apply_Lh(mesh, c)).max())

# on a random mesh the volume-scaled matrix is still symmetric
rand = TensorMesh.random(3, 6, 0.3, seed=2)
A = assemble_Lh(rand, volume_scaled=True)
print("n =", A.n, "nnz per row <=", np.diff(A.indptr).max(), "symmetry defect %.1e" % symmetry_defect(A))

# and it matches the matrix-free product
v = np.random.default_rng(0).standard_normal(rand.n_interior)
free = apply_Lh(rand, np.pad(v.reshape(rand.interior_shape), 1)).ravel()
unscaled = assemble_Lh(rand, volume_scaled=False)
print("matrix vs matrix-free %.1e" % (np.linalg.norm(unscaled @ v - free) / np.linalg.norm(free)))
