"""
Discrete norms and the stability inequalities
=============================================

Evaluate the discrete norms, then sample the four inequalities over
random meshes and compare against the exact extremes on one mesh.
"""

import numpy as np

from fvlab import MeshFunction, TensorMesh, hminus1_dense, norms
from fvlab.study import (
    coercivity_constant,
    coercivity_exact_min,
    dual_stability_constant,
    dual_stability_exact_max,
    verify_suite,
)

# one interior node: ||v||^2 = 1/8, |v|_1^2 = 3, ||v||_{-1} = (1/8)/sqrt(3.125)
mesh = TensorMesh.uniform(3, 2)
v = MeshFunction.from_interior(mesh, [1.0])
r = norms(mesh, v)
print("l2^2 %.4f  semi^2 %.4f  H^-1 %.7f" % (r.l2**2, r.h1_semi**2, hminus1_dense(mesh, v)))

# random sampling, as in `fvlab verify`
report = verify_suite(3, trials=100, seed=7)
for line in report.lines():
    print(line)

# the sampled worst case sits well inside the bounds; the true extremes are closer
for M in (4, 6, 8):
    m = TensorMesh.uniform(3, M)
    print("M=%d  coercivity min %.4f (bound %.4f)" % (M, coercivity_exact_min(m, 0), coercivity_constant(3)))
small = TensorMesh.random(3, 5, 0.3, seed=1)
print("dual stability max %.4f (bound %.4f)" % (dual_stability_exact_max(small), dual_stability_constant(3)))
