"""
Refinement study
================

Solve the manufactured problems on a sequence of meshes and read off the
observed orders. Pass a directory to keep the CSV and SVG.
"""

import sys
import tempfile
from pathlib import Path

from fvlab.study import StudyConfig, emit_csv, emit_svg, run_study

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
out.mkdir(parents=True, exist_ok=True)

for family in ("uniform", "random"):
    rows = run_study(StudyConfig(dim=3, solution="sine_product", levels=(4, 8, 16, 32), family=family, seed=1))
    print(family)
    print("   M        L2        H1       max  ord_L2  ord_H1")
    for r in rows:
        q = "" if r.ord_l2 is None else "%6.2f  %6.2f" % (r.ord_l2, r.ord_h1h)
        print("%4d  %.2e  %.2e  %.2e  %s" % (r.M, r.l2, r.h1h, r.max, q))
    emit_csv(rows, out / f"sine_{family}.csv")
    emit_svg(rows, out / f"sine_{family}.svg", title=f"sine_product, {family}")

# a difference of two mollifiers in 2D, on jittered meshes
rows = run_study(StudyConfig(
    dim=2, solution="difference", params={"first": "mollifier", "second": "mollifier"},
    levels=(8, 16, 32, 64), family="random", seed=3,
))
print("mollifier difference, L2 orders", [None if r.ord_l2 is None else round(r.ord_l2, 2) for r in rows])
print("files in", out)
