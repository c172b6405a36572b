"""Convergence studies, randomized inequality checks, and their output."""

from fvlab.study.convergence import (
    StudyConfig,
    StudyRow,
    build_mesh,
    fit_order,
    observed_orders,
    run_study,
)
from fvlab.study.output import CSV_COLUMNS, emit_csv, emit_svg, read_csv, reference_line
from fvlab.study.verify import (
    InequalityCheck,
    VerifyReport,
    coercivity_constant,
    coercivity_exact_min,
    coercivity_ratio,
    dual_stability_constant,
    dual_stability_exact_max,
    dual_stability_ratio,
    poincare_constant,
    poincare_ratio,
    solution_stability_constant,
    solution_stability_ratio,
    verify_suite,
)

__all__ = [
    "StudyConfig",
    "StudyRow",
    "build_mesh",
    "fit_order",
    "observed_orders",
    "run_study",
    "CSV_COLUMNS",
    "emit_csv",
    "emit_svg",
    "read_csv",
    "reference_line",
    "InequalityCheck",
    "VerifyReport",
    "coercivity_constant",
    "coercivity_exact_min",
    "coercivity_ratio",
    "dual_stability_constant",
    "dual_stability_exact_max",
    "dual_stability_ratio",
    "poincare_constant",
    "poincare_ratio",
    "solution_stability_constant",
    "solution_stability_ratio",
    "verify_suite",
]
