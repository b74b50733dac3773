"""Heavy-ball optimizers with iterate averaging (HB, AHB, WAHB, TAHB, R-AHB)."""

from ._core import (
    Error,
    HBParams,
    Objective,
    QuadraticProblem,
    cli_main,
    dev_measure,
    diag_quadratic,
    hb_peak_lower_bound,
    libsvm_logreg,
    libsvm_shape,
    nesterov,
    optimal_hb_params,
    random_quadratic,
    run,
    run_rahb,
    synthetic_logreg,
    theorem3_ratio_bound,
    toeplitz,
    wahb_stepsize,
)

__all__ = [
    "Error",
    "HBParams",
    "Objective",
    "QuadraticProblem",
    "cli_main",
    "dev_measure",
    "diag_quadratic",
    "hb_peak_lower_bound",
    "libsvm_logreg",
    "libsvm_shape",
    "nesterov",
    "optimal_hb_params",
    "random_quadratic",
    "run",
    "run_rahb",
    "synthetic_logreg",
    "theorem3_ratio_bound",
    "toeplitz",
    "wahb_stepsize",
]
