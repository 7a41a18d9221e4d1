"""Debiased-LASSO detection for complex compressed sensing.

Implements the element-wise detector for the model y = A x0 + xi with
row-orthogonal (or Gaussian) measurement matrices: a complex LASSO solve,
ensemble-matched debiasing, spectral variance estimation, and analytic
false-alarm thresholds, plus the Monte Carlo suites that validate them.
"""

from .detect import (DebiasedEstimate, DetectionReport, coefficient, crod, debias,
                     detect, evaluate, rho_ca_fixed_point, rss, sigma_w2_crod,
                     sigma_w_camp, sigma_w_sdl_complex, threshold)
from .lasso import (LassoSolution, SolverOptions, active_density,
                    complex_soft_threshold, kkt_residual, solve_lasso,
                    solver_backend)
from .signal_model import (ProblemInstance, draw_signal, make_instance,
                           make_matrix, observe, snr_to_noise_variance)
from .spectral import (SpectralDensity, g_double_prime, g_prime,
                       lambda_from_density, marchenko_pastur_density,
                       row_orthogonal_density, solve_t, stieltjes_sum)
from .stats import (EcdfCurve, ecdf, ground_truth_sigma_w, ks_test, lower_median,
                    normalize_w, ree)

__version__ = "0.1.0"

__all__ = [
    "DebiasedEstimate", "DetectionReport", "EcdfCurve", "LassoSolution",
    "ProblemInstance", "SolverOptions", "SpectralDensity", "active_density",
    "coefficient", "complex_soft_threshold", "crod", "debias", "detect",
    "draw_signal", "ecdf", "evaluate", "g_double_prime", "g_prime",
    "ground_truth_sigma_w", "kkt_residual", "ks_test", "lambda_from_density",
    "lower_median", "make_instance", "make_matrix", "marchenko_pastur_density",
    "normalize_w", "observe", "ree", "rho_ca_fixed_point",
    "row_orthogonal_density", "rss", "sigma_w2_crod", "sigma_w_camp",
    "sigma_w_sdl_complex", "snr_to_noise_variance", "solve_lasso", "solve_t",
    "solver_backend", "stieltjes_sum", "threshold",
]
