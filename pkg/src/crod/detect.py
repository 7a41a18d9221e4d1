"""Debiased-LASSO estimators, variance estimators, thresholds and tests.

The debiased estimate x_d = x_hat + (1/Lambda) A^H (y - A x_hat) undoes the
shrinkage of the LASSO: with the coefficient matched to the measurement
ensemble, x_d - x0 is asymptotically circular Gaussian, which turns the
element-wise detection problem into thresholding |x_d_i|^2 against an
analytic false-alarm threshold.

Coefficient rules (gamma = M/N, rho = an active density):

    CROM, ROM : (gamma - rho) / (1 - rho)   row-orthogonal ensembles
    CG,   G   : gamma - rho                 Gaussian ensembles

CROM/CG use the weighted density rho_CA solved self-consistently below;
ROM/G use the plain counting density rho_a.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IllPosedInstanceError, NumericError, ParameterError
from .lasso import SolverOptions, solve_lasso
from .spectral import g_double_prime_row_orthogonal, g_prime_row_orthogonal
from .stats import lower_median

VARIANTS = ("CROM", "CG", "ROM", "G")

_SQRT_LN2 = math.sqrt(math.log(2.0))


@dataclass
class DebiasedEstimate:
    """Debiased vector with the coefficient that produced it.

    ``rho_used`` is the active density fed to the coefficient rule and
    ``sigma_w2`` the estimated variance of x_d - x0 (None until estimated).
    """

    x_d: np.ndarray
    lambda_coeff: float
    variant: str
    rho_used: float
    sigma_w2: Optional[float] = None


@dataclass
class DetectionReport:
    """Element-wise test outcome; rates are None when their set is empty."""

    kappa_d: float
    decisions: np.ndarray
    target_p_fa: float
    p_fa_hat: Optional[float] = None
    p_d_hat: Optional[float] = None


def coefficient(variant, gamma, rho):
    """Debias coefficient for the given rule; positive iff rho < gamma."""
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if not 0 < gamma <= 1:
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if not 0 <= rho < 1:
        raise ParameterError(f"rho must lie in [0, 1), got {rho}")
    if rho >= gamma:
        raise IllPosedInstanceError(
            f"rho = {rho} >= gamma = {gamma} makes the coefficient nonpositive",
            rho=rho, gamma=gamma)
    if variant in ("CROM", "ROM"):
        return (gamma - rho) / (1.0 - rho)
    return gamma - rho


def rho_ca_fixed_point(x_hat, lam, gamma, rule="CROM", damping=0.5,
                       max_iter=1000, tol=1e-12):
    """Solve the weighted active density jointly with its coefficient.

    The density rho_CA = (1/2N) sum over active i of
    (2 - lam / (Lambda |x_hat_i| + lam)) depends on Lambda, which depends on
    rho_CA through the chosen rule.  A damped fixed-point iteration seeded at
    the counting density rho_a resolves the circularity; iterates are kept
    below gamma where the coefficient stays positive.

    Returns (rho_ca, Lambda).
    """
    if rule not in ("CROM", "CG"):
        raise ParameterError(f"rule must be CROM or CG, got {rule!r}")
    if not 0 < gamma <= 1:
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    x_hat = np.asarray(x_hat)
    N = x_hat.shape[0]
    mags = np.abs(x_hat[x_hat != 0])
    hi = gamma * (1.0 - 1e-9)
    rho = min(mags.size / N, hi)
    if mags.size == 0:
        return 0.0, coefficient(rule, gamma, 0.0)
    for _ in range(max_iter):
        Lam = coefficient(rule, gamma, rho)
        target = float((2.0 - lam / (Lam * mags + lam)).sum() / (2.0 * N))
        nxt = min((1.0 - damping) * rho + damping * target, hi)
        done = abs(nxt - rho) <= tol
        rho = nxt
        if done:
            break
    else:
        raise IllPosedInstanceError(
            f"active-density fixed point did not converge in {max_iter} iterations",
            rho=rho, gamma=gamma)
    if hi - rho <= 1e-9 * gamma:
        raise IllPosedInstanceError(
            f"active density pinned at gamma = {gamma}: coefficient would vanish",
            rho=rho, gamma=gamma)
    return rho, coefficient(rule, gamma, rho)


def debias(y, A, x_hat, Lambda, variant="generic", rho_used=float("nan")):
    """Debiased estimate x_hat + (1/Lambda) A^H (y - A x_hat)."""
    if Lambda <= 0:
        raise ParameterError(f"Lambda must be positive, got {Lambda}")
    x_d = x_hat + A.conj().T @ (y - A @ x_hat) / Lambda
    return DebiasedEstimate(x_d=x_d, lambda_coeff=float(Lambda), variant=variant,
                            rho_used=float(rho_used))


def rss(y, A, x_hat):
    """Mean-square residual ||y - A x_hat||^2 / M."""
    r = y - A @ x_hat
    return float(np.vdot(r, r).real / A.shape[0])


def sigma_w2_crod(gamma, rho_ca, rss_value, sigma2):
    """Variance of the debiased error from the spectral recursion.

    Combines chi = rho_ca (1 - rho_ca) / (gamma - rho_ca) with the closed
    row-orthogonal forms of the spectral derivatives to map the measured
    residual power and the known noise variance into sigma_w^2.  rho_ca = 0
    is served by the analytic small-chi limits.
    """
    if not 0 <= rho_ca < gamma:
        raise ParameterError(f"need 0 <= rho_ca < gamma, got rho_ca={rho_ca}, gamma={gamma}")
    if rss_value < 0 or sigma2 < 0:
        raise ParameterError("rss and sigma2 must be nonnegative")
    chi = rho_ca * (1.0 - rho_ca) / (gamma - rho_ca)
    gp = g_prime_row_orthogonal(chi, gamma)
    gpp = g_double_prime_row_orthogonal(chi, gamma)
    den = 2.0 * gp - 2.0 * gpp * chi
    if den <= 0:
        raise NumericError("variance recursion denominator is nonpositive",
                           gamma=gamma, rho_ca=rho_ca, chi=chi, gp=gp, gpp=gpp)
    hat_chi = (gamma * gpp * rss_value + (gp * gp - gpp * gamma) * sigma2) / den
    Lam = coefficient("CROM", gamma, rho_ca)
    return 2.0 * hat_chi / (Lam * Lam)


def sigma_w_camp(x_d):
    """Median-based deviation estimate: median(|x_d|) / sqrt(ln 2).

    Exact for a circular Gaussian vector because the modulus is Rayleigh
    with median sigma * sqrt(ln 2).
    """
    x_d = np.asarray(x_d)
    if x_d.size == 0:
        raise ParameterError("x_d must be nonempty")
    return float(lower_median(np.abs(x_d)) / _SQRT_LN2)


def sigma_w_sdl_complex(residual, gamma, rho_ca):
    """Residual-median deviation estimate adapted to complex data."""
    if gamma <= rho_ca:
        raise ParameterError(f"need gamma > rho_ca, got gamma={gamma}, rho_ca={rho_ca}")
    residual = np.asarray(residual)
    if residual.size == 0:
        raise ParameterError("residual must be nonempty")
    med = lower_median(np.abs(residual))
    return float(np.sqrt(gamma) / (_SQRT_LN2 * (gamma - rho_ca)) * med)


def threshold(sigma_w2, p_fa):
    """Squared-magnitude threshold -sigma_w2 * ln(p_fa) for a target rate."""
    if not 0 < p_fa < 1:
        raise ParameterError(f"p_fa must lie in (0, 1), got {p_fa}")
    if sigma_w2 < 0:
        raise ParameterError(f"sigma_w2 must be nonnegative, got {sigma_w2}")
    return -sigma_w2 * math.log(p_fa)


def detect(x_d, kappa_d):
    """Element-wise test |x_d_i|^2 > kappa_d (strict)."""
    if kappa_d < 0:
        raise ParameterError(f"kappa_d must be nonnegative, got {kappa_d}")
    x_d = np.asarray(x_d)
    return (x_d.real**2 + x_d.imag**2) > kappa_d


def evaluate(decisions, support):
    """Empirical (p_fa_hat, p_d_hat) over the zero set and the support.

    Either rate is None when its index set is empty.
    """
    decisions = np.asarray(decisions, dtype=bool)
    N = decisions.shape[0]
    mask = np.zeros(N, dtype=bool)
    support = np.asarray(support, dtype=int)
    if support.size and (support.min() < 0 or support.max() >= N):
        raise ParameterError("support indices out of range")
    mask[support] = True
    n_sup = int(mask.sum())
    n_null = N - n_sup
    p_fa = float(decisions[~mask].mean()) if n_null else None
    p_d = float(decisions[mask].mean()) if n_sup else None
    return p_fa, p_d


def crod(y, A, lam, p_fa, sigma2, support=None, solver_opts: Optional[SolverOptions] = None):
    """Full detection pipeline for a row-orthogonal measurement matrix.

    Chains the LASSO solve, the CROM coefficient fixed point, debiasing,
    the spectral variance estimate and the analytic threshold.  When the
    true support is supplied the report carries empirical rates.

    Returns (LassoSolution, DebiasedEstimate, DetectionReport).
    """
    gamma = A.shape[0] / A.shape[1]
    sol = solve_lasso(y, A, lam, solver_opts)
    rho_ca, Lam = rho_ca_fixed_point(sol.x_hat, lam, gamma, rule="CROM")
    est = debias(y, A, sol.x_hat, Lam, variant="CROM", rho_used=rho_ca)
    est.sigma_w2 = sigma_w2_crod(gamma, rho_ca, rss(y, A, sol.x_hat), sigma2)
    kappa = threshold(est.sigma_w2, p_fa)
    decisions = detect(est.x_d, kappa)
    report = DetectionReport(kappa_d=kappa, decisions=decisions, target_p_fa=p_fa)
    if support is not None:
        report.p_fa_hat, report.p_d_hat = evaluate(decisions, support)
    return sol, est, report
