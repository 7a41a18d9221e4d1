"""Complex-valued LASSO solver with exact stationarity certification.

The program is  min_x  0.5 ||y - A x||_2^2 + lam * sum_i |x_i|,  with the
penalty summing complex moduli, so each entry is its own two-real group.
The solver is an accelerated proximal-gradient (FISTA) loop with a
function-value restart; a solution is accepted only when both the relative
iterate change and the stationarity residual pass their tolerances.

Two interchangeable backends run the inner loop: a compiled extension and a
NumPy fallback, chosen at import time (see ``solver_backend``).  Setting the
environment variable ``CROD_PURE_PYTHON=1`` forces the fallback.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import svds

from ._fista_py import fista_loop as _fista_py_loop
from ._fista_py import soft_threshold_array
from .errors import ConvergenceError, ParameterError

try:
    from ._fista_core import fista_loop as _fista_core_loop
except ImportError:  # pragma: no cover - exercised only on pure installs
    _fista_core_loop = None

_FORCE_PY = os.environ.get("CROD_PURE_PYTHON", "0") not in ("", "0")


def solver_backend():
    """Name of the backend the solver will use: 'compiled' or 'python'."""
    if _fista_core_loop is not None and not _FORCE_PY:
        return "compiled"
    return "python"


@dataclass
class SolverOptions:
    """Knobs for solve_lasso; defaults match the package-wide contracts."""

    step: object = "auto"  # "auto" or a positive float
    max_iter: int = 20000
    tol_rel: float = 1e-10
    tol_kkt: float = 1e-8
    accelerate: bool = True
    backend: str = "auto"  # "auto", "compiled", "python"


@dataclass
class LassoSolution:
    """Solver output plus the diagnostics needed to re-certify it.

    ``objective_trace`` is the monitored per-iteration objective sequence,
    non-increasing by construction.  ``rho_a`` counts structurally nonzero
    entries (the prox emits exact zeros, so no epsilon is involved).
    """

    x_hat: np.ndarray
    lam: float
    residual: np.ndarray
    iterations: int
    objective: float
    kkt_violation: float
    rho_a: float
    converged: bool
    objective_trace: np.ndarray = field(repr=False, default=None)
    backend: str = ""


def complex_soft_threshold(h, lam, Q):
    """Minimizer of (Q/2)|x|^2 - Re(h* x) + lam |x| for complex scalar h.

    Returns 0 when |h| <= lam, else keeps the phase of h with magnitude
    (|h| - lam) / Q.  Accepts scalars or arrays.
    """
    if lam < 0:
        raise ParameterError(f"lam must be nonnegative, got {lam}")
    if Q <= 0:
        raise ParameterError(f"Q must be positive, got {Q}")
    h_arr = np.asarray(h, dtype=complex)
    out = soft_threshold_array(h_arr, lam) / Q
    if np.isscalar(h) or h_arr.ndim == 0:
        return complex(out)
    return out


def kkt_residual(y, A, x_hat, lam):
    """Maximum stationarity violation of a candidate solution.

    Active entries must satisfy a_i^H (y - A x) = lam * x_i / |x_i| exactly;
    inactive entries must satisfy |a_i^H (y - A x)| <= lam.  Returns the max
    over entries of the corresponding defects (0 for a true solution).
    """
    g = A.conj().T @ (y - A @ x_hat)
    active = x_hat != 0
    worst = 0.0
    if active.any():
        xa = x_hat[active]
        worst = np.abs(g[active] - lam * xa / np.abs(xa)).max()
    if (~active).any():
        worst = max(worst, max(np.abs(g[~active]).max() - lam, 0.0))
    return float(worst)


def active_density(x_hat):
    """Fraction of structurally nonzero entries."""
    x_hat = np.asarray(x_hat)
    return np.count_nonzero(x_hat) / x_hat.shape[0]


def lipschitz_step(A):
    """1 / lambda_max(A^H A) from the dominant singular value of A."""
    if not np.any(A):
        raise ParameterError("A must be nonzero")
    M, N = A.shape
    if min(M, N) == 1:
        smax = np.linalg.norm(A)
    else:
        v0 = np.full(min(M, N), 1.0 / np.sqrt(min(M, N)))
        smax = svds(A, k=1, v0=v0, return_singular_vectors=False)[0]
    L = smax * smax
    return 1.0 / (L * (1.0 + 1e-9))


def solve_lasso(y, A, lam, opts: Optional[SolverOptions] = None):
    """Solve the complex LASSO program and certify the result.

    Parameters
    ----------
    y : (M,) complex ndarray
    A : (M, N) complex ndarray
    lam : float
        Positive regularization weight.
    opts : SolverOptions, optional

    Returns
    -------
    LassoSolution with kkt_violation <= opts.tol_kkt.

    Raises
    ------
    ConvergenceError
        If the dual stopping test is not met within max_iter; the error
        carries the best iterate and its violation.
    """
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    opts = opts or SolverOptions()
    y = np.ascontiguousarray(y, dtype=complex)
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ParameterError(f"shape mismatch: A is {A.shape}, y is {y.shape}")

    if opts.step == "auto":
        step = lipschitz_step(A)
    else:
        step = float(opts.step)
        if step <= 0:
            raise ParameterError(f"step must be positive, got {step}")

    backend = opts.backend if opts.backend != "auto" else solver_backend()
    if backend == "compiled":
        if _fista_core_loop is None:
            raise ParameterError("compiled backend requested but not built")
        AC = np.ascontiguousarray(A)
        AHC = np.ascontiguousarray(A.conj().T)
        x, niter, trace, kkt, ok = _fista_core_loop(
            AC, AHC, y, lam, step, opts.max_iter, opts.tol_rel, opts.tol_kkt,
            opts.accelerate)
    elif backend == "python":
        x, niter, trace, kkt, ok = _fista_py_loop(
            A, y, lam, step, opts.max_iter, opts.tol_rel, opts.tol_kkt,
            opts.accelerate)
    else:
        raise ParameterError(f"unknown backend {backend!r}")

    residual = y - A @ x
    objective = 0.5 * np.vdot(residual, residual).real + lam * np.abs(x).sum()
    solution = LassoSolution(
        x_hat=x, lam=lam, residual=residual, iterations=niter,
        objective=float(objective), kkt_violation=float(kkt),
        rho_a=active_density(x), converged=bool(ok),
        objective_trace=trace, backend=backend)
    if not ok:
        raise ConvergenceError(
            f"no convergence within {opts.max_iter} iterations "
            f"(kkt residual {kkt:.3e} > {opts.tol_kkt:.1e})",
            best=solution, kkt_violation=float(kkt))
    return solution
