"""NumPy reference backend for the accelerated proximal-gradient loop.

Kept in lockstep with the compiled backend in ``_fista_core.pyx``; the two
must agree on every algorithmic decision (prox, restart rule, stopping
tests) so results do not depend on which one was importable.  Magnitudes
are computed as sqrt(re^2 + im^2) rather than np.abs so that both backends
round identically (the extension builds with FP contraction disabled).
"""

import numpy as np


def _mag(v):
    return np.sqrt(v.real * v.real + v.imag * v.imag)


def soft_threshold_array(h, thr):
    """Complex soft threshold with unit scale, elementwise, exact zeros."""
    mag = _mag(h)
    out = np.zeros_like(h)
    hit = mag > thr
    out[hit] = h[hit] * (1.0 - thr / mag[hit])
    return out


def kkt_violation(x, g, lam):
    """Max violation of the stationarity conditions given g = A^H residual."""
    active = x != 0
    worst = 0.0
    if active.any():
        xa = x[active]
        worst = _mag(g[active] - lam * (xa / _mag(xa))).max()
    if (~active).any():
        worst = max(worst, max(_mag(g[~active]).max() - lam, 0.0))
    return worst


def fista_loop(A, y, lam, step, max_iter, tol_rel, tol_kkt, accelerate):
    """Run the solver loop; returns (x, iters, trace, kkt, converged).

    Iterates are accepted only after the prox, so zeros are exact.  The
    trace records the monitored (best-so-far) objective, which is
    non-increasing by construction; a function-value restart keeps the
    underlying sequence monotone up to rounding even in accelerated mode.
    Convergence is probed on each new candidate: when it moves less than
    tol_rel away from the current iterate and the current iterate passes
    the stationarity test, that iterate is returned untouched (in the
    separable case this preserves the closed-form prox output bit for bit).
    """
    AH = A.conj().T
    N = A.shape[1]
    x = np.zeros(N, dtype=complex)
    z = x
    t = 1.0
    fx = 0.5 * np.vdot(y, y).real
    monitor = fx
    r_prev = y.copy()
    thr = step * lam
    trace = np.empty(max_iter)

    for k in range(max_iter):
        rz = y - A @ z
        xn = soft_threshold_array(z + step * (AH @ rz), thr)
        rn = y - A @ xn
        fn = 0.5 * np.vdot(rn, rn).real + lam * _mag(xn).sum()
        if fn > fx:
            # Momentum overshot; redo the step from the last accepted point.
            z = x
            rz = y - A @ z
            xn = soft_threshold_array(z + step * (AH @ rz), thr)
            rn = y - A @ xn
            fn = 0.5 * np.vdot(rn, rn).real + lam * _mag(xn).sum()
            t = 1.0
        dx = xn - x
        rel = np.linalg.norm(dx) / max(np.linalg.norm(xn), 1e-300)
        if rel <= tol_rel:
            kkt = kkt_violation(x, AH @ r_prev, lam)
            if kkt <= tol_kkt:
                return x, k, trace[:k].copy(), kkt, True
        if accelerate:
            tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = xn + ((t - 1.0) / tn) * dx
            t = tn
        else:
            z = xn
        x, fx, r_prev = xn, fn, rn
        monitor = min(monitor, fn)
        trace[k] = monitor

    kkt = kkt_violation(x, AH @ (y - A @ x), lam)
    return x, max_iter, trace.copy(), kkt, False
