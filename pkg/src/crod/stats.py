"""Statistical primitives: ECDF, one-sample KS test, medians, REE."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ParameterError


@dataclass(frozen=True)
class EcdfCurve:
    """Empirical CDF; evaluation counts samples <= x over n."""

    values: np.ndarray  # sorted ascending

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.values.size

    @property
    def n(self):
        return self.values.size


def ecdf(samples):
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ParameterError("cannot build an ECDF from an empty sample")
    return EcdfCurve(values=np.sort(samples))


def std_normal_cdf(x):
    return ndtr(x)


def kolmogorov_sf(lam):
    """Asymptotic KS survival function 2 sum_k (-1)^(k-1) exp(-2 k^2 lam^2).

    Terms below 1e-12 are dropped; the alternating-series remainder is then
    below that as well.  Values are clipped to [0, 1].
    """
    if lam < 1e-8:
        return 1.0
    total = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < 1e-12 or k >= 100000:
            break
        sign = -sign
        k += 1
    return min(max(2.0 * total, 0.0), 1.0)


def ks_test(samples, reference_cdf):
    """One-sample Kolmogorov-Smirnov test against a given CDF.

    Returns (D_n, p) where D_n is the sup-norm distance evaluated at the
    sample points (both one-sided gaps) and p comes from the asymptotic
    Kolmogorov law at sqrt(n) * D_n.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n == 0:
        raise ParameterError("ks_test needs at least one sample")
    s = np.sort(samples)
    try:
        F = np.asarray(reference_cdf(s), dtype=float)
        if F.shape != s.shape:
            raise TypeError
    except TypeError:  # scalar-only reference CDF
        F = np.array([reference_cdf(v) for v in s], dtype=float)
    i = np.arange(1, n + 1)
    d_plus = (i / n - F).max()
    d_minus = (F - (i - 1) / n).max()
    d = float(max(d_plus, d_minus, 0.0))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def normalize_w(w, sigma_w):
    """Split sqrt(2) w / sigma_w into its real and imaginary streams.

    Each stream is standard normal when w is circular Gaussian with total
    per-entry variance sigma_w^2 (each part carries half of it).
    """
    if sigma_w <= 0:
        raise ParameterError(f"sigma_w must be positive, got {sigma_w}")
    w = np.asarray(w)
    scale = math.sqrt(2.0) / sigma_w
    return scale * w.real, scale * w.imag


def ree(sigma_hat, sigma_true):
    """Relative estimation error |sigma_hat - sigma_true| / sigma_true."""
    if sigma_true <= 0:
        raise ParameterError(f"sigma_true must be positive, got {sigma_true}")
    return abs(sigma_hat - sigma_true) / sigma_true


def ground_truth_sigma_w(w):
    """Root-mean-square modulus of an error vector."""
    w = np.asarray(w)
    if w.size == 0:
        raise ParameterError("w must be nonempty")
    return float(np.sqrt(np.mean(np.abs(w) ** 2)))


def lower_median(values):
    """Order-statistic median; for even counts the lower of the two middles.

    Deterministic and always equal to an actual sample value.
    """
    values = np.asarray(values)
    if values.size == 0:
        raise ParameterError("median of an empty sample")
    k = (values.size - 1) // 2
    return float(np.partition(values, k)[k])
