"""Problem-instance generation for the complex compressed-sensing model.

The observation model is ``y = A x0 + xi`` with a complex M-by-N measurement
matrix ``A``, a Bernoulli-Gaussian sparse signal ``x0`` and circular complex
Gaussian noise ``xi``.  Three matrix ensembles are supported; two of them
(partial Fourier and Haar rows) have exactly orthonormal rows.

All draws are driven by the counter-based Philox generator so that instances
are bit-reproducible from integer seeds and independent streams can be split
off for parallel trials.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

ENSEMBLES = ("partial-fourier", "haar-row-orthogonal", "complex-gaussian")

ROW_ORTHOGONAL_ENSEMBLES = ("partial-fourier", "haar-row-orthogonal")


def as_generator(seed):
    """Return a Philox-backed Generator for an int seed or SeedSequence.

    Generators pass through unchanged, so internal helpers can be fed either
    raw seeds or pre-split streams.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def trial_seed_sequence(master_seed, trial, stream):
    """Deterministic per-(trial, stream) SeedSequence from one master seed."""
    return np.random.SeedSequence(master_seed, spawn_key=(trial, stream))


@dataclass(frozen=True)
class ProblemInstance:
    """One realization of the compressed-sensing observation model.

    Fields
    ------
    A : (M, N) complex ndarray
        Measurement matrix.
    x0 : (N,) complex ndarray
        Sparse source signal.
    support : (k,) int ndarray
        Indices of the nonzero entries of ``x0``.
    xi : (M,) complex ndarray
        Additive noise realization.
    y : (M,) complex ndarray
        Observation ``A @ x0 + xi``.
    gamma, rho2, sigma_x2, sigma2 : float
        Compression rate M/N, nonzero probability, per-nonzero variance and
        per-entry complex noise variance.
    """

    A: np.ndarray
    x0: np.ndarray
    support: np.ndarray
    xi: np.ndarray
    y: np.ndarray
    gamma: float
    rho2: float
    sigma_x2: float
    sigma2: float

    @property
    def M(self):
        return self.A.shape[0]

    @property
    def N(self):
        return self.A.shape[1]


def _complex_normal(rng, n, variance):
    """Draw n i.i.d. circular complex Gaussians of the given variance."""
    if n == 0:
        return np.zeros(0, dtype=complex)
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def make_matrix(kind, M, N, seed):
    """Draw an M-by-N measurement matrix from the named ensemble.

    Parameters
    ----------
    kind : str
        One of ``partial-fourier``, ``haar-row-orthogonal``,
        ``complex-gaussian``.
    M, N : int
        Shape; requires ``1 <= M <= N``.
    seed : int or SeedSequence or Generator
        Source of randomness.

    Returns
    -------
    (M, N) complex ndarray.  For the two row-orthogonal kinds the rows are
    orthonormal to machine precision; the Gaussian kind has i.i.d. entries
    with mean 0 and complex variance 1/N.
    """
    if kind not in ENSEMBLES:
        raise ParameterError(f"unknown ensemble kind {kind!r}; expected one of {ENSEMBLES}")
    if not (1 <= M <= N):
        raise DimensionError(f"need 1 <= M <= N, got M={M}, N={N}")
    rng = as_generator(seed)
    if kind == "partial-fourier":
        rows = rng.permutation(N)[:M]
        n = np.arange(N)
        return np.exp((-2j * np.pi / N) * np.outer(rows, n)) / np.sqrt(N)
    if kind == "haar-row-orthogonal":
        # Orthonormalize a complex Ginibre block; fixing the phases of the
        # triangular factor's diagonal makes the frame uniform (Haar rows).
        G = _complex_normal(rng, N * M, 1.0).reshape(N, M)
        Q, R = np.linalg.qr(G)
        d = np.diag(R)
        Q = Q * (d / np.abs(d))
        return Q.conj().T
    # complex-gaussian
    return _complex_normal(rng, M * N, 1.0 / N).reshape(M, N)


def draw_signal(N, rho2, sigma_x2, seed):
    """Draw a Bernoulli-Gaussian signal and its support.

    Each entry is zero with probability ``1 - rho2``, otherwise circular
    complex Gaussian with variance ``sigma_x2``.

    Returns
    -------
    (x0, support) : ((N,) complex ndarray, (k,) int ndarray)
    """
    if not 0.0 <= rho2 <= 1.0:
        raise ParameterError(f"rho2 must lie in [0, 1], got {rho2}")
    if sigma_x2 <= 0.0:
        raise ParameterError(f"sigma_x2 must be positive, got {sigma_x2}")
    rng = as_generator(seed)
    mask = rng.random(N) < rho2
    x0 = np.zeros(N, dtype=complex)
    support = np.flatnonzero(mask)
    x0[support] = _complex_normal(rng, support.size, sigma_x2)
    return x0, support


def snr_to_noise_variance(snr_db, gamma, sigma_x2):
    """Noise variance for a matched-filter SNR given in dB.

    The convention is SNR = gamma * sigma_x2 / sigma2, so
    sigma2 = gamma * sigma_x2 / 10**(snr_db / 10).
    """
    if gamma <= 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if sigma_x2 <= 0.0:
        raise ParameterError(f"sigma_x2 must be positive, got {sigma_x2}")
    return gamma * sigma_x2 / 10.0 ** (snr_db / 10.0)


def observe(A, x0, sigma2, seed):
    """Form the noisy observation ``y = A x0 + xi``.

    Returns
    -------
    (y, xi) : ((M,) complex ndarray, (M,) complex ndarray)
    """
    A = np.asarray(A)
    x0 = np.asarray(x0)
    if A.ndim != 2 or x0.shape != (A.shape[1],):
        raise DimensionError(f"shape mismatch: A is {A.shape}, x0 is {x0.shape}")
    if sigma2 < 0.0:
        raise ParameterError(f"sigma2 must be nonnegative, got {sigma2}")
    rng = as_generator(seed)
    xi = _complex_normal(rng, A.shape[0], sigma2) if sigma2 > 0 else np.zeros(A.shape[0], dtype=complex)
    return A @ x0 + xi, xi


def make_instance(kind, M, N, rho2, sigma_x2, sigma2, seed):
    """Generate a full ProblemInstance from one master seed.

    The matrix, signal and noise come from three independent Philox streams
    split off the master seed, so any component can be regenerated alone.
    """
    seeds = np.random.SeedSequence(seed).spawn(3)
    return make_instance_from_streams(kind, M, N, rho2, sigma_x2, sigma2, *seeds)


def make_instance_from_streams(kind, M, N, rho2, sigma_x2, sigma2,
                               matrix_seed, signal_seed, noise_seed):
    """Like make_instance but with explicit per-component seed streams."""
    A = make_matrix(kind, M, N, matrix_seed)
    x0, support = draw_signal(N, rho2, sigma_x2, signal_seed)
    y, xi = observe(A, x0, sigma2, noise_seed)
    return ProblemInstance(A=A, x0=x0, support=support, xi=xi, y=y,
                           gamma=M / N, rho2=rho2, sigma_x2=sigma_x2, sigma2=sigma2)


def dump_complex_vector(vec, path_or_file):
    """Write a complex vector as CSV rows ``index,re,im`` (debugging aid)."""
    vec = np.asarray(vec)
    own = isinstance(path_or_file, (str, bytes))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write("index,re,im\n")
        for i, v in enumerate(vec):
            fh.write(f"{i},{float(v.real)!r},{float(v.imag)!r}\n")
    finally:
        if own:
            fh.close()
