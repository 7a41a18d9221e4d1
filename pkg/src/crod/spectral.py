"""Asymptotic eigenvalue densities of the Gram matrix and their transforms.

Everything here lives on the real axis: the densities are supported on
[0, inf) and the resolvent-type sums are evaluated at negative arguments,
where they are strictly monotone.  That makes every root unique and
bracketable.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import NumericError, ParameterError, PoleError

_MASS_TOL = 1e-8
_QUAD_ABS = 1e-12
_SMALL_CHI = 1e-6


@dataclass(frozen=True)
class ContinuousPart:
    """Continuous component of a spectral density on [lo, hi].

    ``density`` is the full density function.  When the density vanishes like
    a square root at both endpoints, ``edge_core`` gives the analytically
    simplified product (s - lo) * c(s) where density = sqrt((s-lo)(hi-s)) c(s);
    integrals then use a weighted quadrature that is exact about the edges
    and never evaluates the raw density there.
    """

    density: Callable[[float], float]
    lo: float
    hi: float
    edge_core: Optional[Callable[[float], float]] = None


@dataclass(frozen=True)
class SpectralDensity:
    """Point masses plus an optional continuous part, total mass one."""

    atoms: tuple
    continuous: Optional[ContinuousPart] = None

    def __post_init__(self):
        for s, mass in self.atoms:
            if s < 0:
                raise ParameterError(f"atom location {s} is negative")
            if not 0 < mass <= 1:
                raise ParameterError(f"atom mass {mass} outside (0, 1]")
        if self.continuous is not None and self.continuous.lo < 0:
            raise ParameterError("continuous support extends below zero")
        total = self.total_mass()
        if abs(total - 1.0) > _MASS_TOL:
            raise ParameterError(f"density mass {total} is not 1 within {_MASS_TOL}")

    def total_mass(self):
        mass = sum(m for _, m in self.atoms)
        if self.continuous is not None:
            mass += _integrate(self.continuous, lambda s: 1.0)
        return mass

    def moment(self, k):
        """k-th moment of the density."""
        m = sum(mass * s**k for s, mass in self.atoms)
        if self.continuous is not None:
            m += _integrate(self.continuous, lambda s: s**k)
        return m


def _integrate(cont, h):
    """Integrate density(s) * h(s) over the continuous support."""
    if cont.edge_core is not None:
        # One sqrt factor is folded into the quadrature weight; edge_core is
        # the remaining smooth (s - lo) * c(s) piece.
        val, _ = quad(lambda s: cont.edge_core(s) * h(s), cont.lo, cont.hi,
                      weight="alg", wvar=(-0.5, 0.5),
                      epsabs=_QUAD_ABS, epsrel=1e-12, limit=200)
        return val
    val, _ = quad(lambda s: cont.density(s) * h(s), cont.lo, cont.hi,
                  epsabs=_QUAD_ABS, epsrel=1e-12, limit=200)
    return val


def row_orthogonal_density(gamma):
    """Two-atom law of the Gram matrix for orthonormal-row ensembles."""
    if not 0 < gamma <= 1:
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if gamma == 1.0:
        return SpectralDensity(atoms=((1.0, 1.0),))
    return SpectralDensity(atoms=((0.0, 1.0 - gamma), (1.0, gamma)))


def marchenko_pastur_density(gamma):
    """Gram-matrix law for i.i.d. complex Gaussian entries of variance 1/N."""
    if not 0 < gamma <= 1:
        raise ParameterError(f"gamma must lie in (0, 1], got {gamma}")
    lo = (1.0 - np.sqrt(gamma)) ** 2
    hi = (1.0 + np.sqrt(gamma)) ** 2

    def density(s):
        if not lo < s < hi:
            return 0.0
        return np.sqrt((hi - s) * (s - lo)) / (2.0 * np.pi * s)

    if lo == 0.0:
        # (s - lo) / (2 pi s) collapses to a constant at the hard edge.
        edge_core = lambda s: 1.0 / (2.0 * np.pi)
    else:
        edge_core = lambda s: (s - lo) / (2.0 * np.pi * s)

    cont = ContinuousPart(density=density, lo=lo, hi=hi, edge_core=edge_core)
    if gamma == 1.0:
        return SpectralDensity(atoms=(), continuous=cont)
    return SpectralDensity(atoms=((0.0, 1.0 - gamma),), continuous=cont)


def _raw_stieltjes(t, density):
    val = sum(mass / (t - s) for s, mass in density.atoms)
    if density.continuous is not None:
        val += _integrate(density.continuous, lambda s: 1.0 / (t - s))
    return val


def _raw_stieltjes_deriv(t, density):
    """d/dt of the resolvent sum (always negative off the support)."""
    val = -sum(mass / (t - s) ** 2 for s, mass in density.atoms)
    if density.continuous is not None:
        val -= _integrate(density.continuous, lambda s: 1.0 / (t - s) ** 2)
    return val


def stieltjes_sum(t, density):
    """Evaluate sum/integral of density(s) / (t - s) at a pole-free t."""
    for s, _ in density.atoms:
        if t == s:
            raise PoleError(f"t = {t} coincides with an atom", t=t)
    cont = density.continuous
    if cont is not None and cont.lo <= t <= cont.hi:
        raise PoleError(f"t = {t} lies inside the continuous support", t=t)
    return _raw_stieltjes(t, density)


def solve_t(chi, density):
    """Unique t < 0 with stieltjes_sum(t, density) = -chi."""
    if chi <= 0:
        raise ParameterError(f"chi must be positive, got {chi}")
    hi = -1e-12

    def f(t):
        return _raw_stieltjes(t, density) + chi

    if f(hi) >= 0:
        raise NumericError("no sign change: resolvent never reaches -chi",
                           chi=chi, f_hi=f(hi))
    lo = min(hi * 2.0, -1.0)
    for _ in range(200):
        if f(lo) > 0:
            break
        lo *= 2.0
    else:
        raise NumericError("bracket expansion failed for t(-chi)", chi=chi, t_lo=lo)
    t = brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    # Two Newton polish steps push the root to machine precision, which the
    # cancellation in t + 1/chi at small chi requires.
    for _ in range(2):
        fp = _raw_stieltjes_deriv(t, density)
        t_new = t - f(t) / fp
        if lo < t_new < hi:
            t = t_new
    return t


def g_prime(chi, density):
    """First derivative of the spectral potential at -chi: t(-chi) + 1/chi."""
    if chi <= 0:
        raise ParameterError(f"chi must be positive, got {chi}")
    if chi < _SMALL_CHI:
        return density.moment(1)
    return solve_t(chi, density) + 1.0 / chi


def g_double_prime(chi, density):
    """Second derivative at -chi: t'(-chi) + 1/chi**2."""
    if chi <= 0:
        raise ParameterError(f"chi must be positive, got {chi}")
    if chi < _SMALL_CHI:
        m1 = density.moment(1)
        return density.moment(2) - m1 * m1
    t = solve_t(chi, density)
    t_prime = 1.0 / _raw_stieltjes_deriv(t, density)
    return t_prime + 1.0 / chi**2


def lambda_from_density(rho_ca, density):
    """Debias coefficient for a Gram density via its resolvent equation.

    Solves stieltjes_sum(t) = (1 - rho_ca) / t for the unique negative t and
    returns t * rho_ca / (rho_ca - 1), which is positive for rho_ca < 1.
    """
    if not 0 < rho_ca < 1:
        raise ParameterError(f"rho_ca must lie in (0, 1), got {rho_ca}")

    def f(t):
        return _raw_stieltjes(t, density) - (1.0 - rho_ca) / t

    hi = -1e-12
    if f(hi) <= 0:
        raise NumericError("coefficient equation has no root (rho_ca too large?)",
                           rho_ca=rho_ca, f_hi=f(hi))
    lo = -1.0
    for _ in range(200):
        if f(lo) < 0:
            break
        lo *= 2.0
    else:
        raise NumericError("bracket expansion failed for the coefficient equation",
                           rho_ca=rho_ca, t_lo=lo)
    t = brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    for _ in range(2):
        fp = _raw_stieltjes_deriv(t, density) + (1.0 - rho_ca) / t**2
        t_new = t - f(t) / fp
        if lo < t_new < hi:
            t = t_new
    return t * rho_ca / (rho_ca - 1.0)


def g_prime_row_orthogonal(chi, gamma):
    """Closed form of g_prime for the two-atom row-orthogonal law."""
    if chi < _SMALL_CHI:
        return gamma
    root = np.sqrt((chi + 1.0) ** 2 - 4.0 * gamma * chi)
    return (1.0 + chi - root) / (2.0 * chi)


def g_double_prime_row_orthogonal(chi, gamma):
    """Closed form of g_double_prime for the row-orthogonal law."""
    if chi < _SMALL_CHI:
        return gamma * (1.0 - gamma)
    root = np.sqrt((chi + 1.0) ** 2 - 4.0 * gamma * chi)
    return (2.0 * gamma * chi - chi - 1.0 + root) / (2.0 * chi**2 * root)
