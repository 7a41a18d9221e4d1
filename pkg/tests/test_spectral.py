import numpy as np
import pytest

from crod.errors import NumericError, ParameterError, PoleError
from crod.spectral import (SpectralDensity, g_double_prime,
                           g_double_prime_row_orthogonal, g_prime,
                           g_prime_row_orthogonal, lambda_from_density,
                           marchenko_pastur_density, row_orthogonal_density,
                           solve_t, stieltjes_sum)

ATOM_AT_ZERO = SpectralDensity(atoms=((0.0, 1.0),))
ATOM_AT_ONE = SpectralDensity(atoms=((1.0, 1.0),))


class TestDensities:
    def test_row_orthogonal_square(self):
        d = row_orthogonal_density(1.0)
        assert d.atoms == ((1.0, 1.0),)

    def test_row_orthogonal_half(self):
        d = row_orthogonal_density(0.5)
        assert d.atoms == ((0.0, 0.5), (1.0, 0.5))

    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75, 1.0])
    def test_mass_normalization(self, gamma):
        assert row_orthogonal_density(gamma).total_mass() == pytest.approx(1.0, abs=1e-8)
        assert marchenko_pastur_density(gamma).total_mass() == pytest.approx(1.0, abs=1e-8)

    def test_mp_square_support(self):
        d = marchenko_pastur_density(1.0)
        assert d.atoms == ()
        assert (d.continuous.lo, d.continuous.hi) == (0.0, 4.0)

    def test_mp_continuous_mass(self):
        d = marchenko_pastur_density(0.5)
        cont_mass = d.total_mass() - 0.5
        assert cont_mass == pytest.approx(0.5, abs=1e-6)

    def test_mp_quarter_support(self):
        d = marchenko_pastur_density(0.25)
        assert d.continuous.lo == pytest.approx(0.25)
        assert d.continuous.hi == pytest.approx(2.25)

    def test_invalid_gamma(self):
        for gamma in (0.0, 1.2, -0.3):
            with pytest.raises(ParameterError):
                row_orthogonal_density(gamma)
            with pytest.raises(ParameterError):
                marchenko_pastur_density(gamma)

    def test_invalid_density(self):
        with pytest.raises(ParameterError):
            SpectralDensity(atoms=((0.0, 0.4),))  # mass deficit
        with pytest.raises(ParameterError):
            SpectralDensity(atoms=((-1.0, 1.0),))


class TestStieltjes:
    def test_hand_value(self):
        assert stieltjes_sum(-4.0, row_orthogonal_density(0.5)) == pytest.approx(-0.225, abs=1e-14)

    def test_single_atom(self):
        assert stieltjes_sum(2.0, ATOM_AT_ONE) == pytest.approx(1.0)

    def test_decay_at_infinity(self):
        val = stieltjes_sum(-1e12, marchenko_pastur_density(0.5))
        assert abs(val) < 1e-11

    def test_pole_errors(self):
        with pytest.raises(PoleError):
            stieltjes_sum(1.0, row_orthogonal_density(0.5))
        with pytest.raises(PoleError):
            stieltjes_sum(1.5, marchenko_pastur_density(0.5))


def _scan_root(chi, density):
    """Brute-force oracle: dense sign-change scan plus bisection."""
    def f(t):
        return stieltjes_sum(t, density) + chi

    grid = -np.logspace(-6, 4, 4000)[::-1]
    vals = [f(t) for t in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            return a
        if fa * fb < 0:
            lo, hi = a, b
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if f(lo) * f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
    raise AssertionError("scan found no root")


class TestSolveT:
    def test_hand_root(self):
        assert solve_t(0.225, row_orthogonal_density(0.5)) == pytest.approx(-4.0, abs=1e-10)

    def test_atom_at_zero(self):
        assert solve_t(1.0, ATOM_AT_ZERO) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_scan_oracle(self):
        d = marchenko_pastur_density(0.5)
        t = solve_t(0.225, d)
        assert t == pytest.approx(_scan_root(0.225, d), abs=1e-8)

    def test_no_root_raises(self):
        # an isolated atom at 1 caps the negative-axis resolvent at -1
        with pytest.raises(NumericError):
            solve_t(2.0, ATOM_AT_ONE)

    def test_chi_validation(self):
        with pytest.raises(ParameterError):
            solve_t(0.0, ATOM_AT_ZERO)


class TestSpectralDerivatives:
    def test_g_prime_hand_value(self):
        val = g_prime(0.225, row_orthogonal_density(0.5))
        assert val == pytest.approx(4.0 / 9.0, abs=1e-12)

    def test_g_prime_small_chi_limit(self):
        # oracle: closed form evaluated just above the analytic switch
        for gamma in (0.3, 0.5, 0.9):
            ref = g_prime_row_orthogonal(1e-5, gamma)
            assert g_prime(1e-8, row_orthogonal_density(gamma)) == pytest.approx(ref, abs=1e-4)
            assert g_prime(1e-8, row_orthogonal_density(gamma)) == pytest.approx(gamma, abs=1e-6)

    def test_g_prime_atom_at_zero(self):
        assert g_prime(1.0, ATOM_AT_ZERO) == pytest.approx(0.0, abs=1e-12)

    def test_g_double_prime_hand_value(self):
        # exact fraction 800/3321 worked out from the closed form
        val = g_double_prime(0.225, row_orthogonal_density(0.5))
        assert val == pytest.approx(800.0 / 3321.0, abs=1e-9)

    def test_g_double_prime_small_chi(self):
        for gamma in (0.3, 0.5, 0.9):
            val = g_double_prime(1e-8, row_orthogonal_density(gamma))
            assert val == pytest.approx(gamma * (1 - gamma), abs=1e-6)

    def test_g_double_prime_atom_at_zero(self):
        assert g_double_prime(1.0, ATOM_AT_ZERO) == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_agreement(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            gamma = rng.uniform(0.05, 0.999)
            chi = 10 ** rng.uniform(-3, 1)
            d = row_orthogonal_density(gamma)
            assert abs(g_prime(chi, d) - g_prime_row_orthogonal(chi, gamma)) <= 1e-9
            assert abs(g_double_prime(chi, d) - g_double_prime_row_orthogonal(chi, gamma)) <= 1e-9

    @pytest.mark.parametrize("density", [row_orthogonal_density(0.6),
                                         marchenko_pastur_density(0.6)])
    def test_derivative_consistency(self, density):
        # difference in the natural (negated) argument of the potential
        h = 1e-5
        for chi in (0.01, 0.1, 0.5, 2.0):
            fd = (g_prime(chi - h, density) - g_prime(chi + h, density)) / (2 * h)
            val = g_double_prime(chi, density)
            assert abs(fd - val) <= 1e-5 * abs(val)

    def test_alg_self_consistency(self):
        for gamma in (0.3, 0.5, 0.75, 0.9):
            for rho in (0.02, 0.1, 0.3 * gamma, 0.8 * gamma):
                chi = rho * (1 - rho) / (gamma - rho)
                val = g_prime(chi, row_orthogonal_density(gamma))
                assert abs(val - rho / chi) <= 1e-10


class TestLambdaFromDensity:
    def test_row_orthogonal_closed_form(self):
        lam = lambda_from_density(0.1, row_orthogonal_density(0.5))
        assert lam == pytest.approx(4.0 / 9.0, abs=1e-12)

    def test_marchenko_pastur_matches_gap(self):
        lam = lambda_from_density(0.1, marchenko_pastur_density(0.5))
        assert lam == pytest.approx(0.4, abs=1e-4)

    def test_vanishing_density_limit(self):
        lam = lambda_from_density(1e-8, row_orthogonal_density(0.7))
        assert lam == pytest.approx(0.7, abs=1e-6)

    def test_rho_too_large(self):
        with pytest.raises(NumericError):
            lambda_from_density(0.9, row_orthogonal_density(0.5))

    def test_rho_validation(self):
        with pytest.raises(ParameterError):
            lambda_from_density(0.0, row_orthogonal_density(0.5))
