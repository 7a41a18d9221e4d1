import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crod.errors import ConvergenceError, ParameterError
from crod.lasso import (SolverOptions, active_density, complex_soft_threshold,
                        kkt_residual, solve_lasso, solver_backend)
from crod.signal_model import make_instance, make_matrix

BACKENDS = ["python"] + (["compiled"] if solver_backend() == "compiled" else [])


def objective(y, A, x, lam):
    r = y - A @ x
    return 0.5 * np.vdot(r, r).real + lam * np.abs(x).sum()


class TestSoftThreshold:
    def test_below_threshold(self):
        assert complex_soft_threshold(0, 1.0, 1.0) == 0
        assert complex_soft_threshold(0.5 + 0.5j, 1.0, 1.0) == 0

    def test_real_axis(self):
        assert complex_soft_threshold(2.0, 1.0, 1.0) == pytest.approx(1.0)

    def test_phase_and_scale(self):
        out = complex_soft_threshold(2j, 1.0, 2.0)
        assert out == pytest.approx(0.5j)

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            complex_soft_threshold(1.0, -0.1, 1.0)
        with pytest.raises(ParameterError):
            complex_soft_threshold(1.0, 0.1, 0.0)

    def test_minimizer_against_grid(self, rng):
        # dense polar grid oracle for the prox objective
        radii = np.linspace(0.0, 4.0, 81)
        phases = np.linspace(-np.pi, np.pi, 97)
        cand = (radii[:, None] * np.exp(1j * phases[None, :])).ravel()
        for _ in range(1000):
            h = (rng.standard_normal() + 1j * rng.standard_normal()) * rng.uniform(0.2, 2.0)
            lam = rng.uniform(0.0, 2.0)
            Q = rng.uniform(0.3, 3.0)
            star = complex_soft_threshold(h, lam, Q)

            def F(x):
                return 0.5 * Q * np.abs(x) ** 2 - (np.conj(h) * x).real + lam * np.abs(x)

            assert F(star) <= F(cand).min() + 1e-9

    @given(re=st.floats(-50, 50), im=st.floats(-50, 50),
           lam=st.floats(0, 10), Q=st.floats(0.01, 10))
    @settings(max_examples=300, deadline=None)
    def test_magnitude_phase_law(self, re, im, lam, Q):
        h = complex(re, im)
        out = complex_soft_threshold(h, lam, Q)
        mag = abs(h)
        if mag <= lam:
            assert out == 0
        else:
            assert abs(out) == pytest.approx((mag - lam) / Q, rel=1e-12)
            # same phase: cross product of (re, im) vanishes
            assert abs(out.real * im - out.imag * re) <= 1e-9 * mag * abs(out)


class TestKktResidual:
    def test_violated_inactive(self):
        y = np.array([2.0 + 0j, 0.1 + 0j])
        A = np.eye(2, dtype=complex)
        assert kkt_residual(y, A, np.zeros(2, complex), 0.5) == pytest.approx(1.5)

    def test_exact_solution_small(self):
        y = np.array([2.0 + 0j, 0.1 + 0j])
        A = np.eye(2, dtype=complex)
        x = np.array([1.5 + 0j, 0j])
        assert kkt_residual(y, A, x, 0.5) <= 1e-14

    def test_recomputed_from_fields(self, small_instance):
        inst = small_instance
        sol = solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0))
        assert kkt_residual(inst.y, inst.A, sol.x_hat, sol.lam) <= 1e-8


class TestSolveLasso:
    def test_zero_data(self):
        A = make_matrix("partial-fourier", 8, 16, seed=0)
        sol = solve_lasso(np.zeros(8, complex), A, 1.0, SolverOptions(step=1.0))
        assert np.all(sol.x_hat == 0) and sol.objective == 0.0

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_separable_matches_prox_exactly(self, backend, rng):
        y = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        A = np.eye(64, dtype=complex)
        sol = solve_lasso(y, A, 0.7, SolverOptions(step=1.0, backend=backend))
        ref = np.asarray(complex_soft_threshold(y, 0.7, 1.0))
        assert np.array_equal(sol.x_hat, ref)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_backend_contracts(self, small_instance, backend):
        inst = small_instance
        sol = solve_lasso(inst.y, inst.A, 0.1,
                          SolverOptions(step=1.0, backend=backend))
        assert sol.converged and sol.kkt_violation <= 1e-8
        assert np.all(np.diff(sol.objective_trace) <= 0)
        assert 0 <= sol.rho_a <= 1

    def test_backends_agree(self, small_instance):
        if len(BACKENDS) < 2:
            pytest.skip("compiled backend not built")
        inst = small_instance
        sols = [solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0, backend=b))
                for b in BACKENDS]
        assert np.abs(sols[0].x_hat - sols[1].x_hat).max() <= 1e-7
        assert sols[0].objective == pytest.approx(sols[1].objective, abs=1e-10)

    def test_fixed_point_identity(self, small_instance):
        inst = small_instance
        sol = solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0))
        g = inst.A.conj().T @ (inst.y - inst.A @ sol.x_hat)
        redo = np.asarray(complex_soft_threshold(sol.x_hat + g, 0.1, 1.0))
        assert np.abs(redo - sol.x_hat).max() <= 1e-8

    def test_phase_equivariance(self, small_instance):
        inst = small_instance
        theta = 0.7
        a = solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0))
        b = solve_lasso(np.exp(1j * theta) * inst.y, inst.A, 0.1,
                        SolverOptions(step=1.0))
        assert np.abs(b.x_hat - np.exp(1j * theta) * a.x_hat).max() <= 1e-7

    def test_ista_mode_monotone(self, small_instance):
        inst = small_instance
        sol = solve_lasso(inst.y, inst.A, 0.1,
                          SolverOptions(step=1.0, accelerate=False))
        assert sol.converged
        assert np.all(np.diff(sol.objective_trace) <= 0)

    def test_auto_step_on_gaussian(self):
        inst = make_instance("complex-gaussian", 48, 96, 0.1, 1.0, 0.02, seed=3)
        sol = solve_lasso(inst.y, inst.A, 0.1, SolverOptions())
        assert sol.converged and sol.kkt_violation <= 1e-8

    def test_nonconvergence_diagnostics(self, small_instance):
        inst = small_instance
        with pytest.raises(ConvergenceError) as err:
            solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0, max_iter=3))
        best = err.value.best
        assert best is not None and best.iterations == 3
        assert err.value.kkt_violation == best.kkt_violation > 1e-8

    def test_parameter_errors(self, small_instance):
        inst = small_instance
        with pytest.raises(ParameterError):
            solve_lasso(inst.y, inst.A, 0.0)
        with pytest.raises(ParameterError):
            solve_lasso(inst.y, np.zeros_like(inst.A), 0.1)

    def test_objective_matches_independent_evaluation(self, small_instance):
        inst = small_instance
        sol = solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0))
        assert sol.objective == pytest.approx(
            objective(inst.y, inst.A, sol.x_hat, 0.1), rel=1e-12)


class TestActiveDensity:
    def test_trivial_cases(self):
        assert active_density(np.zeros(4, complex)) == 0.0
        assert active_density(np.ones(5, complex)) == 1.0

    def test_solver_density_bounds(self):
        # complex active sets may exceed gamma*N but never 2M coordinates
        for seed in range(5):
            inst = make_instance("partial-fourier", 48, 96, 0.1, 1.0, 0.05, seed=seed)
            sol = solve_lasso(inst.y, inst.A, 0.1, SolverOptions(step=1.0))
            assert 0 < sol.rho_a <= min(2 * inst.gamma, 1.0)
