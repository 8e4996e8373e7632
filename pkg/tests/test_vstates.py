"""Tests for the rotating-patch functional and branch continuation."""

import numpy as np
import pytest

from vortexalpha import spectrum as sp
from vortexalpha import vstates as vs
from vortexalpha.errors import ConvergenceError, DomainError, GeometryError, GridError


def single_mode(n, value, fold=1, size=None):
    c = np.zeros((size or n + 1))
    c[n] = value
    return vs.ConformalPerturbation(c, fold=fold)


class TestConformalPerturbation:
    def test_fold_pattern_enforced(self):
        vs.ConformalPerturbation([0.0, 0.0, 0.1], fold=3)  # a_2 allowed
        with pytest.raises(DomainError):
            vs.ConformalPerturbation([0.0, 0.1, 0.0], fold=3)  # a_1 not

    def test_bilipschitz_guard(self):
        with pytest.raises(GeometryError):
            vs.ConformalPerturbation([0.0, 0.6, 0.3], fold=1)

    def test_map_derivative_consistency(self):
        # Phi' from the coefficient formula vs complex finite differences
        pert = vs.ConformalPerturbation([0.05, 0.1, 0.07], fold=1)
        theta = np.array([0.3, 1.1, 4.0])
        h = 1e-6
        wp = np.exp(1j * (theta + h))
        wm = np.exp(1j * (theta - h))
        w = np.exp(1j * theta)
        fd = (pert.map_points(wp) - pert.map_points(wm)) / (wp - wm)
        assert np.allclose(fd, pert.map_derivative(w), atol=1e-7)


class TestEvaluateF:
    def test_zero_perturbation_vanishes(self):
        pert = vs.ConformalPerturbation(np.zeros(4), fold=1)
        for Om in [-0.3, 0.0, 0.4]:
            fv = vs.evaluate_F(1.0, Om, pert, 256)
            assert np.max(np.abs(fv.sine_coefficients)) < 1e-10

    def test_single_mode_multiplier(self):
        # f = eps z^{-(m-1)}: g_m = eps m (Omega_m^E - Omega) to 1e-9 of eps
        m, eps, Om, alpha = 3, 1e-6, 0.05, 1.0
        fv = vs.evaluate_F(alpha, Om, single_mode(m - 1, eps, fold=m), 512)
        pred = eps * m * (sp.omega_bifurcation(m, alpha) - Om)
        assert abs(fv.coefficient(m) - pred) / eps < 1e-9
        others = np.abs(fv.sine_coefficients.copy())
        others[m - 1] = 0.0
        assert np.max(others) < 1e-12

    def test_translation_solution(self):
        # f = a_0 with Omega = 0 parametrizes a shifted disc: F = 0
        pert = vs.ConformalPerturbation([0.1], fold=1)
        fv = vs.evaluate_F(1.0, 0.0, pert, 512)
        assert np.max(np.abs(fv.sine_coefficients)) < 1e-8

    def test_equivariance_without_reduction(self):
        # 3-fold coefficients declared fold=1 (no sector shortcut): the
        # output must still satisfy the Y_m sparsity to round-off
        c = np.zeros(6)
        c[2], c[5] = 0.05, 0.01
        fv = vs.evaluate_F(1.0, 0.1, vs.ConformalPerturbation(c, fold=1), 256)
        g = fv.sine_coefficients
        mask = np.ones(len(g), dtype=bool)
        mask[2::3] = False  # keep modes not divisible by 3
        assert np.max(np.abs(g[mask])) < 1e-13

    def test_fold_reduction_matches_full(self):
        c = np.zeros(6)
        c[2], c[5] = 0.05, 0.01
        g3 = vs.evaluate_F(1.0, 0.1, vs.ConformalPerturbation(c, fold=3), 384)
        g1 = vs.evaluate_F(1.0, 0.1, vs.ConformalPerturbation(c, fold=1), 384)
        assert np.allclose(
            g3.sine_coefficients, g1.sine_coefficients, atol=1e-14
        )

    def test_linearization_consistency_ratio(self):
        # |F(Omega, eps f) - eps L f| = O(eps^2)
        alpha, Om, n = 1.0, 0.2, 4
        mult = vs.linearized_multiplier(alpha, Om, n)
        errs = []
        for eps in [1e-3, 1e-4, 1e-5]:
            fv = vs.evaluate_F(alpha, Om, single_mode(n, eps), 256)
            pred = np.zeros(len(fv.sine_coefficients))
            pred[n] = eps * mult
            errs.append(np.max(np.abs(fv.sine_coefficients - pred)))
        assert errs[0] / errs[1] > 50
        assert errs[1] / errs[2] > 50

    def test_grid_validation(self):
        pert = vs.ConformalPerturbation(np.zeros(10), fold=1)
        with pytest.raises(GridError):
            vs.evaluate_F(1.0, 0.1, pert, 32)  # under 4(N+1)
        with pytest.raises(GridError):
            vs.evaluate_F(1.0, 0.1, pert, 129)  # odd

    def test_band_truncation(self):
        pert = vs.ConformalPerturbation(np.zeros(2), fold=1)
        fv = vs.evaluate_F(1.0, 0.1, pert, 64, band=5)
        assert len(fv.sine_coefficients) == 5


class TestMultiplierAndSuperposition:
    def test_fd_jacobian_diagonal(self):
        alpha, Om, M, eps = 1.0, 0.2, 256, 1e-6
        for n in range(0, 9):
            fp = vs.evaluate_F(alpha, Om, single_mode(n, eps), M).sine_coefficients
            fm = vs.evaluate_F(alpha, Om, single_mode(n, -eps), M).sine_coefficients
            col = (fp - fm) / (2 * eps)
            pred = np.zeros_like(col)
            pred[n] = vs.linearized_multiplier(alpha, Om, n)
            assert np.max(np.abs(col - pred)) < 1e-7

    def test_euler_sw_split_multipliers(self):
        # Euler piece: (n+1)(n/(2(n+1)) - Omega); screened piece:
        # -(n+1) omega_sw(n+1, 1/alpha); their sum is the full multiplier
        alpha, Om, M, eps = 1.0, 0.13, 256, 1e-6
        for n in [1, 3, 6]:
            cols = {}
            for kind in ("euler", "sw", "combined"):
                fp = vs.evaluate_F(
                    alpha, Om, single_mode(n, eps), M, kernel=kind
                ).sine_coefficients
                fm = vs.evaluate_F(
                    alpha, Om, single_mode(n, -eps), M, kernel=kind
                ).sine_coefficients
                cols[kind] = ((fp - fm) / (2 * eps))[n]
            pred_euler = (n + 1) * (n / (2 * (n + 1)) - Om)
            pred_sw = -(n + 1) * sp.omega_sw(n + 1, 1.0 / alpha)
            assert cols["euler"] == pytest.approx(pred_euler, abs=2e-7)
            assert cols["sw"] == pytest.approx(pred_sw, abs=2e-7)
            assert cols["combined"] == pytest.approx(
                cols["euler"] + cols["sw"], abs=1e-12
            )

    def test_multiplier_zeros_at_bifurcation(self):
        alpha, m = 1.0, 3
        Om = sp.omega_bifurcation(m, alpha)
        assert vs.linearized_multiplier(alpha, Om, m - 1) == pytest.approx(0.0, abs=1e-15)
        for mp in [6, 9]:
            assert abs(vs.linearized_multiplier(alpha, Om, mp - 1)) > 1e-3


class TestCrandallRabinowitz:
    def test_kernel_and_transversality(self):
        rep = vs.check_crandall_rabinowitz(1.0, 3, 32)
        assert rep.kernel_dim == 1
        assert rep.kernel_modes == (2,)
        assert rep.transversality == -3.0

    def test_high_fold_small_alpha(self):
        rep = vs.check_crandall_rabinowitz(0.2, 7, 64)
        assert rep.kernel_dim == 1
        assert rep.transversality == -7.0

    def test_no_eigenvalue_between(self):
        alpha = 1.0
        Om = 0.5 * (sp.omega_bifurcation(2, alpha) + sp.omega_bifurcation(3, alpha))
        rep = vs.check_crandall_rabinowitz(alpha, 2, 32, Omega=Om)
        assert rep.kernel_dim == 0

    def test_multiplier_table_present(self):
        rep = vs.check_crandall_rabinowitz(1.0, 2, 10)
        assert all(n % 2 == 1 for n, _ in rep.multipliers)


class TestBranchContinuation:
    def test_small_amplitude_point(self):
        pts = vs.continue_branch(
            1.0, 3, [1e-4], band=8, grid_size=192, tol=1e-11
        )
        p = pts[0]
        assert p.newton_steps <= 3
        assert abs(p.Omega - sp.omega_bifurcation(3, 1.0)) < 1e-5
        assert p.residual < 1e-11

    def test_short_branch_and_decay(self):
        pts = vs.continue_branch(
            1.0, 3, [1e-4, 0.01, 0.02], band=24, grid_size=384, tol=1e-11
        )
        assert all(p.residual < 1e-11 for p in pts)
        c = np.abs(pts[-1].perturbation.coefficients[2::3])
        live = c[c > 0]
        assert np.all(np.diff(np.log(live[:6])) < 0)  # geometric-ish decay

    def test_distinct_folds_distinct_limits(self):
        p2 = vs.continue_branch(1.0, 2, [1e-4], band=8, grid_size=128)[0]
        p3 = vs.continue_branch(1.0, 3, [1e-4], band=8, grid_size=192)[0]
        assert abs(p2.Omega - sp.omega_bifurcation(2, 1.0)) < 1e-5
        assert abs(p3.Omega - sp.omega_bifurcation(3, 1.0)) < 1e-5
        assert abs(p2.Omega - p3.Omega) > 1e-2

    def test_amplitude_validation(self):
        with pytest.raises(DomainError):
            vs.continue_branch(1.0, 3, [0.01])  # first too large
        with pytest.raises(DomainError):
            vs.continue_branch(1.0, 3, [1e-4, 1e-4])  # not increasing
        with pytest.raises(DomainError):
            vs.continue_branch(1.0, 1, [1e-4])  # fold too low

    def test_nonconvergence_reports_last_iterate(self):
        with pytest.raises(ConvergenceError) as err:
            vs.continue_branch(
                1.0, 3, [1e-4], band=8, grid_size=192, tol=1e-30, max_steps=2
            )
        assert err.value.last_iterate is not None
        assert "residual" in err.value.last_iterate
