"""Cumulated-density transform, operator residuals, and the transformed stepper."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import chemoblow as cb
from chemoblow.errors import MonotonicityLost, NegativePhi, UndefinedDerivative
from chemoblow.mass import ProfilePoint, residual_sweep, sgrid_from_radial
from chemoblow.radial import make_state


def params(sigma=2.0, k=0.5, M_hi=40.0):
    return cb.ModelParams(n=3, R=1.0, k=k, sigma=sigma, M_lo=1.0, M_hi=M_hi)


def smooth_state(p, M, u_amp=0.5, w_amp=0.4):
    grid = cb.build_grid(p, M)
    u0 = 1.0 + u_amp * np.cos(np.pi * grid.r / grid.R)
    w0 = 1.2 + w_amp * np.cos(np.pi * grid.r / grid.R)
    return grid, make_state(grid, 0.0, u0, w0)


class TestCumulate:
    def test_constant_density_linear_mass(self):
        p = params()
        grid = cb.build_grid(p, 64)
        ms = cb.cumulate(make_state(grid, 0.0, np.full(65, 2.0), np.full(65, 3.0)), grid)
        assert np.abs(ms.U - 2.0 * ms.sgrid.s / 3.0).max() <= 1e-14

    def test_boundary_identity(self):
        # U(R^n) = mu_u R^n / n and likewise for W
        p = params()
        grid = cb.build_grid(p, 64)
        state = make_state(grid, 0.0, np.full(65, 2.0), np.full(65, 3.0))
        ms = cb.cumulate(state, grid)
        assert ms.U[-1] == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert ms.mu_u == pytest.approx(2.0, rel=1e-12)
        assert ms.mu_w == pytest.approx(3.0, rel=1e-12)

    def test_boundary_identity_over_a_run(self):
        # U(R^n, t) = mu_u(t) R^n / n at every recorded time, to quadrature
        # tolerance (the cumulative rule differs from the cell-volume weights
        # by O(dr^2))
        p = params()
        grid, state = smooth_state(p, 64)
        tol = grid.dr**2
        for _ in range(20):
            state = cb.step(state, p, 1e-3)
            ms = cb.cumulate(state, grid)
            assert abs(ms.U[-1] - grid.mean(state.u) / 3.0) <= tol * ms.U[-1]
            assert abs(ms.W[-1] - grid.mean(state.w) / 3.0) <= tol * ms.W[-1]

    def test_zero_at_origin_and_exact_slope(self):
        p = params()
        grid, state = smooth_state(p, 48)
        ms = cb.cumulate(state, grid)
        assert ms.U[0] == 0.0 and ms.W[0] == 0.0
        assert np.array_equal(ms.U_s, state.u / 3.0)
        assert np.array_equal(ms.W_s, state.w / 3.0)

    @given(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=17, max_size=33))
    @settings(max_examples=50)
    def test_nonnegative_density_gives_monotone_mass(self, values):
        p = params()
        grid = cb.build_grid(p, max(len(values) - 1, 16))
        u = np.resize(np.asarray(values), grid.node_count)
        ms = cb.cumulate(make_state(grid, 0.0, u, u), grid)
        assert np.all(np.diff(ms.U) >= -1e-15)


class TestResiduals:
    def test_zero_profiles_give_zero(self):
        zero = ProfilePoint(0.0, 0.0, 0.0, 0.0)
        assert cb.p_residual(zero, 0.0, 1.0, 3, 0.5) == 0.0
        # convention s^(1-sigma) * 0^sigma = 0
        assert cb.q_residual(zero, 0.0, 3.0, 2.0, 3, 0.5) == 0.0

    def test_linear_phi_hand_value(self):
        # phi = s, psi = 0, n = 3, mu_hi = 1: P = -3 (0 - s/3) = s
        s = 0.37
        phi = ProfilePoint(s, 0.0, 1.0, 0.0)
        assert cb.p_residual(phi, 0.0, 1.0, 3, s) == pytest.approx(s, rel=1e-15)

    def test_linear_psi_hand_value(self):
        # psi = s, phi = 0: Q = psi = s
        s = 0.61
        psi = ProfilePoint(s, 0.0, 1.0, 0.0)
        assert cb.q_residual(psi, 0.0, 3.0, 2.0, 3, s) == pytest.approx(s, rel=1e-15)

    def test_negative_phi_rejected(self):
        psi = ProfilePoint(1.0, 0.0, 0.0, 0.0)
        with pytest.raises(NegativePhi):
            cb.q_residual(psi, -1.0, 3.0, 2.0, 3, 0.5)

    def test_non_finite_derivative_rejected(self):
        bad = ProfilePoint(1.0, np.nan, 0.0, 0.0)
        with pytest.raises(UndefinedDerivative):
            cb.p_residual(bad, 0.0, 1.0, 3, 0.5)
        with pytest.raises(UndefinedDerivative):
            cb.q_residual(bad, 0.0, 3.0, 2.0, 3, 0.5)

    def test_simulated_solution_signs(self):
        # the transformed true solution satisfies P >= 0 while mean(w) stays
        # below mu_hi and Q >= 0 while the mass floor holds, up to truncation
        p = params()
        dc = cb.derived_constants(p)

        def sweep(M, dt, nsteps):
            grid, state = smooth_state(p, M)
            states = [cb.cumulate(state, grid)]
            for _ in range(nsteps):
                state = cb.step(state, p, dt)
                states.append(cb.cumulate(state, grid))
            res = residual_sweep(states, dc.mu_hi, dc.K_big, p.sigma)
            return (np.array([r.p_value for r in res]),
                    np.array([r.q_value for r in res]))

        p_coarse, q_coarse = sweep(128, 5e-4, 6)
        p_fine, q_fine = sweep(256, 2.5e-4, 12)
        scale = max(np.abs(p_fine).max(), np.abs(q_fine).max(), 1.0)
        trunc = max(abs(q_fine.min() - q_coarse.min()),
                    abs(p_fine.min() - p_coarse.min()))
        tol = max(1e-6 * scale, 10.0 * trunc)
        assert p_fine.min() >= -tol
        assert q_fine.min() >= -tol


class TestHolderStep:
    @given(
        st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=4, max_size=40),
        st.floats(min_value=1.1, max_value=4.0),
    )
    @settings(max_examples=100)
    def test_discrete_holder_inequality(self, slopes, sigma):
        # (sum a dx)^sigma <= (sum dx)^(sigma-1) sum a^sigma dx for a >= 0
        a = np.asarray(slopes)
        dx = np.linspace(1.0, 2.0, a.size)  # nonuniform positive spacings
        lhs = float(np.sum(a * dx)) ** sigma
        rhs = float(np.sum(dx)) ** (sigma - 1) * float(np.sum(a**sigma * dx))
        assert lhs <= rhs * (1.0 + 1e-9) + 1e-12


class TestStepMass:
    def test_zero_dt_is_identity(self):
        p = params()
        grid, state = smooth_state(p, 32)
        ms = cb.cumulate(state, grid)
        assert cb.step_mass(ms, lambda t: ms.mu_w, p, 0.0) is ms

    def test_affine_reduction_second_order_per_step(self):
        # u = w = c constant reduces (the transformed system) to the scalar
        # ODE; the stepped W matches the exact exponential to O(dt^2)
        p = params(sigma=2.0, k=0.5)
        c = 1.5
        fc = 0.5 * c**2
        grid = cb.build_grid(p, 32)
        state = make_state(grid, 0.0, np.full(33, c), np.full(33, c))
        ms0 = cb.cumulate(state, grid)
        muw_exact = lambda t: fc + (c - fc) * math.exp(-t)

        def one_step_error(dt):
            ms1 = cb.step_mass(ms0, muw_exact, p, dt)
            exact = muw_exact(dt) * ms0.sgrid.s / 3.0
            assert np.abs(ms1.U - c * ms0.sgrid.s / 3.0).max() <= 1e-13
            return np.abs(ms1.W - exact).max()

        e1 = one_step_error(2e-3)
        e2 = one_step_error(1e-3)
        assert e1 <= 2.0 * abs(c - fc) * (2e-3) ** 2
        assert e1 / e2 >= 3.0

    def test_monotonicity_loss_detected(self):
        p = params()
        grid, state = smooth_state(p, 32)
        ms = cb.cumulate(state, grid)
        bad_U = ms.U.copy()
        bad_U[10:20] = bad_U[9] * 0.5  # force a decreasing stretch
        bad = cb.MassState(sgrid=ms.sgrid, t=0.0, U=bad_U, W=ms.W, U_s=ms.U_s,
                           W_s=ms.W_s, U_ss=ms.U_ss, W_ss=ms.W_ss)
        with pytest.raises(MonotonicityLost):
            cb.step_mass(bad, lambda t: ms.mu_w, p, 1e-4)

    def test_degenerate_coefficient_stable_1000_steps(self):
        p = params()
        grid, state = smooth_state(p, 48)
        ms = cb.cumulate(state, grid)
        s = ms.sgrid.s
        b = np.abs(3.0 * (ms.W - ms.mu_w * s / 3.0))
        dt = 0.2 * float(np.diff(s).min() / max(b.max(), 1e-10))
        dt = min(dt, 2e-4)
        muw = ms.mu_w
        for _ in range(1000):
            ms = cb.step_mass(ms, lambda t: muw, p, dt)
        assert np.all(np.isfinite(ms.U)) and np.all(np.isfinite(ms.W))
        assert ms.U_s.min() >= -1e-10 * ms.U_s.max()

    def test_dual_path_consistency(self):
        # primitive step then cumulate vs cumulate then transformed step
        p = params()

        def gap(M, dt):
            grid, st0 = smooth_state(p, M)
            path_a = cb.cumulate(cb.step(st0, p, dt), grid)
            ms0 = cb.cumulate(st0, grid)
            mu0 = st0.mu_w
            mu1 = path_a.mu_w
            path_b = cb.step_mass(ms0, lambda t: mu0 + (mu1 - mu0) * t / dt, p, dt)
            ds = float(np.diff(ms0.sgrid.s).max())
            scale = float(max(path_a.U.max(), path_a.W.max()))
            return float(np.abs(path_a.U - path_b.U).max()), ds, scale

        g1, ds1, sc1 = gap(128, 2e-3)
        g2, ds2, sc2 = gap(256, 1e-3)
        assert g1 <= 5.0 * ((2e-3) ** 2 + ds1**2) * sc1
        assert g2 <= 5.0 * ((1e-3) ** 2 + ds2**2) * sc2
        assert g1 / g2 >= 3.0


class TestCsv:
    def test_mass_csv_schema(self, tmp_path):
        p = params()
        grid, state = smooth_state(p, 32)
        ms = cb.cumulate(state, grid)
        path = tmp_path / "mass.csv"
        cb.mass.write_mass_csv(path, ms)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "s,U,W,U_s,W_s"
        assert len(lines) == ms.sgrid.s.size + 1

    def test_residual_csv_schema(self, tmp_path):
        p = params()
        dc = cb.derived_constants(p)
        grid, state = smooth_state(p, 32)
        states = [cb.cumulate(state, grid)]
        for _ in range(2):
            state = cb.step(state, p, 1e-4)
            states.append(cb.cumulate(state, grid))
        res = residual_sweep(states, dc.mu_hi, dc.K_big, p.sigma)
        path = tmp_path / "res.csv"
        cb.mass.write_residual_csv(path, res)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "s,t,p_value,q_value,side"
        assert len(lines) == len(res) + 1
        assert lines[1].endswith("interior")


class TestSGrid:
    def test_image_of_radial_grid(self):
        p = params()
        grid = cb.build_grid(p, 32)
        sg = sgrid_from_radial(grid)
        assert np.array_equal(sg.s, grid.r**3)
        assert sg.s[0] == 0.0 and sg.s[-1] == 1.0
        assert np.all(np.diff(sg.s) > 0)
