import numpy as np
import pytest

from conftest import H, ORACLE_CROSS_TAU, ORACLE_CROSS_ZERO, TAU
from wcbump import (
    Heaviside,
    Logoid,
    WidthConfig,
    WidthProfile,
    apply_A,
    choose_k,
    cross_validate,
    iterate_width,
    level_crossings,
    reconstruct_bump,
    reconstruct_u_delta,
)
from wcbump.errors import DivergenceError, PreconditionError, UnsupportedVariantError
from wcbump.kernels import eval_phi
from wcbump.numerics import Grid
from wcbump.scheme_width import profile_derivative


class TestReconstruction:
    @pytest.mark.parametrize("c", [0.2, 0.45, 0.6633])
    def test_constant_profile_gives_phi(self, kernel, rate, c):
        x = np.linspace(0.0, 2.5, 23)
        prof = WidthProfile.constant(c, TAU, 21)
        np.testing.assert_allclose(reconstruct_u_delta(kernel, rate, prof, x), eval_phi(kernel, x, c), atol=1e-12)

    def test_delta_zero_level(self, kernel, rate, pair):
        d0 = pair.bounds[1]
        prof = WidthProfile.constant(d0, TAU, 21)
        assert reconstruct_u_delta(kernel, rate, prof, d0) == pytest.approx(H, abs=1e-10)

    def test_converged_profile_levels(self, kernel, rate, width_result):
        prof = width_result.fixed_point
        u = reconstruct_u_delta(kernel, rate, prof, prof.values)
        np.testing.assert_allclose(u, H + prof.points, atol=1e-7)
        assert u[-1] == pytest.approx(H + TAU, abs=1e-5)

    def test_needs_density(self, kernel):
        with pytest.raises(UnsupportedVariantError):
            reconstruct_u_delta(kernel, Heaviside(), WidthProfile.constant(0.5, TAU, 5), 0.1)


class TestOperatorA:
    def test_first_step_from_delta_zero(self, kernel, rate, pair):
        d0 = pair.bounds[1]
        k = 0.7
        prof = WidthProfile.constant(d0, TAU, 51)
        out = apply_A(kernel, rate, H, k, prof)
        np.testing.assert_allclose(out.values, d0 - k * prof.points, atol=1e-10)

    def test_first_step_from_delta_tau(self, kernel, rate, pair):
        dt = pair.bounds[0]
        k = 0.7
        prof = WidthProfile.constant(dt, TAU, 51)
        out = apply_A(kernel, rate, H, k, prof)
        np.testing.assert_allclose(out.values, dt + k * (TAU - prof.points), atol=1e-10)

    def test_fixed_point_is_fixed(self, kernel, rate, width_result):
        prof = width_result.fixed_point
        out = apply_A(kernel, rate, H, width_result.k, prof)
        assert np.max(np.abs(out.values - prof.values)) < 1e-8

    def test_monotone(self, kernel, rate, pair, width_result):
        lo, hi = pair.bounds
        k = width_result.k
        a = apply_A(kernel, rate, H, k, WidthProfile.constant(lo, TAU, 31)).values
        b = apply_A(kernel, rate, H, k, WidthProfile.constant(0.5 * (lo + hi), TAU, 31)).values
        c = apply_A(kernel, rate, H, k, WidthProfile.constant(hi, TAU, 31)).values
        assert np.all(a <= b) and np.all(b <= c)

    def test_divergence_detected(self, kernel, rate, pair):
        lo, hi = pair.bounds
        prof = WidthProfile.constant(hi, TAU, 31)
        with pytest.raises(DivergenceError):
            apply_A(kernel, rate, H, 50.0, prof, bounds=(lo, hi))
        with pytest.raises(PreconditionError):
            apply_A(kernel, rate, H, 0.0, prof)


class TestChooseK:
    def test_values(self, width_result):
        assert choose_k(2.0, 0.9) == pytest.approx(0.45)
        assert 0 < width_result.k < 1.0 / width_result.m
        assert width_result.k == pytest.approx(0.9 / width_result.m)

    @pytest.mark.parametrize("m,sigma", [(2.0, 1.0), (2.0, 0.0), (0.0, 0.5), (-1.0, 0.5)])
    def test_rejects(self, m, sigma):
        with pytest.raises(PreconditionError):
            choose_k(m, sigma)


class TestIteration:
    def test_converges_to_unique_profile(self, width_result):
        t = width_result.trace
        assert t.converged
        assert np.max(np.abs(width_result.upper.values - width_result.lower.values)) < 1e-8
        assert t.info["k_mode"] == "auto"
        assert t.info["strictly_decreasing"]

    def test_endpoints_match_direct_oracle(self, width_result):
        prof = width_result.fixed_point
        assert prof.values[0] == pytest.approx(ORACLE_CROSS_ZERO, abs=1e-7)
        assert prof.values[-1] == pytest.approx(ORACLE_CROSS_TAU, abs=1e-7)

    def test_profile_between_stable_widths(self, widths, width_result):
        _, sols_ht = widths
        d_st = sols_ht[1].half_width
        prof = width_result.fixed_point.values
        assert np.all(prof >= d_st) and np.all(prof <= widths[0][-1].half_width)

    def test_sandwich(self, width_result):
        for (w0, v0), (w1, v1) in zip(width_result.history, width_result.history[1:]):
            assert np.all(w0 <= w1 + 1e-12)
            assert np.all(w1 <= v1 + 1e-12)
            assert np.all(v1 <= v0 + 1e-12)

    def test_profile_derivative(self, kernel, rate, width_result):
        prof = width_result.fixed_point
        slope = profile_derivative(kernel, rate, prof)
        fd = np.gradient(prof.values, prof.points, edge_order=2)
        np.testing.assert_allclose(slope[5:-5], fd[5:-5], rtol=1e-4)
        assert np.all(slope < 0)

    def test_explicit_k(self, kernel, rate, pair, width_result):
        res = iterate_width(kernel, rate, H, TAU, pair, WidthConfig(grid_m=41, k=0.5 * width_result.k), posterior=False)
        assert res.trace.info["k_mode"] == "explicit"
        assert res.trace.converged
        with pytest.raises(PreconditionError):
            iterate_width(kernel, rate, H, TAU, pair, WidthConfig(k=2.0 / width_result.m))

    def test_rejects(self, kernel, pair):
        with pytest.raises(UnsupportedVariantError):
            iterate_width(kernel, Heaviside(), H, TAU, pair)
        with pytest.raises(PreconditionError):
            iterate_width(kernel, Logoid(0.04, 3.0), H, TAU, pair)
        for bad in (dict(grid_m=2), dict(sigma=1.0), dict(k=-1.0)):
            with pytest.raises(ValueError):
                WidthConfig(**bad)


class TestBumpAndCrossValidation:
    def test_reconstructed_bump(self, kernel, rate, width_result, bump):
        b = reconstruct_bump(kernel, rate, H, width_result.fixed_point, X=3.0, out_n=1201)
        assert b(b.delta_zero) == pytest.approx(H, abs=1e-7)
        assert b(b.delta_tau) == pytest.approx(H + TAU, abs=1e-7)
        assert np.max(np.abs(b.u - bump.u)) < 1e-6

    def test_cross_validation(self, bump, width_result):
        assert cross_validate(bump, width_result.fixed_point) < 1e-6

    def test_cross_validation_synthetic(self, bump):
        grid = Grid(0.0, TAU, 21)
        delta = np.asarray(level_crossings(bump, H + grid.points))
        assert cross_validate(bump, WidthProfile(grid, delta)) == pytest.approx(0.0, abs=1e-12)
        assert cross_validate(bump, WidthProfile(grid, 1.01 * delta)) == pytest.approx(0.01, abs=1e-9)
