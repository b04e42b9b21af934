import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wcbump import GaussianDifference, Heaviside, Logoid, OscillatoryDecay
from wcbump.errors import DomainError, UnsupportedVariantError
from wcbump.kernels import (
    eval_domega,
    eval_dphi_dx,
    eval_dr_dx,
    eval_f,
    eval_omega,
    eval_phi,
    eval_r,
    eval_rho,
    eval_W,
    rate_tau,
    tail_cutoff,
)

MEX = GaussianDifference(K=1.5, k=2.0, M=1.0, m=1.0)
OSC = OscillatoryDecay(b=0.3)
KERNELS = [MEX, OSC]

xs = st.floats(-8.0, 8.0, allow_nan=False)
ys = st.floats(0.0, 6.0, allow_nan=False)
kernel_st = st.sampled_from(KERNELS)


def raw_mex(x):
    return 1.5 * math.exp(-2.0 * x * x) - math.exp(-x * x)


def raw_osc(x):
    ax = abs(x)
    return math.exp(-0.3 * ax) * (0.3 * math.sin(ax) + math.cos(x))


RAW = {MEX: raw_mex, OSC: raw_osc}


class TestConstruction:
    @pytest.mark.parametrize(
        "params",
        [
            dict(K=1.0, k=2.0, M=1.5, m=1.0),
            dict(K=1.5, k=1.0, M=1.0, m=2.0),
            dict(K=-1.5, k=2.0, M=1.0, m=1.0),
            dict(K=1.5, k=2.0, M=1.0, m=float("nan")),
        ],
    )
    def test_gaussian_difference_rejects(self, params):
        with pytest.raises(ValueError):
            GaussianDifference(**params)

    @pytest.mark.parametrize("b", [0.0, -0.3, float("inf")])
    def test_oscillatory_rejects(self, b):
        with pytest.raises(ValueError):
            OscillatoryDecay(b)

    @pytest.mark.parametrize("tau,p", [(0.0, 3.0), (-0.05, 3.0), (0.05, 0.5)])
    def test_logoid_rejects(self, tau, p):
        with pytest.raises(ValueError):
            Logoid(tau, p)

    def test_frozen(self):
        with pytest.raises(AttributeError):
            MEX.K = 2.0


class TestKernelValues:
    def test_mexican_hat_reference(self):
        assert eval_omega(MEX, 0.0) == pytest.approx(0.5, abs=1e-15)
        assert MEX.last_sign_change == pytest.approx(math.sqrt(math.log(1.5)), rel=1e-14)
        assert eval_omega(MEX, MEX.last_sign_change) == pytest.approx(0.0, abs=1e-14)

    def test_oscillatory_reference(self):
        assert eval_omega(OSC, 0.0) == pytest.approx(1.0, abs=1e-15)
        assert eval_omega(OSC, math.pi) == pytest.approx(-math.exp(-0.3 * math.pi), rel=1e-14)

    @pytest.mark.parametrize("kernel", KERNELS)
    @pytest.mark.parametrize("x", [0.3, 1.3, 2.0, 7.5, -2.2])
    def test_W_matches_quad(self, kernel, x):
        ref = quad(RAW[kernel], 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        assert eval_W(kernel, x) == pytest.approx(ref, abs=1e-12)

    def test_W_frozen_values(self):
        # quad of the raw kernels
        assert eval_W(MEX, 1.3) == pytest.approx(0.10347971432320327, abs=1e-13)
        assert eval_W(OSC, 2.0) == pytest.approx(1.0927997921822559, abs=1e-13)
        assert eval_W(OSC, 7.5) == pytest.approx(0.6128858822482244, abs=1e-13)

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_W_limit(self, kernel):
        assert eval_W(kernel, 80.0) == pytest.approx(kernel.antiderivative_limit(), abs=1e-10)

    @pytest.mark.parametrize("kernel", KERNELS)
    @pytest.mark.parametrize("x", [-3.1, -0.4, 0.0, 0.2, 1.7, 5.0])
    def test_derivative_matches_central_difference(self, kernel, x):
        step = 1e-6
        fd = (eval_omega(kernel, x + step) - eval_omega(kernel, x - step)) / (2 * step)
        assert eval_domega(kernel, x) == pytest.approx(fd, abs=1e-8)

    def test_oscillatory_derivative_continuous_at_zero(self):
        assert eval_domega(OSC, 1e-12) == pytest.approx(eval_domega(OSC, -1e-12), abs=1e-10)
        assert eval_domega(OSC, 0.0) == 0.0

    @pytest.mark.parametrize("kernel", KERNELS)
    @pytest.mark.parametrize("a", [0.5, 2.0, 6.0])
    def test_tail_mass_bounds_tail(self, kernel, a):
        true = quad(lambda t: abs(RAW[kernel](t)), a, np.inf, limit=500)[0]
        assert kernel.tail_mass(a) >= true - 1e-12

    @pytest.mark.parametrize("kernel", KERNELS)
    def test_tail_cutoff(self, kernel):
        a = tail_cutoff(kernel, 1e-6)
        assert kernel.tail_mass(a) < 1e-6
        assert kernel.tail_mass(a - 1e-5) >= 1e-6
        with pytest.raises(ValueError):
            tail_cutoff(kernel, 0.0)


class TestSymmetries:
    @settings(max_examples=200, deadline=None)
    @given(kernel_st, xs)
    def test_omega_even(self, kernel, x):
        assert eval_omega(kernel, x) == eval_omega(kernel, -x)

    @settings(max_examples=200, deadline=None)
    @given(kernel_st, xs)
    def test_W_odd(self, kernel, x):
        assert eval_W(kernel, -x) == pytest.approx(-eval_W(kernel, x), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(kernel_st, xs, ys)
    def test_r_even_in_x(self, kernel, x, y):
        assert eval_r(kernel, x, y) == pytest.approx(eval_r(kernel, -x, y), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(kernel_st, xs, ys)
    def test_phi_even_in_x(self, kernel, x, y):
        assert eval_phi(kernel, x, y) == pytest.approx(eval_phi(kernel, -x, y), abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(kernel_st, xs, ys)
    def test_dphi_dx_odd_in_x(self, kernel, x, y):
        assert eval_dphi_dx(kernel, -x, y) == pytest.approx(-eval_dphi_dx(kernel, x, y), abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(kernel_st, ys)
    def test_phi_on_diagonal(self, kernel, y):
        assert eval_phi(kernel, y, y) == pytest.approx(eval_W(kernel, 2 * y), abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(kernel_st, xs, ys)
    def test_dr_dx_central_difference(self, kernel, x, y):
        step = 1e-6
        fd = (eval_r(kernel, x + step, y) - eval_r(kernel, x - step, y)) / (2 * step)
        assert eval_dr_dx(kernel, x, y) == pytest.approx(fd, abs=1e-7)

    def test_phi_rejects_negative_y(self):
        with pytest.raises(DomainError):
            eval_phi(MEX, 0.3, -0.1)
        assert eval_phi(MEX, 0.7, 0.0) == 0.0


class TestRates:
    def test_heaviside_convention(self):
        assert eval_f(Heaviside(), 0.0) == 1.0
        assert eval_f(Heaviside(), -1e-300) == 0.0
        assert eval_f(Heaviside(0.05), 0.05) == 1.0
        assert rate_tau(Heaviside()) == 0.0

    def test_heaviside_has_no_density(self):
        with pytest.raises(UnsupportedVariantError):
            eval_rho(Heaviside(), 0.0)

    def test_logoid_values(self):
        f = Logoid(0.05, 3.0)
        assert eval_f(f, -1.0) == 0.0
        assert eval_f(f, 0.0) == 0.0
        assert eval_f(f, 0.025) == pytest.approx(0.5, abs=1e-15)
        assert eval_f(f, 0.05) == 1.0
        assert eval_f(f, 3.0) == 1.0
        # s = 0.2: 0.008 / (0.008 + 0.512)
        assert eval_f(f, 0.01) == pytest.approx(0.008 / 0.52, rel=1e-13)
        assert rate_tau(f) == 0.05

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-0.1, 0.2), st.floats(-0.1, 0.2), st.floats(1.0, 8.0))
    def test_logoid_monotone(self, u, v, p):
        f = Logoid(0.05, p)
        lo, hi = min(u, v), max(u, v)
        assert eval_f(f, lo) <= eval_f(f, hi)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 0.05), st.floats(1.0, 6.0))
    def test_logoid_symmetry(self, u, p):
        f = Logoid(0.05, p)
        assert eval_f(f, u) + eval_f(f, 0.05 - u) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 5.5])
    def test_density_integrates_to_one(self, p):
        f = Logoid(0.05, p)
        total = quad(lambda x: eval_rho(f, x), 0.0, 0.05, epsabs=1e-13)[0]
        assert total == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("u", [0.004, 0.0133, 0.025, 0.041])
    def test_density_is_derivative(self, u):
        f = Logoid(0.05, 3.0)
        step = 1e-7
        fd = (eval_f(f, u + step) - eval_f(f, u - step)) / (2 * step)
        assert eval_rho(f, u) == pytest.approx(fd, rel=1e-6)

    def test_density_zero_outside(self):
        f = Logoid(0.05, 3.0)
        assert eval_rho(f, -0.01) == 0.0
        assert eval_rho(f, 0.06) == 0.0
