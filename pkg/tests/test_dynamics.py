import numpy as np
import pytest

from conftest import H, TAU
from wcbump import EvolutionState, GaussianDifference, Heaviside, evolve, probe_stability
from wcbump.dynamics import Verdict, convolution_matrix, heaviside_bump, stationarity_residual
from wcbump.errors import BlowUpError
from wcbump.kernels import eval_phi
from wcbump.numerics import Grid, SampledFunction


@pytest.fixture(scope="module")
def unstable_reference(kernel, widths):
    _, sols_ht = widths
    return heaviside_bump(kernel, sols_ht[0], 3.0, 1201)


def test_convolution_matrix_is_trapezoid(kernel):
    g = Grid(-4.0, 4.0, 161)
    mat = convolution_matrix(kernel, g)
    # integral of omega over [-4, 4] for x = 0 against the closed form
    row = mat[80]
    assert row.sum() == pytest.approx(2 * kernel.antiderivative(4.0), abs=1e-3)
    # interior entries depend only on the index offset
    assert mat[10, 20] == mat[30, 40] == mat[40, 30]


def test_shift_equivariance(kernel, rate):
    g = Grid(-6.0, 6.0, 241)
    u = 0.3 * np.exp(-((g.points + 1.0) ** 2) * 4)
    shifted = np.roll(u, 20)
    a = evolve(kernel, rate, H, EvolutionState(SampledFunction(g, u)), 0.1, 5).field.values
    b = evolve(kernel, rate, H, EvolutionState(SampledFunction(g, shifted)), 0.1, 5).field.values
    # away from the truncation boundary the evolution commutes with the shift
    np.testing.assert_allclose(np.roll(a, 20)[60:180], b[60:180], atol=1e-12)


def test_bump_is_stationary(kernel, rate, bump):
    assert stationarity_residual(kernel, rate, H, bump) <= 1e-4
    state = evolve(kernel, rate, H, EvolutionState(bump.samples), 0.05, 400)
    assert state.t == pytest.approx(20.0)
    assert np.max(np.abs(state.field.values - bump.u)) <= 1e-4


def test_rest_state(kernel, rate):
    g = Grid(-3.0, 3.0, 121)
    state = evolve(kernel, rate, H, EvolutionState(SampledFunction(g, np.zeros(121))), 0.05, 100)
    assert np.max(np.abs(state.field.values)) == 0.0


def test_blow_up_detected():
    kernel = GaussianDifference(K=1.7e308, k=2.0, M=1.0, m=1.0)
    g = Grid(-3.0, 3.0, 61)
    with pytest.raises(BlowUpError) as exc:
        evolve(kernel, Heaviside(), 0.1, EvolutionState(SampledFunction(g, np.ones(61))), 0.5, 5)
    assert exc.value.step >= 1


def test_argument_checks(kernel, rate, bump):
    s = EvolutionState(bump.samples)
    for dt in (0.0, 0.6, -0.1):
        with pytest.raises(ValueError):
            evolve(kernel, rate, H, s, dt)
    with pytest.raises(ValueError):
        EvolutionState(bump.samples, t=-1.0)


def test_heaviside_bump(kernel, widths, unstable_reference):
    sol = widths[1][0]
    b = unstable_reference
    assert b(sol.half_width) == pytest.approx(H + TAU, abs=1e-9)
    np.testing.assert_allclose(b.u, eval_phi(kernel, np.abs(b.x), sol.half_width))


class TestProbe:
    def test_smooth_bump_returns(self, kernel, rate, bump):
        probe = probe_stability(kernel, rate, H, bump, 1e-3, 50.0)
        assert probe.verdict is Verdict.RETURNED
        assert probe.max_deviation < 0.5e-3
        assert probe.peak_deviation >= 1e-3 - 1e-12

    def test_zero_amplitude(self, kernel, rate, bump):
        probe = probe_stability(kernel, rate, H, bump, 0.0, 10.0)
        assert probe.verdict is Verdict.RETURNED
        assert probe.max_deviation < 1e-6

    def test_unstable_step_rate_bump_departs(self, kernel, unstable_reference):
        assert unstable_reference.delta_zero == pytest.approx(0.1769, abs=1e-3)
        probe = probe_stability(kernel, Heaviside(TAU), H, unstable_reference, 1e-3, 50.0)
        assert probe.verdict is Verdict.DEPARTED
        assert probe.max_deviation > 0.1


def test_first_order_in_time(kernel, rate, bump):
    start = SampledFunction(bump.samples.grid, bump.u + 0.02 * np.exp(-bump.x**2))
    finals = [
        evolve(kernel, rate, H, EvolutionState(start), dt, int(round(2.0 / dt))).field.values
        for dt in (0.1, 0.05, 0.025)
    ]
    d1 = np.max(np.abs(finals[0] - finals[1]))
    d2 = np.max(np.abs(finals[1] - finals[2]))
    assert d1 > 0 and 1.6 < d1 / d2 < 2.4
