"""Scheme II: fixed-point iteration on the excitation-width profile.

For ``t`` in ``[0, tau]`` the profile ``Delta(t)`` marks where the bump crosses
``h + t``.  Writing the rate as ``f(u) = int rho(xi) theta(u - xi) dxi`` gives

    u_Delta(x) = int_0^tau rho(xi) Phi(x, Delta(xi)) dxi

and the profile solves ``Delta = A Delta`` with

    (A Delta)(t) = Delta(t) + k (u_Delta(Delta(t)) - t - h).

For ``0 < k < 1/m`` the operator is increasing on ``[Delta_tau, Delta_0]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .assumptions import AssumptionReport, check_posterior, compute_m
from .errors import DivergenceError, PreconditionError, UnsupportedVariantError
from .kernels import ConnectivityKernel, FiringRate, Logoid, eval_dphi_dx, eval_phi, eval_rho
from .numerics import Grid, Interpolant, SampledFunction, gauss_legendre
from .scheme_direct import BumpSolution, IterationTrace, default_extent, level_crossings, validate_bump
from .widths import WidthPair


@dataclass(frozen=True)
class WidthProfile(SampledFunction):
    """Excitation widths ``Delta(t)`` sampled on ``[0, tau]``."""

    @classmethod
    def constant(cls, value: float, tau: float, grid_m: int) -> "WidthProfile":
        return cls(Grid(0.0, tau, grid_m), np.full(grid_m, float(value)))


@dataclass(frozen=True)
class WidthConfig:
    grid_m: int = 201
    #: explicit step; ``None`` selects ``k = sigma / m``
    k: Optional[float] = None
    sigma: float = 0.9
    tol: float = 1e-8
    max_iter: int = 500
    quad_order: int = 4
    m_grid_n: int = 401

    def __post_init__(self) -> None:
        if self.grid_m < 3:
            raise ValueError("grid_m must be at least 3")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma!r}")
        if self.k is not None and not self.k > 0:
            raise ValueError(f"explicit k must be positive, got {self.k!r}")


def _require_density(rate: FiringRate) -> Logoid:
    if not isinstance(rate, Logoid):
        raise UnsupportedVariantError("the width scheme needs a firing rate with a density")
    return rate


class _ProfileQuadrature:
    """Gauss-Legendre rule in ``xi`` on ``[0, tau]`` weighted by ``rho``."""

    def __init__(self, rate: Logoid, grid: Grid, order: int = 4):
        xi, w = gauss_legendre(0.0, rate.tau, grid.n - 1, order)
        self.xi = xi
        self.weights = w * eval_rho(rate, xi)

    def potential(self, kernel, profile: SampledFunction, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = Interpolant(profile)(self.xi)
        flat = np.atleast_1d(x).ravel()
        out = np.empty_like(flat)
        for s in range(0, flat.size, 512):
            xs = flat[s : s + 512]
            out[s : s + 512] = eval_phi(kernel, xs[:, None], d[None, :]) @ self.weights
        return out.reshape(x.shape)[()]


def reconstruct_u_delta(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    profile: SampledFunction,
    x,
    quad_order: int = 4,
):
    """``u_Delta(x) = int_0^tau rho(xi) Phi(x, Delta(xi)) dxi``.

    Raises
    ------
    UnsupportedVariantError
        If ``rate`` has no density.
    """
    rate = _require_density(rate)
    return _ProfileQuadrature(rate, profile.grid, quad_order).potential(kernel, profile, x)


def choose_k(m: float, sigma: float = 0.9) -> float:
    """Step ``k = sigma / m``, strictly inside ``(0, 1/m)``."""
    if not m > 0:
        raise PreconditionError(f"m must be positive, got {m!r}")
    if not 0 < sigma < 1:
        raise PreconditionError(f"sigma must lie in (0, 1), got {sigma!r}")
    return sigma / m


def _slack(lo, hi):
    return 1e-8 + 1e-6 * (hi - lo)


class AOperator:
    def __init__(self, kernel, rate, h, k, grid: Grid, bounds=None, quad_order=4):
        self.kernel, self.h, self.k = kernel, h, k
        self.grid = grid
        self.bounds = bounds
        self.quad = _ProfileQuadrature(_require_density(rate), grid, quad_order)
        self.t = grid.points

    def __call__(self, profile: SampledFunction, iteration: Optional[int] = None) -> WidthProfile:
        d = profile.values
        u = self.quad.potential(self.kernel, profile, d)
        new = d + self.k * (u - self.t - self.h)
        if self.bounds is not None:
            lo, hi = self.bounds
            s = _slack(lo, hi)
            if np.any(new < lo - s) or np.any(new > hi + s) or not np.all(np.isfinite(new)):
                where = "" if iteration is None else f" at iteration {iteration}"
                raise DivergenceError(
                    f"width profile left [{lo!r}, {hi!r}]{where} "
                    f"(range {float(np.min(new))!r}..{float(np.max(new))!r}); reduce k",
                    iteration=iteration,
                )
        return WidthProfile(profile.grid, new)


def apply_A(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    k: float,
    profile: SampledFunction,
    bounds: Optional[Tuple[float, float]] = None,
    quad_order: int = 4,
) -> WidthProfile:
    """One application of A, node-wise on the profile grid.

    Raises
    ------
    DivergenceError
        If ``bounds`` is given and the result leaves it by more than a small slack.
    """
    if not k > 0:
        raise PreconditionError(f"k must be positive, got {k!r}")
    return AOperator(kernel, rate, h, k, profile.grid, bounds, quad_order)(profile)


@dataclass
class WidthResult:
    lower: WidthProfile
    upper: WidthProfile
    trace: IterationTrace
    k: float
    m: float
    posterior: Optional[AssumptionReport] = None
    history: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None

    @property
    def fixed_point(self) -> WidthProfile:
        return WidthProfile(self.lower.grid, 0.5 * (self.lower.values + self.upper.values))


def iterate_width(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    tau: float,
    pair: WidthPair,
    cfg: WidthConfig = WidthConfig(),
    keep_history: bool = False,
    posterior: bool = True,
) -> WidthResult:
    """Iterate A from the constant profiles ``Delta_tau`` and ``Delta_0``.

    ``eps(n)`` is the node-wise max distance between the two iterates.  The
    posterior checks (A3', A5', strict decrease of the profile) run on the
    midpoint of the final pair and are stored on the trace.
    """
    rate = _require_density(rate)
    if abs(rate.tau - tau) > 1e-12 * max(1.0, tau):
        raise PreconditionError(f"rate tau {rate.tau!r} differs from tau {tau!r}")
    lo, hi = pair.bounds
    m = compute_m(kernel, lo, hi, cfg.m_grid_n)
    if cfg.k is None:
        k = choose_k(m, cfg.sigma)
    else:
        k = cfg.k
        if not 0 < k < 1.0 / m:
            raise PreconditionError(f"k={k!r} must lie in (0, 1/m) = (0, {1.0 / m!r})")

    grid = Grid(0.0, tau, cfg.grid_m)
    op = AOperator(kernel, rate, h, k, grid, (lo, hi), cfg.quad_order)
    w = WidthProfile.constant(lo, tau, cfg.grid_m)
    v = WidthProfile.constant(hi, tau, cfg.grid_m)
    history = [(w.values, v.values)] if keep_history else None
    errors: List[float] = []
    converged = False
    for n in range(1, cfg.max_iter + 1):
        w, v = op(w, n), op(v, n)
        if keep_history:
            history.append((w.values, v.values))
        eps = float(np.max(np.abs(v.values - w.values)))
        errors.append(eps)
        if eps < cfg.tol:
            converged = True
            break

    info = {"k": k, "m": m, "k_mode": "auto" if cfg.k is None else "explicit"}
    report = None
    mid = WidthProfile(grid, 0.5 * (w.values + v.values))
    info["strictly_decreasing"] = bool(np.all(np.diff(mid.values) < 0))
    if posterior:
        report = check_posterior(kernel, rate, h, tau, mid)
        info["posterior"] = report
    trace = IterationTrace(errors, converged, len(errors), info)
    return WidthResult(w, v, trace, k, m, report, history)


def profile_derivative(kernel: ConnectivityKernel, rate: FiringRate, profile: SampledFunction, quad_order: int = 4):
    """Closed-form slope ``Delta'(t) = 1 / int rho(xi) dPhi/dx(Delta(t), Delta(xi)) dxi``."""
    quad = _ProfileQuadrature(_require_density(rate), profile.grid, quad_order)
    d_xi = Interpolant(profile)(quad.xi)
    d_t = profile.values
    return 1.0 / (eval_dphi_dx(kernel, d_t[:, None], d_xi[None, :]) @ quad.weights)


def reconstruct_bump(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    profile: SampledFunction,
    X: Optional[float] = None,
    out_n: int = 1201,
    quad_order: int = 4,
) -> BumpSolution:
    """Bump ``u_Delta`` on ``[-X, X]`` from a converged profile.

    Crossings are read off the profile endpoints: ``delta_tau = Delta(tau)`` and
    ``delta_0 = Delta(0)``.

    Raises
    ------
    NotABumpError
        If ``u_Delta`` fails the bump criteria.
    """
    rate = _require_density(rate)
    quad = _ProfileQuadrature(rate, profile.grid, quad_order)

    def evaluate(x):
        return quad.potential(kernel, profile, x)

    d_zero, d_tau = float(profile.values[0]), float(profile.values[-1])
    X = default_extent(kernel, d_zero) if X is None else float(X)
    grid = Grid(-X, X, out_n)
    samples = SampledFunction(grid, evaluate(np.abs(grid.points)))
    validate_bump(samples, d_tau, d_zero, h, rate.tau)
    return BumpSolution(samples, d_tau, d_zero, h, rate.tau, evaluate=evaluate)


def cross_validate(u_star_bump: BumpSolution, profile: SampledFunction) -> float:
    """``max_t |Delta(t) - delta(t)| / |delta(t)|`` where ``u*(delta(t)) = h + t``."""
    levels = u_star_bump.h + profile.points
    delta = np.asarray(level_crossings(u_star_bump, levels))
    return float(np.max(np.abs((profile.values - delta) / delta)))
