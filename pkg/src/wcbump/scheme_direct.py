"""Scheme I: monotone Picard iteration of the Hammerstein operator T_f.

On ``[Delta_tau, Delta_0]``

    (T_f u)(x) = u_tau(x) + int_{Delta_tau}^{Delta_0} r(x, y) f(u(y) - h) dy

is increasing, maps ``u_tau`` up and ``u_0`` down, so iterating from both ends
squeezes the fixed points from below and above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, NotABumpError, OrderViolationError
from .kernels import ConnectivityKernel, FiringRate, eval_f, eval_phi, eval_r
from .numerics import DEFAULT_ROOT_TOL, Grid, Interpolant, SampledFunction, bisect, gauss_legendre
from .widths import WidthPair


@dataclass(frozen=True)
class DirectConfig:
    grid_n: int = 401
    tol: float = 1e-8
    max_iter: int = 200
    #: Gauss-Legendre nodes per grid cell in the T_f quadrature
    quad_order: int = 4
    #: how far an input may leave [u_tau, u_0] before apply_Tf refuses it
    order_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.grid_n < 3:
            raise ValueError("grid_n must be at least 3")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class IterationTrace:
    """Errors ``eps(1), ..., eps(N)`` of a two-sided iteration."""

    errors: List[float]
    converged: bool
    iterations: int
    #: scheme-specific extras (realised step size, posterior checks, ...)
    info: dict = field(default_factory=dict)

    def error(self, n: int) -> float:
        """``eps(n)``, 1-based as in the error plots."""
        return self.errors[n - 1]

    def settles_below(self, threshold: float) -> Optional[int]:
        """Smallest ``n`` with ``eps(j) < threshold`` for every recorded ``j >= n``."""
        n = None
        for j in range(len(self.errors), 0, -1):
            if self.errors[j - 1] < threshold:
                n = j
            else:
                break
        return n


@dataclass(frozen=True)
class BumpSolution:
    """A symmetric bump sampled on ``[-X, X]``.

    ``evaluate`` gives the profile at arbitrary points when the construction
    provides a closed-form evaluation; otherwise the samples are interpolated.
    """

    samples: SampledFunction
    delta_tau: float
    delta_zero: float
    h: float
    tau: float
    evaluate: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.samples.points

    @property
    def u(self) -> np.ndarray:
        return self.samples.values

    def __call__(self, x):
        if self.evaluate is not None:
            return self.evaluate(x)
        return self.samples.interpolant()(x)


@dataclass
class DirectResult:
    lower: SampledFunction
    upper: SampledFunction
    trace: IterationTrace
    #: (w_n, v_n) for n = 0..N when requested
    history: Optional[List[Tuple[np.ndarray, np.ndarray]]] = None

    @property
    def fixed_point(self) -> SampledFunction:
        return SampledFunction(self.lower.grid, 0.5 * (self.lower.values + self.upper.values))


class TfOperator:
    """T_f discretised on a uniform grid over ``[Delta_tau, Delta_0]``.

    The integral uses composite Gauss-Legendre with ``quad_order`` nodes per
    grid cell; the current iterate is read at those nodes through its monotone
    cubic interpolant.
    """

    def __init__(
        self,
        kernel: ConnectivityKernel,
        rate: FiringRate,
        h: float,
        pair: WidthPair,
        grid_n: int = 401,
        quad_order: int = 4,
    ):
        self.kernel, self.rate, self.h = kernel, rate, h
        self.lo, self.hi = pair.bounds
        self.grid = Grid(self.lo, self.hi, grid_n)
        x = self.grid.points
        self.u_tau = eval_phi(kernel, x, self.lo)
        self.u_zero = eval_phi(kernel, x, self.hi)
        self.nodes, self.weights = gauss_legendre(self.lo, self.hi, grid_n - 1, quad_order)
        self._kernel_matrix = eval_r(kernel, x[:, None], self.nodes[None, :]) * self.weights

    def start_lower(self) -> SampledFunction:
        return SampledFunction(self.grid, self.u_tau)

    def start_upper(self) -> SampledFunction:
        return SampledFunction(self.grid, self.u_zero)

    def firing(self, u: SampledFunction) -> np.ndarray:
        """``f(u(y_q) - h)`` at the quadrature nodes."""
        return eval_f(self.rate, Interpolant(u)(self.nodes) - self.h)

    def check_order(self, u: SampledFunction, tol: float) -> None:
        below = self.u_tau - u.values
        above = u.values - self.u_zero
        excess = np.maximum(below, above)
        i = int(np.argmax(excess))
        if excess[i] > tol:
            raise OrderViolationError(
                f"iterate leaves [u_tau, u_0] by {float(excess[i])!r} at x={float(u.points[i])!r}",
                witness=float(u.points[i]),
                excess=float(excess[i]),
            )

    def __call__(self, u: SampledFunction) -> SampledFunction:
        return SampledFunction(self.grid, self.u_tau + self._kernel_matrix @ self.firing(u))

    def extension(self, u_star: SampledFunction) -> Callable:
        """``x -> u_tau(x) + int r(x, y) f(u*(y) - h) dy`` for any real ``x``."""
        weights = self.weights * self.firing(u_star)
        kernel, lo, nodes = self.kernel, self.lo, self.nodes

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            flat = np.atleast_1d(x).ravel()
            out = np.empty_like(flat)
            # chunked to bound memory on fine output grids
            for s in range(0, flat.size, 512):
                xs = flat[s : s + 512]
                r = eval_r(kernel, xs[:, None], nodes[None, :])
                out[s : s + 512] = eval_phi(kernel, xs, lo) + r @ weights
            return out.reshape(x.shape)[()]

        return evaluate


def apply_Tf(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    pair: WidthPair,
    u: SampledFunction,
    quad_order: int = 4,
    order_tol: float = 1e-6,
) -> SampledFunction:
    """One application of T_f to ``u`` sampled on ``[Delta_tau, Delta_0]``.

    Raises
    ------
    OrderViolationError
        If ``u`` is outside ``[u_tau, u_0]`` by more than ``order_tol``.
    """
    op = TfOperator(kernel, rate, h, pair, u.grid.n, quad_order)
    if (u.grid.a, u.grid.b) != (op.lo, op.hi):
        raise DomainError("u must be sampled on [Delta_tau, Delta_0]")
    op.check_order(u, order_tol)
    return op(u)


def iterate_direct(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    pair: WidthPair,
    cfg: DirectConfig = DirectConfig(),
    keep_history: bool = False,
) -> DirectResult:
    """Iterate T_f from ``u_tau`` (below) and ``u_0`` (above).

    Stops once ``eps(n) = max |v_n - w_n| < cfg.tol``; running out of
    iterations is reported through ``trace.converged``.
    """
    op = TfOperator(kernel, rate, h, pair, cfg.grid_n, cfg.quad_order)
    w, v = op.start_lower(), op.start_upper()
    history = [(w.values, v.values)] if keep_history else None
    errors: List[float] = []
    converged = False
    for _ in range(cfg.max_iter):
        op.check_order(w, cfg.order_tol)
        op.check_order(v, cfg.order_tol)
        w, v = op(w), op(v)
        if keep_history:
            history.append((w.values, v.values))
        eps = float(np.max(np.abs(v.values - w.values)))
        errors.append(eps)
        if eps < cfg.tol:
            converged = True
            break
    trace = IterationTrace(errors, converged, len(errors))
    return DirectResult(lower=w, upper=v, trace=trace, history=history)


def _decreasing_root(fn, lo, hi, what):
    flo, fhi = fn(lo), fn(hi)
    if not (flo >= 0 >= fhi):
        raise NotABumpError(
            f"profile does not cross {what} on [{lo!r}, {hi!r}] "
            f"(values {flo!r}, {fhi!r} relative to the level)",
            witness=lo if flo < 0 else hi,
        )
    return bisect(fn, lo, hi, DEFAULT_ROOT_TOL)


def validate_bump(samples: SampledFunction, delta_tau: float, delta_zero: float, h: float, tau: float):
    """Raise :class:`NotABumpError` unless ``u > h + tau`` on ``[0, delta_tau)``
    and ``u < h`` on ``(delta_zero, X]``, checked on the samples."""
    x, u = samples.points, samples.values
    ax = np.abs(x)
    inner = ax < delta_tau
    outer = ax > delta_zero
    bad_in = inner & ~(u > h + tau)
    bad_out = outer & ~(u < h)
    if np.any(bad_in):
        i = int(np.argmax(bad_in))
        raise NotABumpError(f"u <= h + tau at x={float(x[i])!r} inside the excited core", witness=float(x[i]))
    if np.any(bad_out):
        i = int(np.argmax(bad_out))
        raise NotABumpError(f"u >= h at x={float(x[i])!r} outside the excited region", witness=float(x[i]))


def default_extent(kernel: ConnectivityKernel, delta_zero: float) -> float:
    return delta_zero + 5.0 * kernel.decay_length


def extend_bump(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    pair: WidthPair,
    u_star: SampledFunction,
    X: Optional[float] = None,
    out_n: int = 1201,
    quad_order: int = 4,
) -> BumpSolution:
    """Extend the fixed point ``u*`` to a bump on ``[-X, X]``.

    The crossings ``delta_tau`` (level ``h + tau``) and ``delta_0`` (level ``h``)
    are located on ``[Delta_tau, Delta_0]`` by bisection on the extension
    formula itself.

    Raises
    ------
    NotABumpError
        If the extended profile does not satisfy the bump criteria.
    """
    if out_n < 3:
        raise ValueError("out_n must be at least 3")
    op = TfOperator(kernel, rate, h, pair, u_star.grid.n, quad_order)
    evaluate = op.extension(u_star)
    tau = getattr(rate, "tau", 0.0)
    lo, hi = pair.bounds
    d_tau = _decreasing_root(lambda x: float(evaluate(x)) - (h + tau), lo, hi, "h + tau")
    d_zero = _decreasing_root(lambda x: float(evaluate(x)) - h, lo, hi, "h")
    if not lo < d_tau <= d_zero < hi:
        raise NotABumpError(
            f"crossings out of order: {lo!r} < {d_tau!r} <= {d_zero!r} < {hi!r} fails",
            witness=d_tau,
        )
    X = default_extent(kernel, hi) if X is None else float(X)
    if X <= hi:
        raise ValueError(f"X={X!r} must exceed Delta_0={hi!r}")
    grid = Grid(-X, X, out_n)
    xs = grid.points
    # evaluate on |x| so the samples are even to the last bit
    samples = SampledFunction(grid, evaluate(np.abs(xs)))
    validate_bump(samples, d_tau, d_zero, h, tau)
    return BumpSolution(samples, d_tau, d_zero, h, tau, evaluate=evaluate)


def level_crossings(bump: BumpSolution, levels: Sequence[float]) -> List[float]:
    """Positive ``x`` on the decreasing flank with ``u(x) = level`` for each level.

    The flank is bracketed by the crossings of the largest and smallest level
    on the samples, then refined by bisection on the bump's evaluator.

    Raises
    ------
    DomainError
        If a level is outside the range of the decreasing flank.
    """
    x, u = bump.x, bump.u
    right = x >= 0
    xr, ur = x[right], u[right]
    top, bottom = float(ur[0]), float(ur[-1])
    out = []
    for level in levels:
        if not bottom < level < top:
            raise DomainError(
                f"level {level!r} outside the decreasing flank range ({bottom!r}, {top!r})"
            )
        # first sample strictly below the level on the right half
        j = int(np.argmax(ur < level))
        lo, hi = float(xr[j - 1]), float(xr[j])
        fn = lambda z, lv=level: float(bump(z)) - lv
        out.append(bisect(fn, lo, hi, DEFAULT_ROOT_TOL))
    return out
