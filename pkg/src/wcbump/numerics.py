"""Quadrature, interpolation and bracketed root finding on uniform grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, QuadratureError

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_ROOT_TOL = 1e-10
DEFAULT_GRID_N = 401


@dataclass(frozen=True)
class Grid:
    """``n`` uniformly spaced points on ``[a, b]``, endpoints included."""

    a: float
    b: float
    n: int = DEFAULT_GRID_N

    def __post_init__(self) -> None:
        if not self.n >= 2:
            raise ValueError(f"grid needs at least 2 points, got n={self.n}")
        if not self.a < self.b:
            raise ValueError(f"grid needs a < b, got [{self.a!r}, {self.b!r}]")

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function on the nodes of a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} values for the grid, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def interpolant(self) -> "Interpolant":
        return Interpolant(self)

    def __call__(self, x):
        return interpolate(self, x)


class Interpolant:
    """Monotone piecewise-cubic (PCHIP) interpolant that refuses to extrapolate."""

    def __init__(self, sf: SampledFunction):
        self.grid = sf.grid
        self._pchip = PchipInterpolator(sf.grid.points, sf.values, extrapolate=False)
        # pin the right end: linspace endpoints may differ from b in the last ulp
        self._lo, self._hi = sf.grid.a, sf.grid.b
        self._slack = 1e-12 * max(1.0, abs(self._lo), abs(self._hi))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self._lo - self._slack) or np.any(x > self._hi + self._slack):
            raise DomainError(
                f"interpolation point outside [{self._lo!r}, {self._hi!r}]"
            )
        return self._pchip(np.clip(x, self._lo, self._hi))[()]


def interpolate(sf: SampledFunction, x):
    """Evaluate the monotone cubic interpolant of ``sf`` at ``x``.

    Raises
    ------
    DomainError
        If ``x`` lies outside the grid; there is no extrapolation.
    """
    return Interpolant(sf)(x)


# {{{ quadrature


@lru_cache(maxsize=32)
def _legendre(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(a: float, b: float, panels: int, order: int = 4):
    """Nodes and weights of the composite Gauss-Legendre rule on ``[a, b]``.

    Each of the ``panels`` equal sub-intervals carries ``order`` nodes, so the
    rule is exact for polynomials of degree ``2 * order - 1`` on every panel.
    Nodes are strictly interior, which keeps kinks at ``a`` or ``b`` off the rule.
    """
    if panels < 1:
        raise ValueError("need at least one panel")
    ref_x, ref_w = _legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    weights = (half[:, None] * ref_w[None, :]).ravel()
    return nodes, weights


def integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_QUAD_TOL,
    order: int = 8,
    max_depth: int = 16,
) -> float:
    """Integrate ``fn`` over ``[a, b]`` by panel-doubling Gauss-Legendre.

    ``fn`` must accept a 1d array of nodes.  The panel count doubles until two
    successive estimates differ by less than ``tol``.

    Raises
    ------
    QuadratureError
        After ``max_depth`` doublings without meeting ``tol``.
    """
    if a > b:
        raise ValueError(f"need a <= b, got [{a!r}, {b!r}]")
    if a == b:
        return 0.0

    def estimate(panels):
        x, w = gauss_legendre(a, b, panels, order)
        return float(np.dot(w, np.asarray(fn(x), dtype=float)))

    previous = estimate(1)
    panels = 1
    for _ in range(max_depth):
        panels *= 2
        current = estimate(panels)
        if abs(current - previous) < tol:
            return current
        previous = current
    raise QuadratureError("integral did not converge", previous, current)


# }}}


# {{{ root finding


def bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_ROOT_TOL) -> float:
    """Bisection on a bracket with ``fn(lo)`` and ``fn(hi)`` of opposite sign."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("bracket does not change sign")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = fn(mid)
        if fmid == 0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_roots(
    fn: Callable[[float], float],
    a: float,
    b: float,
    scan_n: int = 2001,
    tol: float = DEFAULT_ROOT_TOL,
) -> List[float]:
    """All sign changes of ``fn`` on a uniform scan of ``[a, b]``, refined by bisection.

    A scan node where ``fn`` is exactly zero counts as a root. Roots of even
    multiplicity between scan nodes are invisible to this method.
    """
    if scan_n < 2:
        raise ValueError("scan_n must be at least 2")
    xs = np.linspace(a, b, scan_n)
    fs = [float(fn(float(x))) for x in xs]
    roots: List[float] = []
    for i, fx in enumerate(fs):
        if fx == 0.0:
            roots.append(float(xs[i]))
        if i + 1 < scan_n:
            fy = fs[i + 1]
            if fx != 0.0 and fy != 0.0 and (fx < 0) != (fy < 0):
                roots.append(bisect(fn, float(xs[i]), float(xs[i + 1]), tol))
    return roots


# }}}
