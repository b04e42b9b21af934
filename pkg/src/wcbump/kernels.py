"""Connectivity kernels, firing rates and the derived functions r, W, Phi.

All evaluators accept scalars or numpy arrays and broadcast like numpy ufuncs.
Scalar inputs give numpy scalars back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import erf, erfc

from .errors import DomainError, UnsupportedVariantError

ArrayLike = Union[float, np.ndarray]


# {{{ connectivity kernels


@dataclass(frozen=True)
class GaussianDifference:
    r"""Difference of Gaussians (Mexican hat).

    .. math::

        \omega(x) = K e^{-k x^2} - M e^{-m x^2}, \qquad 0 < M < K,\ 0 < m < k.
    """

    K: float
    k: float
    M: float
    m: float

    def __post_init__(self) -> None:
        for name in ("K", "k", "M", "m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"'{name}' must be a positive real, got {value!r}")
        if not self.M < self.K:
            raise ValueError(f"need M < K, got M={self.M!r}, K={self.K!r}")
        if not self.m < self.k:
            raise ValueError(f"need m < k, got m={self.m!r}, k={self.k!r}")

    def omega(self, x: ArrayLike) -> ArrayLike:
        x2 = np.square(x)
        return self.K * np.exp(-self.k * x2) - self.M * np.exp(-self.m * x2)

    def derivative(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return (
            -2.0 * self.k * self.K * x * np.exp(-self.k * x2)
            + 2.0 * self.m * self.M * x * np.exp(-self.m * x2)
        )

    def antiderivative(self, x: ArrayLike) -> ArrayLike:
        sk, sm = math.sqrt(self.k), math.sqrt(self.m)
        return 0.5 * self.K * math.sqrt(math.pi / self.k) * erf(sk * np.asarray(x)) - (
            0.5 * self.M * math.sqrt(math.pi / self.m) * erf(sm * np.asarray(x))
        )

    def antiderivative_limit(self) -> float:
        """Value of W at +infinity."""
        return 0.5 * self.K * math.sqrt(math.pi / self.k) - 0.5 * self.M * math.sqrt(
            math.pi / self.m
        )

    def tail_mass(self, a: float) -> float:
        """Upper bound on the integral of ``|omega|`` over ``[a, inf)``, ``a >= 0``."""
        a = max(float(a), 0.0)
        return 0.5 * self.K * math.sqrt(math.pi / self.k) * erfc(
            math.sqrt(self.k) * a
        ) + 0.5 * self.M * math.sqrt(math.pi / self.m) * erfc(math.sqrt(self.m) * a)

    @property
    def decay_length(self) -> float:
        return 1.0 / math.sqrt(self.m)

    @property
    def last_sign_change(self) -> float:
        """The single positive zero of omega."""
        return math.sqrt(math.log(self.K / self.M) / (self.k - self.m))


@dataclass(frozen=True)
class OscillatoryDecay:
    r"""Exponentially damped oscillation.

    .. math::

        \omega(x) = e^{-b|x|}\,(b \sin|x| + \cos x), \qquad b > 0.
    """

    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.b) and self.b > 0):
            raise ValueError(f"'b' must be a positive real, got {self.b!r}")

    def omega(self, x: ArrayLike) -> ArrayLike:
        ax = np.abs(x)
        return np.exp(-self.b * ax) * (self.b * np.sin(ax) + np.cos(ax))

    def derivative(self, x: ArrayLike) -> ArrayLike:
        # the kink of |x| cancels: omega'(x) = -(1 + b^2) e^{-b|x|} sin x
        x = np.asarray(x, dtype=float)
        return -(1.0 + self.b**2) * np.exp(-self.b * np.abs(x)) * np.sin(x)

    def antiderivative(self, x: ArrayLike) -> ArrayLike:
        b = self.b
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        val = (np.exp(-b * ax) * ((1.0 - b * b) * np.sin(ax) - 2.0 * b * np.cos(ax)) + 2.0 * b) / (
            1.0 + b * b
        )
        return np.sign(x) * val

    def antiderivative_limit(self) -> float:
        return 2.0 * self.b / (1.0 + self.b**2)

    def tail_mass(self, a: float) -> float:
        a = max(float(a), 0.0)
        return math.sqrt(1.0 + self.b**2) / self.b * math.exp(-self.b * a)

    @property
    def decay_length(self) -> float:
        return 1.0 / self.b

    @property
    def last_sign_change(self) -> float:
        # zeros never stop; report where the envelope has decayed by e^{-10}
        return 10.0 / self.b


ConnectivityKernel = Union[GaussianDifference, OscillatoryDecay]


def tail_cutoff(kernel: ConnectivityKernel, bound: float, start: float = 0.0) -> float:
    """Smallest ``a >= start`` (to within 1e-6) with ``kernel.tail_mass(a) < bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    lo = max(start, 0.0)
    if kernel.tail_mass(lo) < bound:
        return lo
    hi = lo + kernel.decay_length
    while kernel.tail_mass(hi) >= bound:
        lo, hi = hi, hi + 2.0 * (hi - lo)
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if kernel.tail_mass(mid) < bound:
            hi = mid
        else:
            lo = mid
    return hi


# }}}


# {{{ firing rates


@dataclass(frozen=True)
class Heaviside:
    """Unit step ``theta(u - shift)`` with the convention ``theta(0) = 1``."""

    shift: float = 0.0

    def rate(self, u: ArrayLike) -> ArrayLike:
        return np.where(np.asarray(u) >= self.shift, 1.0, 0.0)[()]

    def density(self, xi: ArrayLike) -> ArrayLike:
        raise UnsupportedVariantError(
            "the Heaviside rate has a point mass, not a density"
        )


@dataclass(frozen=True)
class Logoid:
    r"""Smoothed Heaviside ``f(u) = Sigma(u / tau, p)`` with

    .. math::

        \Sigma(s, p) = \frac{s^p}{s^p + (1 - s)^p}, \quad 0 < s < 1,

    zero below and one above.
    """

    tau: float
    p: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"'tau' must be a positive real, got {self.tau!r}")
        if not (math.isfinite(self.p) and self.p >= 1):
            raise ValueError(f"'p' must be a real >= 1, got {self.p!r}")

    def rate(self, u: ArrayLike) -> ArrayLike:
        s = np.clip(np.asarray(u, dtype=float) / self.tau, 0.0, 1.0)
        a = s**self.p
        b = (1.0 - s) ** self.p
        return (a / (a + b))[()]

    def density(self, xi: ArrayLike) -> ArrayLike:
        xi = np.asarray(xi, dtype=float)
        inside = (xi >= 0.0) & (xi <= self.tau)
        s = np.clip(xi / self.tau, 0.0, 1.0)
        p = self.p
        num = p * s ** (p - 1.0) * (1.0 - s) ** (p - 1.0)
        den = (s**p + (1.0 - s) ** p) ** 2
        return np.where(inside, num / (den * self.tau), 0.0)[()]


FiringRate = Union[Heaviside, Logoid]


# }}}


# {{{ evaluators


def eval_omega(kernel: ConnectivityKernel, x: ArrayLike) -> ArrayLike:
    return kernel.omega(x)


def eval_domega(kernel: ConnectivityKernel, x: ArrayLike) -> ArrayLike:
    """Analytic derivative of omega."""
    return kernel.derivative(x)


def eval_W(kernel: ConnectivityKernel, x: ArrayLike) -> ArrayLike:
    """Antiderivative ``W(x) = int_0^x omega``; odd in ``x``."""
    return kernel.antiderivative(x)


def eval_r(kernel: ConnectivityKernel, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Symmetrised kernel ``r(x, y) = omega(y - x) + omega(y + x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return kernel.omega(y - x) + kernel.omega(y + x)


def eval_dr_dx(kernel: ConnectivityKernel, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return kernel.derivative(y + x) - kernel.derivative(y - x)


def eval_phi(kernel: ConnectivityKernel, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """``Phi(x, y) = int_0^y r(x, z) dz`` through ``W(y + x) + W(y - x)``.

    Raises
    ------
    DomainError
        If any ``y`` is negative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError("Phi(x, y) is only defined for y >= 0")
    return kernel.antiderivative(y + x) + kernel.antiderivative(y - x)


def eval_dphi_dx(kernel: ConnectivityKernel, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return kernel.omega(y + x) - kernel.omega(y - x)


def eval_f(rate: FiringRate, u: ArrayLike) -> ArrayLike:
    return rate.rate(u)


def eval_rho(rate: FiringRate, xi: ArrayLike) -> ArrayLike:
    """Density ``rho = f'`` of a smooth firing rate.

    Raises
    ------
    UnsupportedVariantError
        For the Heaviside rate.
    """
    return rate.density(xi)


def rate_tau(rate: FiringRate) -> float:
    """Width of the incompletely excited band of ``rate`` (zero for Heaviside)."""
    return rate.tau if isinstance(rate, Logoid) else 0.0


# }}}
