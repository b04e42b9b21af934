"""Bump widths of the Heaviside fields and choice of the width pair.

A Heaviside-field bump of width ``a`` exists where ``W(a) = level`` and is
linearly stable when ``omega(a) < 0``.  Half-widths ``Delta = a / 2`` are used
throughout, matching the iteration schemes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import AssumptionError, PreconditionError
from .kernels import ConnectivityKernel, eval_omega, eval_phi, eval_W, tail_cutoff
from .numerics import DEFAULT_ROOT_TOL, find_roots

STABILITY_MARGIN = 1e-9


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


def classify(omega_at_width: float, margin: float = STABILITY_MARGIN) -> Stability:
    if omega_at_width < -margin:
        return Stability.STABLE
    if omega_at_width > margin:
        return Stability.UNSTABLE
    return Stability.MARGINAL


@dataclass(frozen=True)
class WidthSolution:
    half_width: float
    level: float
    stability: Stability
    omega_at_width: float
    #: whether Phi(x, Delta) stays >= level on [0, Delta) and <= level beyond
    bump_conditions_hold: bool = True


@dataclass(frozen=True)
class WidthPair:
    delta_tau: WidthSolution
    delta_zero: WidthSolution

    def __post_init__(self) -> None:
        if not self.delta_tau.half_width < self.delta_zero.half_width:
            raise AssumptionError(
                "need Delta_tau < Delta_0, got "
                f"{self.delta_tau.half_width!r} >= {self.delta_zero.half_width!r}"
            )

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.delta_tau.half_width, self.delta_zero.half_width


def default_scan_upper(kernel: ConnectivityKernel, tol: float = 1e-12) -> float:
    """Ten times the last sign change of omega, pushed out until the tail is below ``tol``."""
    return max(10.0 * kernel.last_sign_change, tail_cutoff(kernel, tol))


def _bump_conditions(kernel, delta, level, scan_n=801, reach=None, atol=1e-9) -> bool:
    reach = reach if reach is not None else default_scan_upper(kernel, 1e-9)
    inner = np.linspace(0.0, delta, scan_n, endpoint=False)
    outer = np.linspace(delta, max(reach, 2 * delta), scan_n)[1:]
    ok_inner = np.all(eval_phi(kernel, inner, delta) >= level - atol)
    ok_outer = np.all(eval_phi(kernel, outer, delta) <= level + atol)
    return bool(ok_inner and ok_outer)


def solve_half_widths(
    kernel: ConnectivityKernel,
    level: float,
    scan_upper: Optional[float] = None,
    scan_n: int = 4001,
    tol: float = DEFAULT_ROOT_TOL,
) -> list:
    """All half-widths ``Delta`` with ``W(2 Delta) = level``, ascending.

    Each solution carries its stability label from the sign of ``omega(2 Delta)``
    and a flag saying whether ``Phi(., Delta)`` really is a bump at this level.

    Raises
    ------
    PreconditionError
        If ``level <= 0`` or the scan window is too short for the kernel tail.
    """
    if not level > 0:
        raise PreconditionError(f"level must be positive, got {level!r}")
    if scan_upper is None:
        scan_upper = default_scan_upper(kernel)
    tail = kernel.tail_mass(scan_upper)
    if tail > 1e-6:
        raise PreconditionError(
            f"scan_upper={scan_upper!r} leaves a kernel tail of {tail:.3g}; widen the scan"
        )

    roots = find_roots(lambda a: float(eval_W(kernel, a)) - level, 0.0, scan_upper, scan_n, tol)
    out = []
    for a in roots:
        if a <= 0.0:
            continue
        delta = 0.5 * a
        w_a = float(eval_omega(kernel, a))
        out.append(
            WidthSolution(
                half_width=delta,
                level=level,
                stability=classify(w_a),
                omega_at_width=w_a,
                bump_conditions_hold=_bump_conditions(kernel, delta, level, reach=scan_upper),
            )
        )
    return out


Policy = Union[str, Tuple[int, int]]


def _prefer(candidates, stability, pick):
    preferred = [s for s in candidates if s.stability is stability]
    return pick(preferred or candidates, key=lambda s: s.half_width)


def select_width_pair(
    sols_h: Sequence[WidthSolution],
    sols_htau: Sequence[WidthSolution],
    policy: Policy = "smallest-unstable",
) -> WidthPair:
    """Pick ``(Delta_tau, Delta_0)`` with ``Delta_tau < Delta_0``.

    ``Delta_0`` is the largest stable solution at level ``h`` (the largest one
    when none is stable).  ``Delta_tau`` depends on ``policy``:

    ``"smallest-unstable"``
        smallest admissible unstable solution at ``h + tau``, else the smallest.
    ``"largest-stable"``
        largest admissible stable solution at ``h + tau``, else the largest.
    ``(i_tau, i_zero)``
        explicit indices into ``sols_htau`` and ``sols_h``.

    Raises
    ------
    AssumptionError
        If no admissible pair exists.
    """
    if not sols_h or not sols_htau:
        raise AssumptionError(
            "no admissible width pair: no bump width at "
            + ("level h" if not sols_h else "level h + tau")
        )
    if isinstance(policy, tuple):
        i_tau, i_zero = policy
        try:
            return WidthPair(sols_htau[i_tau], sols_h[i_zero])
        except IndexError as exc:
            raise AssumptionError(f"width index out of range: {policy!r}") from exc

    zero = _prefer(list(sols_h), Stability.STABLE, max)
    admissible = [s for s in sols_htau if s.half_width < zero.half_width]
    if not admissible:
        raise AssumptionError(
            "no admissible width pair: every width at level h + tau is >= "
            f"Delta_0 = {zero.half_width!r}"
        )
    if policy == "smallest-unstable":
        tau = _prefer(admissible, Stability.UNSTABLE, min)
    elif policy == "largest-stable":
        tau = _prefer(admissible, Stability.STABLE, max)
    else:
        raise ValueError(f"unknown width-pair policy {policy!r}")
    return WidthPair(tau, zero)
