"""Numerical verification of the hypotheses behind both iteration schemes.

Every check scans a grid, reports the worst margin (positive means the
hypothesis holds) and the point where that margin is attained.  Failures are
reported, never raised.

Ids used in reports:

=================  =======================================================
``A2``             r(x, y) >= 0 on the square [Delta_tau, Delta_0]^2
``A3``             u_0 and u_tau decreasing on [Delta_tau, Delta_0]
``A3pp``           dPhi/dx < 0 on the whole square
``A4``             derivative bound that makes the direct fixed point decrease
``A5``             Phi <= h beyond Delta_0 and >= h + tau before Delta_tau
``A3p-posterior``  dPhi/dx(Delta(t), Delta(s)) < 0 for a computed profile
``A5p-posterior``  the profile's bump stays below h beyond Delta(0) and
                   above h + tau before Delta(tau)
=================  =======================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Tuple, Union

import numpy as np

from .errors import PreconditionError
from .kernels import (
    ConnectivityKernel,
    FiringRate,
    eval_dphi_dx,
    eval_dr_dx,
    eval_f,
    eval_phi,
    eval_r,
    tail_cutoff,
)
from .numerics import SampledFunction, gauss_legendre
from .widths import WidthPair

DEFAULT_SCAN_N = 401


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    worst_margin: float
    witness: Tuple[float, ...]
    detail: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    checks: Dict[str, CheckResult]
    degenerate: bool = False
    #: ids that are diagnostics only and do not count towards :meth:`all_hold`
    informational: FrozenSet[str] = field(default_factory=frozenset)

    def __getitem__(self, key: str) -> CheckResult:
        return self.checks[key]

    def __contains__(self, key: str) -> bool:
        return key in self.checks

    def all_hold(self, ids=None) -> bool:
        ids = [i for i in self.checks if i not in self.informational] if ids is None else ids
        return all(self.checks[i].holds for i in ids)

    def failed(self):
        return [i for i, c in self.checks.items() if not c.holds and i not in self.informational]

    def merged(self, other: "AssumptionReport") -> "AssumptionReport":
        return AssumptionReport(
            {**self.checks, **other.checks},
            degenerate=self.degenerate or other.degenerate,
            informational=self.informational | other.informational,
        )

    def table(self) -> str:
        lines = [f"{'id':<16}{'holds':<7}{'worst margin':>24}  witness"]
        for key, c in self.checks.items():
            tag = " (info)" if key in self.informational else ""
            wit = ", ".join(repr(float(v)) for v in c.witness)
            lines.append(f"{key:<16}{str(c.holds):<7}{c.worst_margin!r:>24}  ({wit}){tag}")
            if c.detail:
                lines.append(f"{'':<16}{c.detail}")
        if self.degenerate:
            lines.append("note: the width interval has zero length")
        return "\n".join(lines)


def _result(margins: np.ndarray, coords, detail: str = "") -> CheckResult:
    """Worst (smallest) margin over a scan and where it sits."""
    idx = np.unravel_index(int(np.argmin(margins)), margins.shape)
    worst = float(margins[idx])
    witness = tuple(float(c[idx]) for c in coords)
    return CheckResult(holds=worst > 0, worst_margin=worst, witness=witness, detail=detail)


def _bounds(pair) -> Tuple[float, float]:
    if isinstance(pair, WidthPair):
        return pair.bounds
    lo, hi = pair
    if lo > hi:
        raise PreconditionError(f"need Delta_tau <= Delta_0, got {lo!r} > {hi!r}")
    return float(lo), float(hi)


def far_cutoff(kernel: ConnectivityKernel, h: float, tau: float, y_max: float) -> float:
    """Point ``X`` beyond which ``|Phi(x, y)| < min(h, tau) / 10`` for all ``y <= y_max``.

    Uses ``|Phi(x, y)| <= int_{x - y}^inf |omega|``.
    """
    return y_max + tail_cutoff(kernel, min(h, tau) / 10.0)


def _tail_bound(kernel, X, y_max) -> float:
    return kernel.tail_mass(X - y_max)


def check_far_field(
    kernel: ConnectivityKernel,
    h: float,
    tau: float,
    inner_hi: float,
    outer_lo: float,
    y_lo: float,
    y_hi: float,
    scan_n: int = DEFAULT_SCAN_N,
    X: Optional[float] = None,
) -> CheckResult:
    """``Phi(x, y) <= h`` on ``(outer_lo, inf)`` and ``>= h + tau`` on ``[0, inner_hi)``.

    ``y`` ranges over ``[y_lo, y_hi]``.  Both x-ranges are half open: the
    excluded endpoint is where the inequality is tight by construction.
    """
    if X is None:
        X = far_cutoff(kernel, h, tau, y_hi)
    X = max(X, outer_lo + 1e-6)
    ys = np.linspace(y_lo, y_hi, scan_n)
    x_out = np.linspace(outer_lo, X, scan_n + 1)[1:]
    x_in = np.linspace(0.0, inner_hi, scan_n, endpoint=False)

    XO, YO = np.meshgrid(x_out, ys, indexing="ij")
    XI, YI = np.meshgrid(x_in, ys, indexing="ij")
    outer = _result(h - eval_phi(kernel, XO, YO), (XO, YO))
    inner = _result(eval_phi(kernel, XI, YI) - (h + tau), (XI, YI))

    tail = _tail_bound(kernel, X, y_hi)
    tail_ok = tail < h
    worst = outer if outer.worst_margin <= inner.worst_margin else inner
    part = "(i)" if worst is outer else "(ii)"
    detail = (
        f"part (i) margin {outer.worst_margin!r}, part (ii) margin {inner.worst_margin!r}; "
        f"scanned to X={X!r}, tail bound {float(tail)!r}"
    )
    if not tail_ok:
        detail += " (tail not certified)"
    margin = worst.worst_margin if tail_ok else min(worst.worst_margin, h - tail)
    return CheckResult(
        holds=margin > 0,
        worst_margin=float(margin),
        witness=worst.witness,
        detail=f"worst part {part}; " + detail,
    )


def a4_lhs(kernel, rate, h, lo, hi, xs, panels=None, order=4):
    """``int |dr/dx(x, y)| f(u_0(y) - h) dy + dPhi/dx(x, Delta_tau)`` at each ``x``."""
    xs = np.asarray(xs, dtype=float)
    if hi <= lo:
        return eval_dphi_dx(kernel, xs, lo)
    panels = panels or max(len(xs) - 1, 64)
    ys, wq = gauss_legendre(lo, hi, panels, order)
    weight = wq * eval_f(rate, eval_phi(kernel, ys, hi) - h)
    dr = np.abs(eval_dr_dx(kernel, xs[:, None], ys[None, :]))
    return dr @ weight + eval_dphi_dx(kernel, xs, lo)


def check_static(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    tau: float,
    pair: Union[WidthPair, Tuple[float, float]],
    scan_n: int = DEFAULT_SCAN_N,
    X: Optional[float] = None,
) -> AssumptionReport:
    """Check A2, A3, A3pp, A4 and A5 on ``[Delta_tau, Delta_0]``.

    ``pair`` may be a :class:`WidthPair` or a plain ``(Delta_tau, Delta_0)``
    tuple; the tuple form admits the degenerate case ``Delta_tau == Delta_0``.
    """
    lo, hi = _bounds(pair)
    xs = np.linspace(lo, hi, scan_n)
    X2, Y2 = np.meshgrid(xs, xs, indexing="ij")
    checks = {}

    checks["A2"] = _result(eval_r(kernel, X2, Y2), (X2, Y2))

    d0 = eval_dphi_dx(kernel, xs, hi)
    dt = eval_dphi_dx(kernel, xs, lo)
    both = np.stack([-d0, -dt])
    which = np.stack([np.full_like(xs, hi), np.full_like(xs, lo)])
    checks["A3"] = _result(both, (np.stack([xs, xs]), which))

    checks["A3pp"] = _result(-eval_dphi_dx(kernel, X2, Y2), (X2, Y2))

    lhs = a4_lhs(kernel, rate, h, lo, hi, xs)
    checks["A4"] = _result(-lhs, (xs,))

    checks["A5"] = check_far_field(kernel, h, tau, lo, hi, lo, hi, scan_n, X)
    return AssumptionReport(checks, degenerate=not hi > lo)


def compute_m(kernel: ConnectivityKernel, lo: float, hi: float, grid_n: int = DEFAULT_SCAN_N) -> float:
    """``m = -min dPhi/dx(x, y)`` over ``[lo, hi]^2``, the step bound constant.

    Raises
    ------
    PreconditionError
        If ``dPhi/dx`` is not negative on the whole square.
    """
    if lo > hi:
        raise PreconditionError(f"need lo <= hi, got {lo!r} > {hi!r}")
    xs = np.linspace(lo, hi, grid_n) if hi > lo else np.array([lo])
    d = eval_dphi_dx(kernel, xs[:, None], xs[None, :])
    if not np.max(d) < 0:
        i, j = np.unravel_index(int(np.argmax(d)), d.shape)
        raise PreconditionError(
            f"dPhi/dx is not negative on the square: {float(d[i, j])!r} at "
            f"({float(xs[i])!r}, {float(xs[j])!r})"
        )
    return float(-np.min(d))


def check_posterior(
    kernel: ConnectivityKernel,
    rate: FiringRate,
    h: float,
    tau: float,
    profile: SampledFunction,
    scan_n: int = DEFAULT_SCAN_N,
    X: Optional[float] = None,
) -> AssumptionReport:
    """Check A3' and A5' for a computed width profile ``Delta(t)`` on ``[0, tau]``.

    A5' is checked on the reconstructed bump ``u_Delta``, which is what the
    extension argument needs.  The pointwise form on ``Phi`` is added as the
    diagnostic ``A5p-pointwise``; it is tight at ``x = y = Delta(0)`` and fails
    there whenever ``W`` is decreasing at ``2 Delta(0)``.
    """
    from .scheme_width import reconstruct_u_delta

    d = np.asarray(profile.values)
    T, S = np.meshgrid(d, d, indexing="ij")
    checks = {"A3p-posterior": _result(-eval_dphi_dx(kernel, T, S), (T, S))}

    d_first, d_last = float(d[0]), float(d[-1])
    y_lo, y_hi = min(d_first, d_last), max(d_first, d_last)
    if X is None:
        X = far_cutoff(kernel, h, tau, max(y_hi, float(np.max(d))))
    x_out = np.linspace(d_first, max(X, d_first + 1e-6), scan_n + 1)[1:]
    x_in = np.linspace(0.0, d_last, scan_n, endpoint=False)
    outer = _result(h - reconstruct_u_delta(kernel, rate, profile, x_out), (x_out,))
    inner = _result(reconstruct_u_delta(kernel, rate, profile, x_in) - (h + tau), (x_in,))
    tail = _tail_bound(kernel, X, float(np.max(d)))
    worst = outer if outer.worst_margin <= inner.worst_margin else inner
    margin = worst.worst_margin if tail < h else min(worst.worst_margin, h - tail)
    part = "(i)" if worst is outer else "(ii)"
    checks["A5p-posterior"] = CheckResult(
        holds=margin > 0,
        worst_margin=float(margin),
        witness=worst.witness,
        detail=(
            f"worst part {part}; part (i) margin {outer.worst_margin!r}, "
            f"part (ii) margin {inner.worst_margin!r}; tail bound {float(tail)!r}"
        ),
    )
    checks["A5p-pointwise"] = check_far_field(
        kernel, h, tau, d_last, d_first, y_lo, y_hi, scan_n, X
    )
    return AssumptionReport(checks, informational=frozenset({"A5p-pointwise"}))
