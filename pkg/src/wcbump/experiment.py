"""Experiment configuration, the end-to-end pipeline and result files.

Configurations are INI files (``configparser``), one section per concern::

    [kernel]    type = gaussian-difference | oscillatory-decay, plus parameters
    [rate]      type = logoid | heaviside, tau, p (logoid) or shift (heaviside)
    [field]     h, tau (defaults to the rate's tau)
    [widths]    policy, scan_n
    [scheme]    run = direct | width | both, grids, tolerances, k
    [bump]      X, out_n
    [stability] probe, amplitude, horizon, dt
    [output]    dir
"""

from __future__ import annotations

import configparser
import csv
import datetime as _dt
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from . import __version__
from .assumptions import AssumptionReport, check_static
from .dynamics import heaviside_bump, probe_stability
from .errors import AssumptionError, ConfigError, WCBumpError
from .kernels import GaussianDifference, Heaviside, Logoid, OscillatoryDecay, eval_omega, eval_phi, eval_W
from .scheme_direct import DirectConfig, extend_bump, iterate_direct
from .scheme_width import WidthConfig, cross_validate, iterate_width, reconstruct_bump
from .widths import Stability, select_width_pair, solve_half_widths

KERNEL_TYPES = {
    "gaussian-difference": (GaussianDifference, ("K", "k", "M", "m")),
    "oscillatory-decay": (OscillatoryDecay, ("b",)),
}
RATE_TYPES = {
    "logoid": (Logoid, ("tau", "p")),
    "heaviside": (Heaviside, ("shift",)),
}
SCHEMES = ("direct", "width", "both")
STAGES = ("widths", "check", "direct", "width-scheme", "simulate", "all")


# {{{ configuration


@dataclass(frozen=True)
class ExperimentConfig:
    kernel_type: str
    kernel_params: Tuple[Tuple[str, float], ...]
    rate_type: str
    rate_params: Tuple[Tuple[str, float], ...]
    h: float
    tau: float
    policy: Union[str, Tuple[int, int]] = "smallest-unstable"
    width_scan_n: int = 4001
    scheme: str = "both"
    grid_n: int = 401
    tol: float = 1e-8
    max_iter: int = 200
    grid_m: int = 201
    k: Optional[float] = None
    sigma: float = 0.9
    width_tol: float = 1e-8
    width_max_iter: int = 500
    X: Optional[float] = None
    out_n: int = 1201
    probe: bool = False
    amplitude: float = 1e-3
    horizon: float = 50.0
    dt: float = 0.05
    out_dir: str = "results"

    def kernel(self):
        cls, _ = KERNEL_TYPES[self.kernel_type]
        return cls(**dict(self.kernel_params))

    def rate(self):
        cls, _ = RATE_TYPES[self.rate_type]
        return cls(**dict(self.rate_params))

    def direct_config(self) -> DirectConfig:
        return DirectConfig(grid_n=self.grid_n, tol=self.tol, max_iter=self.max_iter)

    def width_config(self) -> WidthConfig:
        return WidthConfig(
            grid_m=self.grid_m, k=self.k, sigma=self.sigma, tol=self.width_tol, max_iter=self.width_max_iter
        )

    def to_ini(self) -> str:
        """Render back to the INI format; parsing the result gives an equal config."""
        policy = self.policy if isinstance(self.policy, str) else f"{self.policy[0]},{self.policy[1]}"
        sections = {
            "kernel": {"type": self.kernel_type, **{k: repr(v) for k, v in self.kernel_params}},
            "rate": {"type": self.rate_type, **{k: repr(v) for k, v in self.rate_params}},
            "field": {"h": repr(self.h), "tau": repr(self.tau)},
            "widths": {"policy": policy, "scan_n": str(self.width_scan_n)},
            "scheme": {
                "run": self.scheme,
                "grid_n": str(self.grid_n),
                "tol": repr(self.tol),
                "max_iter": str(self.max_iter),
                "grid_m": str(self.grid_m),
                "k": "auto" if self.k is None else repr(self.k),
                "sigma": repr(self.sigma),
                "width_tol": repr(self.width_tol),
                "width_max_iter": str(self.width_max_iter),
            },
            "bump": {"X": "auto" if self.X is None else repr(self.X), "out_n": str(self.out_n)},
            "stability": {
                "probe": "true" if self.probe else "false",
                "amplitude": repr(self.amplitude),
                "horizon": repr(self.horizon),
                "dt": repr(self.dt),
            },
            "output": {"dir": self.out_dir},
        }
        lines = []
        for name, items in sections.items():
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {v}" for k, v in items.items())
            lines.append("")
        return "\n".join(lines)


_ALLOWED = {
    "kernel": {"type", "K", "k", "M", "m", "b"},
    "rate": {"type", "tau", "p", "shift"},
    "field": {"h", "tau"},
    "widths": {"policy", "scan_n"},
    "scheme": {"run", "grid_n", "tol", "max_iter", "grid_m", "k", "sigma", "width_tol", "width_max_iter"},
    "bump": {"X", "out_n"},
    "stability": {"probe", "amplitude", "horizon", "dt"},
    "output": {"dir"},
}


class _Reader:
    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    def raw(self, section, key, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if default is None:
            raise ConfigError(f"[{section}] {key}: missing")
        return default

    def number(self, section, key, default=None, positive=False, cast=float):
        text = self.raw(section, key, None if default is None else str(default))
        try:
            value = cast(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a number, got {text!r}") from None
        if cast is float and not math.isfinite(value):
            raise ConfigError(f"[{section}] {key}: must be finite, got {text!r}")
        if positive and not value > 0:
            raise ConfigError(f"[{section}] {key}: must be positive, got {text!r}")
        return value

    def optional_number(self, section, key):
        text = self.raw(section, key, "auto")
        if text.lower() == "auto":
            return None
        return self.number(section, key, positive=True)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse INI text into an :class:`ExperimentConfig`.

    Raises
    ------
    ConfigError
        With the offending line (syntax) or ``[section] key`` (values).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # K and k are different parameters
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    for section in parser.sections():
        if section not in _ALLOWED:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in parser.options(section):
            if key not in _ALLOWED[section]:
                raise ConfigError(f"{source}: [{section}] {key}: unknown key")

    r = _Reader(parser)
    kernel_type = r.raw("kernel", "type").lower()
    if kernel_type not in KERNEL_TYPES:
        raise ConfigError(f"[kernel] type: expected one of {sorted(KERNEL_TYPES)}, got {kernel_type!r}")
    kernel_params = tuple((n, r.number("kernel", n, positive=True)) for n in KERNEL_TYPES[kernel_type][1])

    rate_type = r.raw("rate", "type").lower()
    if rate_type not in RATE_TYPES:
        raise ConfigError(f"[rate] type: expected one of {sorted(RATE_TYPES)}, got {rate_type!r}")
    if rate_type == "logoid":
        rate_params = (("tau", r.number("rate", "tau", positive=True)), ("p", r.number("rate", "p")))
    else:
        rate_params = (("shift", r.number("rate", "shift", 0.0)),)

    h = r.number("field", "h", positive=True)
    default_tau = dict(rate_params).get("tau")
    tau = r.number("field", "tau", default_tau, positive=True) if default_tau else r.number(
        "field", "tau", positive=True
    )

    policy_text = r.raw("widths", "policy", "smallest-unstable")
    if policy_text in ("smallest-unstable", "largest-stable"):
        policy: Union[str, Tuple[int, int]] = policy_text
    else:
        try:
            i_tau, i_zero = (int(p) for p in policy_text.split(","))
        except ValueError:
            raise ConfigError(
                "[widths] policy: expected smallest-unstable, largest-stable or 'i_tau,i_zero', "
                f"got {policy_text!r}"
            ) from None
        policy = (i_tau, i_zero)

    scheme = r.raw("scheme", "run", "both").lower()
    if scheme not in SCHEMES:
        raise ConfigError(f"[scheme] run: expected one of {SCHEMES}, got {scheme!r}")

    probe_text = r.raw("stability", "probe", "false").lower()
    if probe_text not in ("true", "false", "yes", "no", "1", "0"):
        raise ConfigError(f"[stability] probe: expected true or false, got {probe_text!r}")

    try:
        cfg = ExperimentConfig(
            kernel_type=kernel_type,
            kernel_params=kernel_params,
            rate_type=rate_type,
            rate_params=rate_params,
            h=h,
            tau=tau,
            policy=policy,
            width_scan_n=r.number("widths", "scan_n", 4001, positive=True, cast=int),
            scheme=scheme,
            grid_n=r.number("scheme", "grid_n", 401, positive=True, cast=int),
            tol=r.number("scheme", "tol", 1e-8, positive=True),
            max_iter=r.number("scheme", "max_iter", 200, positive=True, cast=int),
            grid_m=r.number("scheme", "grid_m", 201, positive=True, cast=int),
            k=r.optional_number("scheme", "k"),
            sigma=r.number("scheme", "sigma", 0.9, positive=True),
            width_tol=r.number("scheme", "width_tol", 1e-8, positive=True),
            width_max_iter=r.number("scheme", "width_max_iter", 500, positive=True, cast=int),
            X=r.optional_number("bump", "X"),
            out_n=r.number("bump", "out_n", 1201, positive=True, cast=int),
            probe=probe_text in ("true", "yes", "1"),
            amplitude=r.number("stability", "amplitude", 1e-3),
            horizon=r.number("stability", "horizon", 50.0, positive=True),
            dt=r.number("stability", "dt", 0.05, positive=True),
            out_dir=r.raw("output", "dir", "results"),
        )
        # constructor validation of the model objects
        cfg.kernel()
        cfg.rate()
        cfg.direct_config()
        cfg.width_config()
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if cfg.rate_type == "logoid" and abs(dict(cfg.rate_params)["tau"] - cfg.tau) > 1e-12:
        raise ConfigError("[field] tau: must equal [rate] tau for a logoid rate")
    return cfg


def builtin_configs() -> List[str]:
    return sorted(
        p.name[: -len(".ini")] for p in resources.files("wcbump.configs").iterdir() if p.name.endswith(".ini")
    )


def load_config(path_or_name: str) -> ExperimentConfig:
    """Read a config file, or a shipped one by name (``fig4``, ``fig6``)."""
    if os.path.exists(path_or_name):
        with open(path_or_name) as fh:
            return parse_config(fh.read(), source=path_or_name)
    if path_or_name in builtin_configs():
        text = resources.files("wcbump.configs").joinpath(path_or_name + ".ini").read_text()
        return parse_config(text, source=path_or_name)
    raise ConfigError(f"no config file or shipped config named {path_or_name!r}")


# }}}


# {{{ pipeline


@dataclass
class Curve:
    """One output table: column names and equally long columns."""

    columns: List[str]
    data: List[np.ndarray]
    description: str = ""


@dataclass
class ResultBundle:
    config: ExperimentConfig
    stage: str
    widths: Dict[str, list] = field(default_factory=dict)
    pair: Optional[Tuple[float, float]] = None
    assumptions: Optional[AssumptionReport] = None
    scalars: Dict[str, Any] = field(default_factory=dict)
    curves: Dict[str, Curve] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    #: set when a hypothesis the selected pipeline relies on is violated
    assumption_failure: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def numbers(self) -> Dict[str, Any]:
        """Everything numeric, for determinism and round-trip comparisons."""
        return {
            "widths": self.widths,
            "pair": self.pair,
            "scalars": self.scalars,
            "curves": {k: [c.tolist() for c in v.data] for k, v in self.curves.items()},
            "assumptions": _report_dict(self.assumptions),
        }

    def summary(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "pair": None if self.pair is None else {"delta_tau": self.pair[0], "delta_zero": self.pair[1]},
            "widths": self.widths,
            "scalars": self.scalars,
            "assumptions": _report_dict(self.assumptions),
            "failures": self.failures,
            "assumption_failure": self.assumption_failure,
            "metadata": self.metadata,
        }


def _report_dict(report: Optional[AssumptionReport]):
    if report is None:
        return None
    return {
        key: {
            "holds": c.holds,
            "worst_margin": c.worst_margin,
            "witness": list(c.witness),
            "detail": c.detail,
            "informational": key in report.informational,
        }
        for key, c in report.checks.items()
    }


def _width_rows(sols):
    return [
        {
            "half_width": s.half_width,
            "level": s.level,
            "stability": s.stability.value,
            "omega_at_width": s.omega_at_width,
            "bump_conditions_hold": s.bump_conditions_hold,
        }
        for s in sols
    ]


def run(config: ExperimentConfig, stage: str = "all") -> ResultBundle:
    """Run the pipeline up to ``stage``.

    Widths, then pair selection, assumption checks, the selected scheme(s),
    bump construction, cross-validation and the optional stability probe.
    Failures after pair selection are recorded and the pipeline continues
    where the remaining steps do not depend on the failed one.

    Raises
    ------
    AssumptionError
        When no admissible width pair exists.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    kernel, rate, h, tau = config.kernel(), config.rate(), config.h, config.tau
    bundle = ResultBundle(
        config=config,
        stage=stage,
        metadata={
            "version": __version__,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "config": config.to_ini(),
        },
    )

    sols_h = solve_half_widths(kernel, h, scan_n=config.width_scan_n)
    sols_ht = solve_half_widths(kernel, h + tau, scan_n=config.width_scan_n)
    bundle.widths = {"h": _width_rows(sols_h), "h+tau": _width_rows(sols_ht)}
    reach = max([s.half_width for s in sols_h + sols_ht] + [kernel.last_sign_change]) * 3.0
    xs = np.linspace(0.0, reach, 601)
    bundle.curves["kernel"] = Curve(
        ["x", "omega", "W"], [xs, eval_omega(kernel, xs), eval_W(kernel, xs)], "connectivity and antiderivative"
    )

    pair = select_width_pair(sols_h, sols_ht, config.policy)
    lo, hi = pair.bounds
    bundle.pair = (lo, hi)
    stable_tau = [s for s in sols_ht if s.stability is Stability.STABLE and s.half_width < hi]
    if stage == "widths":
        return bundle

    report = check_static(kernel, rate, h, tau, pair)
    bundle.assumptions = report
    if stage == "check":
        if not report.all_hold():
            bundle.assumption_failure = True
            bundle.failures.append("failed: " + ", ".join(report.failed()))
        return bundle

    want_direct = stage in ("direct", "simulate") or (stage == "all" and config.scheme in ("direct", "both"))
    want_width = stage == "width-scheme" or (stage == "all" and config.scheme in ("width", "both"))

    if not report["A2"].holds:
        bundle.assumption_failure = True
        bundle.failures.append("A2 fails: T_f and A are not monotone on the width interval")
        return bundle

    bump_direct = None
    if want_direct:
        bump_direct = _run_direct(bundle, kernel, rate, h, tau, pair, report, stable_tau)
    if want_width:
        profile = _run_width(bundle, kernel, rate, h, tau, pair, report)
        if profile is not None and bump_direct is not None:
            try:
                bundle.scalars["cross_validation_error"] = cross_validate(bump_direct, profile)
            except WCBumpError as exc:
                bundle.failures.append(f"cross-validation: {exc}")
        if profile is not None and "bump_direct" in bundle.curves and "bump_width" in bundle.curves:
            a = bundle.curves["bump_direct"].data[1]
            b = bundle.curves["bump_width"].data[1]
            if a.shape == b.shape:
                bundle.scalars["bump_max_difference"] = float(np.max(np.abs(a - b)))

    if bump_direct is not None and (stage == "simulate" or (stage == "all" and config.probe)):
        _run_probe(bundle, kernel, rate, h, tau, bump_direct, sols_ht, pair)
    return bundle


def _run_direct(bundle, kernel, rate, h, tau, pair, report, stable_tau):
    cfg = bundle.config
    lo, hi = pair.bounds
    try:
        res = iterate_direct(kernel, rate, h, pair, cfg.direct_config())
    except WCBumpError as exc:
        bundle.failures.append(f"direct iteration: {exc}")
        return None
    trace = res.trace
    n = np.arange(1, trace.iterations + 1)
    bundle.curves["direct_errors"] = Curve(["n", "eps"], [n, np.array(trace.errors)], "Scheme I error sequence")
    bundle.scalars["direct_converged"] = trace.converged
    bundle.scalars["direct_iterations"] = trace.iterations
    bundle.scalars["direct_settles_below_1e-5_at"] = trace.settles_below(1e-5)
    if not trace.converged:
        bundle.failures.append("direct iteration did not reach tol")

    u_star = res.fixed_point
    x = u_star.points
    cols = ["x", "u_tau", "u_star_lower", "u_star_upper", "u_zero"]
    data = [x, eval_phi(kernel, x, lo), res.lower.values, res.upper.values, eval_phi(kernel, x, hi)]
    if stable_tau:
        cols.append("u_tau_st")
        data.append(eval_phi(kernel, x, stable_tau[-1].half_width))
    bundle.curves["direct_fixed_point"] = Curve(cols, data, "fixed point of T_f and the Heaviside bumps")

    decreasing = bool(np.all(np.diff(u_star.values) < 0))
    bundle.scalars["u_star_strictly_decreasing"] = decreasing
    gating = ["A3", "A5"]
    if not report["A4"].holds:
        if decreasing:
            bundle.failures.append(
                "A4 fails, but the fixed point was verified strictly decreasing on the grid"
            )
        else:
            gating.append("A4")
    failed = [g for g in gating if not report[g].holds]
    if failed:
        bundle.assumption_failure = True
        bundle.failures.append("bump extension not justified: " + ", ".join(failed) + " fail")
    try:
        bump = extend_bump(kernel, rate, h, pair, u_star, X=cfg.X, out_n=cfg.out_n)
    except WCBumpError as exc:
        bundle.assumption_failure = True
        bundle.failures.append(f"bump extension: {exc}")
        return None
    bundle.scalars["direct_delta_tau"] = bump.delta_tau
    bundle.scalars["direct_delta_zero"] = bump.delta_zero
    bundle.curves["bump_direct"] = Curve(["x", "u"], [bump.x, bump.u], "Scheme I bump")
    return bump


def _run_width(bundle, kernel, rate, h, tau, pair, report):
    cfg = bundle.config
    if not isinstance(rate, Logoid):
        bundle.failures.append("width scheme skipped: the firing rate has no density")
        return None
    if not report["A3pp"].holds:
        bundle.assumption_failure = True
        bundle.failures.append("width scheme skipped: A3pp fails")
        return None
    try:
        res = iterate_width(kernel, rate, h, tau, pair, cfg.width_config())
    except WCBumpError as exc:
        bundle.failures.append(f"width iteration: {exc}")
        return None
    trace = res.trace
    n = np.arange(1, trace.iterations + 1)
    bundle.curves["width_errors"] = Curve(["n", "eps"], [n, np.array(trace.errors)], "Scheme II error sequence")
    bundle.scalars["realized_k"] = res.k
    bundle.scalars["m"] = res.m
    bundle.scalars["k_mode"] = trace.info["k_mode"]
    bundle.scalars["width_converged"] = trace.converged
    bundle.scalars["width_iterations"] = trace.iterations
    bundle.scalars["width_settles_below_1e-5_at"] = trace.settles_below(1e-5)
    bundle.scalars["profile_strictly_decreasing"] = trace.info["strictly_decreasing"]
    if not trace.converged:
        bundle.failures.append("width iteration did not reach tol")
    profile = res.fixed_point
    bundle.curves["width_profile"] = Curve(
        ["t", "delta_lower", "delta_upper"], [profile.points, res.lower.values, res.upper.values], "Delta(t)"
    )
    if res.posterior is not None:
        bundle.assumptions = bundle.assumptions.merged(res.posterior)
        if not res.posterior.all_hold():
            bundle.assumption_failure = True
            bundle.failures.append("posterior checks fail: " + ", ".join(res.posterior.failed()))
    try:
        bump = reconstruct_bump(kernel, rate, h, profile, X=cfg.X, out_n=cfg.out_n)
    except WCBumpError as exc:
        bundle.failures.append(f"profile bump: {exc}")
        return profile
    bundle.curves["bump_width"] = Curve(["x", "u"], [bump.x, bump.u], "Scheme II bump")
    return profile


def _run_probe(bundle, kernel, rate, h, tau, bump, sols_ht, pair):
    cfg = bundle.config
    try:
        probe = probe_stability(kernel, rate, h, bump, cfg.amplitude, cfg.horizon, cfg.dt)
    except WCBumpError as exc:
        bundle.failures.append(f"stability probe: {exc}")
        return
    bundle.scalars["probe_verdict"] = probe.verdict.value
    bundle.scalars["probe_max_deviation"] = probe.max_deviation
    # reference: the step-rate bump of width 2 Delta_tau at threshold h + tau
    ref = heaviside_bump(kernel, pair.delta_tau, bump.x[-1], len(bump.x))
    try:
        ref_probe = probe_stability(kernel, Heaviside(tau), h, ref, cfg.amplitude, cfg.horizon, cfg.dt)
    except WCBumpError as exc:
        bundle.failures.append(f"reference probe: {exc}")
        return
    bundle.scalars["reference_stability_label"] = pair.delta_tau.stability.value
    bundle.scalars["reference_probe_verdict"] = ref_probe.verdict.value
    bundle.scalars["reference_probe_max_deviation"] = ref_probe.max_deviation


# }}}


# {{{ output


UNITS = "all quantities dimensionless"


def write_outputs(bundle: ResultBundle, out_dir: str) -> List[str]:
    """Write one CSV per curve plus ``summary.json`` and ``config.ini``."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, curve in bundle.curves.items():
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(f"# {curve.description}; {UNITS}\n")
            writer = csv.writer(fh)
            writer.writerow(curve.columns)
            for row in zip(*curve.data):
                writer.writerow([_fmt(v) for v in row])
        written.append(path)
    widths_path = os.path.join(out_dir, "widths.csv")
    with open(widths_path, "w", newline="") as fh:
        fh.write(f"# bump half-widths of the step-rate fields; {UNITS}\n")
        writer = csv.writer(fh)
        writer.writerow(["level", "half_width", "stability", "omega_at_width", "bump_conditions_hold"])
        for rows in bundle.widths.values():
            for r in rows:
                writer.writerow(
                    [_fmt(r["level"]), _fmt(r["half_width"]), r["stability"], _fmt(r["omega_at_width"]), r["bump_conditions_hold"]]
                )
    written.append(widths_path)
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(_jsonable(bundle.summary()), fh, indent=2)
        fh.write("\n")
    written.append(summary_path)
    cfg_path = os.path.join(out_dir, "config.ini")
    with open(cfg_path, "w") as fh:
        fh.write(bundle.config.to_ini())
    written.append(cfg_path)
    return written


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


# }}}
