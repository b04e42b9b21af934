"""Construction of bump solutions of the one-population Wilson-Cowan field
with a smoothed Heaviside firing rate, by two monotone iteration schemes."""

from .kernels import (
    GaussianDifference,
    Heaviside,
    Logoid,
    OscillatoryDecay,
    eval_dphi_dx,
    eval_f,
    eval_omega,
    eval_phi,
    eval_r,
    eval_rho,
    eval_W,
)
from .numerics import Grid, SampledFunction, find_roots, integrate, interpolate
from .widths import Stability, WidthPair, WidthSolution, select_width_pair, solve_half_widths
from .assumptions import AssumptionReport, check_posterior, check_static, compute_m
from .scheme_direct import (
    BumpSolution,
    DirectConfig,
    IterationTrace,
    apply_Tf,
    extend_bump,
    iterate_direct,
    level_crossings,
)
from .scheme_width import (
    WidthConfig,
    WidthProfile,
    apply_A,
    choose_k,
    cross_validate,
    iterate_width,
    reconstruct_bump,
    reconstruct_u_delta,
)
from .dynamics import EvolutionState, evolve, probe_stability

__version__ = "0.1.0"
