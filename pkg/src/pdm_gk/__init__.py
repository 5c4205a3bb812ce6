"""Position-dependent-mass harmonic oscillator and its Gazeau-Klauder coherent states."""

from .errors import IncompatibleMomentsError, NonConvergenceError, TruncationError
from .gk import (
    GKMoments,
    GKState,
    WeightFunction,
    analytic_weight,
    build_state,
    evolve,
    moments,
    moments_from_params,
    overlap,
    weight_function,
)
from .model import ModelParams, eigenfunction, energy, mass_profile, shifted_spectrum
from .stats import (
    StatisticsReport,
    WignerGrid,
    g2,
    mandel_q,
    mean_n,
    photon_distribution,
    statistics_report,
    wigner_grid,
)
from .verify import CheckResult, VerificationReport, run_battery

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "GKMoments",
    "GKState",
    "IncompatibleMomentsError",
    "ModelParams",
    "NonConvergenceError",
    "StatisticsReport",
    "TruncationError",
    "VerificationReport",
    "WeightFunction",
    "WignerGrid",
    "analytic_weight",
    "build_state",
    "eigenfunction",
    "energy",
    "evolve",
    "g2",
    "mandel_q",
    "mass_profile",
    "mean_n",
    "moments",
    "moments_from_params",
    "overlap",
    "photon_distribution",
    "run_battery",
    "shifted_spectrum",
    "statistics_report",
    "weight_function",
    "wigner_grid",
]
