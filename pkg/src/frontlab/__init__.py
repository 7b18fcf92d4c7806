"""frontlab: numerical laboratory for forced-speed reaction-diffusion fronts."""

from .analysis import (
    ConcentrationResult,
    DecayFit,
    SymmetryReport,
    ThresholdProblem,
    concentration_sweep,
    decay_uniformity,
    fit_decay,
    mass_series,
    predicted_exponents,
    symmetry_report,
    tail_bound_check,
    threshold_search,
)
from .domain import BoundaryKind, EndsKind, Field, Grid, build_grid, norm, tail_slice
from .eigen import (
    EigenResult,
    assemble,
    critical_speed,
    cross_section_eigen,
    drift_eigen,
    principal_eigen,
    truncation_limit,
)
from .evolve import Outcome, SimState, Trajectory, classify, pulsating_front, run, step_imex
from .front import (
    FrontSolution,
    dirichlet_front,
    newton_front,
    solve_front,
    subsolution_seed,
    uniqueness_probe,
)
from .periodic import FloquetResult, PeriodicSpec, floquet_eigen, monodromy_map, truncated_floquet_sweep
from .reaction import (
    GrowthProfile,
    Reaction,
    make_compact_favorable,
    make_illustration,
    make_logistic,
    make_penalized,
    make_time_periodic,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryKind", "EndsKind", "Field", "Grid", "build_grid", "norm", "tail_slice",
    "GrowthProfile", "Reaction", "make_illustration", "make_compact_favorable",
    "make_penalized", "make_time_periodic", "make_logistic",
    "EigenResult", "assemble", "principal_eigen", "cross_section_eigen", "drift_eigen",
    "truncation_limit", "critical_speed",
    "PeriodicSpec", "FloquetResult", "monodromy_map", "floquet_eigen", "truncated_floquet_sweep",
    "SimState", "Trajectory", "Outcome", "step_imex", "run", "classify", "pulsating_front",
    "FrontSolution", "subsolution_seed", "newton_front", "solve_front", "uniqueness_probe",
    "dirichlet_front",
    "DecayFit", "SymmetryReport", "ThresholdProblem", "ConcentrationResult",
    "fit_decay", "decay_uniformity", "predicted_exponents", "symmetry_report",
    "tail_bound_check", "threshold_search", "concentration_sweep", "mass_series",
]
