"""Numerical toolkit for heat semigroups of inverse-square Schrodinger
operators: harmonic profiles, Lorentz norms, weighted mode evolution, and
decay-rate verification."""

__version__ = "0.1.0"

from .decay import (DecayReport, ExperimentConfig, corollary_rhs, fit_decay,
                    gaussian_bound_report, measure_norm, run_decay_experiment,
                    theorem_rhs)
from .heat import ModeSolver, estimate_kernel_constant, kernel_envelope
from .lorentz import (RadialField, StepFunction, decreasing_rearrangement,
                      lorentz_norm)
from .potential import (PotentialSpec, make_pure_hardy, make_table,
                        make_two_scale, rayleigh_check, validate_condition_V)
from .profile import HarmonicProfile, solve_profile
from .spectrum import (ModeExponents, admissible, critical_lambda,
                       indicial_exponents, mode_exponents)

__all__ = [
    "DecayReport", "ExperimentConfig", "HarmonicProfile", "ModeExponents",
    "ModeSolver", "PotentialSpec", "RadialField", "StepFunction",
    "admissible", "corollary_rhs", "critical_lambda",
    "decreasing_rearrangement", "estimate_kernel_constant", "fit_decay",
    "gaussian_bound_report", "indicial_exponents", "kernel_envelope",
    "lorentz_norm", "make_pure_hardy", "make_table", "make_two_scale",
    "measure_norm", "mode_exponents", "rayleigh_check",
    "run_decay_experiment", "solve_profile", "theorem_rhs",
    "validate_condition_V",
]
