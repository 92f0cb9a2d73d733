"""Controllability analysis and selective-excitation pulse shaping for quantum-dot ensembles."""

from .dots import LambdaDot, Region, TwoLevelDot, lambda_ensemble, mixed_polarization_control, region_controls, two_level_ensemble
from .lie import ControllabilityClass, Label, LieBasis, classify, closure, invariant_form
from .multipartite import (
    BlockSystem,
    SimultaneousVerdict,
    a_matrix_rank,
    assess,
    individual_check,
    simultaneous_mixed_check,
    simultaneous_pure_check,
    trace_split,
)
from .propagator import PulseSchedule, Trajectory, gaussian_pi_pulse, observable_expectation, propagate
from .pulse_opt import ObjectiveSpec, OptimizationRun, OptimizerOptions, gradient, optimize, selective_objective

__version__ = "0.1.0"
