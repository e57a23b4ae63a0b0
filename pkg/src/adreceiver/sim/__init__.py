"""Particle-based Monte Carlo simulation of the adsorbing receiver."""

from .config import Molecule, SimConfig, Status, StepCounters, TrialResult
from .ensemble import EnsembleResult, run_ensemble, run_trial, wilson_interval
from .geometry import (
    adsorption_probability,
    desorption_displacement,
    desorption_probability,
    place_after_desorption,
    reflect,
    segment_sphere_intersection,
)
from .reference import SimState, run_trial_reference

__all__ = [
    "Molecule", "SimConfig", "Status", "StepCounters", "TrialResult",
    "EnsembleResult", "run_ensemble", "run_trial", "wilson_interval",
    "adsorption_probability", "desorption_probability", "desorption_displacement",
    "place_after_desorption", "reflect", "segment_sphere_intersection",
    "SimState", "run_trial_reference",
]
