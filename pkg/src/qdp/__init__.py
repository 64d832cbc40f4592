"""Adaptive monitored qudit circuits with an absorbing state.

Prime-qudit stabilizer engine with flag-based feedback, exact classical
directed-percolation reductions, effective-tensor-network min-cut analysis,
and finite-size-scaling fits.
"""

from .circuit import (FlagField, SpacetimeRecord, TrajectoryRecord,
                      brickwork_step, run_trajectory)
from .config import ConfigError, ExperimentConfig, parse_config, validate_config
from .dp import (BondRow, MixedFlagRow, PairOutputDistribution, PTILDE_C,
                 appendix_a_step, dp_step, haar_pair_distribution,
                 haar_pc_estimate, run_appendix_a, run_dp,
                 standard_pair_distribution)
from .etn import CutResult, EtnGraph, build_etn, min_cut, red_bonds
from .gates import CliffordGate, sample_two_qudit_clifford
from .pauli import PauliWord
from .rng import Stream, trajectory_seed
from .runner import RunManifest, run_experiment
from .scaling import (Curve, DP_EXPONENTS, ExponentSet, ScalingDataset,
                      collapse_quality, crossover_rescale, fit_conformal,
                      fit_power_law, fit_steady_state, rescale_dp,
                      rescale_entropy_dp)
from .tableau import (StabilizerTableau, apply_gate, inactive_probability,
                      init_state, measure_z, reset_site, subsystem_entropy)

__version__ = "0.1.0"

__all__ = [
    "BondRow", "CliffordGate", "ConfigError", "CutResult", "Curve",
    "DP_EXPONENTS", "EtnGraph", "ExperimentConfig", "ExponentSet",
    "FlagField", "MixedFlagRow", "PTILDE_C", "PairOutputDistribution",
    "PauliWord", "RunManifest", "ScalingDataset", "SpacetimeRecord",
    "StabilizerTableau", "Stream", "TrajectoryRecord", "appendix_a_step",
    "apply_gate", "brickwork_step", "build_etn", "collapse_quality",
    "crossover_rescale", "dp_step", "fit_conformal", "fit_power_law",
    "fit_steady_state", "haar_pair_distribution", "haar_pc_estimate",
    "inactive_probability", "init_state", "measure_z", "min_cut",
    "parse_config", "red_bonds", "rescale_dp", "rescale_entropy_dp",
    "reset_site", "run_appendix_a", "run_dp", "run_experiment", "run_trajectory",
    "sample_two_qudit_clifford", "standard_pair_distribution",
    "subsystem_entropy", "trajectory_seed", "validate_config",
]
