"""Saturation CSMA/CA performance model for secondary networks with
imperfect multi-channel spectrum sensing: exact joint-chain analysis,
closed forms with their fixed-point coupling, and a validating
slot-level Monte Carlo simulator."""

from .analytic import (OperatingPoint, bianchi_tau, collision_probability,
                       cross_layer_tau, solve_fixed_point, sweep)
from .chain import (ChainState, StateLayout, StationaryDistribution,
                    TransitionMatrix, build_transition_matrix, enumerate_states,
                    stationary_distribution, transmission_probability_full)
from .errors import CapacityError, ParameterError, SolverError
from .params import ModelParams
from .sensing import (false_alarm_from_detection, idle_availability, inverse_q,
                      perceived_busy_probability, q_function, spse_stationary,
                      spse_transition_matrix)
from .simulate import SimConfig, SimStats, run_simulation, validate

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "OperatingPoint", "SimConfig", "SimStats",
    "ChainState", "StateLayout", "TransitionMatrix", "StationaryDistribution",
    "ParameterError", "SolverError", "CapacityError",
    "q_function", "inverse_q", "false_alarm_from_detection",
    "perceived_busy_probability", "spse_transition_matrix", "spse_stationary",
    "idle_availability",
    "enumerate_states", "build_transition_matrix", "stationary_distribution",
    "transmission_probability_full",
    "bianchi_tau", "cross_layer_tau", "collision_probability",
    "solve_fixed_point", "sweep",
    "run_simulation", "validate",
    "__version__",
]
