"""Safety-critical control of networked SIR epidemics.

Barrier-function controllers that keep per-node infection levels below
configured thresholds, robust variants that survive bounded disturbances,
worst-case feasibility analysis, and a reproducible closed-loop simulator.
"""

from .controller import (ClassKGain, FeasibilityReport, feasibility_analysis,
                         nominal_control, required_control)
from .disturbance import (DisturbanceKind, DisturbanceModel, make_rng,
                          matching_compensation, sample)
from .model import NetworkModel, NetworkState, control_effect, drift, safety_value
from .robust import (CompensationKind, CompensationSpec, compensation_sufficient,
                     robust_control, robust_feasibility, sigma, sigma_max)
from .scenarios import ConfigError, Scenario, default_config
from .simulator import (ControlPolicy, PolicyKind, RunMetrics, SimConfig,
                        SimulationError, Trajectory, compute_metrics, simulate, step)

__all__ = [
    "ClassKGain", "CompensationKind", "CompensationSpec", "ConfigError",
    "ControlPolicy", "DisturbanceKind", "DisturbanceModel", "FeasibilityReport",
    "NetworkModel", "NetworkState", "PolicyKind", "RunMetrics", "Scenario",
    "SimConfig", "SimulationError", "Trajectory", "compensation_sufficient",
    "compute_metrics", "control_effect", "default_config", "drift",
    "feasibility_analysis", "make_rng", "matching_compensation",
    "nominal_control", "required_control", "robust_control",
    "robust_feasibility", "safety_value", "sample", "sigma", "sigma_max",
    "simulate", "step",
]

__version__ = "0.1.0"
