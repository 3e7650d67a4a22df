"""Robust barrier control: compensation terms and tightened feasibility bounds.

A bounded disturbance mu_i entering the infected-fraction channel weakens the
barrier derivative by exactly -mu_i, so safety survives any admissible
realization when a compensation term sigma_i with sigma_i - mu_i >= 0 is
subtracted from the barrier budget.  Two compensation models are provided:

* independent: sigma_i = mu_bar, a constant worst-case offset;
* low-prevalence amplified: sigma_i(x_i) = d_bar / sqrt(x_i + delta),
  matching surveillance noise whose relative size explodes as case counts
  approach zero.

The robust controller is the nominal closed form with sigma_i(x_i) added to
the requirement; the robust feasibility bound adds max sigma / x_bar_i to the
worst-case effort.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .controller import ClassKGain, FeasibilityReport, _control_terms, feasibility_analysis
from .model import NetworkModel, NetworkState


class CompensationKind(enum.Enum):
    INDEPENDENT = "independent"
    LOW_PREVALENCE = "low-prevalence"


@dataclass(frozen=True)
class CompensationSpec:
    """Parameters of a compensation term sigma_i.

    ``mu_bar`` is the uniform disturbance bound used by the independent kind;
    ``d_bar`` and ``delta`` parameterize the low-prevalence kind
    d_bar / sqrt(x + delta).
    """

    kind: CompensationKind
    mu_bar: float = 0.0
    d_bar: float = 0.0
    delta: float = 0.01

    def __post_init__(self):
        if self.mu_bar < 0 or self.d_bar < 0:
            raise ValueError("compensation bounds must be nonnegative")
        if self.kind is CompensationKind.LOW_PREVALENCE and not self.delta > 0:
            raise ValueError("delta must be positive for the low-prevalence kind")


def sigma(spec: CompensationSpec, x):
    """Compensation sigma_i at infection level x (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if spec.kind is CompensationKind.INDEPENDENT:
        out = np.broadcast_to(np.float64(spec.mu_bar), x.shape).copy()
    else:
        out = spec.d_bar / np.sqrt(x + spec.delta)
    return float(out) if out.ndim == 0 else out


def sigma_max(spec: CompensationSpec) -> float:
    """Largest sigma over the safe range x in [0, x_bar].

    The independent term is constant; the low-prevalence term peaks at x = 0.
    """
    if spec.kind is CompensationKind.INDEPENDENT:
        return float(spec.mu_bar)
    return float(spec.d_bar / np.sqrt(spec.delta))


def robust_control(model: NetworkModel, state: NetworkState, gain: ClassKGain,
                   spec: CompensationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Least admissible robust control and per-node saturation flags.

    u_i = min(u_bar_i, max(0, [s_i * sum_j beta_ij x_j - gamma_i x_i
                               - alpha_i(h_i) + sigma_i(x_i)] / x_i)),
    with u_i = 0 at x_i = 0.  A True flag marks states where the unclipped
    requirement exceeds u_bar_i: the robust admissible set may be empty
    there, and the cap is applied so that a simulation can continue and
    measure the outcome.
    """
    return _control_terms(model, state, gain, sigma=sigma(spec, state.x))


def robust_feasibility(model: NetworkModel, r0, spec: CompensationSpec) -> FeasibilityReport:
    """Worst-case effort bound with the compensation margin included.

    Adds max_{x in [0, x_bar]} sigma_i(x) / x_bar_i to the nominal bound.
    """
    base = feasibility_analysis(model, r0)
    required = base.required_effort + sigma_max(spec) / model.x_bar
    return FeasibilityReport(required_effort=required, vulnerable=required > model.u_bar)


def compensation_sufficient(spec: CompensationSpec, mu_sample: float, x_i: float) -> bool:
    """Whether sigma_i(x_i) dominates one disturbance realization.

    This is the pointwise sufficiency condition sigma_i - mu_i >= 0 under
    which the robust barrier condition implies safety.
    """
    return bool(sigma(spec, x_i) - mu_sample >= 0.0)
