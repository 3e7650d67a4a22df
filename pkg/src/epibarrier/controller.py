"""Closed-form barrier controller and worst-case feasibility analysis.

The safety condition dh_i/dt >= -alpha_i(h_i) with h_i = x_bar_i - x_i is
affine in the local input, so the least admissible control has the closed
form

    u_i = min(u_bar_i, max(0, [s_i * sum_j beta_ij x_j - gamma_i x_i
                                - alpha_i(x_bar_i - x_i)] / x_i))

with u_i = 0 at x_i = 0, where the control direction vanishes and the state
is strictly inside the safe set anyway.

Worst-case feasibility asks whether the cap u_bar_i suffices when every
neighbor sits at its own threshold and the recovered fraction is at its
initial value; a node whose requirement exceeds its cap under that worst
case is called vulnerable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkModel, NetworkState, _as_vector, _check_dims


@dataclass(frozen=True)
class ClassKGain:
    """Linear extended class-K function alpha_i(h) = kappa_i * h.

    ``kappa`` is a positive scalar applied to every node, or a length-n
    vector of per-node slopes.
    """

    kappa: float | np.ndarray = 1.0

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float)
        if kappa.ndim > 1:
            raise ValueError("kappa must be a scalar or a 1-d vector")
        if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
            raise ValueError("kappa must be positive")
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)

    def per_node(self, n: int) -> np.ndarray:
        """Slope vector broadcast to n nodes."""
        return _as_vector(self.kappa, n, "kappa")

    def alpha(self, h, n: int | None = None):
        """Evaluate alpha_i(h) elementwise."""
        h = np.asarray(h, dtype=float)
        kappa = self.kappa if n is None else self.per_node(n)
        return kappa * h


@dataclass(frozen=True)
class FeasibilityReport:
    """Worst-case required effort per node and the resulting vulnerability flags."""

    required_effort: np.ndarray
    vulnerable: np.ndarray

    def __post_init__(self):
        req = np.asarray(self.required_effort, dtype=float)
        vul = np.asarray(self.vulnerable, dtype=bool)
        if req.shape != vul.shape or req.ndim != 1:
            raise ValueError("required_effort and vulnerable must be 1-d with equal shapes")
        req.setflags(write=False)
        vul.setflags(write=False)
        object.__setattr__(self, "required_effort", req)
        object.__setattr__(self, "vulnerable", vul)

    @property
    def any_vulnerable(self) -> bool:
        return bool(self.vulnerable.any())


def required_control(model: NetworkModel, state: NetworkState, gain: ClassKGain, i: int) -> float:
    """Unclipped minimum u_i satisfying the barrier condition at this state.

    Negative values mean no control is needed.  Raises if x_i = 0, where the
    requirement is undefined; callers that need a total function should use
    :func:`nominal_control`.
    """
    _check_dims(model, state)
    if not 0 <= i < model.n:
        raise IndexError(f"node index {i} out of range for n={model.n}")
    xi = state.x[i]
    if xi == 0.0:
        raise ValueError("required_control is undefined at x_i = 0; nominal_control handles this state")
    kappa = gain.per_node(model.n)[i]
    pressure = state.s[i] * float(model.beta[i] @ state.x)
    num = pressure - model.gamma[i] * xi - kappa * (model.x_bar[i] - xi)
    return float(num / xi)


def _control_terms(model: NetworkModel, state: NetworkState, gain: ClassKGain,
                   sigma: np.ndarray | float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Clipped control vector and per-node saturation flags.

    ``sigma`` is an optional compensation margin added to the barrier
    requirement (zero for the nominal controller).
    """
    _check_dims(model, state)
    kappa = gain.per_node(model.n)
    x = state.x
    pressure = state.s * (model.beta @ x)
    num = pressure - model.gamma * x - kappa * (model.x_bar - x) + sigma
    positive = x > 0.0
    raw = np.divide(num, x, out=np.full(model.n, -np.inf), where=positive)
    u = np.minimum(model.u_bar, np.maximum(0.0, raw))
    u[~positive] = 0.0
    saturated = positive & (raw > model.u_bar)
    return u, saturated


def nominal_control(model: NetworkModel, state: NetworkState, gain: ClassKGain) -> np.ndarray:
    """Pointwise-minimal admissible control, u_i = min(u_bar_i, max(0, required_i)).

    Total on valid states: u_i = 0 wherever x_i = 0.
    """
    u, _ = _control_terms(model, state, gain)
    return u


def feasibility_analysis(model: NetworkModel, r0=None) -> FeasibilityReport:
    """Worst-case effort bound per node and vulnerability flags.

    The bound evaluates the barrier requirement at the node's own threshold
    with every neighbor at its threshold:

        (1 - x_bar_i - r0_i) * beta_ii
          + (1 - x_bar_i - r0_i) * sum_{j != i} beta_ij * x_bar_j / x_bar_i
          - gamma_i

    ``r0`` is the initial recovered fraction, taken as zero when unknown
    (everyone not infected is assumed susceptible).  Node i is vulnerable
    when the bound exceeds u_bar_i.
    """
    if r0 is None:
        r0 = np.zeros(model.n)
    r0 = _as_vector(r0, model.n, "r0")
    if np.any(r0 < 0) or np.any(r0 > 1 - model.x_bar):
        raise ValueError("r0 must lie in [0, 1 - x_bar] componentwise")
    slack = 1.0 - model.x_bar - r0
    cross = model.beta @ model.x_bar - np.diag(model.beta) * model.x_bar
    required = slack * np.diag(model.beta) + slack * cross / model.x_bar - model.gamma
    return FeasibilityReport(required_effort=required, vulnerable=required > model.u_bar)
