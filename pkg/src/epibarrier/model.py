"""Networked SIR dynamics in control-affine form.

Each node i of the network carries an infected fraction x_i and a recovered
fraction r_i; the susceptible fraction s_i = 1 - x_i - r_i is always derived,
never stored, so the per-node simplex constraint is structural.  The coupled
dynamics are

    dx_i/dt = -(gamma_i + u_i) x_i + s_i * sum_j beta_ij x_j
    dr_i/dt =  (gamma_i + u_i) x_i

which splits into a drift term f_i (the u = 0 part) and a control direction
g_i(x_i) = (-x_i, +x_i).  The control u_i models intervention effort that
boosts the effective healing rate at node i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class NetworkModel:
    """Static parameters of a networked SIR epidemic.

    Attributes
    ----------
    n : int
        Number of nodes.
    beta : (n, n) array
        Infection rates; beta[i, j] is the rate from node j to node i and
        beta[i, i] is the node's internal rate.  All entries nonnegative.
    gamma : (n,) array
        Recovery rates, strictly positive.
    x_bar : (n,) array
        Per-node infection thresholds in (0, 1].
    u_bar : (n,) array
        Per-node control caps, nonnegative.
    """

    n: int
    beta: np.ndarray
    gamma: np.ndarray
    x_bar: np.ndarray
    u_bar: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.n, self.n):
            raise ValueError(f"beta must have shape ({self.n}, {self.n}), got {beta.shape}")
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite")
        if np.any(beta < 0):
            raise ValueError("beta entries must be nonnegative")
        gamma = _as_vector(self.gamma, self.n, "gamma")
        if np.any(gamma <= 0):
            raise ValueError("gamma entries must be positive")
        x_bar = _as_vector(self.x_bar, self.n, "x_bar")
        if np.any(x_bar <= 0) or np.any(x_bar > 1):
            raise ValueError("x_bar entries must lie in (0, 1]")
        u_bar = _as_vector(self.u_bar, self.n, "u_bar")
        if np.any(u_bar < 0):
            raise ValueError("u_bar entries must be nonnegative")
        for name, arr in (("beta", beta), ("gamma", gamma), ("x_bar", x_bar), ("u_bar", u_bar)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class NetworkState:
    """Per-node (x_i, r_i) at one instant; s_i = 1 - x_i - r_i is derived."""

    x: np.ndarray
    r: np.ndarray
    # tolerance for x + r <= 1 checks, absorbs float dust from projection
    _SUM_TOL = 1e-12

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if x.ndim != 1 or x.shape != r.shape:
            raise ValueError(f"x and r must be 1-d with equal shapes, got {x.shape} and {r.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(r))):
            raise ValueError("state must be finite")
        if np.any(x < 0) or np.any(r < 0):
            raise ValueError("fractions must be nonnegative")
        if np.any(x + r > 1 + self._SUM_TOL):
            raise ValueError("x_i + r_i must not exceed 1")
        x.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def s(self) -> np.ndarray:
        """Susceptible fractions 1 - x - r."""
        return 1.0 - self.x - self.r


def _check_dims(model: NetworkModel, state: NetworkState) -> None:
    if state.n != model.n:
        raise ValueError(f"state has {state.n} nodes, model has {model.n}")


def drift(model: NetworkModel, state: NetworkState) -> tuple[np.ndarray, np.ndarray]:
    """Uncontrolled derivative (dx, dr), the f part of the control-affine split.

    dx_i = -gamma_i x_i + (1 - x_i - r_i) * sum_j beta_ij x_j
    dr_i =  gamma_i x_i
    """
    _check_dims(model, state)
    pressure = state.s * (model.beta @ state.x)
    dx = -model.gamma * state.x + pressure
    dr = model.gamma * state.x
    return dx, dr


def control_effect(model: NetworkModel, state: NetworkState, u) -> tuple[np.ndarray, np.ndarray]:
    """Contribution of the control input, g_i(x_i) * u_i = (-x_i u_i, +x_i u_i).

    The full derivative is ``drift(model, state) + control_effect(model, state, u)``.
    Inputs outside [0, u_bar] are rejected.
    """
    _check_dims(model, state)
    u = _as_vector(u, model.n, "u")
    if np.any(u < -1e-12) or np.any(u > model.u_bar + 1e-12):
        raise ValueError("u must lie in [0, u_bar] componentwise")
    flow = state.x * u
    return -flow, flow


def safety_value(model: NetworkModel, state: NetworkState) -> np.ndarray:
    """Barrier values h_i = x_bar_i - x_i; node i is safe while h_i >= 0."""
    _check_dims(model, state)
    return model.x_bar - state.x
