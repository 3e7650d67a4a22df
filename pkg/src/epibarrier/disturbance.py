"""Per-step disturbance generation for the infected-fraction channel.

The disturbance models the systematic error left out of the nominal dynamics,
dominated in practice by under-reported infections, so the bounded kinds draw
a Gaussian and keep its nonnegative part up to the bound:

    mu = clip(eps, 0, bound),            eps ~ Normal(0, variance)

optionally amplified by 1 / sqrt(x + delta) for the low-prevalence kind.  The
unbounded kind returns the raw two-sided Gaussian and exists to show how an
uncompensated controller fails; no safety guarantee covers it.

Every sample of a bounded kind satisfies |mu| <= sigma at the same infection
level for the matching compensation spec, which is exactly the sufficiency
precondition of the robust controller.

Streams are reproducible: a model carries its seed, generators are PCG64
(numpy's default), and values are consumed in step-major order, one value per
node per step, so block draws and scalar draws yield identical streams.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .robust import CompensationKind, CompensationSpec

RNG_ALGORITHM = "pcg64"


class DisturbanceKind(enum.Enum):
    NONE = "none"
    UNBOUNDED_GAUSSIAN = "gaussian"
    INDEPENDENT_BOUNDED = "independent"
    LOW_PREVALENCE_BOUNDED = "lowprev"


@dataclass(frozen=True)
class DisturbanceModel:
    """Noise structure, parameters, and seed for one disturbance stream."""

    kind: DisturbanceKind
    variance: float = 1.0
    bound: float = 0.0
    delta: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")
        if self.kind is DisturbanceKind.LOW_PREVALENCE_BOUNDED and not self.delta > 0:
            raise ValueError("delta must be positive for the low-prevalence kind")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def make_rng(model: DisturbanceModel) -> np.random.Generator:
    """Fresh generator for this model's stream."""
    return np.random.default_rng(model.seed)


def transform(model: DisturbanceModel, eps, x):
    """Map standard-normal draws ``eps`` to disturbance values at levels ``x``."""
    eps = np.asarray(eps, dtype=float)
    x = np.asarray(x, dtype=float)
    if model.kind is DisturbanceKind.NONE:
        out = np.zeros(np.broadcast_shapes(eps.shape, x.shape))
    elif model.kind is DisturbanceKind.UNBOUNDED_GAUSSIAN:
        out = model.std * eps
    elif model.kind is DisturbanceKind.INDEPENDENT_BOUNDED:
        out = np.clip(model.std * eps, 0.0, model.bound)
    else:
        out = np.clip(model.std * eps, 0.0, model.bound) / np.sqrt(x + model.delta)
    return float(out) if out.ndim == 0 else out


def sample(model: DisturbanceModel, x, rng: np.random.Generator):
    """Draw the disturbance for one step at infection level(s) ``x``.

    ``x`` may be a scalar (one node) or an array (one value drawn per entry).
    The generator advances by one standard normal per entry except for kind
    NONE, which draws nothing.
    """
    x = np.asarray(x, dtype=float)
    if model.kind is DisturbanceKind.NONE:
        zeros = np.zeros(x.shape)
        return float(zeros) if zeros.ndim == 0 else zeros
    eps = rng.standard_normal(x.shape)
    return transform(model, eps, x)


def matching_compensation(model: DisturbanceModel) -> CompensationSpec:
    """Compensation spec whose sigma dominates every sample of this model."""
    if model.kind is DisturbanceKind.INDEPENDENT_BOUNDED:
        return CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=model.bound)
    if model.kind is DisturbanceKind.LOW_PREVALENCE_BOUNDED:
        return CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=model.bound, delta=model.delta)
    raise ValueError(f"no compensation matches disturbance kind {model.kind.value}")
