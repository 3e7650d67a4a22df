"""Shared fixtures: the benchmark network, random instances, warm kernel."""

from __future__ import annotations

import numpy as np
import pytest

from epibarrier import (ClassKGain, NetworkModel, NetworkState, Scenario,
                        default_config, simulate)
from epibarrier.scenarios import build


@pytest.fixture(scope="session")
def benchmark_model() -> NetworkModel:
    n = 3
    return NetworkModel(
        n=n,
        beta=0.55 * np.eye(n) + 0.45 * (np.ones((n, n)) - np.eye(n)),
        gamma=np.full(n, 0.3),
        x_bar=np.array([0.45, 0.35, 0.40]),
        u_bar=np.array([0.55, 0.77, 0.41]),
    )


@pytest.fixture(scope="session", autouse=True)
def _warm_kernel():
    # trigger the one-time numba compile outside any timed test
    cfg = default_config("nominal")
    cfg["T"] = "0.001"
    model, sim, _ = build(cfg)
    simulate(model, sim)


def build_scenario(name: str, seed: int = 0, **overrides):
    """(model, sim config) for a named scenario with string overrides."""
    scn = Scenario(name, {k: str(v) for k, v in overrides.items()})
    model, sim, _ = build(scn.config(), seed=seed)
    return model, sim


def random_model(rng: np.random.Generator, n: int | None = None) -> NetworkModel:
    if n is None:
        n = int(rng.integers(1, 5))
    beta = rng.uniform(0.0, 1.2, size=(n, n))
    return NetworkModel(
        n=n,
        beta=beta,
        gamma=rng.uniform(0.1, 1.0, size=n),
        x_bar=rng.uniform(0.1, 0.9, size=n),
        u_bar=rng.uniform(0.0, 1.5, size=n),
    )


def random_state(rng: np.random.Generator, n: int, x_hi=1.0) -> NetworkState:
    x = rng.uniform(0.0, x_hi, size=n)
    r = rng.uniform(0.0, 1.0, size=n) * (1.0 - x)
    return NetworkState(x, r)


def random_gain(rng: np.random.Generator) -> ClassKGain:
    return ClassKGain(float(rng.uniform(0.2, 6.0)))
