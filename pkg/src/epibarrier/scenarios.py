"""Benchmark scenarios and the flat key=value config grammar.

The benchmark network has three fully connected nodes:

    beta  = 0.55 on the diagonal, 0.45 off it
    gamma = 0.3 everywhere
    x_bar = (0.45, 0.35, 0.40)      infection thresholds
    u_bar = (0.55, 0.77, 0.41)      control caps
    x0    = (0.1, 0, 0), r0 = 0     outbreak seeded at node 1

integrated with dt = 1e-4 over t in [0, 25].  Four scenarios cover the
controller/noise grid:

    nominal           barrier controller, no noise
    nominal-noise     barrier controller, unbounded unit-variance noise
    rcbf-independent  constant compensation vs bounded noise (bound 0.15)
    rcbf-lowprev      amplified compensation vs amplified bounded noise

The scenario presets use a class-K slope of 4.0, calibrated so the closed
loop reproduces the benchmark's reference peak-infection, margin, and effort
statistics; the library default for a bare ClassKGain remains 1.0.

Config files are flat ``key = value`` lines (``#`` comments allowed).
Vectors are comma-separated, matrices row-major comma-separated, scalars
broadcast.  ``seeds`` accepts ``a..b`` (inclusive) or a comma list.  A file
written by :func:`render_config` parses back to an identical run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controller import ClassKGain
from .disturbance import DisturbanceKind, DisturbanceModel
from .model import NetworkModel
from .robust import CompensationKind, CompensationSpec
from .simulator import ControlPolicy, PolicyKind, SimConfig

SCENARIO_NAMES = ("nominal", "nominal-noise", "rcbf-independent", "rcbf-lowprev")

_SCENARIO_POLICY = {
    "nominal": ("nominal", "none"),
    "nominal-noise": ("nominal", "gaussian"),
    "rcbf-independent": ("rcbf-independent", "independent"),
    "rcbf-lowprev": ("rcbf-lowprev", "lowprev"),
}

_KEYS = ("scenario", "n", "beta", "gamma", "x_bar", "u_bar", "x0", "r0",
         "dt", "T", "record_stride", "kappa", "policy", "noise",
         "variance", "bound", "delta", "seeds")


class ConfigError(ValueError):
    """Raised for unknown keys or malformed values."""


def default_config(scenario: str) -> dict[str, str]:
    """Canonical key=value map for a named scenario."""
    if scenario not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIO_NAMES)}")
    policy, noise = _SCENARIO_POLICY[scenario]
    return {
        "scenario": scenario,
        "n": "3",
        "beta": "0.55,0.45,0.45,0.45,0.55,0.45,0.45,0.45,0.55",
        "gamma": "0.3",
        "x_bar": "0.45,0.35,0.4",
        "u_bar": "0.55,0.77,0.41",
        "x0": "0.1,0,0",
        "r0": "0",
        "dt": "0.0001",
        "T": "25",
        "record_stride": "100",
        "kappa": "4.0",
        "policy": policy,
        "noise": noise,
        "variance": "1.0",
        "bound": "0.15",
        "delta": "0.01",
        "seeds": "0",
    }


def apply_overrides(config: dict[str, str], overrides: dict[str, str]) -> dict[str, str]:
    out = dict(config)
    for key, value in overrides.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = str(value)
    return out


@dataclass(frozen=True)
class Scenario:
    """A named preset plus overrides and the seed batch to run."""

    name: str
    overrides: dict[str, str] = field(default_factory=dict)
    seeds: tuple[int, ...] | None = None

    def config(self) -> dict[str, str]:
        cfg = apply_overrides(default_config(self.name), self.overrides)
        if self.seeds is not None:
            cfg["seeds"] = ",".join(str(s) for s in self.seeds)
        return cfg


def _parse_floats(value: str) -> list[float]:
    try:
        return [float(part) for part in value.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"malformed numeric list {value!r}") from exc


def _vector(value: str, n: int, key: str) -> np.ndarray:
    vals = _parse_floats(value)
    if len(vals) == 1:
        return np.full(n, vals[0])
    if len(vals) != n:
        raise ConfigError(f"{key} needs 1 or {n} values, got {len(vals)}")
    return np.asarray(vals)


def _matrix(value: str, n: int) -> np.ndarray:
    vals = _parse_floats(value)
    if len(vals) == 1:
        return np.full((n, n), vals[0])
    if len(vals) != n * n:
        raise ConfigError(f"beta needs 1 or {n * n} values, got {len(vals)}")
    return np.asarray(vals).reshape(n, n)


def parse_seeds(value: str) -> tuple[int, ...]:
    value = value.strip()
    try:
        if ".." in value:
            lo, hi = value.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty seed range {value!r}")
            seeds = tuple(range(lo, hi + 1))
        else:
            seeds = tuple(int(part) for part in value.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"malformed seeds {value!r}") from exc
    if any(s < 0 for s in seeds):
        raise ConfigError("seeds must be nonnegative")
    return seeds


def build(config: dict[str, str], seed: int | None = None
          ) -> tuple[NetworkModel, SimConfig, tuple[int, ...]]:
    """Materialize (model, sim config, seeds) from a key=value map.

    ``seed`` overrides the config's seed list with a single stream, which is
    how per-seed runs inside a batch are constructed.
    """
    unknown = set(config) - set(_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        n = int(config["n"])
    except ValueError as exc:
        raise ConfigError(f"malformed n {config['n']!r}") from exc
    try:
        model = NetworkModel(
            n=n,
            beta=_matrix(config["beta"], n),
            gamma=_vector(config["gamma"], n, "gamma"),
            x_bar=_vector(config["x_bar"], n, "x_bar"),
            u_bar=_vector(config["u_bar"], n, "u_bar"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    seeds = parse_seeds(config["seeds"])
    if not seeds:
        raise ConfigError("seeds must name at least one stream")
    stream_seed = seeds[0] if seed is None else seed

    try:
        policy_kind = PolicyKind(config["policy"])
        noise_kind = DisturbanceKind(config["noise"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        variance = float(config["variance"])
        bound = float(config["bound"])
        delta = float(config["delta"])
        dt = float(config["dt"])
        t_final = float(config["T"])
        stride = int(config["record_stride"])
    except ValueError as exc:
        raise ConfigError(f"malformed numeric value: {exc}") from exc

    compensation = None
    if policy_kind is PolicyKind.RCBF_INDEPENDENT:
        compensation = CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=bound)
    elif policy_kind is PolicyKind.RCBF_LOW_PREVALENCE:
        compensation = CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=bound, delta=delta)

    try:
        policy = ControlPolicy(
            kind=policy_kind,
            gain=ClassKGain(_vector(config["kappa"], n, "kappa")),
            compensation=compensation,
        )
        disturbance = DisturbanceModel(
            kind=noise_kind, variance=variance, bound=bound, delta=delta, seed=stream_seed)
        sim = SimConfig(
            policy=policy,
            disturbance=disturbance,
            x0=_vector(config["x0"], n, "x0"),
            r0=_vector(config["r0"], n, "r0"),
            dt=dt,
            t_final=t_final,
            record_stride=stride,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return model, sim, seeds


def render_config(config: dict[str, str]) -> str:
    """Serialize a config map in canonical key order."""
    lines = [f"{key} = {config[key]}" for key in _KEYS if key in config]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        out[key] = value
    return out
