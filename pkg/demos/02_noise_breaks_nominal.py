"""Show that the nominal controller is fragile under process noise.

The nominal barrier controller rides trajectories asymptotically onto the
threshold, leaving zero margin.  Injecting unbounded unit-variance noise
into the infected channel then produces threshold crossings on essentially
every seed, which is the motivation for the robust compensation terms.

Run:  python demos/02_noise_breaks_nominal.py
"""

import numpy as np

from epibarrier import Scenario, simulate
from epibarrier.scenarios import build

seeds = range(20)
violating = 0
worst = 0.0
for seed in seeds:
    model, config, _ = build(Scenario("nominal-noise").config(), seed=seed)
    _, metrics = simulate(model, config)
    if metrics.violations > 0:
        violating += 1
    worst = max(worst, float((metrics.x_max - model.x_bar).max()))

print(f"unbounded gaussian noise, {len(list(seeds))} seeds:")
print(f"  seeds with at least one threshold crossing: {violating}/{len(list(seeds))}")
print(f"  worst exceedance above threshold:           {worst:.4f}")
print()
print("same controller without noise:")
model, config, _ = build(Scenario("nominal").config())
_, metrics = simulate(model, config)
print(f"  violations: {metrics.violations}, "
      f"closest margin to threshold: {metrics.min_margin.min():.5f}")
