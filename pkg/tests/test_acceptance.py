"""Acceptance suite: one test per criterion, one printed verdict line each.

Criterion 4 asserts, among other things, that the independent-compensation
scenario drives u_2 exactly to its 0.77 cap on every seed.  That sub-check
is unattainable under this controller and disturbance semantics: the
unclipped node-2 requirement peaks near 0.65 along every reachable
trajectory whose x_2 peak stays inside the band the same criterion demands,
because by the time x_2 approaches its peak the recovered fraction has
grown enough to cut the susceptible pressure below what a 0.77 requirement
needs.  A smaller class-K slope for node 2 does force the saturation, but
only by suppressing x_2's peak out of the band.  The test asserts the
criterion as written and is expected to fail on exactly that sub-check.
"""

import time

import numpy as np
import pytest

from epibarrier import (ClassKGain, CompensationKind, CompensationSpec, NetworkModel,
                        feasibility_analysis, robust_feasibility, sigma, simulate)
from epibarrier.cli import main as cli_main
from epibarrier.disturbance import (DisturbanceKind, DisturbanceModel, make_rng, sample)
from epibarrier.scenarios import build
from epibarrier.simulator import ControlPolicy, PolicyKind, SimConfig

from conftest import build_scenario, random_model
from oracles import corollary_bound
from test_controller import make_nonvulnerable

REFERENCE_XMAX = {"rcbf-independent": np.array([0.426, 0.329, 0.396]),
                  "rcbf-lowprev": np.array([0.422, 0.319, 0.391])}
REFERENCE_MARGIN = {"rcbf-independent": 0.016, "rcbf-lowprev": 0.023}
REFERENCE_EFFORT = {"rcbf-independent": 3.311, "rcbf-lowprev": 4.858}
SEEDS = range(50)


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {number:2d} {verdict}: {name}"
    if detail:
        line += f" — {detail}"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def batches():
    """Metrics for 50 seeds of each stochastic scenario at full horizon."""
    out = {}
    for name in ("nominal-noise", "rcbf-independent", "rcbf-lowprev"):
        runs = []
        for seed in SEEDS:
            model, sim = build_scenario(name, seed=seed)
            _, metrics = simulate(model, sim)
            runs.append(metrics)
        out[name] = runs
    return out


def test_criterion_1_nominal_safety():
    model, sim = build_scenario("nominal", record_stride=1)  # full resolution
    start = time.perf_counter()
    traj, metrics = simulate(model, sim)
    elapsed = time.perf_counter() - start
    safe = bool(np.all(traj.x <= model.x_bar + 1e-3))
    admissible = bool(np.all(traj.u >= 0.0) and np.all(traj.u <= model.u_bar))
    fast = elapsed < 10.0
    report(1, "nominal deterministic safety",
           safe and admissible and fast,
           f"max exceedance {float((traj.x - model.x_bar).max()):+.2e}, "
           f"runtime {elapsed:.2f}s at dt=1e-4")


def test_criterion_2_nominal_fragile_under_noise(batches):
    violating = sum(m.violations > 0 for m in batches["nominal-noise"])
    report(2, "unbounded noise breaks the nominal controller",
           violating > len(list(SEEDS)) // 2,
           f"{violating}/50 seeds with violations")


def test_criterion_3_robust_safety(batches):
    counts = {name: sum(m.violations > 0 for m in batches[name])
              for name in ("rcbf-independent", "rcbf-lowprev")}
    report(3, "robust scenarios produce zero violations on all seeds",
           all(c == 0 for c in counts.values()),
           f"violating seeds: independent {counts['rcbf-independent']}/50, "
           f"low-prevalence {counts['rcbf-lowprev']}/50")


def test_criterion_4_peak_bands_and_saturation(batches):
    checks = []
    for name in ("rcbf-independent", "rcbf-lowprev"):
        runs = batches[name]
        mean_xmax = np.mean([m.x_max for m in runs], axis=0)
        dev = np.abs(mean_xmax - REFERENCE_XMAX[name])
        checks.append((f"{name} x_max mean within ±0.05 "
                       f"(dev {np.array2string(dev, precision=4)})",
                       bool(np.all(dev <= 0.05))))
        sat2 = all(m.u_max[1] == 0.77 for m in runs)
        sat3 = all(m.u_max[2] == 0.41 for m in runs)
        u2_lo = min(m.u_max[1] for m in runs)
        checks.append((f"{name} u_2 saturates at 0.770 every seed "
                       f"(min over seeds {u2_lo:.4f})", sat2))
        checks.append((f"{name} u_3 saturates at 0.410 every seed", sat3))
    detail = "; ".join(f"[{'ok' if ok else 'FAIL'}] {label}" for label, ok in checks)
    report(4, "reference peak-infection bands and cap saturation", all(ok for _, ok in checks),
           detail)


def test_criterion_5_aggregate_orderings(batches):
    ind = batches["rcbf-independent"]
    lp = batches["rcbf-lowprev"]
    margin_pairs = np.mean([l.avg_min_margin > i.avg_min_margin for l, i in zip(lp, ind)])
    effort_pairs = np.mean([l.integrated_control > i.integrated_control
                            for l, i in zip(lp, ind)])
    means = {
        "rcbf-independent": (np.mean([m.avg_min_margin for m in ind]),
                             np.mean([m.integrated_control for m in ind])),
        "rcbf-lowprev": (np.mean([m.avg_min_margin for m in lp]),
                         np.mean([m.integrated_control for m in lp])),
    }
    in_band = True
    for name, (margin, effort) in means.items():
        m_ref, e_ref = REFERENCE_MARGIN[name], REFERENCE_EFFORT[name]
        in_band &= 0.5 * m_ref <= margin <= 1.5 * m_ref
        in_band &= 0.5 * e_ref <= effort <= 1.5 * e_ref
    report(5, "aggregate margin/effort orderings and bands",
           margin_pairs >= 0.9 and effort_pairs >= 0.9 and in_band,
           f"lowprev>independent margin on {margin_pairs:.0%} of pairs, effort on "
           f"{effort_pairs:.0%}; means margin "
           f"{means['rcbf-independent'][0]:.4f}/{means['rcbf-lowprev'][0]:.4f}, effort "
           f"{means['rcbf-independent'][1]:.3f}/{means['rcbf-lowprev'][1]:.3f}")


def test_criterion_6_feasibility_oracle(benchmark_model):
    analysis = feasibility_analysis(benchmark_model)
    hand = np.array([corollary_bound(benchmark_model, np.zeros(3), i) for i in range(3)])
    frozen = np.array([0.415, 0.7678571428571429, 0.57])
    ok = (np.allclose(analysis.required_effort, hand, atol=1e-9)
          and np.allclose(analysis.required_effort, frozen, atol=1e-9)
          and np.array_equal(analysis.vulnerable, [False, False, True]))
    report(6, "worst-case feasibility matches independent evaluation",
           bool(ok),
           f"bounds {np.array2string(analysis.required_effort, precision=6)}, "
           f"vulnerable {analysis.vulnerable.tolist()}")


def _batched_drift_x(model, x, r):
    return -model.gamma * x + (1.0 - x - r) * (x @ model.beta.T)


def _grid_oracle_batch(model, x, r, kappa, spec, i, coarse=801, res=1e-5):
    """Honest grid search for the least admissible u at node i, vectorized.

    Returns (u_star, none_mask): u_star is the smallest grid value with a
    nonnegative barrier margin, scanned at ``res`` inside the bracketing
    coarse cell; none_mask marks states where no admissible input works.
    """
    m = x.shape[0]
    dxf = _batched_drift_x(model, x, r)[:, i]
    sig = sigma(spec, x[:, i]) if spec is not None else np.zeros(m)
    h = model.x_bar[i] - x[:, i]

    def margins(u_vals):
        # dh/dt = -(dx_f - x_i u); condition dh/dt >= -kappa h - sigma adj
        return (-(dxf[:, None] - x[:, i][:, None] * u_vals)
                + kappa[:, None] * h[:, None] - sig[:, None])

    grid = np.linspace(0.0, float(model.u_bar[i]), coarse)
    coarse_margin = margins(grid)
    assert np.all(np.diff(coarse_margin, axis=1) >= -1e-12)
    sat_mask = coarse_margin >= 0.0
    any_ok = sat_mask.any(axis=1)
    first = np.argmax(sat_mask, axis=1)
    cell = grid[1] - grid[0]
    lo = grid[np.maximum(first - 1, 0)]
    offsets = np.arange(0.0, cell + res, res)
    fine_margin = margins(lo[:, None] + offsets)
    fine_ok = fine_margin >= 0.0
    fine_first = np.argmax(fine_ok, axis=1)
    u_star = lo + offsets[fine_first]
    u_star[first == 0] = 0.0
    return u_star, ~any_ok


def test_criterion_7_controller_minimality(benchmark_model):
    from epibarrier import NetworkState, nominal_control, robust_control
    from epibarrier.model import drift as model_drift

    rng = np.random.default_rng(123)
    m = 10_000
    x = rng.uniform(1e-4, 1.0, size=(m, 3))
    r = rng.uniform(0.0, 1.0, size=(m, 3)) * (1.0 - x)
    kappa = rng.uniform(0.3, 5.0, size=m)

    # self-check: the batched drift matches the library op
    for k in range(0, m, 997):
        dx_ref, _ = model_drift(benchmark_model, NetworkState(x[k], r[k]))
        np.testing.assert_allclose(_batched_drift_x(benchmark_model, x[k:k + 1], r[k:k + 1])[0],
                                   dx_ref, atol=1e-14)

    specs = {"nominal": None,
             "independent": CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=0.15),
             "lowprev": CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=0.15, delta=0.01)}
    worst = 0.0
    ok = True
    for label, spec in specs.items():
        u_lib = np.empty((m, 3))
        sat_lib = np.zeros((m, 3), dtype=bool)
        for k in range(m):
            state = NetworkState(x[k], r[k])
            gain = ClassKGain(kappa[k])
            if spec is None:
                u_lib[k] = nominal_control(benchmark_model, state, gain)
                sat_lib[k] = u_lib[k] >= benchmark_model.u_bar
            else:
                u_lib[k], sat_lib[k] = robust_control(benchmark_model, state, gain, spec)
        for i in range(3):
            u_star, none_mask = _grid_oracle_batch(benchmark_model, x, r, kappa, spec, i)
            cap = benchmark_model.u_bar[i]
            ok &= bool(np.all(u_lib[none_mask, i] == cap))
            have = ~none_mask
            gap = np.abs(u_lib[have, i] - u_star[have])
            worst = max(worst, float(gap.max()))
            ok &= bool(np.all(gap <= 1e-5 + 1e-12))
    report(7, "controllers match the grid-search oracle on 10^4 random states",
           ok, f"worst deviation {worst:.2e} (allowed 1e-5)")


def test_criterion_8_compensation_dominates_draws():
    rng_x = np.random.default_rng(7)
    n_draws = 1_000_000
    models = {
        "independent": DisturbanceModel(DisturbanceKind.INDEPENDENT_BOUNDED,
                                        variance=1.0, bound=0.15, seed=71),
        "lowprev": DisturbanceModel(DisturbanceKind.LOW_PREVALENCE_BOUNDED,
                                    variance=1.0, bound=0.15, delta=0.01, seed=72),
    }
    specs = {
        "independent": CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=0.15),
        "lowprev": CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=0.15, delta=0.01),
    }
    ok = True
    detail = []
    for label, dist in models.items():
        x = rng_x.uniform(0.0, 1.0, n_draws)
        draws = sample(dist, x, make_rng(dist))
        slack = sigma(specs[label], x) - np.abs(draws)
        ok &= bool(np.all(slack >= 0.0))
        detail.append(f"{label} min slack {float(slack.min()):.3e}")
    report(8, "sigma dominates 10^6 disturbance draws per bounded model",
           ok, "; ".join(detail))


def test_criterion_9_forward_invariance_suite():
    rng = np.random.default_rng(2024)
    failures = 0
    worst = -np.inf
    for trial in range(100):
        model, x0, r0 = make_nonvulnerable(rng)
        mode = trial % 2
        if mode == 0:
            policy = ControlPolicy(PolicyKind.NOMINAL, ClassKGain(float(rng.uniform(0.5, 5.0))))
            dist = DisturbanceModel(DisturbanceKind.NONE)
        else:
            bound = float(rng.uniform(0.02, 0.2))
            delta = float(rng.uniform(0.005, 0.05))
            if trial % 4 == 1:
                spec = CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=bound)
                kind = PolicyKind.RCBF_INDEPENDENT
                dist = DisturbanceModel(DisturbanceKind.INDEPENDENT_BOUNDED, variance=1.0,
                                        bound=bound, seed=int(rng.integers(1 << 31)))
            else:
                spec = CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=bound, delta=delta)
                kind = PolicyKind.RCBF_LOW_PREVALENCE
                dist = DisturbanceModel(DisturbanceKind.LOW_PREVALENCE_BOUNDED, variance=1.0,
                                        bound=bound, delta=delta, seed=int(rng.integers(1 << 31)))
            needed = robust_feasibility(model, r0, spec).required_effort
            u_bar = np.maximum(needed, 0.0) * float(rng.uniform(1.02, 1.4)) + 0.01
            model = NetworkModel(n=model.n, beta=model.beta, gamma=model.gamma,
                                 x_bar=model.x_bar, u_bar=u_bar)
            policy = ControlPolicy(kind, ClassKGain(float(rng.uniform(0.5, 5.0))), spec)
        config = SimConfig(policy=policy, disturbance=dist, x0=x0, r0=r0,
                           dt=1e-4, t_final=4.0)
        _, metrics = simulate(model, config)
        exceed = float((metrics.x_max - model.x_bar).max())
        worst = max(worst, exceed)
        if exceed > 1e-3:
            failures += 1
    report(9, "forward invariance on 100 random non-vulnerable closed loops",
           failures == 0, f"worst threshold exceedance {worst:+.2e} (allowed 1e-3)")


def test_criterion_10_bit_identical_csv(tmp_path):
    args = ["run", "rcbf-independent", "--seeds", "0..4"]
    assert cli_main([*args, "--out", str(tmp_path / "a")]) == 0
    assert cli_main([*args, "--out", str(tmp_path / "b")]) == 0
    identical = True
    for seed in range(5):
        a = (tmp_path / "a" / f"run_seed{seed}.csv").read_bytes()
        b = (tmp_path / "b" / f"run_seed{seed}.csv").read_bytes()
        identical &= a == b
    report(10, "re-execution reproduces byte-identical trajectory CSVs", identical,
           "5 seeds at full horizon")
