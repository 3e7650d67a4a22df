"""Scenario runner: batched simulations, CSV/JSON artifacts, comparisons.

Verbs
-----
run <scenario> [--seeds a..b] [--override key=value]... [--out DIR] [--config FILE]
    Simulate one scenario for each seed.  Writes per-run trajectory CSVs and
    metrics files, a feasibility report for the configured network, the
    effective config (re-parseable), a plain-text summary table, and for
    multi-seed batches an aggregate with mean/std of every metric.

compare <a> <b> --seeds a..b [--override key=value]... [--out DIR]
    Run both scenarios on the same seeds and report, per metric, the
    fraction of paired seeds with each ordering.

feasibility [--override key=value]...
    Print worst-case required effort and vulnerability flags (nominal and
    both robust compensation kinds) for the configured network.

The default output directory is taken from $EPIBARRIER_OUT, falling back to
``./out``.  Exit codes: 0 success, 2 bad config/arguments, 3 unwritable
output, 4 non-finite simulation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .controller import FeasibilityReport, feasibility_analysis
from .robust import CompensationKind, CompensationSpec, robust_feasibility
from .scenarios import (ConfigError, Scenario, build, default_config, parse_config,
                        parse_seeds, render_config, SCENARIO_NAMES)
from .simulator import RunMetrics, SimulationError, Trajectory, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

ENV_OUT_DIR = "EPIBARRIER_OUT"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def trajectory_csv(traj: Trajectory) -> str:
    """Render one trajectory in the stable column layout."""
    n = traj.x.shape[1]
    cols = (["t"]
            + [f"x_{i + 1}" for i in range(n)] + [f"r_{i + 1}" for i in range(n)]
            + [f"u_{i + 1}" for i in range(n)] + [f"h_{i + 1}" for i in range(n)]
            + [f"sat_{i + 1}" for i in range(n)])
    lines = [",".join(cols)]
    for k in range(traj.n_samples):
        row = [_fmt(traj.times[k])]
        for block in (traj.x, traj.r, traj.u, traj.h):
            row.extend(_fmt(v) for v in block[k])
        row.extend(str(int(v)) for v in traj.saturated[k])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _metrics_dict(metrics: RunMetrics) -> dict:
    return {
        "x_max": metrics.x_max.tolist(),
        "u_max": metrics.u_max.tolist(),
        "min_margin": metrics.min_margin.tolist(),
        "avg_min_margin": metrics.avg_min_margin,
        "integrated_control": metrics.integrated_control,
        "violations": metrics.violations,
    }


def _aggregate(per_seed: dict[int, RunMetrics]) -> dict:
    seeds = sorted(per_seed)
    stack = {
        "x_max": np.array([per_seed[s].x_max for s in seeds]),
        "u_max": np.array([per_seed[s].u_max for s in seeds]),
        "min_margin": np.array([per_seed[s].min_margin for s in seeds]),
        "avg_min_margin": np.array([[per_seed[s].avg_min_margin] for s in seeds]),
        "integrated_control": np.array([[per_seed[s].integrated_control] for s in seeds]),
        "violations": np.array([[per_seed[s].violations] for s in seeds], dtype=float),
    }
    fields = {}
    for name, arr in stack.items():
        mean = arr.mean(axis=0)
        std = arr.std(axis=0)
        fields[name] = {
            "mean": mean.tolist() if mean.size > 1 else float(mean[0]),
            "std": std.tolist() if std.size > 1 else float(std[0]),
        }
    return {"seeds": seeds, "fields": fields}


def _feasibility_dict(report: FeasibilityReport) -> dict:
    return {
        "required_effort": report.required_effort.tolist(),
        "vulnerable": report.vulnerable.tolist(),
    }


def _feasibility_all(config: dict[str, str]) -> dict:
    model, sim, _ = build(config)
    bound = float(config["bound"])
    delta = float(config["delta"])
    r0 = sim.r0
    independent = CompensationSpec(CompensationKind.INDEPENDENT, mu_bar=bound)
    lowprev = CompensationSpec(CompensationKind.LOW_PREVALENCE, d_bar=bound, delta=delta)
    return {
        "u_bar": model.u_bar.tolist(),
        "nominal": _feasibility_dict(feasibility_analysis(model, r0)),
        "robust_independent": _feasibility_dict(robust_feasibility(model, r0, independent)),
        "robust_lowprev": _feasibility_dict(robust_feasibility(model, r0, lowprev)),
    }


def _feasibility_text(report: dict) -> str:
    n = len(report["u_bar"])
    lines = [
        "worst-case required effort vs control caps",
        f"{'node':>4} {'u_bar':>10} {'nominal':>12} {'rcbf-indep':>12} {'rcbf-lowprev':>13}  vulnerable(nom/ind/lp)",
    ]
    for i in range(n):
        flags = "/".join("yes" if report[key]["vulnerable"][i] else "no"
                         for key in ("nominal", "robust_independent", "robust_lowprev"))
        lines.append(
            f"{i + 1:>4} {report['u_bar'][i]:>10.4g} "
            f"{report['nominal']['required_effort'][i]:>12.6g} "
            f"{report['robust_independent']['required_effort'][i]:>12.6g} "
            f"{report['robust_lowprev']['required_effort'][i]:>13.6g}  {flags}")
    return "\n".join(lines) + "\n"


def _summary_text(scenario: str, agg: dict, n: int) -> str:
    fields = agg["fields"]
    x_max = np.atleast_1d(fields["x_max"]["mean"])
    u_max = np.atleast_1d(fields["u_max"]["mean"])
    lines = [
        f"scenario {scenario}: {len(agg['seeds'])} seed(s)",
        "",
        "peak infection and control per node (mean over seeds)",
        f"{'node':>4} {'x_max':>10} {'u_max':>10}",
    ]
    for i in range(n):
        lines.append(f"{i + 1:>4} {x_max[i]:>10.4g} {u_max[i]:>10.4g}")
    lines += [
        "",
        "aggregate over the network (mean over seeds)",
        f"  avg min safety margin : {fields['avg_min_margin']['mean']:.6g}",
        f"  integrated control    : {fields['integrated_control']['mean']:.6g}",
        f"  violations            : {fields['violations']['mean']:.6g}",
    ]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise _OutputError(f"cannot write {path}: {exc}") from exc


class _OutputError(RuntimeError):
    pass


def _run_batch(config: dict[str, str], seeds: tuple[int, ...], jobs: int
               ) -> dict[int, tuple[Trajectory, RunMetrics]]:
    def one(seed: int):
        model, sim, _ = build(config, seed=seed)
        return seed, simulate(model, sim)

    if jobs > 1 and len(seeds) > 1:
        # the integration kernel releases the GIL, so threads scale
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(one, seeds))
    else:
        results = dict(one(s) for s in seeds)
    return results


def run_scenario(scenario: Scenario, output_dir: str | os.PathLike, jobs: int = 1) -> int:
    """Execute a scenario batch and write its artifacts; returns an exit code."""
    out = Path(output_dir)
    try:
        config = scenario.config()
        seeds = parse_seeds(config["seeds"])
        model, _, _ = build(config)
        results = _run_batch(config, seeds, jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        _write(out / "effective_config.txt", render_config(config))
        report = _feasibility_all(config)
        _write(out / "feasibility.json", json.dumps(report, indent=2) + "\n")
        _write(out / "feasibility.txt", _feasibility_text(report))
        per_seed = {}
        for seed in seeds:
            traj, metrics = results[seed]
            per_seed[seed] = metrics
            _write(out / f"run_seed{seed}.csv", trajectory_csv(traj))
            payload = {"seed": seed, "scenario": config["scenario"],
                       "rng_algorithm": traj.rng_algorithm,
                       "clamp_events": traj.clamp_events, **_metrics_dict(metrics)}
            _write(out / f"metrics_seed{seed}.json", json.dumps(payload, indent=2) + "\n")
        agg = _aggregate(per_seed)
        if len(seeds) > 1:
            _write(out / "aggregate.json", json.dumps(agg, indent=2) + "\n")
        _write(out / "summary.txt", _summary_text(config["scenario"], agg, model.n))
    except _OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(seeds)} run(s) to {out}")
    return EXIT_OK


def compare(scenario_a: Scenario, scenario_b: Scenario, seeds: tuple[int, ...],
            output_dir: str | os.PathLike | None = None, jobs: int = 1) -> dict:
    """Paired-seed comparison of two scenarios.

    For each metric the report carries the fraction of seed pairs with
    a > b, a < b, and a == b.  Raises ConfigError / SimulationError on bad
    input; the CLI wrapper maps those to exit codes.
    """
    runs = {}
    for tag, scn in (("a", scenario_a), ("b", scenario_b)):
        config = scn.config()
        results = _run_batch(config, seeds, jobs)
        runs[tag] = {seed: _metrics_dict(m) for seed, (_, m) in results.items()}
        runs[f"{tag}_name"] = config["scenario"]

    def fractions(key, sub=None):
        picked = []
        for seed in seeds:
            va, vb = runs["a"][seed][key], runs["b"][seed][key]
            if sub is not None:
                va, vb = va[sub], vb[sub]
            picked.append((va, vb))
        gt = sum(va > vb for va, vb in picked) / len(picked)
        lt = sum(va < vb for va, vb in picked) / len(picked)
        return {"a_gt_b": gt, "b_gt_a": lt, "equal": 1.0 - gt - lt}

    n = len(runs["a"][seeds[0]]["x_max"])
    report = {
        "scenario_a": runs["a_name"],
        "scenario_b": runs["b_name"],
        "seeds": list(seeds),
        "per_seed": {str(s): {"a": runs["a"][s], "b": runs["b"][s]} for s in seeds},
        "orderings": {
            "x_max": [fractions("x_max", i) for i in range(n)],
            "avg_min_margin": fractions("avg_min_margin"),
            "integrated_control": fractions("integrated_control"),
            "violations": fractions("violations"),
        },
    }
    if output_dir is not None:
        _write(Path(output_dir) / "comparison.json", json.dumps(report, indent=2) + "\n")
    return report


def _parse_overrides(pairs: list[str]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _scenario_from_args(args, name: str | None = None) -> Scenario:
    overrides = _parse_overrides(args.override)
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        cfg = parse_config(text)
        base = cfg.get("scenario", name or "nominal")
        merged = {k: v for k, v in cfg.items() if k != "scenario"}
        merged.update(overrides)
        scn = Scenario(base, merged)
    else:
        scn = Scenario(name or "nominal", overrides)
    if getattr(args, "seeds", None):
        scn = Scenario(scn.name, scn.overrides, parse_seeds(args.seeds))
    return scn


def _default_out() -> str:
    return os.environ.get(ENV_OUT_DIR, "out")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="epibarrier",
        description="safety-critical control of networked SIR epidemics")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario over a seed batch")
    p_run.add_argument("scenario", choices=SCENARIO_NAMES)
    p_run.add_argument("--seeds", default=None, help="a..b inclusive or comma list")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_run.add_argument("--config", default=None, help="flat key=value config file")
    p_run.add_argument("--out", default=None, help=f"output dir (default ${ENV_OUT_DIR} or ./out)")
    p_run.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))

    p_cmp = sub.add_parser("compare", help="paired-seed comparison of two scenarios")
    p_cmp.add_argument("scenario_a", choices=SCENARIO_NAMES)
    p_cmp.add_argument("scenario_b", choices=SCENARIO_NAMES)
    p_cmp.add_argument("--seeds", required=True)
    p_cmp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_cmp.add_argument("--out", default=None)
    p_cmp.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))

    p_feas = sub.add_parser("feasibility", help="worst-case effort and vulnerability report")
    p_feas.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    args = parser.parse_args(argv)
    try:
        if args.verb == "run":
            scn = _scenario_from_args(args, args.scenario)
            return run_scenario(scn, args.out or _default_out(), jobs=args.jobs)
        if args.verb == "compare":
            seeds = parse_seeds(args.seeds)
            if not seeds:
                raise ConfigError("compare needs at least one seed")
            a = Scenario(args.scenario_a, _parse_overrides(args.override))
            b = Scenario(args.scenario_b, _parse_overrides(args.override))
            report = compare(a, b, seeds, output_dir=args.out or _default_out(), jobs=args.jobs)
            ord_ = report["orderings"]
            print(f"{report['scenario_a']} vs {report['scenario_b']} over {len(seeds)} paired seed(s)")
            for key in ("avg_min_margin", "integrated_control", "violations"):
                frac = ord_[key]
                print(f"  {key}: a>b {frac['a_gt_b']:.2f}  b>a {frac['b_gt_a']:.2f}  equal {frac['equal']:.2f}")
            return EXIT_OK
        if args.verb == "feasibility":
            overrides = _parse_overrides(args.override)
            config = Scenario("nominal", overrides).config()
            print(_feasibility_text(_feasibility_all(config)), end="")
            return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    raise AssertionError("unreachable verb")


if __name__ == "__main__":
    sys.exit(main())
