"""Declarative experiment runner.

Usage:  otlimits <task> --config config.json [--seed S] [--jobs N] [--out DIR]

One JSON config describes the instance (inline, file references, or a named
built-in fixture), the task parameters, and optional pass/fail thresholds.
Outputs are a JSON summary per task plus CSV sample dumps where the task
produces samples; re-running a config with the same seed reproduces the
files byte for byte.  Exit status: 0 on success with all thresholds met,
1 on a threshold failure, 2 on an invalid config or instance.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import fixtures as fixture_lib
from .degeneracy import all_trivial_test, bitrivial_check, projected_measure_test
from .dual_face import build_face, uniqueness_test
from .inference import (
    bootstrap_kn,
    clt_experiment,
    pivotal_experiment,
    sample_empirical,
)
from .limit_law import sample_limit
from .measures import (
    DiscreteMeasure,
    ExplicitMatrix,
    PowerDistance,
    RadialDistance,
    ThresholdedPower,
    cost_matrix,
    load_cost_matrix,
    load_measure,
    measure_from_dict,
)
from .ot_core import solve_discrete_ot
from .schemas import CONFIG_SCHEMA, TASK_SUMMARY_SCHEMAS
from .seeding import generator
from .semidiscrete import (
    DensityMeasure1D,
    semidiscrete_clt_experiment,
    solve_semidiscrete,
)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def _float_repr(x: float) -> str:
    return f"{x:.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    """RFC-4180 CSV with 17-significant-digit floats."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_float_repr(v) if isinstance(v, float) else v for v in row])


def write_summary(path: Path, task: str, summary: dict) -> None:
    jsonschema.validate(summary, TASK_SUMMARY_SCHEMAS[task])
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- instance construction ---------------------------------------------------

def _resolve_measure(doc: dict, base: Path) -> DiscreteMeasure:
    if "path" in doc:
        return load_measure(base / doc["path"])
    return measure_from_dict(doc)


def _resolve_cost_spec(doc: dict, base: Path):
    if "path" in doc:
        return load_cost_matrix(base / doc["path"])
    kind = doc["kind"]
    if kind == "power_distance":
        return PowerDistance(doc["p"])
    if kind == "thresholded_power":
        return ThresholdedPower(doc["p"], doc["threshold"])
    if kind == "radial_distance":
        return RadialDistance()
    return ExplicitMatrix(np.asarray(doc["matrix"], dtype=float))


def _resolve_density(doc: dict) -> DensityMeasure1D:
    return DensityMeasure1D(
        interval=(doc["interval"][0], doc["interval"][1]),
        kind=doc["kind"],
        breakpoints=tuple(doc.get("breakpoints", ())),
        values=tuple(doc.get("values", ())),
        quadrature=doc.get("quadrature", 10_000),
    )


class Instance:
    """Resolved instance: discrete pair and/or a density side."""

    def __init__(self, mu, nu=None, cost_spec=None, cost=None, nu_density=None):
        self.mu = mu
        self.nu = nu
        self.cost_spec = cost_spec
        self.cost = cost
        self.nu_density = nu_density

    def require_discrete(self):
        if self.nu is None or self.cost is None:
            raise ConfigError("task requires a discrete instance (mu, nu, cost)")
        return self.mu, self.nu, self.cost

    def require_semidiscrete(self):
        if self.nu_density is None or self.cost_spec is None:
            raise ConfigError("task requires mu, a nu_density, and a parametric cost")
        return self.mu, self.nu_density, self.cost_spec


def build_instance(doc: dict, base: Path) -> Instance:
    if "fixture" in doc:
        try:
            fx = fixture_lib.load(doc["fixture"])
        except KeyError as exc:
            raise ConfigError(str(exc)) from None
        return Instance(
            mu=fx.mu, nu=fx.nu, cost_spec=fx.cost_spec, cost=fx.cost,
            nu_density=fx.nu_density,
        )
    mu = _resolve_measure(doc["mu"], base)
    nu = _resolve_measure(doc["nu"], base) if "nu" in doc else None
    spec = _resolve_cost_spec(doc["cost"], base) if "cost" in doc else None
    density = _resolve_density(doc["nu_density"]) if "nu_density" in doc else None
    cost = None
    if nu is not None and spec is not None:
        cost = cost_matrix(spec, mu, nu)
    return Instance(mu=mu, nu=nu, cost_spec=spec, cost=cost, nu_density=density)


# -- tasks --------------------------------------------------------------------

def _task_solve(inst, params, outdir):
    mu, nu, C = inst.require_discrete()
    sol = solve_discrete_ot(mu, nu, C)
    summary = {
        "value": sol.value,
        "plan": [[float(v) for v in row] for row in sol.plan],
        "dual_f": [float(v) for v in sol.dual_f],
        "dual_g": [float(v) for v in sol.dual_g],
    }
    write_summary(outdir / "solve_summary.json", "solve", summary)
    return {}


def _task_face(inst, params, outdir):
    mu, nu, C = inst.require_discrete()
    sol = solve_discrete_ot(mu, nu, C)
    face = build_face(mu, nu, C, sol)
    write_summary(outdir / "face_summary.json", "face", face.summary())
    return {}


def _task_degeneracy(inst, params, outdir):
    mu, nu, C = inst.require_discrete()
    sol = solve_discrete_ot(mu, nu, C)
    sol_T = solve_discrete_ot(nu, mu, C.values.T)
    face = build_face(mu, nu, C, sol)
    face_T = build_face(nu, mu, C.values.T, sol_T)
    rep_f = projected_measure_test(mu, nu, C.values, sol.value)
    rep_g = projected_measure_test(nu, mu, C.values.T, sol_T.value)
    summary = {
        "ot_value": sol.value,
        "projection_f": rep_f.to_json(),
        "projection_g": rep_g.to_json(),
        "exists_trivial_f": rep_f.is_projected,
        "exists_trivial_g": rep_g.is_projected,
        "all_trivial_f": all_trivial_test(face, mu),
        "all_trivial_g": all_trivial_test(face_T, nu),
        "bitrivial": bitrivial_check(face, mu, nu),
        "unique": uniqueness_test(face, mu),
    }
    write_summary(outdir / "degeneracy_summary.json", "degeneracy", summary)
    return {}


def _task_limit_sample(inst, params, outdir):
    mu, nu, C = inst.require_discrete()
    mode = params.get("mode", "one_sample_mu")
    sol = solve_discrete_ot(mu, nu, C)
    face = build_face(mu, nu, C, sol)
    samples = sample_limit(
        face, mu, nu, mode, delta=params.get("delta"),
        M=params.get("draws", 100_000), seed=params["seed"],
    )
    samples.to_csv(outdir / "limit-sample_samples.csv")
    summary = {
        "mode": mode, "M": samples.M, "seed": samples.seed,
        "delta": samples.delta, **samples.summary(),
    }
    write_summary(outdir / "limit-sample_summary.json", "limit-sample", summary)
    return {}


def _experiment_outputs(report, task, outdir, thresholds):
    write_csv(
        outdir / f"{task}_samples.csv", ["statistic"],
        ([float(v)] for v in report.statistic_samples),
    )
    summary = report.summary()
    metrics = {"ks": report.ks_distance}
    if len(report.statistic_samples):
        metrics["max_abs"] = float(np.abs(report.statistic_samples).max())
    results = {}
    for name, bound in (thresholds or {}).items():
        value = metrics.get(name)
        if value is None:
            raise ConfigError(f"threshold {name!r} is not produced by task {task!r}")
        results[name] = {"value": value, "bound": bound, "pass": bool(value <= bound)}
    if results:
        summary["thresholds"] = results
    write_summary(outdir / f"{task}_summary.json", task, summary)
    return results


def _task_clt(inst, params, outdir, thresholds, jobs):
    mu, nu, C = inst.require_discrete()
    mode = params.get("mode", "one_sample_mu")
    sol = solve_discrete_ot(mu, nu, C)
    face = build_face(mu, nu, C, sol)
    limit = sample_limit(
        face, mu, nu, mode, delta=params.get("delta"),
        M=params.get("draws", 100_000), seed=params["seed"] + 1,
    )
    report = clt_experiment(
        mu, nu, C, mode, n=params.get("n"), m=params.get("m"),
        reps=params.get("reps", 1000), seed=params["seed"],
        limit_samples=limit, jobs=jobs,
    )
    return _experiment_outputs(report, "clt", outdir, thresholds)


def _task_bootstrap(inst, params, outdir, thresholds):
    mu, nu, C = inst.require_discrete()
    n = params["n"]
    k = params.get("k", math.ceil(n ** (2 / 3)))
    population = solve_discrete_ot(mu, nu, C).value
    mu_hat = sample_empirical(mu, n, generator(params["seed"], "outer"))
    result = bootstrap_kn(
        mu_hat, nu, C, k=k, B=params.get("B", 500),
        seed=params["seed"], n=n, alpha=params.get("alpha", 0.1),
    )
    write_csv(
        outdir / "bootstrap_samples.csv", ["statistic"],
        ([float(v)] for v in result.statistics),
    )
    summary = {
        "estimate": result.estimate, "ci_low": result.ci_low,
        "ci_high": result.ci_high, "k": result.k, "n": result.n,
        "alpha": result.alpha, "quantiles": result.quantiles,
        "seed": result.seed, "population_value": population,
        "ci_covers_population": result.covers(population),
    }
    write_summary(outdir / "bootstrap_summary.json", "bootstrap", summary)
    return {}


def _task_pivotal(inst, params, outdir, thresholds):
    mu, nu, C = inst.require_discrete()
    report = pivotal_experiment(
        mu, nu, C, n=params["n"], reps=params.get("reps", 1000),
        seed=params["seed"],
    )
    return _experiment_outputs(report, "pivotal", outdir, thresholds)


def _task_semidiscrete(inst, params, outdir, thresholds):
    mu, density, spec = inst.require_semidiscrete()
    if "reps" in params:
        report = semidiscrete_clt_experiment(
            mu, density, spec, n=params["n"], reps=params["reps"],
            seed=params["seed"],
        )
        return _experiment_outputs(report, "semidiscrete", outdir, thresholds)
    state = solve_semidiscrete(mu, density, spec)
    summary = {
        "value": state.objective,
        "potential": [float(v) for v in state.f],
        "cell_masses": [float(v) for v in state.cell_masses],
        "residual": state.residual,
        "iterations": state.iterations,
    }
    write_summary(outdir / "semidiscrete_summary.json", "semidiscrete", summary)
    return {}


def run(config: dict, base: Path, outdir: Path, jobs: int = 1) -> int:
    """Execute one validated config; returns the process exit code."""
    task = config["task"]
    params = dict(config["parameters"])
    thresholds = config.get("thresholds", {})
    inst = build_instance(config["instance"], base)
    outdir.mkdir(parents=True, exist_ok=True)

    if task == "solve":
        results = _task_solve(inst, params, outdir)
    elif task == "face":
        results = _task_face(inst, params, outdir)
    elif task == "degeneracy":
        results = _task_degeneracy(inst, params, outdir)
    elif task == "limit-sample":
        results = _task_limit_sample(inst, params, outdir)
    elif task == "clt":
        results = _task_clt(inst, params, outdir, thresholds, jobs)
    elif task == "bootstrap":
        results = _task_bootstrap(inst, params, outdir, thresholds)
    elif task == "pivotal":
        results = _task_pivotal(inst, params, outdir, thresholds)
    elif task == "semidiscrete":
        results = _task_semidiscrete(inst, params, outdir, thresholds)
    else:  # unreachable: schema rejects unknown tasks
        raise ConfigError(f"unknown task {task!r}")

    if any(not r["pass"] for r in results.values()):
        return EXIT_THRESHOLD
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="otlimits",
        description="Exact transport solves and limit-law experiments from a JSON config.",
    )
    parser.add_argument("task", choices=list(TASK_SUMMARY_SCHEMAS))
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=None,
                        help="max concurrent replications (default: OTLIMITS_JOBS or 1)")
    parser.add_argument("--out", default=None, help="output directory")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        print(f"error: config schema violation: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    if config["task"] != args.task:
        print(f"error: config task {config['task']!r} does not match {args.task!r}",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        config["parameters"]["seed"] = args.seed
    jobs = args.jobs or config["parameters"].get("jobs") \
        or int(os.environ.get("OTLIMITS_JOBS", "1"))

    base = Path(args.config).resolve().parent
    outdir = Path(args.out) if args.out else Path(config.get("output", {}).get("dir", "."))
    try:
        return run(config, base, outdir, jobs=jobs)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: invalid config or instance: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
