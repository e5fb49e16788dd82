"""Monte Carlo experiments: resampling CLTs, k-out-of-n bootstrap, pivots.

Every experiment is driven by one root seed with per-replication derived
streams, centers statistics at the exactly solved population value, and
reports exact Kolmogorov-Smirnov distances against reference samples or a
reference distribution function.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .limit_law import MODES, ONE_SAMPLE_MU, ONE_SAMPLE_NU, TWO_SAMPLE
from .measures import DiscreteMeasure
from .ot_core import SolverError, _cost_values, normalize_to_Fc, solve_discrete_ot
from .seeding import generator

logger = logging.getLogger(__name__)

FAILURE_BUDGET = 0.01


class DegenerateVariance(RuntimeError):
    """The studentizing variance vanishes (constant potential)."""


class ExperimentAborted(RuntimeError):
    """Too many replications failed."""


@dataclass
class ExperimentReport:
    """Per-replication samples plus summary statistics of one experiment."""

    mode: str
    n: int | None
    m: int | None
    reps: int
    statistic_samples: np.ndarray
    seed: int
    wall_time: float
    ks_distance: float | None = None
    quantiles: dict = field(default_factory=dict)
    coverage: float | None = None
    failures: int = 0

    def __post_init__(self):
        if len(self.statistic_samples) != self.reps:
            raise ValueError("statistic sample count does not match reps")
        if self.ks_distance is not None and not (0.0 <= self.ks_distance <= 1.0):
            raise ValueError("ks distance out of [0, 1]")

    def summary(self) -> dict:
        out = {
            "mode": self.mode,
            "n": self.n,
            "m": self.m,
            "reps": self.reps,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "failures": self.failures,
            "quantiles": self.quantiles,
        }
        if self.ks_distance is not None:
            out["ks_distance"] = self.ks_distance
        if self.coverage is not None:
            out["coverage"] = self.coverage
        return out


def _quantile_block(samples: np.ndarray) -> dict:
    qs = np.quantile(samples, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {
        "q05": float(qs[0]), "q25": float(qs[1]), "q50": float(qs[2]),
        "q75": float(qs[3]), "q95": float(qs[4]),
    }


def sample_empirical(mu: DiscreteMeasure, n: int, rng: np.random.Generator) -> DiscreteMeasure:
    """Empirical measure of n i.i.d. draws: multinomial counts over the
    support points, divided by n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    counts = rng.multinomial(n, mu.weights)
    return mu.with_weights(counts / n)


def ks_distance(a, b) -> float:
    """Exact sup distance between two empirical distribution functions."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / len(a)
    fb = np.searchsorted(b, pts, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def ks_distance_to_cdf(samples, cdf) -> float:
    """Exact sup distance between an empirical distribution and a CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    upper = np.abs(np.arange(1, n + 1) / n - F)
    lower = np.abs(np.arange(0, n) / n - F)
    return float(max(upper.max(), lower.max()))


def normal_cdf(x, sigma: float = 1.0):
    """Standard normal CDF scaled to standard deviation sigma."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    arr = np.atleast_1d(np.asarray(x, dtype=float)) / (sigma * math.sqrt(2.0))
    out = 0.5 * (1.0 + np.array([math.erf(v) for v in arr]))
    return float(out[0]) if np.isscalar(x) or np.ndim(x) == 0 else out


# -- CLT experiment ----------------------------------------------------------

def _one_stat(mode, mu, nu, cost, pop_value, n, m, seed, rep) -> float:
    if mode == ONE_SAMPLE_MU:
        mu_hat = sample_empirical(mu, n, generator(seed, "clt", rep))
        sol = solve_discrete_ot(mu_hat, nu, cost)
        return math.sqrt(n) * (sol.value - pop_value)
    if mode == ONE_SAMPLE_NU:
        nu_hat = sample_empirical(nu, m, generator(seed, "clt", rep))
        sol = solve_discrete_ot(mu, nu_hat, cost)
        return math.sqrt(m) * (sol.value - pop_value)
    mu_hat = sample_empirical(mu, n, generator(seed, "clt", rep, 0))
    nu_hat = sample_empirical(nu, m, generator(seed, "clt", rep, 1))
    sol = solve_discrete_ot(mu_hat, nu_hat, cost)
    return math.sqrt(n * m / (n + m)) * (sol.value - pop_value)


def _stat_chunk(args) -> list[tuple[int, float | None]]:
    mode, mu, nu, cost, pop_value, n, m, seed, rep_indices = args
    out = []
    for rep in rep_indices:
        try:
            out.append((rep, _one_stat(mode, mu, nu, cost, pop_value, n, m, seed, rep)))
        except SolverError:
            out.append((rep, None))
    return out


def clt_experiment(mu: DiscreteMeasure, nu: DiscreteMeasure, C, mode: str,
                   n: int | None = None, m: int | None = None, reps: int = 1000,
                   seed: int = 0, limit_samples=None, jobs: int = 1) -> ExperimentReport:
    """Replicated resampling of the scaled centered empirical cost.

    The centering is the population value from one verified solve.  When
    ``limit_samples`` is given, the report carries the exact KS distance
    between the replicated statistics and those reference draws.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode in (ONE_SAMPLE_MU, TWO_SAMPLE) and (n is None or n < 1):
        raise ValueError("mode requires a sample size n")
    if mode in (ONE_SAMPLE_NU, TWO_SAMPLE) and (m is None or m < 1):
        raise ValueError("mode requires a sample size m")
    cost = _cost_values(C)
    t0 = time.perf_counter()
    pop_value = solve_discrete_ot(mu, nu, cost).value

    results: dict[int, float | None] = {}
    if jobs > 1:
        chunks = np.array_split(np.arange(reps), min(jobs * 4, reps))
        payload = [(mode, mu, nu, cost, pop_value, n, m, seed, chunk.tolist())
                   for chunk in chunks if len(chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_stat_chunk, payload):
                results.update(dict(part))
    else:
        for rep, val in _stat_chunk((mode, mu, nu, cost, pop_value, n, m, seed, range(reps))):
            results[rep] = val

    failures = sum(1 for v in results.values() if v is None)
    if failures > FAILURE_BUDGET * reps:
        raise ExperimentAborted(f"{failures}/{reps} replications failed")
    if failures:
        logger.warning("%d/%d replications failed and were dropped", failures, reps)
    stats = np.array([results[r] for r in range(reps) if results[r] is not None])

    ks = None
    if limit_samples is not None:
        ref = getattr(limit_samples, "draws", limit_samples)
        ks = ks_distance(stats, ref)
    return ExperimentReport(
        mode=mode, n=n, m=m, reps=len(stats),
        statistic_samples=stats, seed=seed,
        wall_time=time.perf_counter() - t0,
        ks_distance=ks, quantiles=_quantile_block(stats),
        failures=failures,
    )


# -- bootstrap ---------------------------------------------------------------

@dataclass
class BootstrapResult:
    """k-out-of-n bootstrap sample set, quantiles, and the basic CI."""

    statistics: np.ndarray
    k: int
    n: int
    alpha: float
    estimate: float
    ci_low: float
    ci_high: float
    quantiles: dict
    seed: int

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def bootstrap_kn(mu_hat: DiscreteMeasure, nu: DiscreteMeasure, C, k: int, B: int,
                 seed: int, n: int, alpha: float = 0.1) -> BootstrapResult:
    """Bootstrap with k resampled points out of the n observed ones.

    Each replicate resolves the instance at a k-sample empirical version of
    ``mu_hat`` and records sqrt(k) times the cost increment; quantiles of
    those draws yield the two-sided basic confidence interval at level
    1 - alpha.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if B < 100:
        raise ValueError("need at least 100 bootstrap replications")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    cost = _cost_values(C)
    estimate = solve_discrete_ot(mu_hat, nu, cost).value
    stats = np.empty(B)
    failures = 0
    for bi in range(B):
        rng = generator(seed, "bootstrap", bi)
        try:
            star = sample_empirical(mu_hat, k, rng)
            val = solve_discrete_ot(star, nu, cost).value
            stats[bi] = math.sqrt(k) * (val - estimate)
        except SolverError:
            stats[bi] = np.nan
            failures += 1
    if failures > FAILURE_BUDGET * B:
        raise ExperimentAborted(f"{failures}/{B} bootstrap replications failed")
    stats = stats[~np.isnan(stats)]
    q_lo = float(np.quantile(stats, alpha / 2))
    q_hi = float(np.quantile(stats, 1 - alpha / 2))
    sqrt_n = math.sqrt(n)
    return BootstrapResult(
        statistics=stats, k=k, n=n, alpha=alpha, estimate=estimate,
        ci_low=estimate - q_hi / sqrt_n, ci_high=estimate - q_lo / sqrt_n,
        quantiles=_quantile_block(stats), seed=seed,
    )


# -- pivotal statistic -------------------------------------------------------

def pivotal_statistic(mu_hat: DiscreteMeasure, nu: DiscreteMeasure, C,
                      population_ot: float, n: int) -> float:
    """Studentized centered cost: sqrt(n) increment over the empirical
    standard deviation of the normalized potential.

    Raises :class:`DegenerateVariance` when the empirical variance of the
    potential vanishes, which happens exactly when the potential is
    constant on the resampled support.
    """
    cost = _cost_values(C)
    sol = solve_discrete_ot(mu_hat, nu, cost)
    f_n, _ = normalize_to_Fc(sol.dual_f, sol.dual_g, cost)
    w = mu_hat.weights
    var = float(w @ (f_n * f_n) - (w @ f_n) ** 2)
    if var <= 1e-12:
        raise DegenerateVariance(f"empirical potential variance {var:.3e}")
    return math.sqrt(n) * (sol.value - population_ot) / math.sqrt(var)


def pivotal_experiment(mu: DiscreteMeasure, nu: DiscreteMeasure, C,
                       n: int, reps: int, seed: int) -> ExperimentReport:
    """Replicated studentized statistics with KS distance to standard normal."""
    cost = _cost_values(C)
    t0 = time.perf_counter()
    pop_value = solve_discrete_ot(mu, nu, cost).value
    stats = []
    failures = 0
    for rep in range(reps):
        mu_hat = sample_empirical(mu, n, generator(seed, "pivotal", rep))
        try:
            stats.append(pivotal_statistic(mu_hat, nu, cost, pop_value, n))
        except (SolverError, DegenerateVariance):
            failures += 1
    if failures > FAILURE_BUDGET * reps:
        raise ExperimentAborted(f"{failures}/{reps} pivotal replications failed")
    stats = np.array(stats)
    return ExperimentReport(
        mode="pivotal", n=n, m=None, reps=len(stats),
        statistic_samples=stats, seed=seed,
        wall_time=time.perf_counter() - t0,
        ks_distance=ks_distance_to_cdf(stats, normal_cdf),
        quantiles=_quantile_block(stats), failures=failures,
    )
