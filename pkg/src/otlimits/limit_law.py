"""Sampling the limit distributions of the empirical transport cost.

Each draw realizes the limiting Gaussian field at the support atoms and
takes the exact supremum of the induced linear functional over the dual
face.  Under a unique potential the limit collapses to a centered normal
whose variance is computed in closed form.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dual_face import DualFace, sup_linear
from .measures import DiscreteMeasure
from .seeding import generator

ONE_SAMPLE_MU = "one_sample_mu"
ONE_SAMPLE_NU = "one_sample_nu"
TWO_SAMPLE = "two_sample"
MODES = (ONE_SAMPLE_MU, ONE_SAMPLE_NU, TWO_SAMPLE)


@dataclass(frozen=True)
class GaussianDraw:
    """Realization of the limiting field at the support atoms.

    Built as z = D xi - (s.xi) w with D = diag(sqrt(w)), s = sqrt(w), so the
    coordinates sum to zero by construction, vanish off-support, and have
    covariance diag(w) - w w^T.
    """

    z: np.ndarray


def sample_gaussian(mu: DiscreteMeasure, rng: np.random.Generator) -> GaussianDraw:
    w = mu.weights
    s = np.sqrt(w)
    xi = rng.standard_normal(len(w))
    t = float(s @ xi)
    return GaussianDraw(z=s * xi - t * w)


@dataclass(frozen=True)
class LimitSampleSet:
    """Seeded draws from one of the limit laws."""

    draws: np.ndarray
    mode: str
    M: int
    seed: int
    delta: float | None = None

    def __post_init__(self):
        if len(self.draws) != self.M:
            raise ValueError("draw count mismatch")

    def summary(self) -> dict:
        d = np.asarray(self.draws)
        qs = np.quantile(d, [0.05, 0.25, 0.5, 0.75, 0.95])
        return {
            "mean": float(d.mean()),
            "sd": float(d.std(ddof=1)) if len(d) > 1 else 0.0,
            "q05": float(qs[0]),
            "q25": float(qs[1]),
            "q50": float(qs[2]),
            "q75": float(qs[3]),
            "q95": float(qs[4]),
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["draw"])
            for v in self.draws:
                writer.writerow([f"{v:.17g}"])


def sample_limit(face: DualFace, mu: DiscreteMeasure, nu: DiscreteMeasure,
                 mode: str, delta: float | None = None, M: int = 100_000,
                 seed: int = 0) -> LimitSampleSet:
    """Monte Carlo draws of the limit law by per-draw face maximization.

    Draw streams are derived from (seed, index), so generation order (and
    any parallel split across draws) does not affect the result.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == TWO_SAMPLE:
        if delta is None or not (0.0 < delta < 1.0):
            raise ValueError("two-sample mode requires delta in (0, 1)")
    sd = np.sqrt(delta) if delta is not None else None
    draws = np.empty(M)
    for idx in range(M):
        if mode == ONE_SAMPLE_MU:
            z = sample_gaussian(mu, generator(seed, "limit", idx)).z
            draws[idx] = sup_linear(face, z, None).value
        elif mode == ONE_SAMPLE_NU:
            w = sample_gaussian(nu, generator(seed, "limit", idx)).z
            draws[idx] = sup_linear(face, None, w).value
        else:
            z = sample_gaussian(mu, generator(seed, "limit", idx, 0)).z
            w = sample_gaussian(nu, generator(seed, "limit", idx, 1)).z
            draws[idx] = sup_linear(face, sd * z, np.sqrt(1.0 - delta) * w).value
    return LimitSampleSet(draws=draws, mode=mode, M=M, seed=seed, delta=delta)


def normal_limit_params(f, mu: DiscreteMeasure, g=None, nu: DiscreteMeasure | None = None,
                        delta: float | None = None) -> float:
    """Variance of the normal limit under a unique potential.

    One-sample: Var_mu[f].  Two-sample: delta Var_mu[f] + (1-delta) Var_nu[g].
    """
    f = np.asarray(f, dtype=float)
    var_f = float(mu.weights @ (f * f) - (mu.weights @ f) ** 2)
    if g is None:
        return var_f
    if nu is None or delta is None:
        raise ValueError("two-sample variance requires g, nu, and delta")
    g = np.asarray(g, dtype=float)
    var_g = float(nu.weights @ (g * g) - (nu.weights @ g) ** 2)
    return float(delta) * var_f + (1.0 - float(delta)) * var_g


class EmpiricalCDF:
    """Right-continuous empirical distribution function."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise ValueError("empty sample")
        self.sorted = np.sort(samples)
        self.n = len(samples)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.sorted, x, side="right") / self.n
        return float(out) if out.ndim == 0 else out


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


def quantile(samples, q: float) -> float:
    """Order-statistic quantile with linear interpolation, q in (0, 1)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empty sample")
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0, 1)")
    return float(np.quantile(samples, q, method="linear"))
