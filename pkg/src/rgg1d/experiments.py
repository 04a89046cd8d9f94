"""Drivers for the asymptotic statements: threshold sweeps, strong-law
trajectories, record values, restricted graphs and the span's Gumbel limit.

Almost-sure limits cannot be checked at finite n, so those drivers return
pinned-seed demonstrations marked ``statistical``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analytic import span_gumbel_interval
from .core import ModelParams, Variant, ZetaTable, validate_params
from .montecarlo import draw_iid, estimate, make_rng, sample_values

KS_THRESHOLD = 0.02  # pinned from a pilot run at n = samples = 10^4
BASEL = math.pi**2 / 6

# substream tags so different drivers never share random numbers
_SWEEP, _COMPARE, _TRAJECTORY, _RECORDS, _RESTRICTED, _SPAN = range(1, 7)


@dataclass(frozen=True)
class ThresholdSpec:
    lam: float
    T: float

    @property
    def p(self) -> float:
        return -math.expm1(-self.lam * self.T)

    def delta(self, n: int) -> float:
        """Critical cutoff ``p ln(n) / (lam (1 - p) n)``."""
        if n < 2:
            raise ValueError("threshold needs n ≥ 2")
        # p / (1 - p) = e^{lam T} - 1
        return math.expm1(self.lam * self.T) * math.log(n) / (self.lam * n)


def truncated_threshold(n: int, lam: float, T: float) -> float:
    if not T > 0 or not lam > 0:
        raise ValueError("lambda and T must be > 0")
    if math.isinf(T):
        return math.inf
    return ThresholdSpec(lam, T).delta(n)


def threshold_sweep(
    lam: float,
    T: float,
    n_values,
    a_values,
    samples: int,
    seed: int,
    workers: int | None = None,
) -> list[dict]:
    """Connectivity at cutoffs ``a * delta(n)`` for the truncated and G* models.

    Each sample's connectivity distance is computed once and compared with
    every cutoff, so estimates are exactly nondecreasing in ``a``.
    """
    if any(not a > 0 for a in a_values):
        raise ValueError("a values must be > 0")
    spec = ThresholdSpec(lam, T)
    rows = []
    for ni, n in enumerate(n_values):
        delta = spec.delta(n)
        for mi, variant in enumerate((Variant.TRUNCATED, Variant.GSTAR)):
            params = validate_params(ModelParams(variant, n, lam, 0.0, T=T))
            c_n, _ = sample_values(
                params, "conn_distance", samples, seed, workers=workers, stream=_SWEEP * 1000 + ni * 2 + mi
            )
            for a in a_values:
                r = a * delta
                p = float(np.mean(c_n <= r))
                rows.append(
                    {
                        "model": variant.value,
                        "n": n,
                        "a": a,
                        "r": r,
                        "estimate": p,
                        "stderr": math.sqrt(p * (1 - p) / samples),
                        "prediction": math.exp(-(n ** (1 - a)) / math.log(n)),
                        "seed": seed,
                    }
                )
    return rows


@dataclass(frozen=True)
class Comparison:
    p_truncated: float
    p_gstar: float
    stderr: float  # of the difference
    z_score: float
    seed: int

    @property
    def difference(self) -> float:
        return self.p_truncated - self.p_gstar


def gn_vs_gstar_comparison(
    lam: float, T: float, r: float, n: int, samples: int, seed: int, workers: int | None = None
) -> Comparison:
    """Connectivity of the truncated graph against its G* approximation."""
    res = []
    for mi, variant in enumerate((Variant.TRUNCATED, Variant.GSTAR)):
        params = ModelParams(variant, n, lam, r, T=T)
        res.append(estimate(params, "connected", samples, seed, workers=workers, stream=_COMPARE * 1000 + mi))
    se = math.hypot(res[0].stderr, res[1].stderr)
    diff = res[0].mean - res[1].mean
    z = diff / se if se > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
    return Comparison(res[0].mean, res[1].mean, se, z, seed)


@dataclass
class TrajectoryTable:
    """One row per (seed, n) along nested sample paths."""

    model: str
    rows: list[dict] = field(default_factory=list)
    statistical: bool = True

    def column(self, statistic: str, n: int) -> np.ndarray:
        return np.array([row[statistic] for row in self.rows if row["n"] == n])

    def median(self, statistic: str, n: int) -> float:
        return float(np.median(self.column(statistic, n)))


def _prefix_stats(x: np.ndarray) -> tuple[float, float]:
    """Connectivity distance and largest nearest-neighbour distance."""
    y = np.diff(np.sort(x))
    if y.size == 0:
        return 0.0, 0.0
    nn = np.minimum(np.concatenate([[np.inf], y]), np.concatenate([y, [np.inf]]))
    return float(y.max()), float(nn.max())


def strong_law_trajectory(params: ModelParams, n_values, seeds) -> TrajectoryTable:
    """Ratio statistics along one growing configuration per seed.

    Every seed owns one stream of i.i.d. positions; the graph at size n uses
    the first n of them, so all sizes lie on the same sample path. For G* the
    first ``N(n)`` exponentials are drawn and the n smallest kept.
    """
    n_values = list(n_values)
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n values must be increasing")
    lam = params.lam
    table = TrajectoryTable(Variant(params.variant).value)
    for seed in seeds:
        rng = make_rng(seed, _TRAJECTORY)
        if params.variant is Variant.GSTAR:
            p = -math.expm1(-lam * params.T)
            stream = draw_iid(ModelParams(Variant.EXPONENTIAL, 1, lam, 0.0), rng, math.floor(n_values[-1] / p))
        else:
            probe = validate_params(ModelParams(params.variant, n_values[-1], lam, params.r, T=params.T))
            stream = draw_iid(probe, rng, n_values[-1])
        running = -math.inf
        for n in n_values:
            if params.variant is Variant.GSTAR:
                prefix = np.sort(stream[: math.floor(n / p)])[:n]
            else:
                prefix = stream[:n]
            c_n, d_n = _prefix_stats(prefix)
            ln = math.log(n)
            row = {"n": n, "seed": seed, "c_n": c_n, "d_n": d_n}
            if params.variant in (Variant.EXPONENTIAL, Variant.DOUBLE_EXPONENTIAL):
                running = max(running, lam * c_n / ln)
                row["lam_c_over_ln"] = lam * c_n / ln
                row["running_max_lam_c_over_ln"] = running
                row["lam_ln_c_over_basel"] = lam * ln * c_n / BASEL
            else:
                row["n_c_over_ln"] = n * c_n / ln
                row["n_d_over_ln"] = n * d_n / ln
                row["c_over_d"] = c_n / d_n if d_n > 0 else math.inf
            table.rows.append(row)
    return table


def record_exceedance_experiment(lam: float, K: int, seed: int) -> int:
    """``#{k <= K : lam Z_k > ln k}`` for i.i.d. Exp(lam) gaps ``Z_k``."""
    if K < 10:
        raise ValueError("K must be ≥ 10")
    rng = make_rng(seed, _RECORDS)
    z = -np.log1p(-rng.random(K)) / lam
    return int(np.count_nonzero(lam * z > np.log(np.arange(1, K + 1))))


def restricted_size(n: int, a: float) -> int:
    return max(1, math.floor(n - a * math.log(n)))


def restricted_union_bound(n: int, k: int, lam: float, r: float) -> float:
    x = lam * r
    return math.exp(x) / math.expm1(x) * (math.exp(-x * (n - k)) - math.exp(-x * n))


def restricted_graph_experiment(
    lam: float, r: float, a: float, n_values, samples: int, seed: int, workers: int | None = None
) -> list[dict]:
    """Disconnection of the graph on the first ``k_n = floor(n - a ln n)``
    ordered points of an n-node exponential sample.

    Reports the MC estimate, the union bound and the exact value
    ``1 - prod_{i<k_n} P(Y_i <= r)``.
    """
    if not a > 1 / (lam * r):
        warnings.warn(f"a = {a} ≤ 1/(lambda r) = {1 / (lam * r):.4g}: convergence not guaranteed", stacklevel=2)
    rows = []
    for ni, n in enumerate(n_values):
        k = restricted_size(n, a)
        params = ModelParams(Variant.EXPONENTIAL, n, lam, r)
        est = estimate(
            params, "restricted_disconnected", samples, seed, workers=workers, stream=_RESTRICTED * 1000 + ni, k=k
        )
        exact = -math.expm1(ZetaTable(n, lam, r).log_run_product(1, k)) if k > 1 else 0.0
        rows.append(
            {
                "n": n,
                "k_n": k,
                "estimate": est.mean,
                "stderr": est.stderr,
                "bound": restricted_union_bound(n, k, lam, r),
                "exact": exact,
                "seed": seed,
            }
        )
    return rows


@dataclass(frozen=True)
class GumbelFit:
    ks_statistic: float
    passed: bool
    median: float
    coverage_95: float
    seed: int


def span_gumbel_ks(
    n: int, lam: float, samples: int, seed: int, threshold: float = KS_THRESHOLD, workers: int | None = None
) -> GumbelFit:
    """KS distance between ``lam * span - ln n`` and the standard Gumbel law."""
    if samples < 100:
        raise ValueError("samples must be ≥ 100")
    params = ModelParams(Variant.EXPONENTIAL, n, lam, 0.0)
    z, _ = sample_values(params, "normalized_span", samples, seed, workers=workers, stream=_SPAN)
    ks = float(stats.kstest(z, "gumbel_r").statistic)
    lo, hi = span_gumbel_interval(n, lam, 0.05)
    span = (z + math.log(n)) / lam
    coverage = float(np.mean((span >= lo) & (span <= hi)))
    return GumbelFit(ks, ks < threshold, float(np.median(z)), coverage, seed)
