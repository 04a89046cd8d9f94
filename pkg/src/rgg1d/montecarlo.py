"""Seeded samplers, per-configuration graph statistics and MC estimators.

Sample indices are split into fixed-size chunks. Each chunk draws from its
own counter-based Philox stream keyed by ``(seed, stream, chunk)``, so the
result of an estimate depends only on the seed and the parameters, never on
how many worker threads evaluated the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ModelParams, Variant, validate_params

DEGREE_CAP = 64
CHUNK_BUDGET = 2**21  # positions per chunk


@dataclass
class SampleStats:
    connected: bool
    num_components: int
    component_sizes: list[int]
    num_holes: int
    total_hole_length: float
    span: float
    conn_distance: float
    largest_nn_distance: float
    degree_histogram: dict[int, int]
    degree_histogram_beyond_r: dict[int, int]
    redundant_count: int  # -1 when the configuration is disconnected


@dataclass(frozen=True)
class EstimateResult:
    mean: float
    stderr: float
    num_samples: int
    seed: int
    statistic: str
    num_drawn: int = 0
    options: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        return self.num_samples / self.num_drawn if self.num_drawn else 1.0


# --- random streams --------------------------------------------------------


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the substream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def worker_count() -> int:
    env = os.environ.get("RGG1D_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, min(cap, int(env)))
        except ValueError:
            pass
    return cap


def chunk_size_for(width: int) -> int:
    return max(1, min(8192, CHUNK_BUDGET // max(width, 1)))


# --- samplers --------------------------------------------------------------


def _exponentials(rng: np.random.Generator, shape, rate) -> np.ndarray:
    return -np.log1p(-rng.random(shape)) / rate


def draw_iid(params: ModelParams, rng: np.random.Generator, shape) -> np.ndarray:
    """Unsorted i.i.d. positions by inverse CDF (not defined for G*)."""
    lam = params.lam
    if params.variant is Variant.EXPONENTIAL:
        return _exponentials(rng, shape, lam)
    if params.variant is Variant.TRUNCATED:
        p = -math.expm1(-lam * params.T)
        return -np.log1p(-rng.random(shape) * p) / lam
    if params.variant is Variant.DOUBLE_EXPONENTIAL:
        u = rng.random(shape)
        left = u < 0.5
        w = np.where(left, 2.0 * u, 2.0 * u - 1.0)
        mag = -np.log1p(-w) / lam
        return np.where(left, -mag, mag)
    raise ValueError("G* positions are not i.i.d.; use sample_positions")


def sample_positions(
    params: ModelParams,
    rng: np.random.Generator,
    size: int | None = None,
    gstar_method: str = "spacings",
) -> np.ndarray:
    """Sorted node positions, shape ``(n,)`` or ``(size, n)``.

    For G* the positions are the ``n`` smallest of ``N`` exponentials, built
    either from independent spacings with rates ``(N - i) lam`` or by sorting.
    """
    n = params.n
    rows = 1 if size is None else size
    if params.variant is Variant.GSTAR:
        N = params.N
        if gstar_method == "spacings":
            rates = params.lam * np.arange(N, N - n, -1, dtype=float)
            x = np.cumsum(_exponentials(rng, (rows, n), rates), axis=1)
        elif gstar_method == "sort":
            z = _exponentials(rng, (rows, N), params.lam)
            if n < N:
                z = np.partition(z, n - 1, axis=1)[:, :n]
            x = np.sort(z, axis=1)
        else:
            raise ValueError(f"unknown G* method {gstar_method!r}")
    else:
        x = np.sort(draw_iid(params, rng, (rows, n)), axis=1)
    return x[0] if size is None else x


# --- per-configuration statistics -------------------------------------------


def _degrees(x: np.ndarray, r: float) -> np.ndarray:
    return np.searchsorted(x, x + r, side="right") - np.searchsorted(x, x - r, side="left") - 1


def _histogram(values: np.ndarray, cap: int) -> dict[int, int]:
    counts = np.bincount(np.minimum(values, cap))
    return {int(k): int(c) for k, c in enumerate(counts) if c}


def relay_chain_length(x: np.ndarray, r: float) -> int:
    """Length of the greedy relay chain: from the leftmost node repeatedly hop
    to the furthest node within ``r``. Returns -1 if the chain gets stuck."""
    n = x.size
    j, length = 0, 1
    while j < n - 1:
        i = int(np.searchsorted(x, x[j] + r, side="right")) - 1
        if i <= j:
            return -1
        j = i
        length += 1
    return length


def _nn_distance(y: np.ndarray) -> np.ndarray:
    """Largest nearest-neighbour distance from spacings ``y`` of shape (B, n-1)."""
    if y.shape[1] == 0:
        return np.zeros(y.shape[0])
    inf = np.full((y.shape[0], 1), np.inf)
    left = np.concatenate([inf, y], axis=1)
    right = np.concatenate([y, inf], axis=1)
    return np.minimum(left, right).max(axis=1)


def graph_stats(positions, r: float, degree_cap: int = DEGREE_CAP) -> SampleStats:
    """All statistics of one configuration. ``positions`` must be sorted."""
    x = np.asarray(positions, dtype=float)
    if x.size == 0:
        raise ValueError("empty configuration")
    y = np.diff(x)
    gaps = y > r
    starts = np.concatenate([[0], np.flatnonzero(gaps) + 1, [x.size]])
    sizes = np.diff(starts)
    deg = _degrees(x, r)
    chain = relay_chain_length(x, r) if not gaps.any() else -1
    return SampleStats(
        connected=not gaps.any(),
        num_components=int(sizes.size),
        component_sizes=[int(s) for s in sizes],
        num_holes=int(gaps.sum()),
        total_hole_length=float(np.clip(y - r, 0.0, None).sum()),
        span=float(x[-1] - x[0]),
        conn_distance=float(y.max()) if y.size else 0.0,
        largest_nn_distance=float(_nn_distance(y[None, :])[0]),
        degree_histogram=_histogram(deg, degree_cap),
        degree_histogram_beyond_r=_histogram(deg[x > r], degree_cap),
        redundant_count=x.size - chain if chain > 0 else -1,
    )


# --- batch statistics for estimators -----------------------------------------
# Each takes sorted positions X (B, n), spacings Y (B, n-1), params, options.


def _size_m_count(X, Y, params, m):
    out = np.empty(X.shape[0])
    for b in range(X.shape[0]):
        starts = np.concatenate([[0], np.flatnonzero(Y[b] > params.r) + 1, [X.shape[1]]])
        out[b] = np.count_nonzero(np.diff(starts) == m)
    return out


def _degree_count(X, Y, params, k, beyond_r=True):
    out = np.empty(X.shape[0])
    for b in range(X.shape[0]):
        x = X[b]
        deg = _degrees(x, params.r)
        mask = deg == k
        if beyond_r:
            mask &= x > params.r
        out[b] = np.count_nonzero(mask)
    return out


def _redundant(X, Y, params):
    out = np.empty(X.shape[0])
    for b in range(X.shape[0]):
        length = relay_chain_length(X[b], params.r)
        if length < 0:
            raise ValueError("redundant_count needs connected configurations (condition_on_connected)")
        out[b] = X.shape[1] - length
    return out


STATISTICS: dict[str, Callable] = {
    "connected": lambda X, Y, p: (Y <= p.r).all(axis=1).astype(float),
    "num_components": lambda X, Y, p: 1.0 + (Y > p.r).sum(axis=1),
    "num_holes": lambda X, Y, p: (Y > p.r).sum(axis=1).astype(float),
    "total_hole_length": lambda X, Y, p: np.clip(Y - p.r, 0.0, None).sum(axis=1),
    "span": lambda X, Y, p: X[:, -1] - X[:, 0],
    "normalized_span": lambda X, Y, p: p.lam * (X[:, -1] - X[:, 0]) - math.log(p.n),
    "conn_distance": lambda X, Y, p: Y.max(axis=1) if Y.shape[1] else np.zeros(X.shape[0]),
    "largest_nn_distance": lambda X, Y, p: _nn_distance(Y),
    "max_position": lambda X, Y, p: X[:, -1],
    "mean_position": lambda X, Y, p: X.mean(axis=1),
    "spacing": lambda X, Y, p, i: Y[:, i - 1],
    "exp_hole_length": lambda X, Y, p, theta: np.exp(theta * np.clip(Y - p.r, 0.0, None).sum(axis=1)),
    "exp_hole_count": lambda X, Y, p, theta: np.exp(theta * (Y > p.r).sum(axis=1)),
    "restricted_disconnected": lambda X, Y, p, k: (Y[:, : k - 1] > p.r).any(axis=1).astype(float),
    "size_m_count": _size_m_count,
    "degree_count": _degree_count,
    "redundant_count": _redundant,
}

INDICATORS = {"connected", "restricted_disconnected"}


def _chunk_values(params, statistic, options, seed, stream, chunk, count, condition, gstar_method):
    rng = make_rng(seed, stream, chunk)
    X = sample_positions(params, rng, size=count, gstar_method=gstar_method)
    Y = np.diff(X, axis=1)
    rows = np.arange(count)
    if condition:
        keep = (Y <= params.r).all(axis=1)
        X, Y, rows = X[keep], Y[keep], rows[keep]
    if X.shape[0] == 0:
        return np.zeros(0), rows
    return np.asarray(STATISTICS[statistic](X, Y, params, **options), dtype=float), rows


def sample_values(
    params: ModelParams,
    statistic: str,
    num_samples: int,
    seed: int,
    condition_on_connected: bool = False,
    workers: int | None = None,
    stream: int = 0,
    gstar_method: str = "spacings",
    max_draws: int | None = None,
    **options,
) -> tuple[np.ndarray, int]:
    """Per-sample values of ``statistic`` in sample-index order.

    Returns ``(values, drawn)``; under conditioning ``values`` holds the first
    ``num_samples`` accepted configurations and ``drawn`` counts all draws.
    """
    params = validate_params(params)
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {sorted(STATISTICS)}")
    if num_samples < 1:
        raise ValueError("num_samples must be ≥ 1")
    size = chunk_size_for(params.N if params.variant is Variant.GSTAR else params.n)
    workers = workers or worker_count()
    max_draws = max_draws or max(10**6, 1000 * num_samples)

    def run(c, count):
        return _chunk_values(
            params, statistic, options, seed, stream, c, count, condition_on_connected, gstar_method
        )

    collected: list[np.ndarray] = []
    have = drawn = 0
    next_chunk = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while have < num_samples:
            if condition_on_connected:
                if drawn >= max_draws:
                    rate = have / drawn if drawn else 0.0
                    raise ValueError(
                        f"only {have} of {num_samples} configurations accepted after {drawn} draws "
                        f"(acceptance rate {rate:.3g}); connectivity is too unlikely for accept-reject"
                    )
                jobs = [(next_chunk + w, size) for w in range(workers)]
            else:
                remaining = num_samples - drawn
                jobs = []
                c = next_chunk
                while remaining > 0 and len(jobs) < 4 * workers:
                    jobs.append((c, min(size, remaining)))
                    remaining -= size
                    c += 1
            for (c, count), (vals, rows) in zip(jobs, pool.map(lambda a: run(*a), jobs)):
                if have >= num_samples:
                    break
                take = vals[: num_samples - have]
                collected.append(take)
                have += take.size
                # a partly used chunk counts draws up to its last accepted row
                drawn += count if take.size == vals.size else int(rows[take.size - 1]) + 1
            next_chunk += len(jobs)
    return np.concatenate(collected), drawn


def estimate(
    params: ModelParams,
    statistic: str,
    num_samples: int,
    seed: int,
    condition_on_connected: bool = False,
    workers: int | None = None,
    stream: int = 0,
    gstar_method: str = "spacings",
    **options,
) -> EstimateResult:
    """Monte Carlo mean of ``statistic`` with its standard error."""
    values, drawn = sample_values(
        params,
        statistic,
        num_samples,
        seed,
        condition_on_connected=condition_on_connected,
        workers=workers,
        stream=stream,
        gstar_method=gstar_method,
        **options,
    )
    N = values.size
    mean = float(np.mean(values))
    if statistic in INDICATORS:
        stderr = math.sqrt(max(mean * (1.0 - mean), 0.0) / N)
    else:
        stderr = float(np.std(values, ddof=1) / math.sqrt(N)) if N > 1 else 0.0
    return EstimateResult(mean, stderr, N, int(seed), statistic, drawn, dict(options))
