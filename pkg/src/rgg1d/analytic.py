"""Closed-form connectivity probabilities, hole moments, transforms and limits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln

from .core import clamp_probability, log1mexp


@dataclass(frozen=True)
class HoleMoments:
    mean: float
    variance: float


@dataclass(frozen=True)
class LimitValue:
    """A truncated series together with a guaranteed bound on the error."""

    value: float
    tail_bound: float
    terms_used: int


def _log_connectivity(n: int, lam: float, r: float) -> float:
    if n <= 1:
        return 0.0
    if r == 0:
        return -math.inf
    i = np.arange(1, n, dtype=float)
    return math.fsum(np.atleast_1d(log1mexp(i * lam * r)))


def connectivity_prob(n: int, lam: float, r: float) -> float:
    """P(the n-node exponential graph is connected) = prod_{i<n} (1 - e^{-i lam r})."""
    if n < 1:
        raise ValueError("n must be ≥ 1")
    return clamp_probability(math.exp(_log_connectivity(n, lam, r)))


def log_connectivity_table(n_max: int, lam: float, r: float) -> np.ndarray:
    """``log P^c_m`` for ``m = 0..n_max`` with ``P^c_0 = P^c_1 = 1``."""
    out = np.zeros(n_max + 1)
    if n_max >= 2:
        terms = np.atleast_1d(log1mexp(np.arange(1, n_max, dtype=float) * lam * r))
        out[2:] = np.cumsum(terms)
    return out


def connectivity_prob_limit(lam: float, r: float, tol: float = 1e-12) -> LimitValue:
    """Limit of the connectivity probability as n grows.

    Sums ``-log P_c = sum_j e^{-j lam r} / (j (1 - e^{-j lam r}))``. Term ratios
    are bounded by ``q = e^{-lam r}``, so after term ``t_j`` the remaining tail
    is at most ``t_j / (1 - q)``; the error on ``P_c`` itself is no larger.
    """
    x = lam * r
    if not x > 0:
        raise ValueError("limit is 0, series diverges (lambda*r must be > 0)")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    if math.isinf(x):
        return LimitValue(1.0, 0.0, 0)
    one_minus_q = -math.expm1(-x)
    total = 0.0
    start = 1
    block = 4096
    while True:
        j = np.arange(start, start + block, dtype=float)
        terms = np.exp(-j * x) / (j * -np.expm1(-j * x))
        bounds = terms / one_minus_q
        hit = np.nonzero(bounds < tol)[0]
        if hit.size:
            stop = int(hit[0])
            total += math.fsum(terms[: stop + 1])
            used = start + stop
            tail = float(bounds[stop])
            break
        total += math.fsum(terms)
        start += block
    value = math.exp(-total)
    return LimitValue(value, value * -math.expm1(-tail), used)


def uv_bridge_prob(n: int, k: int, lam: float, r: float) -> float:
    """P(U + V <= r) for independent U ~ Exp(k lam), V ~ Exp((n-k) lam).

    These are the innermost positive and negative nodes of a two-sided sample
    with k nodes on one side.
    """
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in 1..n-1, got k={k}, n={n}")
    if math.isinf(r):
        return 1.0
    a, b = k * lam * r, (n - k) * lam * r
    if 2 * k == n:
        p = -math.expm1(-a) - a * math.exp(-a)
    else:
        p = ((n - k) * -math.expm1(-a) - k * -math.expm1(-b)) / (n - 2 * k)
    return clamp_probability(p)


def double_exp_connectivity_prob(n: int, lam: float, r: float) -> float:
    """Connectivity probability for Laplace (double exponential) node positions.

    Conditions on the number k of nodes left of the origin: both halves must
    be connected and the two innermost nodes must bridge the origin. The
    one-sided configurations (k = 0 or n) need no bridge.
    """
    if n < 1:
        raise ValueError("n must be ≥ 1")
    logp = log_connectivity_table(n, lam, r)
    total = math.exp(logp[n] - (n - 1) * math.log(2.0))
    for k in range(1, n):
        if logp[k] == -math.inf or logp[n - k] == -math.inf:
            continue
        log_w = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - n * math.log(2.0)
        total += math.exp(log_w + logp[k] + logp[n - k]) * uv_bridge_prob(n, k, lam, r)
    return clamp_probability(total)


def _rates_and_tails(n: int, lam: float, r: float):
    k = np.arange(1, n, dtype=float)
    rate = k * lam
    tail = np.exp(-rate * r) if not math.isinf(r) else np.zeros_like(rate)
    return rate, tail


def hole_length_moments(n: int, lam: float, r: float) -> HoleMoments:
    """Mean and variance of the total uncovered length ``sum max(Y_i - r, 0)``.

    Each term is 0 with probability ``1 - t`` and otherwise Exp(rate), with
    ``t = e^{-rate r}``, so its variance is ``t (2 - t) / rate^2``.
    """
    if n < 2:
        return HoleMoments(0.0, 0.0)
    rate, tail = _rates_and_tails(n, lam, r)
    mean = math.fsum(tail / rate)
    var = math.fsum(tail * (2.0 - tail) / rate**2)
    return HoleMoments(mean, var)


def hole_count_moments(n: int, lam: float, r: float) -> HoleMoments:
    """Mean and variance of the number of spacings longer than ``r``."""
    if n < 2:
        return HoleMoments(0.0, 0.0)
    x = lam * r
    if x == 0:
        mean = float(n - 1)
    elif math.isinf(x):
        mean = 0.0
    else:
        mean = math.exp(-x) * -math.expm1(-(n - 1) * x) / -math.expm1(-x)
    _, tail = _rates_and_tails(n, lam, r)
    var = math.fsum(tail * (1.0 - tail))
    return HoleMoments(mean, var)


def hole_length_laplace(n: int, lam: float, r: float, theta: float) -> float:
    """``E[exp(theta * H)]`` for the total hole length H; needs ``theta < lam``."""
    if not theta < lam:
        raise ValueError(f"theta must be < lambda ({lam}), got {theta}")
    if n < 2 or theta == 0:
        return 1.0
    rate, tail = _rates_and_tails(n, lam, r)
    return math.exp(math.fsum(np.log1p(theta * tail / (rate - theta))))


def hole_count_mgf(n: int, lam: float, r: float, theta: float) -> float:
    """``E[exp(theta * NH)]`` for the hole count NH."""
    if n < 2 or theta == 0:
        return 1.0
    _, tail = _rates_and_tails(n, lam, r)
    factors = 1.0 + tail * math.expm1(theta)
    if np.any(factors <= 0):
        raise ValueError("theta outside the domain: a factor is not positive")
    return math.exp(math.fsum(np.log(factors)))


def degree_count_limit(lam: float, r: float) -> float:
    """Limiting expected number of degree-k nodes, ``1 / (e^{lam r} - e^{-lam r})``.

    The same for every k.
    """
    x = lam * r
    if not x > 0:
        raise ValueError("lambda*r must be > 0 (c = 0)")
    if x > 700:
        return 0.0
    return 1.0 / (2.0 * math.sinh(x))


def degree_count_expectation(n: int, k: int, lam: float, r: float) -> float:
    """Exact ``E[#nodes beyond r with degree k]`` for finite n.

    With ``c = 2 sinh(lam r)`` the substitution ``y = c e^{-lam x}`` turns the
    binomial integral into a regularized incomplete beta function:
    ``I_{1 - e^{-2 lam r}}(k + 1, n - k) / c``.
    """
    if not 0 <= k <= n - 1:
        raise ValueError("k must lie in 0..n-1")
    x = lam * r
    return float(betainc(k + 1, n - k, -math.expm1(-2.0 * x))) * degree_count_limit(lam, r)


def gumbel_quantile(p: float) -> float:
    return -math.log(-math.log(p))


def span_gumbel_interval(n: float, lam: float, alpha: float) -> tuple[float, float]:
    """Equal-tail ``1 - alpha`` interval for the span from the Gumbel limit of
    ``lam * span - ln n``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    base = math.log(n)
    return (
        (base + gumbel_quantile(alpha / 2)) / lam,
        (base + gumbel_quantile(1 - alpha / 2)) / lam,
    )
