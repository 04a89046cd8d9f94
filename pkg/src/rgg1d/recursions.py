"""Distributions computed by recursion: component counts, size-m components,
their large-n limits and the number of redundant (relay-covered) nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.signal import fftconvolve

from .analytic import connectivity_prob, connectivity_prob_limit
from .core import ZetaTable, clamp_probability, log1mexp

PMF_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on an integer support.

    ``tail_bound`` is zero for exact finite-n results and bounds the missing
    mass (or quadrature error) for truncated or numerically integrated ones.
    """

    support: np.ndarray
    probs: np.ndarray
    label: str
    tail_bound: float = 0.0

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if np.any(self.probs < -1e-12):
            raise ValueError(f"{self.label}: negative probability")

    def __getitem__(self, k: int) -> float:
        hit = np.nonzero(self.support == k)[0]
        return float(self.probs[hit[0]]) if hit.size else 0.0

    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(self.support * self.probs)

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.support, self.probs)}

    def tv_distance(self, other) -> float:
        """Total variation distance to another Pmf or a ``{k: p}`` mapping."""
        mine = self.as_dict()
        theirs = other.as_dict() if isinstance(other, Pmf) else dict(other)
        keys = set(mine) | set(theirs)
        return 0.5 * math.fsum(abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) for k in keys)


def component_pmf(n: int, lam: float, r: float) -> Pmf:
    """Distribution of the number of connected components (k = 1..n).

    Backward recursion over the first node j of the suffix graph on nodes
    j..n: either Y_j <= r and node j joins the first suffix component, or a
    new component starts.
    """
    if n < 1:
        raise ValueError("n must be ≥ 1")
    psi = np.array([1.0])
    for j in range(n - 1, 0, -1):
        x = lam * (n - j) * r
        gap = math.exp(-x) if not math.isinf(x) else 0.0
        zeta = -math.expm1(-x) if not math.isinf(x) else 1.0
        nxt = np.zeros(psi.size + 1)
        nxt[:-1] += zeta * psi
        nxt[1:] += gap * psi
        psi = nxt
    return Pmf(np.arange(1, n + 1), psi, "component_count")


def _theta_table(lam: float, r: float, tol: float):
    """Limits of P(first component ends s nodes before the last), s = 0..S.

    theta_s = P_c e^{-lam r s} / prod_{i=1}^{s} (1 - e^{-i lam r}); each term is
    at most e^{-lam r s}, which fixes the truncation point S.
    """
    x = lam * r
    pc = connectivity_prob_limit(lam, r, tol)
    one_minus_q = -math.expm1(-x)
    S = 0
    while math.exp(-x * (S + 1)) / one_minus_q >= tol:
        S += 1
    s = np.arange(0, S + 1, dtype=float)
    denom = np.concatenate([[0.0], np.cumsum(np.atleast_1d(log1mexp(np.arange(1, S + 1) * x)))])
    theta = np.exp(math.log(pc.value) - x * s - denom[: S + 1])
    tail = math.exp(-x * (S + 1)) / one_minus_q + pc.tail_bound / pc.value
    return theta, tail


def theta_limit(s: int, lam: float, r: float, tol: float = 1e-12) -> float:
    """Large-n probability that the first component ends ``s`` nodes before the last."""
    if s < 0:
        raise ValueError("s must be ≥ 0")
    x = lam * r
    pc = connectivity_prob_limit(lam, r, tol).value
    denom = math.fsum(np.atleast_1d(log1mexp(np.arange(1, s + 1) * x))) if s else 0.0
    return clamp_probability(math.exp(math.log(pc) - x * s - denom))


def theta_pmf(lam: float, r: float, tol: float = 1e-12) -> Pmf:
    theta, tail = _theta_table(lam, r, tol)
    return Pmf(np.arange(theta.size), theta, "theta", tail)


def component_pmf_limit(lam: float, r: float, tol: float = 1e-12) -> Pmf:
    """Large-n distribution of the number of components.

    Conditioning on the first component ending ``s`` nodes before the last,
    the remaining ``s`` nodes behave like a fresh s-node exponential graph and
    must contribute ``k - 1`` components.
    """
    theta, tail = _theta_table(lam, r, tol)
    S = theta.size - 1
    probs = np.zeros(S + 1)  # index k-1, k = 1..S+1
    probs[0] += theta[0]
    for s in range(1, S + 1):
        sub = component_pmf(s, lam, r).probs  # k' = 1..s
        probs[1 : s + 1] += theta[s] * sub
    return Pmf(np.arange(1, S + 2), probs, "component_count", tail)


def size_m_component_pmf(n: int, m: int, lam: float, r: float) -> Pmf:
    """Distribution of the number of components with exactly ``m`` nodes.

    ``Q[i, k]`` is the probability that nodes i..n hold k size-m components.
    Conditioning on the first gap wider than ``r`` at or after node i, i.e.
    on the end of the first component of the suffix, gives
    ``Q[i] = sum_j run(i, j) Q[j]`` with a one-step shift in k when that
    component has m nodes, plus the case that the suffix is connected.
    """
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in 1..n, got m={m}, n={n}")
    K = n // m
    table = ZetaTable(n, lam, r)
    Q = np.zeros((n + 2, K + 1))
    Q[n + 1, 0] = 1.0
    for i in range(n, 0, -1):
        row = np.zeros(K + 1)
        if i < n:
            runs = table.runs_from(i)  # j = i+1..n
            nz = np.nonzero(runs)[0]
            if nz.size:
                lo, hi = nz[0], nz[-1] + 1
                row += runs[lo:hi] @ Q[i + 1 + lo : i + 1 + hi]
            if i + m <= n:
                w = runs[m - 1]
                row[1:] += w * Q[i + m, :-1]
                row -= w * Q[i + m]
        tail = table.all_connected_from(i) * Q[n + 1]
        if n - i + 1 == m:
            row[1:] += tail[:-1]
        else:
            row += tail
        Q[i] = np.maximum(row, 0.0)
    return Pmf(np.arange(K + 1), Q[1], f"size_{m}_components")


def size_m_component_pmf_limit(m: int, lam: float, r: float, tol: float = 1e-12) -> Pmf:
    """Large-n distribution of the number of size-m components.

    Sums ``theta_s * P(k size-m components among s fresh nodes)``; the giant
    first component never has size m in the limit.
    """
    if m < 1:
        raise ValueError("m must be ≥ 1")
    theta, tail = _theta_table(lam, r, tol)
    S = theta.size - 1
    probs = np.zeros(S // m + 1)
    probs[0] += theta[0]
    for s in range(1, S + 1):
        if s < m:
            probs[0] += theta[s]
            continue
        sub = size_m_component_pmf(s, m, lam, r).probs
        probs[: sub.size] += theta[s] * sub
    return Pmf(np.arange(probs.size), probs, f"size_{m}_components", tail)


# --- hypoexponential sums of spacings -------------------------------------


def _hypo_weights(multipliers) -> list[Fraction]:
    """Exact partial-fraction weights ``prod_{m != h} a_m / (a_m - a_h)`` for
    distinct integer rate multipliers ``a``."""
    out = []
    for h, ah in enumerate(multipliers):
        w = Fraction(1)
        for mm, am in enumerate(multipliers):
            if mm != h:
                w *= Fraction(am, am - ah)
        out.append(w)
    return out


def _working_dps(weights) -> int:
    biggest = max((abs(w) for w in weights), default=Fraction(1))
    return 30 + max(0, int(math.log10(float(biggest) + 1.0)))


def hypoexponential_density(n: int, j: int, i: int, lam: float, z: float) -> float:
    """Density of ``Y_j + ... + Y_{i-1}``, a sum of exponentials with distinct
    rates ``(n - h) lam``."""
    mult = [n - h for h in range(j, i)]
    w = _hypo_weights(mult)
    with mpmath.workdps(_working_dps(w)):
        total = mpmath.mpf(0)
        for wh, a in zip(w, mult):
            rate = a * mpmath.mpf(lam)
            total += mpmath.mpf(wh.numerator) / wh.denominator * rate * mpmath.exp(-rate * z)
        return float(total)


def _hypo_cdf(mult, lam: float, r: float, w=None):
    w = w or _hypo_weights(mult)
    total = mpmath.mpf(0)
    for wh, a in zip(w, mult):
        total += mpmath.mpf(wh.numerator) / wh.denominator * -mpmath.expm1(-a * mpmath.mpf(lam) * r)
    return total


def _denominator(n: int, lam: float, r: float, lo: int, hi: int):
    """``prod_{m=lo}^{hi} P(Y_m <= r)`` in mpmath."""
    out = mpmath.mpf(1)
    for mm in range(lo, hi + 1):
        out *= -mpmath.expm1(-(n - mm) * mpmath.mpf(lam) * r)
    return out


def crossing_prob(n: int, j: int, i: int, lam: float, r: float) -> float:
    """P(X_(i) <= X_(j) + r < X_(i+1) | connected), for 1 <= j < i <= n-1.

    ``Z = Y_j + ... + Y_{i-1}`` is hypoexponential. Given connectivity the
    spacings are independent exponentials truncated to [0, r], so the
    probability is ``int_0^r g_Z(z) P(r - z < Y_i <= r) dz`` divided by
    ``prod_{m=j}^{i} P(Y_m <= r)``.
    """
    if not 1 <= j < i <= n - 1:
        raise IndexError(f"need 1 <= j < i <= n-1, got j={j}, i={i}, n={n}")
    mult = [n - h for h in range(j, i)]
    w = _hypo_weights(mult)
    with mpmath.workdps(_working_dps(w)):
        lam_i = (n - i) * mpmath.mpf(lam)
        r_ = mpmath.mpf(r)
        ei = mpmath.exp(-lam_i * r_)
        num = mpmath.mpf(0)
        for wh, h in zip(w, range(j, i)):
            lam_h = (n - h) * mpmath.mpf(lam)
            eh = mpmath.exp(-lam_h * r_)
            term = mpmath.mpf(n - h) / (h - i) * (eh - ei) - ei * (1 - eh)
            num += mpmath.mpf(wh.numerator) / wh.denominator * term
        p = num / _denominator(n, lam, r, j, i)
        return clamp_probability(float(p))


def reach_end_prob(n: int, j: int, lam: float, r: float) -> float:
    """P(X_(n) - X_(j) <= r | connected): every later node is in range of node j."""
    if not 1 <= j <= n - 1:
        raise IndexError(f"need 1 <= j <= n-1, got j={j}, n={n}")
    mult = [n - h for h in range(j, n)]
    w = _hypo_weights(mult)
    with mpmath.workdps(_working_dps(w)):
        p = _hypo_cdf(mult, lam, r, w) / _denominator(n, lam, r, j, n - 1)
        return clamp_probability(float(p))


def _redundant_recursion(n: int, lam: float, r: float) -> np.ndarray:
    """phi(j, k): k redundant nodes after node j given connectivity, by
    conditioning on the last node within range of node j and then treating
    the remainder as if it started afresh at that node."""
    cross = {}
    phi: dict[int, np.ndarray] = {}
    for j in range(n - 1, 0, -1):
        row = np.zeros(n - j)
        row[n - j - 1] = reach_end_prob(n, j, lam, r)
        for k in range(n - j - 1):
            acc = 0.0
            for i in range(j + 1, min(j + k + 1, n - 1) + 1):
                rest = k - (i - j - 1)
                if rest <= n - i - 1:
                    if (j, i) not in cross:
                        cross[(j, i)] = crossing_prob(n, j, i, lam, r)
                    acc += cross[(j, i)] * phi[i][rest]
            row[k] = acc
        phi[j] = row
    return phi[1]


def _relay_scan(n: int, lam: float, r: float, G: int) -> np.ndarray:
    """Joint P(k redundant, connected) by scanning nodes left to right.

    State at node m is the distance d from the current relay (the last chosen
    node of the greedy chain) to node m. The next spacing Y_m is fresh, so the
    pair (d, k) is Markov: if d + Y_m <= r node m is skipped (redundant),
    otherwise node m becomes the relay and d resets to Y_m. Densities in d are
    carried on a uniform grid with trapezoidal convolution.
    """
    h = r / G
    d = np.linspace(0.0, r, G + 1)
    K = n - 1
    g = np.zeros((K, G + 1))
    g[0] = (n - 1) * lam * np.exp(-(n - 1) * lam * d)
    for m in range(2, n):
        rate = (n - m) * lam
        f = rate * np.exp(-rate * d)
        conv = fftconvolve(g, f[None, :], axes=1)[:, : G + 1] * h
        conv -= 0.5 * h * (g * f[0] + g[:, :1] * f[None, :])
        new = np.zeros_like(g)
        new[1:] = conv[:-1]
        cum = np.concatenate(
            [np.zeros((K, 1)), np.cumsum(0.5 * h * (g[:, 1:] + g[:, :-1]), axis=1)], axis=1
        )
        new += f[None, :] * (cum[:, -1:] - cum[:, ::-1])
        g = new
    weights = np.full(G + 1, h)
    weights[0] = weights[-1] = 0.5 * h
    return g @ weights


def redundant_pmf(n: int, lam: float, r: float, method: str = "exact", grid: int | None = None) -> Pmf:
    """Distribution of the number of redundant nodes given connectivity (k = 0..n-2).

    A node is redundant when the greedy relay chain (from the leftmost node,
    repeatedly hop to the furthest node within range) skips it.

    ``method="exact"`` integrates the relay scan numerically (two grid sizes,
    Richardson-extrapolated); ``tail_bound`` reports the gap between the
    integrated and the exact connectivity probability. ``method="recursion"``
    uses the crossing-probability recursion, which ignores that the spacing
    after a chosen relay is conditioned to be long and is therefore only
    approximate for n >= 4.
    """
    if n < 2:
        raise ValueError("n must be ≥ 2")
    if n == 2:
        return Pmf(np.array([0]), np.array([1.0]), "redundant")
    pc = connectivity_prob(n, lam, r)
    if pc == 0.0:
        raise ValueError("connectivity has probability 0; conditioning undefined")
    if method == "recursion":
        probs = _redundant_recursion(n, lam, r)
        return Pmf(np.arange(n - 1), probs, "redundant")
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if grid is None:
        scale = 20.0 * (n - 1) * lam * r
        grid = int(2 ** max(9, math.ceil(math.log2(max(scale, 1.0)))))
        grid = min(grid, 2**15)
    coarse = _relay_scan(n, lam, r, grid)
    fine = _relay_scan(n, lam, r, 2 * grid)
    joint = np.maximum((4.0 * fine - coarse) / 3.0, 0.0)
    total = math.fsum(joint)
    return Pmf(np.arange(n - 1), joint / total, "redundant", abs(total / pc - 1.0))
