"""Independent reference computations used only by the tests.

None of these reuse library code: they rely on brute-force enumeration,
quadrature, high-precision arithmetic or binomial identities.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
from scipy import integrate, stats


def gap_probs(n, lam, r):
    """P(Y_i > r) for i = 1..n-1."""
    return [math.exp(-(n - i) * lam * r) for i in range(1, n)]


def connectivity_mp(n, lam, r, dps=50):
    with mpmath.workdps(dps):
        out = mpmath.mpf(1)
        for i in range(1, n):
            out *= 1 - mpmath.exp(-i * mpmath.mpf(lam) * r)
        return float(out)


def connectivity_n3_quadrature(lam, r):
    """Integrate the joint density of three sorted exponentials over the
    region where both gaps are at most r."""
    f = lambda x3, x2, x1: 6 * lam**3 * math.exp(-lam * (x1 + x2 + x3))
    val, _ = integrate.tplquad(
        f, 0, np.inf, lambda x1: x1, lambda x1: x1 + r, lambda x1, x2: x2, lambda x1, x2: x2 + r, epsabs=1e-12
    )
    return val


def laplace_pair_connected(lam, r):
    """P(|X1 - X2| <= r) for two Laplace(0, 1/lam) variables by quadrature."""
    dist = stats.laplace(scale=1 / lam)
    g = lambda x: dist.pdf(x) * (dist.cdf(x + r) - dist.cdf(x - r))
    return integrate.quad(g, -np.inf, 0, epsabs=1e-13)[0] + integrate.quad(g, 0, np.inf, epsabs=1e-13)[0]


def gap_patterns(n, lam, r):
    """Yield (pattern, probability) over all 2^(n-1) wide/narrow gap patterns."""
    q = gap_probs(n, lam, r)
    for pattern in itertools.product((False, True), repeat=n - 1):
        p = 1.0
        for wide, qi in zip(pattern, q):
            p *= qi if wide else 1 - qi
        yield pattern, p


def component_sizes(pattern):
    sizes, run = [], 1
    for wide in pattern:
        if wide:
            sizes.append(run)
            run = 1
        else:
            run += 1
    sizes.append(run)
    return sizes


def component_pmf_brute(n, lam, r):
    out = {}
    for pattern, p in gap_patterns(n, lam, r):
        k = 1 + sum(pattern)
        out[k] = out.get(k, 0.0) + p
    return out


def size_m_pmf_brute(n, m, lam, r):
    out = {}
    for pattern, p in gap_patterns(n, lam, r):
        k = component_sizes(pattern).count(m)
        out[k] = out.get(k, 0.0) + p
    return out


def crossing_order_stat(n, j, i, lam, r):
    """P(X_(i) <= X_(j) + r < X_(i+1) | connected) by quadrature.

    Given X_(j), the n - j later nodes are i.i.d. shifted exponentials, so
    ``s = X_(i) - X_(j)`` is the (i-j)-th smallest of n - j Exp(lam). The event
    needs ``s <= r`` (which keeps Y_j..Y_{i-1} short) and ``Y_i`` in
    ``(r - s, r]``; the remaining spacings factor out of the conditioning.
    """
    with mpmath.workdps(40):
        lam_, r_ = mpmath.mpf(lam), mpmath.mpf(r)
        m, k = n - j, i - j
        lam_i = (n - i) * lam_

        def integrand(s):
            F = -mpmath.expm1(-lam_ * s)
            dens = mpmath.binomial(m, k) * k * F ** (k - 1) * lam_ * mpmath.exp(-(m - k + 1) * lam_ * s)
            return dens * (mpmath.exp(-lam_i * (r_ - s)) - mpmath.exp(-lam_i * r_))

        num = mpmath.quad(integrand, [0, r_])
        den = mpmath.mpf(1)
        for h in range(j, i + 1):
            den *= -mpmath.expm1(-(n - h) * lam_ * r_)
        return float(num / den)


def reach_end_order_stat(n, j, lam, r):
    """P(X_(n) - X_(j) <= r | connected) = (1 - e^{-lam r})^{n-j} / prod P(Y_h <= r)."""
    with mpmath.workdps(60):
        lam_, r_ = mpmath.mpf(lam), mpmath.mpf(r)
        num = (1 - mpmath.exp(-lam_ * r_)) ** (n - j)
        den = mpmath.mpf(1)
        for h in range(j, n):
            den *= 1 - mpmath.exp(-(n - h) * lam_ * r_)
        return float(num / den)


def redundant_n3(lam, r):
    """n = 3: the middle node is redundant iff Y_1 + Y_2 <= r, and given
    connectivity that has probability 1 / (1 + e^{-lam r})."""
    return 1.0 / (1.0 + math.exp(-lam * r))


def positive_part_mean(rate, r):
    """E[max(Y - r, 0)] for Y ~ Exp(rate) by quadrature."""
    return integrate.quad(lambda y: (y - r) * rate * math.exp(-rate * y), r, np.inf)[0]


def positive_part_second(rate, r):
    return integrate.quad(lambda y: (y - r) ** 2 * rate * math.exp(-rate * y), r, np.inf)[0]


def hypo_two_rates(a, b, z):
    """Density of Exp(a) + Exp(b), a != b."""
    return a * b / (b - a) * (math.exp(-a * z) - math.exp(-b * z))


def degree_count_quadrature(n, k, lam, r):
    """E[#nodes beyond r with degree k] = n * int_r^inf f(x) P(Bin(n-1, w(x)) = k) dx
    where w(x) is the mass of [x - r, x + r]."""

    def integrand(x):
        w = math.exp(-lam * (x - r)) - math.exp(-lam * (x + r))
        return lam * math.exp(-lam * x) * stats.binom.pmf(k, n - 1, w)

    return n * integrate.quad(integrand, r, np.inf, limit=400, epsabs=1e-14)[0]


def theta_series(s, lam, r, terms=4000):
    """theta_s via direct products with plain float arithmetic."""
    x = lam * r
    pc = 1.0
    for i in range(1, terms):
        pc *= 1 - math.exp(-i * x)
    den = 1.0
    for i in range(1, s + 1):
        den *= 1 - math.exp(-i * x)
    return pc * math.exp(-x * s) / den
