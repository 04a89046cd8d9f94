"""Analytic-versus-Monte-Carlo cross-validation suite.

Every comparison is a z-score ``(mc - exact) / stderr``; the suite fails if
any ``|z| > 4`` or any invariant check fails. Output holds no timings so
identical seeds give identical reports.
"""

from __future__ import annotations

import math

import numpy as np

from . import analytic, recursions
from .core import ModelParams, Variant
from .montecarlo import estimate, graph_stats, make_rng, sample_positions, sample_values

Z_LIMIT = 4.0
_EXP = Variant.EXPONENTIAL


def _z(mc: float, exact: float, se: float) -> float:
    if se > 0:
        return (mc - exact) / se
    return 0.0 if math.isclose(mc, exact, rel_tol=1e-12, abs_tol=1e-12) else math.inf


class _Suite:
    def __init__(self, seed: int, samples: int):
        self.seed = seed
        self.samples = samples
        self.comparisons: list[dict] = []
        self.invariants: list[dict] = []
        self._stream = 0

    def stream(self) -> int:
        self._stream += 1
        return self._stream

    def mean(self, name, exact, params, statistic, condition=False, **opts):
        e = estimate(
            params, statistic, self.samples, self.seed, condition_on_connected=condition, stream=self.stream(), **opts
        )
        self.add(name, exact, e.mean, e.stderr)

    def add(self, name, exact, mc, se):
        self.comparisons.append({"name": name, "exact": exact, "mc": mc, "stderr": se, "z": _z(mc, exact, se)})

    def pmf(self, name, pmf, params, statistic, condition=False, floor=1e-3, **opts):
        """One comparison per pmf entry with mass above ``floor``."""
        values, _ = sample_values(
            params, statistic, self.samples, self.seed, condition_on_connected=condition, stream=self.stream(), **opts
        )
        N = values.size
        for k, p in pmf.as_dict().items():
            if p < floor:
                continue
            f = float(np.mean(values == k))
            self.add(f"{name}[{k}]", p, f, math.sqrt(p * (1 - p) / N))

    def check(self, name, ok, detail):
        self.invariants.append({"name": name, "ok": bool(ok), "detail": detail})


def run_suite(seed: int = 42, samples: int = 100_000) -> dict:
    s = _Suite(seed, samples)

    for n, r in ((5, 1.0), (20, 0.5)):
        s.mean(f"connected n={n} r={r}", analytic.connectivity_prob(n, 1.0, r), ModelParams(_EXP, n, 1.0, r), "connected")
    for n in (2, 10):
        s.mean(
            f"double-exp connected n={n}",
            analytic.double_exp_connectivity_prob(n, 1.0, 1.0),
            ModelParams(Variant.DOUBLE_EXPONENTIAL, n, 1.0, 1.0),
            "connected",
        )

    for n in (3, 50):
        P = ModelParams(_EXP, n, 1.0, 1.0)
        s.mean(f"hole count mean n={n}", analytic.hole_count_moments(n, 1.0, 1.0).mean, P, "num_holes")
        s.mean(f"hole length mean n={n}", analytic.hole_length_moments(n, 1.0, 1.0).mean, P, "total_hole_length")
        s.mean(f"hole length laplace n={n} theta=0.25", analytic.hole_length_laplace(n, 1.0, 1.0, 0.25), P,
               "exp_hole_length", theta=0.25)
        s.mean(f"hole count mgf n={n} theta=0.5", analytic.hole_count_mgf(n, 1.0, 1.0, 0.5), P,
               "exp_hole_count", theta=0.5)

    P = ModelParams(_EXP, 10, 2.0, 1.0)
    for i in (1, 5, 9):
        s.mean(f"spacing mean n=10 i={i}", 1.0 / ((10 - i) * 2.0), P, "spacing", i=i)

    s.pmf("components n=50", recursions.component_pmf(50, 1.0, 1.0), ModelParams(_EXP, 50, 1.0, 1.0),
          "num_components")
    s.pmf("size-2 components n=20 r=0.5", recursions.size_m_component_pmf(20, 2, 1.0, 0.5),
          ModelParams(_EXP, 20, 1.0, 0.5), "size_m_count", m=2)
    for n, r in ((3, 1.0), (10, 2.0)):
        s.pmf(f"redundant n={n} r={r}", recursions.redundant_pmf(n, 1.0, r), ModelParams(_EXP, n, 1.0, r),
              "redundant_count", condition=True)

    for k in (0, 1, 2):
        s.mean(f"degree-{k} count beyond r n=200", analytic.degree_count_expectation(200, k, 1.0, 1.0),
               ModelParams(_EXP, 200, 1.0, 1.0), "degree_count", k=k)

    G = ModelParams(Variant.GSTAR, 100, 1.0, 0.05, N=158)
    a = estimate(G, "connected", samples, seed, stream=s.stream())
    b = estimate(G, "connected", samples, seed, stream=s.stream(), gstar_method="sort")
    s.add("gstar spacings vs sort", b.mean, a.mean, math.hypot(a.stderr, b.stderr))

    # invariants
    for n in (5, 50, 200):
        pmf = recursions.component_pmf(n, 1.0, 1.0)
        s.check(f"component pmf sums to 1 n={n}", abs(pmf.total() - 1) < 1e-10, pmf.total() - 1)
    theta = sum(recursions.theta_limit(k, 1.0, 1.0) for k in range(61))
    s.check("theta sums to 1", abs(theta - 1) < 1e-10, theta - 1)
    worst = 0.0
    for j in range(1, 30):
        total = sum(recursions.crossing_prob(30, j, i, 1.0, 0.3) for i in range(j + 1, 30))
        total += recursions.reach_end_prob(30, j, 1.0, 0.3)
        worst = max(worst, abs(total - 1))
    s.check("crossing probabilities partition n=30", worst < 1e-9, worst)

    rng = make_rng(seed, 999)
    bad = 0
    for x in sample_positions(ModelParams(_EXP, 30, 1.0, 0.3), rng, size=2000):
        g = graph_stats(x, 0.3)
        ok = (
            g.num_holes == g.num_components - 1
            and g.connected == (g.total_hole_length == 0) == (g.conn_distance <= 0.3)
            and g.largest_nn_distance <= g.conn_distance
            and sum(g.component_sizes) == 30
        )
        bad += not ok
    s.check("per-sample identities", bad == 0, bad)

    max_z = max(abs(c["z"]) for c in s.comparisons)
    passed = max_z <= Z_LIMIT and all(c["ok"] for c in s.invariants)
    return {
        "passed": passed,
        "max_abs_z": max_z,
        "z_limit": Z_LIMIT,
        "num_comparisons": len(s.comparisons),
        "note": f"|z| <= {Z_LIMIT:g} per comparison; two-sided false alarm about 6.3e-5 each, "
        f"so about {len(s.comparisons) * 6.3e-5:.2g} for the suite by a Bonferroni bound",
        "samples": samples,
        "comparisons": s.comparisons,
        "invariants": s.invariants,
    }
