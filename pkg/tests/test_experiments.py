import math
import warnings

import numpy as np
import pytest

from rgg1d import analytic, experiments
from rgg1d.core import ModelParams, Variant


def test_threshold_examples():
    assert experiments.truncated_threshold(10**4, 1, 1) == pytest.approx((math.e - 1) * math.log(1e4) / 1e4, rel=1e-14)
    assert experiments.truncated_threshold(10**4, 1, 1) == pytest.approx(1.5826e-3, abs=1e-7)
    c = 2.5
    assert experiments.truncated_threshold(500, 0.7 / c, 1.3 * c) == pytest.approx(
        c * experiments.truncated_threshold(500, 0.7, 1.3), rel=1e-13
    )
    assert experiments.truncated_threshold(100, 1, math.inf) == math.inf
    assert experiments.truncated_threshold(100, 1, 50) > 1e15
    with pytest.raises(ValueError):
        experiments.truncated_threshold(1, 1, 1)
    spec = experiments.ThresholdSpec(1.0, 1.0)
    assert 0 < spec.p < 1


def test_sweep_small_is_monotone():
    rows = experiments.threshold_sweep(1, 1, [200, 2000], [0.3, 0.6, 1.0, 1.4, 2.0], 2000, 1)
    for model in ("truncated", "gstar"):
        for n in (200, 2000):
            est = [r["estimate"] for r in rows if r["model"] == model and r["n"] == n]
            assert est == sorted(est)
    assert all(r["seed"] == 1 for r in rows)
    assert rows[0]["prediction"] == pytest.approx(math.exp(-(200**0.7) / math.log(200)))
    with pytest.raises(ValueError):
        experiments.threshold_sweep(1, 1, [100], [0.0], 10, 1)


def test_sweep_reproducible():
    a = experiments.threshold_sweep(1, 1, [300], [0.8, 1.2], 500, 7)
    b = experiments.threshold_sweep(1, 1, [300], [0.8, 1.2], 500, 7)
    assert a == b


def test_comparison_edges():
    c = experiments.gn_vs_gstar_comparison(1, 1, 1.0, 200, 5000, 2)
    assert c.p_truncated == 1.0  # all truncated spacings are below T
    assert c.p_gstar > 0.999
    c = experiments.gn_vs_gstar_comparison(1, 1, 0.0, 50, 2000, 2)
    assert c.p_truncated == c.p_gstar == 0.0
    assert c.z_score == 0.0


def test_comparison_trend():
    diffs = []
    for n in (100, 1000, 10_000):
        c = experiments.gn_vs_gstar_comparison(1, 1, 0.05, n, 20_000, 3)
        diffs.append(c)
    assert abs(diffs[2].difference) <= abs(diffs[0].difference) + 4 * math.hypot(diffs[0].stderr, diffs[2].stderr)


def test_trajectory_nested_and_running_max():
    params = ModelParams(Variant.EXPONENTIAL, 2, 1.0, 0.0)
    t = experiments.strong_law_trajectory(params, [10, 100, 1000], range(5))
    assert t.statistical
    for seed in range(5):
        rows = [r for r in t.rows if r["seed"] == seed]
        running = [r["running_max_lam_c_over_ln"] for r in rows]
        assert running == sorted(running)
        # nested prefixes: connectivity distance can only change by new nodes
        assert rows[0]["c_n"] > 0
    again = experiments.strong_law_trajectory(params, [10, 100, 1000], range(5))
    assert again.rows == t.rows


def test_trajectory_truncated_ratio():
    params = ModelParams(Variant.TRUNCATED, 2, 1.0, 0.0, T=1.0)
    t = experiments.strong_law_trajectory(params, [1000, 10_000], range(40))
    assert 1.0 < t.median("n_c_over_ln", 10_000) < 2.5
    assert 1.5 < t.median("c_over_d", 10_000) < 2.5
    assert len(t.column("n_d_over_ln", 1000)) == 40
    with pytest.raises(ValueError):
        experiments.strong_law_trajectory(params, [100, 50], [1])


def test_trajectory_gstar_runs():
    params = ModelParams(Variant.GSTAR, 2, 1.0, 0.0, T=1.0)
    t = experiments.strong_law_trajectory(params, [100, 1000], range(3))
    assert all(np.isfinite(r["n_c_over_ln"]) for r in t.rows)


def test_records():
    assert experiments.record_exceedance_experiment(1, 10**4, 42) >= 3
    # k = 1 always counts since ln 1 = 0
    assert all(experiments.record_exceedance_experiment(1, 10, s) >= 1 for s in range(50))
    # lam Z is parameter-free, so the count does not depend on lam
    assert experiments.record_exceedance_experiment(1, 500, 9) == experiments.record_exceedance_experiment(2, 500, 9)
    with pytest.raises(ValueError):
        experiments.record_exceedance_experiment(1, 5, 1)


def test_records_mean_is_harmonic():
    K = 1000
    counts = [experiments.record_exceedance_experiment(1, K, s) for s in range(400)]
    H = sum(1 / k for k in range(1, K + 1))
    var = sum(1 / k - 1 / k**2 for k in range(1, K + 1))
    assert abs(np.mean(counts) - H) < 4 * math.sqrt(var / len(counts))


def test_restricted_bound_and_exact():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rows = experiments.restricted_graph_experiment(1, 1, 2, [1000], 10_000, 4)
    row = rows[0]
    assert row["k_n"] == math.floor(1000 - 2 * math.log(1000))
    assert row["exact"] <= row["bound"]
    assert row["estimate"] <= row["bound"] + 4 * row["stderr"]
    assert row["bound"] == pytest.approx(
        math.e / (math.e - 1) * (math.exp(-(1000 - row["k_n"])) - math.exp(-1000)), rel=1e-12
    )


def test_restricted_small_n_positive():
    rows = experiments.restricted_graph_experiment(1, 1, 1.05, [50], 100_000, 5)
    row = rows[0]
    assert row["estimate"] > 0
    assert row["estimate"] <= row["bound"] + 4 * row["stderr"]
    assert abs(row["estimate"] - row["exact"]) < 4 * math.sqrt(row["exact"] * (1 - row["exact"]) / 100_000)


def test_restricted_vacuous_warns():
    with pytest.warns(UserWarning):
        rows = experiments.restricted_graph_experiment(1, 1, 0.0, [8], 50_000, 6)
    row = rows[0]
    assert row["k_n"] == 8
    assert row["exact"] == pytest.approx(1 - analytic.connectivity_prob(8, 1, 1), rel=1e-12)
    assert abs(row["estimate"] - row["exact"]) < 4 * row["stderr"]


def test_span_ks_small_n_is_worse():
    small = experiments.span_gumbel_ks(10, 1, 10_000, 1)
    big = experiments.span_gumbel_ks(10_000, 1, 10_000, 1)
    assert small.ks_statistic > big.ks_statistic
    assert abs(big.median - (-math.log(math.log(2)))) < 0.05
    with pytest.raises(ValueError):
        experiments.span_gumbel_ks(10, 1, 50, 1)
