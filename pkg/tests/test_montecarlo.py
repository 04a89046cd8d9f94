import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgg1d import analytic
from rgg1d.core import ModelParams, Variant
from rgg1d.montecarlo import (
    STATISTICS,
    EstimateResult,
    estimate,
    graph_stats,
    make_rng,
    relay_chain_length,
    sample_positions,
    sample_values,
)

EXP = Variant.EXPONENTIAL


def P(n=5, lam=1.0, r=1.0, variant=EXP, **kw):
    return ModelParams(variant, n, lam, r, **kw)


# --- graph_stats hand cases ----------------------------------------------------


def test_stats_two_components():
    g = graph_stats([0, 0.5, 2], 1)
    assert g.component_sizes == [2, 1]
    assert g.num_holes == 1
    assert g.total_hole_length == pytest.approx(0.5)
    assert g.conn_distance == pytest.approx(1.5)
    assert g.largest_nn_distance == pytest.approx(1.5)
    assert g.span == 2
    assert not g.connected
    assert g.redundant_count == -1


def test_stats_connected_triple():
    g = graph_stats([0, 0.4, 0.8], 0.5)
    assert g.connected
    assert g.largest_nn_distance == pytest.approx(0.4)
    assert g.conn_distance == pytest.approx(0.4)
    assert g.degree_histogram == {1: 2, 2: 1}
    assert g.redundant_count == 0


def test_stats_single_node():
    g = graph_stats([3.0], 1)
    assert g.connected and g.num_components == 1 and g.span == 0
    assert g.degree_histogram == {0: 1}


def test_stats_errors_and_cap():
    with pytest.raises(ValueError):
        graph_stats([], 1)
    g = graph_stats(np.linspace(0, 1, 100), 10.0, degree_cap=8)
    assert g.degree_histogram == {8: 100}  # overflow bucket
    assert g.degree_histogram_beyond_r == {}


def test_redundant_chain():
    # from 0 the furthest node within 1 is 0.9, then 1.8; 0.5 and 1.2 are skipped
    x = np.array([0, 0.5, 0.9, 1.2, 1.8])
    assert relay_chain_length(x, 1.0) == 3
    assert graph_stats(x, 1.0).redundant_count == 2
    assert relay_chain_length(np.array([0, 2.0]), 1.0) == -1


# --- samplers -------------------------------------------------------------------


def test_truncated_support():
    x = sample_positions(P(1000, variant=Variant.TRUNCATED, T=1.0), make_rng(1), size=20)
    assert np.all((x > 0) & (x < 1))
    assert np.all(np.diff(x, axis=1) >= 0)


def test_exponential_mean():
    x = sample_positions(P(10**5, lam=2.0), make_rng(2))
    se = 0.5 / math.sqrt(x.size)
    assert abs(x.mean() - 0.5) < 4 * se


def test_double_exp_symmetric():
    x = sample_positions(P(10**5, variant=Variant.DOUBLE_EXPONENTIAL), make_rng(3))
    assert abs(np.mean(x > 0) - 0.5) < 4 * 0.5 / math.sqrt(x.size)
    assert abs(np.mean(np.abs(x)) - 1.0) < 4 / math.sqrt(x.size)


def test_gstar_largest_position_mean():
    params = P(100, variant=Variant.GSTAR, N=158)
    want = sum(1 / (158 - i) for i in range(100))
    for method in ("spacings", "sort"):
        e = estimate(params, "max_position", 50_000, 4, gstar_method=method)
        assert abs(e.mean - want) < 4 * e.stderr


def test_gstar_constructions_agree():
    params = P(100, r=0.05, variant=Variant.GSTAR, N=158)
    a = estimate(params, "connected", 100_000, 5)
    b = estimate(params, "connected", 100_000, 5, gstar_method="sort", stream=1)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.stderr, b.stderr)


@pytest.mark.parametrize("i", [1, 4, 9])
def test_spacing_means(i):
    e = estimate(P(10, lam=2.0), "spacing", 100_000, 6, i=i)
    assert abs(e.mean - 1 / ((10 - i) * 2.0)) < 4 * e.stderr


# --- estimator ------------------------------------------------------------------


def test_connectivity_estimate():
    e = estimate(P(5), "connected", 10**6, 7)
    assert abs(e.mean - analytic.connectivity_prob(5, 1, 1)) < 4 * e.stderr
    assert e.stderr == pytest.approx(math.sqrt(e.mean * (1 - e.mean) / 10**6))


def test_num_holes_estimate():
    e = estimate(P(3), "num_holes", 10**5, 8)
    assert abs(e.mean - 0.503215) < 4 * e.stderr


def test_span_n1():
    e = estimate(P(1), "span", 1000, 9)
    assert e.mean == 0.0 and e.stderr == 0.0


def test_determinism_across_workers():
    a = estimate(P(40, r=0.3), "total_hole_length", 50_000, 10, workers=1)
    b = estimate(P(40, r=0.3), "total_hole_length", 50_000, 10, workers=4)
    c = estimate(P(40, r=0.3), "total_hole_length", 50_000, 10)
    assert a == b == c
    assert isinstance(a, EstimateResult)


def test_thread_env_does_not_change_results(monkeypatch):
    base = estimate(P(8), "connected", 30_000, 11, condition_on_connected=False)
    monkeypatch.setenv("RGG1D_THREADS", "1")
    assert estimate(P(8), "connected", 30_000, 11) == base


def test_prefix_consistency():
    a, _ = sample_values(P(6), "span", 1000, 12)
    b, _ = sample_values(P(6), "span", 3000, 12)
    np.testing.assert_array_equal(a, b[:1000])


def test_conditioning_reports_acceptance():
    e = estimate(P(10, r=1.0), "num_holes", 5000, 13, condition_on_connected=True)
    assert e.mean == 0.0
    assert e.num_samples == 5000
    assert e.num_drawn > e.num_samples
    rate = analytic.connectivity_prob(10, 1, 1)
    assert abs(e.acceptance_rate - rate) < 4 * math.sqrt(rate * (1 - rate) / e.num_drawn)


def test_zero_acceptance_is_an_error():
    with pytest.raises(ValueError, match="acceptance rate"):
        estimate(P(5, r=0.0), "span", 10, 14, condition_on_connected=True, max_draws=1000)


def test_bad_inputs():
    with pytest.raises(ValueError):
        estimate(P(5), "nonsense", 10, 1)
    with pytest.raises(ValueError):
        estimate(P(5), "span", 0, 1)
    with pytest.raises(ValueError, match="condition_on_connected"):
        estimate(P(10, r=0.1), "redundant_count", 100, 1)


def test_size_m_count_statistic():
    X = np.array([[0, 0.1, 2, 4, 4.1, 4.2]])
    Y = np.diff(X, axis=1)
    assert STATISTICS["size_m_count"](X, Y, P(6, r=0.5), m=1)[0] == 1
    assert STATISTICS["size_m_count"](X, Y, P(6, r=0.5), m=2)[0] == 1
    assert STATISTICS["size_m_count"](X, Y, P(6, r=0.5), m=3)[0] == 1


def test_degree_count_statistic():
    X = np.array([[0.2, 0.5, 1.4, 1.6, 5.0]])
    Y = np.diff(X, axis=1)
    # beyond r = 0.5: nodes 1.4 (deg 1), 1.6 (deg 1), 5.0 (deg 0)
    assert STATISTICS["degree_count"](X, Y, P(5, r=0.5), k=1)[0] == 2
    assert STATISTICS["degree_count"](X, Y, P(5, r=0.5), k=0)[0] == 1
    assert STATISTICS["degree_count"](X, Y, P(5, r=0.5), k=1, beyond_r=False)[0] == 4


# --- per-sample identities ------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(
    x=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40),
    r=st.floats(0, 10),
)
def test_sample_identities(x, r):
    g = graph_stats(sorted(x), r)
    assert g.num_holes == g.num_components - 1
    assert sum(g.component_sizes) == len(x)
    assert g.connected == (g.total_hole_length == 0) == (g.conn_distance <= r)
    assert g.largest_nn_distance <= g.conn_distance
    assert sum(g.degree_histogram.values()) == len(x)
    if g.connected:
        assert 0 <= g.redundant_count <= max(len(x) - 2, 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 30))
def test_seed_range_and_sorting(seed, n):
    x = sample_positions(P(n), make_rng(seed))
    assert x.shape == (n,)
    assert np.all(np.diff(x) >= 0)
