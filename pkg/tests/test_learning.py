import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from everett_preclusion import (
    AllPrecluded,
    FrequencyBinning,
    InvalidTolerance,
    Lineage,
    PreclusionRule,
    QubitPreparation,
    find_nb,
    predict_surprise,
    run_lineages,
    train_device,
)
from everett_preclusion.learning import expectation_met_counts, generation_log_mass


def prep(p):
    return QubitPreparation.from_p(p)


# ---- train_device -----------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 5, 300])
def test_train_certain_outcome(n):
    (dev,) = train_device(prep(1.0), n, FrequencyBinning(10), PreclusionRule.positive(0.1))
    assert dev.p_hat == pytest.approx(0.95)
    assert dev.bin_index == 9
    assert dev.surviving_copies == {9}


def test_train_past_threshold_single_device():
    binning = FrequencyBinning(5)
    n_b = find_nb(prep(0.5), binning, 1e-3, 2000, 32).n_b
    (dev,) = train_device(prep(0.5), n_b + 100, binning, PreclusionRule.positive(1e-3))
    assert dev.p_hat == 0.5
    assert dev.n_train == n_b + 100


def test_train_two_devices():
    devs = train_device(prep(0.5), 4, FrequencyBinning(2), PreclusionRule.positive(0.2))
    assert [d.p_hat for d in devs] == [0.25, 0.75]
    assert all(d.surviving_copies == {0, 1} for d in devs)


def test_train_all_precluded():
    with pytest.raises(AllPrecluded) as info:
        train_device(prep(0.5), 2, FrequencyBinning(2), PreclusionRule.positive(0.9))
    assert info.value.exit_code == 3


# ---- predict_surprise -------------------------------------------------------------


@given(p_hat=st.floats(0.0, 1.0), p=st.floats(0.01, 0.99))
def test_surprise_single_system(p_hat, p):
    d = predict_surprise(p_hat, prep(p), 1, PreclusionRule.zero())
    assert [e.surprise for e in d.entries] == [pytest.approx(p_hat), pytest.approx(1 - p_hat)]
    assert d.weighted_mean_surprise == pytest.approx((1 - p) * p_hat + p * (1 - p_hat))


def test_surprise_two_systems():
    d = predict_surprise(0.5, prep(0.5), 2, PreclusionRule.zero())
    assert [e.observed_frequency for e in d.entries] == [0.0, 0.5, 1.0]
    assert np.allclose([math.exp(e.log_weight) for e in d.entries], [0.25, 0.5, 0.25], rtol=0, atol=1e-15)
    assert [e.surprise for e in d.entries] == [0.5, 0.0, 0.5]
    assert d.weighted_mean_surprise == pytest.approx(0.25, abs=1e-15)
    assert d.precluded_mass == 0.0


def test_surprise_matches_exact_sum():
    p, n = Fraction(3, 10), 50
    exact = sum(comb(n, k) * p**k * (1 - p) ** (n - k) * abs(Fraction(k, n) - p) for k in range(n + 1))
    d = predict_surprise(0.3, prep(0.3), n, PreclusionRule.zero())
    assert d.weighted_mean_surprise == pytest.approx(float(exact), rel=1e-12)


def test_surprise_born_expectation_smaller():
    a = predict_surprise(0.3, prep(0.3), 50, PreclusionRule.zero())
    b = predict_surprise(0.7, prep(0.3), 50, PreclusionRule.zero())
    assert a.weighted_mean_surprise < b.weighted_mean_surprise


def test_surprise_no_renormalization():
    rule = PreclusionRule.positive(1e-2)
    d = predict_surprise(0.5, prep(0.5), 20, rule)
    assert d.precluded_mass > 0
    ks = [e.k for e in d.entries]
    # only survivors are listed, and their weights are untouched
    assert all(math.exp(e.log_weight) > 1e-2 for e in d.entries)
    assert math.exp(d.entries[0].log_weight) == pytest.approx(comb(20, ks[0]) / 2**20, rel=1e-13)


@given(
    p=st.floats(0.0, 1.0),
    n=st.integers(1, 400),
    p_hat=st.floats(0.0, 1.0),
    log_eps=st.floats(-30, -0.01),
)
def test_surprise_mass_conservation(p, n, p_hat, log_eps):
    d = predict_surprise(p_hat, prep(p), n, PreclusionRule.positive(math.exp(log_eps)))
    assert d.surviving_mass + d.precluded_mass == pytest.approx(1.0, abs=1e-10)
    assert all(e.surprise >= 0 for e in d.entries)


@given(p=st.floats(0.0, 1.0), n=st.integers(1, 400))
def test_surprise_zero_rule_weights_sum_to_one(p, n):
    d = predict_surprise(0.5, prep(p), n, PreclusionRule.zero())
    assert d.surviving_mass == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("p,m", [(0.5, 5), (0.3, 5), (0.75, 10), (0.15, 10), (0.45, 10), (0.25, 2)])
@pytest.mark.parametrize("n_prime", [10, 25, 100, 1000])
def test_born_expectation_minimizes_mean_surprise(p, m, n_prime):
    # p is a midpoint of the binning in every configuration
    mids = FrequencyBinning(m).midpoints
    assert np.min(np.abs(mids - p)) < 1e-15
    means = {
        float(h): predict_surprise(float(h), prep(p), n_prime, PreclusionRule.zero()).weighted_mean_surprise
        for h in mids
    }
    best = min(means, key=means.get)
    assert best == pytest.approx(p)


def test_surprise_bad_n_prime():
    with pytest.raises(ValueError):
        predict_surprise(0.5, prep(0.5), 0, PreclusionRule.zero())


# ---- lineages ---------------------------------------------------------------------


def test_lineage_born_generation_ten():
    lin = Lineage(0.5, 0.05, 10)
    assert list(expectation_met_counts(lin)) == [5]
    (out,) = run_lineages(prep(0.5), [lin], 30, PreclusionRule.positive(1e-6))
    assert math.exp(out.log_mass_per_generation) == pytest.approx(comb(10, 5) / 2**10, rel=1e-14)
    assert out.generation_precluded == math.ceil(math.log(1e-6) / math.log(0.24609375)) == 10
    assert not out.survived


def test_lineage_full_tolerance_never_precluded():
    (out,) = run_lineages(prep(0.37), [Lineage(0.37, 1.0, 17)], 1000, PreclusionRule.positive(0.999999))
    assert out.survived
    assert out.log_mass_per_generation == 0.0
    assert np.all(out.log_weight_trace == 0.0)


def test_lineage_born_outlives_off_born():
    born, off = run_lineages(
        prep(0.3), [Lineage(0.3, 0.05, 100), Lineage(0.5, 0.05, 100)], 200, PreclusionRule.positive(1e-6)
    )
    assert born.log_mass_per_generation > off.log_mass_per_generation
    assert off.generation_precluded < born.generation_precluded
    # frozen from exact interval sums
    assert (off.generation_precluded, born.generation_precluded) == (3, 53)


def test_lineage_mass_matches_exact_interval_sum():
    p = Fraction(3, 10)
    exact = sum(comb(100, k) * p**k * (1 - p) ** (100 - k) for k in range(25, 36))
    lin = Lineage(0.3, 0.05, 100)
    assert list(expectation_met_counts(lin)) == list(range(25, 36))
    assert math.exp(generation_log_mass(prep(0.3), lin)) == pytest.approx(float(exact), rel=1e-13)


@given(
    p=st.floats(0.01, 0.99),
    lineages=st.lists(
        st.tuples(st.floats(0.0, 1.0), st.floats(0.01, 1.0), st.integers(1, 200)), min_size=1, max_size=4
    ),
    generations=st.integers(1, 300),
)
def test_trace_exactly_linear_and_nonincreasing(p, lineages, generations):
    lins = [Lineage(*t) for t in lineages]
    outs = run_lineages(prep(p), lins, generations, PreclusionRule.positive(1e-9))
    for out in outs:
        g = np.arange(1, generations + 1)
        assert np.array_equal(out.log_weight_trace, g * out.log_mass_per_generation)
        tr = out.log_weight_trace
        assert np.all((tr[1:] <= tr[:-1]) | (tr[1:] == -np.inf))
        if out.generation_precluded is not None:
            k = out.generation_precluded
            assert out.log_weight_trace[k - 1] <= math.log(1e-9)
            assert np.all(out.log_weight_trace[: k - 1] > math.log(1e-9))


@settings(max_examples=60)
@given(
    p=st.floats(0.05, 0.95),
    n_g=st.integers(10, 200),
    tau_steps=st.integers(1, 5),
    offsets=st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=6),
)
def test_nearest_lineage_not_outlived(p, n_g, tau_steps, offsets):
    tau = tau_steps / n_g
    nearest = Lineage(p, tau, n_g)
    far = [Lineage(p + o, tau, n_g) for o in offsets if abs(o) >= 2 * tau and 0 <= p + o <= 1]
    outs = run_lineages(prep(p), [nearest, *far], 500, PreclusionRule.positive(1e-12))
    g0 = outs[0].generation_precluded
    for out in outs[1:]:
        assert out.log_mass_per_generation <= outs[0].log_mass_per_generation
        if g0 is not None:
            assert out.generation_precluded is not None and out.generation_precluded <= g0


def test_lineage_initial_weight_offsets_trace():
    (out,) = run_lineages(prep(0.5), [Lineage(0.5, 0.05, 10, log_weight=-2.0)], 3, PreclusionRule.zero())
    assert np.array_equal(out.log_weight_trace, -2.0 + np.arange(1, 4) * out.log_mass_per_generation)


def test_run_lineages_parallel_matches_serial():
    lins = [Lineage(h, 0.05, 100) for h in np.linspace(0.0, 1.0, 21)]
    a = run_lineages(prep(0.3), lins, 100, PreclusionRule.positive(1e-8))
    b = run_lineages(prep(0.3), lins, 100, PreclusionRule.positive(1e-8), jobs=4)
    for x, y in zip(a, b):
        assert x.lineage == y.lineage
        assert x.generation_precluded == y.generation_precluded
        assert np.array_equal(x.log_weight_trace, y.log_weight_trace)


@pytest.mark.parametrize("tau", [0.0, -0.1, 1.5, float("nan")])
def test_invalid_tolerance(tau):
    with pytest.raises(InvalidTolerance):
        Lineage(0.5, tau, 10)


def test_invalid_lineage_arguments():
    with pytest.raises(ValueError):
        Lineage(0.5, 0.1, 0)
    with pytest.raises(ValueError):
        Lineage(0.5, 0.1, 10, log_weight=0.5)
    with pytest.raises(ValueError):
        run_lineages(prep(0.5), [Lineage(0.5, 0.1, 10)], 0, PreclusionRule.zero())
