"""Smoke tests of the Python module against values worked out by hand."""

import math

import pytest

import replab


def test_curves_on_small_strings():
    syms, d = replab.ingest("aaaa")
    assert d == 1
    values, censored = replab.curve(syms, "L2")
    assert values == [0, 1, 2, 3]
    values, censored = replab.curve([0, 1, 2], "R1", 3)
    assert values[1] == 2 and censored[1]
    with pytest.raises(ValueError):
        replab.curve([0, 1], "L3")


def test_models_and_sampling():
    m = replab.SourceModel.two_state(0.1, 0.2)
    assert replab.block_probability(m, [0, 1]) == pytest.approx(1 / 15)
    assert replab.sample(m, 50, seed=3) == replab.sample(m, 50, seed=3)
    assert replab.model_from_json({"type": "uniform", "alphabet_size": 3}).alphabet_size == 3
    with pytest.raises(ValueError, match="row 1"):
        replab.SourceModel.markov([[0.9, 0.1], [0.3, 0.8]])
    assert replab.SourceModel.copy_source([0.5, 0.5], 0.5, 4).exploratory


def test_entropies():
    coin = replab.SourceModel.uniform(2)
    assert replab.renyi_entropy([0.5, 0.5], 2.0) == pytest.approx(math.log(2))
    lo, hi = replab.block_entropy(coin, 3, 0, 2.0)
    assert lo == pytest.approx(3 * math.log(2)) and hi == pytest.approx(lo)
    assert replab.entropy_rate(coin, 2) == pytest.approx(math.log(2))
    assert replab.context_length(coin, 2) >= 1
    w_lo, w_hi = replab.weighted_entropy(coin, 4)
    assert w_lo <= w_hi


def test_hilberg_and_law_fit():
    ks = [2 ** (j / 4) for j in range(4, 60)]
    est = replab.hilberg_exponent(ks, [k ** 0.4 for k in ks])
    assert est["offset_power"]["exponent"] == pytest.approx(0.4, abs=0.05)
    ns = [2.0 ** j for j in range(2, 21)]
    fit = replab.fit_law(ns, [2 * math.log(n) ** 3 for n in ns], "log_power")
    assert fit["parameter"] == pytest.approx(3.0, abs=1e-6)


def test_reports():
    coin = replab.SourceModel.uniform(2)
    kac = replab.verify_kac(coin, 2, trials=5000, seed=1)
    assert kac["theoretical"]["inverse_probability"] == pytest.approx(4.0)
    assert kac["verdict"] == "pass"
    assert replab.check_prop4(coin, range(1, 6))["verdict"] == "pass"
    assert replab.check_path_bounds(coin, 2, paths=5, n=10000, ks=[1, 2, 4, 8])["check"] == "prop2"
    flat = replab.theorem_report(replab.SourceModel.iid([1.0]), paths=2, n=4096)
    assert flat["verdict"] == "pass"
