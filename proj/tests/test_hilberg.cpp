#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "replab/hilberg.hpp"

using namespace replab;
using doctest::Approx;

namespace {

template <class F>
std::vector<SeriesPoint> series(F f, double k_max = 1e5, std::size_t per_octave = 8) {
    std::vector<SeriesPoint> out;
    for (auto k : geometric_grid(static_cast<std::size_t>(k_max), per_octave)) {
        if (k >= 2) out.push_back({double(k), f(double(k))});
    }
    return out;
}

SymbolSeq random_binary(std::mt19937_64& rng, std::size_t n) {
    std::vector<Symbol> v(n);
    for (auto& s : v) s = static_cast<Symbol>(rng() & 1);
    return SymbolSeq(std::move(v), 2);
}

}  // namespace

TEST_SUITE("hilberg") {

TEST_CASE("power series") {
    const auto e = hilberg_exponent(series([](double k) { return std::pow(k, 0.4); }));
    CHECK(e.offset_power.exponent == Approx(0.4).epsilon(0.05 / 0.4));
    CHECK(e.regression.exponent == Approx(0.4).epsilon(1e-9));
    CHECK(e.tail_max.exponent == Approx(0.4).epsilon(1e-9));
}

TEST_CASE("constants vanish at the exponent level") {
    const auto e = hilberg_exponent(series([](double k) { return 3 * k * k; }));
    CHECK(std::abs(e.offset_power.exponent - 2.0) < 0.1);
    for (double c : {0.01, 1.0, 250.0}) {
        const auto s = hilberg_exponent(series([c](double k) { return c * std::pow(k, 0.7); }));
        CHECK(s.offset_power.exponent == Approx(0.7).epsilon(1e-3));
    }
    // An additive offset biases the plain log-log slope but not the offset fit.
    const auto shifted = hilberg_exponent(series([](double k) { return 0.35 * k + 5.0; }, 40, 16));
    CHECK(shifted.offset_power.exponent == Approx(1.0).epsilon(1e-3));
    CHECK(shifted.regression.exponent < 0.9);
}

TEST_CASE("subpolynomial growth reads as exponent near 0") {
    const auto e = hilberg_exponent(series([](double k) { return std::log(k); }));
    CHECK(e.offset_power.exponent < 0.15);
}

TEST_CASE("zero and constant series") {
    const auto z = hilberg_exponent(series([](double) { return 0.0; }, 100));
    CHECK(z.offset_power.exponent == 0.0);
    CHECK(z.tail_max.exponent == 0.0);
    const auto c = hilberg_exponent(series([](double) { return 0.7; }, 100));
    CHECK(c.offset_power.exponent == 0.0);
}

TEST_CASE("window and input validation") {
    const auto s = series([](double k) { return k; }, 8, 1);
    CHECK_THROWS_AS(hilberg_exponent(s), std::invalid_argument);
    std::vector<SeriesPoint> bad = series([](double k) { return k; }, 1000);
    bad[3].value = -1.0;
    CHECK_THROWS_AS(hilberg_exponent(bad), std::invalid_argument);
    CHECK_THROWS_AS(hilberg_exponent(series([](double k) { return k; }), 10, 5), std::invalid_argument);
}

TEST_CASE("law fits on exact synthetic data") {
    for (double alpha : {1.0, 2.0, 3.0}) {
        const auto pts = series([alpha](double n) { return 2 * std::pow(std::log(n), alpha); }, 1e6, 2);
        const auto f = fit_law(pts, Law::log_power);
        CHECK(f.parameter == Approx(alpha).epsilon(1e-9));
        CHECK(f.C == Approx(2.0).epsilon(1e-9));
        CHECK(f.r_squared == Approx(1.0));
    }
    for (double beta : {0.25, 1.0 / 3.0, 0.5}) {
        const auto pts = series([beta](double k) { return std::exp(1.5 * std::pow(k, beta)); }, 400, 4);
        const auto f = fit_law(pts, Law::stretched_exp);
        CHECK(f.parameter == Approx(beta).epsilon(1e-9));
        CHECK(f.C == Approx(1.5).epsilon(1e-9));
    }
}

TEST_CASE("law fit on an integer curve") {
    std::vector<CensoredValue> pts;
    for (std::size_t n = 1; n <= 100000; ++n) {
        pts.push_back({static_cast<std::uint64_t>(std::llround(1000 * std::pow(std::log(double(n)), 3.0))), false});
    }
    const StatCurve curve(CurveKind::L2, pts);
    CHECK(std::abs(fit_law(curve, Law::log_power).parameter - 3.0) < 0.05);
}

TEST_CASE("law fits need enough uncensored points") {
    std::vector<CensoredValue> pts(64, CensoredValue{10, true});
    const StatCurve curve(CurveKind::R2, pts);
    CHECK_THROWS_AS(fit_law(curve, Law::stretched_exp), std::invalid_argument);
    CHECK(law_from_string("stretched_exp") == Law::stretched_exp);
    CHECK_THROWS(law_from_string("power"));
}

TEST_CASE("maximal repetition of a fair coin grows like log n") {
    std::vector<double> alphas;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto x = sample_path(SourceModel::uniform(2), 1000000, {s, 0});
        alphas.push_back(fit_law(maximal_repetition_curve(x), Law::log_power).parameter);
    }
    std::nth_element(alphas.begin(), alphas.begin() + 10, alphas.end());
    CHECK(alphas[10] >= 0.8);
    CHECK(alphas[10] <= 1.2);
}

TEST_CASE("grids") {
    CHECK(dyadic_grid(10) == std::vector<std::size_t>{1, 2, 4, 8, 10});
    CHECK(dyadic_grid(8) == std::vector<std::size_t>{1, 2, 4, 8});
    const auto g = geometric_grid(1000, 4);
    CHECK(g.front() == 1);
    CHECK(g.back() == 1000);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
}

TEST_CASE("upper median") {
    CHECK(upper_median({3, 1, 2}) == 2);
    CHECK(upper_median({4, 1, 3, 2}) == 3);
}

TEST_CASE("ensemble summaries") {
    const std::vector<std::size_t> ks{1, 2, 3};
    const auto flat = ensemble_summary(SourceModel::iid({1.0}), EnsembleStatistic::R1, ks, 5, 50, 1);
    for (const auto& r : flat.rows) CHECK(r.median == r.mean);
    const auto nl = ensemble_summary(SourceModel::uniform(2), EnsembleStatistic::neg_log_prob, ks, 8, 50, 1);
    for (const auto& r : nl.rows) CHECK(r.variance == Approx(0.0));
    CHECK_THROWS(ensemble_statistic_from_string("L1"));
    CHECK_THROWS(ensemble_summary(SourceModel::uniform(2), EnsembleStatistic::R1, ks, 1, 50, 1));
}

TEST_CASE("median, realization and mean of R1 are ordered in exponent") {
    std::vector<std::size_t> ks;
    for (std::size_t k = 2; k <= 14; ++k) ks.push_back(k);
    const auto s = ensemble_summary(SourceModel::uniform(2), EnsembleStatistic::R1, ks, 200, 1000000, 4);
    std::vector<SeriesPoint> med, mean;
    for (const auto& r : s.rows) {
        med.push_back({double(r.k), std::log(r.median)});
        mean.push_back({double(r.k), std::log(r.mean)});
    }
    const double em = hilberg_exponent(med).offset_power.exponent;
    const double ee = hilberg_exponent(mean).offset_power.exponent;
    CHECK(em <= ee + 0.1);
}

TEST_CASE("T-increasing statistics on a constant string") {
    const SymbolSeq flat(std::vector<Symbol>(40, 0), 1);
    CHECK(check_t_increasing(flat, CurveKind::R2).holds);
}

TEST_CASE("T-increasing holds for L2, R1 and R2 on random strings") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 500; ++rep) {
        const auto x = random_binary(rng, 200);
        CHECK(check_t_increasing(x, CurveKind::L2).holds);
        CHECK(check_t_increasing(x, CurveKind::R1).holds);
        CHECK(check_t_increasing(x, CurveKind::R2).holds);
    }
}

TEST_CASE("L1 can shrink under the shift") {
    // x = abb: L1_3(x) = 0 because "a" never recurs, while Tx = bb has L1_2 = 1.
    const auto x = SymbolSeq::from_string("abb");
    const auto r = check_t_increasing(x, CurveKind::L1);
    CHECK_FALSE(r.holds);
    CHECK(r.first_violation == 2);
}

TEST_CASE("a corrupted curve is caught") {
    const auto x = SymbolSeq::from_string("abaabbabbbaaab");
    auto on_path = recurrence_time_curve(x);
    const auto on_shift = recurrence_time_curve(x.suffix(1));
    CHECK(check_t_increasing(on_path, on_shift).holds);
    for (std::size_t k = 2; k <= on_path.size(); ++k) {
        if (!on_path.at(k).censored && !on_shift.at(k - 1).censored && on_shift.at(k - 1).value > 0) {
            on_path.mutable_at(k).value = on_shift.at(k - 1).value - 1;
            break;
        }
    }
    CHECK_FALSE(check_t_increasing(on_path, on_shift).holds);
}

TEST_CASE("negative log probability is T-increasing") {
    const auto m = SourceModel::two_state(0.1, 0.2);
    CHECK(check_t_increasing(m, "neglogp", 30, 200, 3).holds);
    CHECK_THROWS(check_t_increasing(m, "entropy", 30, 200, 3));
}

}
