#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "replab/entropy.hpp"

using namespace replab;
using doctest::Approx;

namespace {

const double kLog2 = std::log(2.0);
const std::vector<double> kOrders{0.0, 0.5, 1.0, 2.0, 3.0, kInfiniteOrder};

std::vector<std::vector<double>> table(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) t[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    }
    return t;
}

// Joint of (X_1^k, X_{k+1}^{k+i}) for a two-state chain, built by hand.
std::vector<std::vector<double>> markov_joint(double a, double b, std::size_t k, std::size_t i) {
    const auto rows = oracle::two_state_rows(a, b);
    const auto pi = oracle::two_state_pi(a, b);
    std::vector<std::vector<double>> j(std::size_t{1} << k, std::vector<double>(std::size_t{1} << i, 0.0));
    oracle::for_each_string(2, k + i, [&](const oracle::Seq& s) {
        std::size_t x = 0, y = 0;
        for (std::size_t t = 0; t < k; ++t) x = 2 * x + s[t];
        for (std::size_t t = k; t < k + i; ++t) y = 2 * y + s[t];
        j[x][y] += oracle::markov_prob(rows, pi, s);
    });
    return j;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("renyi entropy closed forms") {
    const std::vector<double> u(5, 0.2);
    for (double g : kOrders) CHECK(renyi_entropy(u, g).hi == Approx(std::log(5.0)));
    const std::vector<double> b{0.75, 0.25};
    CHECK(renyi_entropy(b, 2.0).hi == Approx(-std::log(0.625)).epsilon(1e-12));
    CHECK(renyi_entropy(b, 2.0).hi == Approx(0.4700).epsilon(1e-3));
    CHECK(renyi_entropy(b, kInfiniteOrder).hi == Approx(0.2877).epsilon(1e-3));
}

TEST_CASE("order validation") {
    CHECK_THROWS_AS(validate_order(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(validate_order(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(validate_order(1.0 + 1e-8), std::invalid_argument);
    CHECK_NOTHROW(validate_order(1.0));
    CHECK_NOTHROW(validate_order(kInfiniteOrder));
}

TEST_CASE("conditional entropy under copying and independence") {
    Eigen::MatrixXd copy = Eigen::MatrixXd::Zero(3, 3);
    copy.diagonal() << 0.2, 0.5, 0.3;
    for (double g : kOrders) CHECK(conditional_renyi(copy, g).hi == Approx(0.0).epsilon(1e-12));
    const Eigen::Vector3d px(0.5, 0.3, 0.2);
    const Eigen::Vector2d py(0.6, 0.4);
    const Eigen::MatrixXd indep = px * py.transpose();
    const std::vector<double> mx{0.5, 0.3, 0.2};
    for (double g : kOrders) CHECK(conditional_renyi(indep, g).hi == Approx(renyi_entropy(mx, g).hi).epsilon(1e-12));
}

TEST_CASE("conditional entropy matches the Arimoto formula") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        const auto j = JointDistribution::random({3, 4}, rng);
        const std::vector<std::size_t> x{0}, y{1};
        const auto m = j.matrix(x, y);
        for (double g : kOrders) CHECK(conditional_renyi(m, g).hi == Approx(oracle::arimoto(table(m), g)).epsilon(1e-10));
    }
}

TEST_CASE("block entropies") {
    const auto u = SourceModel::uniform(2);
    for (double g : kOrders) CHECK(block_renyi_entropy(u, 6, 0, g).hi == Approx(6 * kLog2));
    CHECK(block_min_entropy(SourceModel::cycle(3), 7).hi == Approx(std::log(3.0)));
    const auto iid = SourceModel::iid({0.6, 0.4});
    for (std::size_t i : {0u, 1u, 3u}) {
        CHECK(conditional_min_entropy(iid, 4, i).hi == Approx(4 * -std::log(0.6)));
    }
    const auto frozen = SourceModel::markov(Eigen::MatrixXd::Identity(1, 1));
    CHECK(conditional_min_entropy(frozen, 3, 1).hi == Approx(0.0));
}

TEST_CASE("Markov block entropies agree with hand-built joints") {
    for (auto [a, b] : {std::pair{0.1, 0.2}, std::pair{0.6, 0.3}}) {
        const auto m = SourceModel::two_state(a, b);
        for (std::size_t k : {1u, 3u, 5u}) {
            for (std::size_t i : {0u, 1u, 3u}) {
                const auto joint = markov_joint(a, b, k, i);
                for (double g : kOrders) {
                    const double ref = i == 0 ? [&] {
                        std::vector<double> p;
                        for (const auto& row : joint) p.push_back(row[0]);
                        return oracle::renyi(p, g);
                    }()
                                              : oracle::arimoto(joint, g);
                    CHECK(block_renyi_entropy(m, k, i, g).hi == Approx(ref).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("HMM enumeration refuses oversized blocks") {
    Eigen::MatrixXd a(2, 2), e(2, 2);
    a << 0.9, 0.1, 0.2, 0.8;
    e << 0.7, 0.3, 0.1, 0.9;
    const auto h = SourceModel::hmm(a, e);
    CHECK_THROWS_AS(block_renyi_entropy(h, 30, 0, 2.0), std::length_error);
    CHECK_NOTHROW(block_renyi_entropy(h, 8, 2, 2.0));
}

TEST_CASE("context length") {
    const auto u = SourceModel::uniform(2);
    CHECK(context_length(u, 4).value == 16);
    CHECK(context_length(u, 1).value == 2);
    for (auto [a, b] : {std::pair{0.1, 0.2}, std::pair{0.3, 0.3}, std::pair{0.05, 0.6}}) {
        const auto m = SourceModel::two_state(a, b);
        for (std::size_t k = 1; k <= 10; ++k) {
            std::uint64_t i = 1;
            while (std::log(static_cast<double>(i)) < conditional_min_entropy(m, k, i).hi) ++i;
            CHECK(context_length(m, k).value == i);
        }
    }
    CHECK_THROWS_AS(context_length(u, 3, 1.0), std::invalid_argument);
}

TEST_CASE("weighted conditional entropy") {
    const auto m = SourceModel::two_state(0.1, 0.2);
    for (std::size_t k : {1u, 4u, 9u}) {
        const auto w = weighted_conditional_entropy(m, k);
        CHECK(w.lo == Approx(conditional_min_entropy(m, k, 1).hi).epsilon(1e-12));
        CHECK(w.width() == Approx(0.0));
        // Telescoping check by direct partial sums.
        const double term = std::exp(-conditional_min_entropy(m, k, 1).hi);
        double s = 0.0;
        for (int i = 1; i <= 200000; ++i) s += term / (double(i) * (i + 1));
        CHECK(-std::log(s) == Approx(w.lo).epsilon(1e-4));
    }
    const auto iid = SourceModel::iid({0.7, 0.3});
    CHECK(weighted_conditional_entropy(iid, 5).lo == Approx(block_min_entropy(iid, 5).hi));
    Eigen::MatrixXd a(2, 2), e(2, 2);
    a << 0.9, 0.1, 0.2, 0.8;
    e << 0.8, 0.2, 0.3, 0.7;
    const auto h = SourceModel::hmm(a, e);
    const auto narrow = weighted_conditional_entropy(h, 2, 1000);
    const auto wide = weighted_conditional_entropy(h, 2, 10);
    CHECK(narrow.width() < wide.width());
    CHECK(narrow.lo <= narrow.hi);
}

TEST_CASE("entropy rates") {
    for (std::size_t d : {2u, 3u, 5u}) {
        const auto u = SourceModel::uniform(d);
        CHECK(entropy_rate(u, 1).hi == Approx(std::log(double(d))));
        CHECK(entropy_rate(u, 2).hi == Approx(std::log(double(d))));
    }
    CHECK(entropy_rate(SourceModel::iid({0.75, 0.25}), 2).hi == Approx(-std::log(0.625)));
    // h_1 of a two-state chain: sum_i pi_i H(row i).
    const auto m = SourceModel::two_state(0.1, 0.2);
    const auto h = [](double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); };
    CHECK(entropy_rate(m, 1).hi == Approx(2.0 / 3.0 * h(0.1) + 1.0 / 3.0 * h(0.2)).epsilon(1e-12));
    // h_2 = -log of the largest root of the 2x2 matrix of squared transitions.
    const double a = 0.81, b = 0.01, c = 0.04, d = 0.64;
    const double lambda = (a + d) / 2 + std::sqrt((a - d) * (a - d) / 4 + b * c);
    CHECK(entropy_rate(m, 2).hi == Approx(-std::log(lambda)).epsilon(1e-12));
    // The block slope approaches it geometrically in k.
    const double slope = block_renyi_entropy(m, 41, 0, 2.0).hi - block_renyi_entropy(m, 40, 0, 2.0).hi;
    CHECK(std::abs(entropy_rate(m, 2).hi - slope) < 1e-4);
    CHECK_THROWS(entropy_rate(m, 3));
}

TEST_CASE("varentropy") {
    CHECK(varentropy(SourceModel::uniform(2), 10).variance.hi == Approx(0.0));
    const double p = 0.3;
    const double per = p * (1 - p) * std::pow(std::log(p / (1 - p)), 2);
    for (std::size_t k = 1; k <= 12; ++k) {
        const auto iid = SourceModel::iid({p, 1 - p});
        double m1 = 0, m2 = 0;
        oracle::for_each_string(2, k, [&](const oracle::Seq& x) {
            double pr = 1.0;
            for (auto s : x) pr *= s == 0 ? p : 1 - p;
            m1 += pr * -std::log(pr);
            m2 += pr * std::log(pr) * std::log(pr);
        });
        CHECK(varentropy(iid, k).variance.hi == Approx(k * per).epsilon(1e-9));
        CHECK(m2 - m1 * m1 == Approx(k * per).epsilon(1e-9));
    }
    const auto mc = varentropy_monte_carlo(SourceModel::two_state(0.1, 0.2), 6, 200000, 3);
    const auto exact = varentropy(SourceModel::two_state(0.1, 0.2), 6);
    CHECK(mc.variance.contains(exact.variance.hi));
}

TEST_CASE("plug-in entropy") {
    const auto s = sample_path(SourceModel::uniform(2), 1000000, {5, 0});
    CHECK(std::abs(plug_in_entropy(s, 2, 1.0).value.hi - 2 * kLog2) < 0.01);
    const SymbolSeq flat(std::vector<Symbol>(50, 0), 1);
    for (double g : kOrders) CHECK(plug_in_entropy(flat, 3, g).value.hi == Approx(0.0));
    CHECK(plug_in_entropy(SymbolSeq::from_string("aabb"), 1, 1.0).value.hi == Approx(kLog2));
}

TEST_CASE("chain rule on random joints") {
    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        const auto j = JointDistribution::random({2, 2, 2, 2}, rng);
        for (double g : {0.5, 2.0, kInfiniteOrder}) CHECK(check_chain_rule(j, g).holds);
    }
}

TEST_CASE("chain rule tight cases") {
    Rng rng(29);
    // U constant: H(U,X|Y) = H(X|Y).
    const auto base = JointDistribution::random({2, 3, 2}, rng);
    std::vector<double> withu(base.probs().begin(), base.probs().end());
    const JointDistribution constant_u({1, 2, 3, 2}, withu);
    for (double g : {0.5, 2.0}) {
        const auto c = check_chain_rule(constant_u, g);
        CHECK(c.ux_given_y == Approx(c.x_given_y));
    }
    // Z independent: H(X|Y,Z) = H(X|Y).
    std::vector<double> withz;
    for (double v : base.probs()) {
        withz.push_back(0.25 * v);
        withz.push_back(0.75 * v);
    }
    const JointDistribution indep_z({2, 3, 2, 2}, withz);
    for (double g : {0.5, 2.0, kInfiniteOrder}) {
        const auto c = check_chain_rule(indep_z, g);
        CHECK(c.x_given_yz == Approx(c.x_given_y));
    }
}

TEST_CASE("pointwise mutual information bound") {
    CHECK(pmi_bound_estimate(SourceModel::iid({0.3, 0.7}), 3, 3).ratio == Approx(1.0));
    const double a = 0.1, b = 0.2;
    const auto rows = oracle::two_state_rows(a, b);
    const auto pi = oracle::two_state_pi(a, b);
    double best = 0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) best = std::max(best, rows[x][y] / pi[y]);
    }
    CHECK(pmi_bound_estimate(SourceModel::two_state(a, b), 1, 1).ratio == Approx(best));
    const auto cyc = SourceModel::cycle(3);
    CHECK(pmi_bound_estimate(cyc, 1, 1).ratio == Approx(3.0));
    CHECK(pmi_bound_estimate(cyc, 2, 2).ratio >= pmi_bound_estimate(cyc, 1, 1).ratio);
}

TEST_CASE("entropy table") {
    const std::vector<double> g{0.0, 2.0};
    const std::vector<std::size_t> ks{1, 2}, is{0, 1};
    const auto t = build_entropy_table(SourceModel::uniform(2), g, ks, is);
    CHECK(t.entries().size() == 8);
    CHECK(t.at({2.0, 2, 1}).hi == Approx(2 * kLog2));
}

}
