#include "replab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "replab/parallel.hpp"

namespace replab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSumTolerance = 1e-9;

double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double clamp_nonneg(double v) { return v < 0.0 ? 0.0 : v; }

// D^n, saturating at UINT64_MAX.
std::uint64_t power_saturating(std::uint64_t d, std::size_t n) {
    std::uint64_t out = 1;
    for (std::size_t t = 0; t < n; ++t) {
        if (d != 0 && out > UINT64_MAX / d) return UINT64_MAX;
        out *= d;
    }
    return out;
}

void require_enumerable(const SourceModel& model, std::size_t length, std::uint64_t limit) {
    const auto count = power_saturating(model.alphabet_size(), length);
    if (count > limit) {
        throw std::length_error("enumeration of D^" + std::to_string(length) + " blocks exceeds limit " +
                                std::to_string(limit));
    }
}

std::vector<double> log_initial(const MarkovModel& m) {
    std::vector<double> out(m.initial.size());
    for (std::size_t x = 0; x < out.size(); ++x) out[x] = std::log(m.initial[x]);
    return out;
}

Eigen::MatrixXd log_matrix(const Eigen::MatrixXd& p) {
    return p.unaryExpr([](double v) { return v > 0.0 ? std::log(v) : kNegInf; });
}

// Markov H_gamma(X_1^k | X_{k+1}^{k+i}). Future conditioning of any length
// i >= 1 reduces to the first future symbol because the remaining factor
// depends on the future alone and leaves the gamma-norm.
double markov_block_renyi(const MarkovModel& m, std::size_t k, std::size_t i, double gamma) {
    const auto d = static_cast<std::size_t>(m.transition.rows());
    const Eigen::MatrixXd lp = log_matrix(m.transition);
    const bool conditional = i > 0;

    if (gamma == 1.0) {
        double h_pi = 0.0, rate = 0.0;
        for (std::size_t x = 0; x < d; ++x) {
            if (m.initial[x] > 0.0) h_pi -= m.initial[x] * std::log(m.initial[x]);
            double row = 0.0;
            for (std::size_t y = 0; y < d; ++y) {
                const double p = m.transition(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
                if (p > 0.0) row -= p * std::log(p);
            }
            rate += m.initial[x] * row;
        }
        return conditional ? static_cast<double>(k) * rate : h_pi + static_cast<double>(k - 1) * rate;
    }

    // Weight each transition by w(p): log-domain step of a semiring DP.
    auto step_weight = [&](std::size_t x, std::size_t y) -> double {
        const double l = lp(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
        if (l == kNegInf) return kNegInf;
        if (gamma == 0.0) return 0.0;
        if (std::isinf(gamma)) return l;
        return gamma * l;
    };
    const bool max_product = std::isinf(gamma);

    std::vector<double> v(d);
    const auto li = log_initial(m);
    for (std::size_t x = 0; x < d; ++x) {
        if (li[x] == kNegInf) v[x] = kNegInf;
        else if (gamma == 0.0) v[x] = 0.0;
        else if (max_product) v[x] = li[x];
        else v[x] = gamma * li[x];
    }
    auto advance = [&](const std::vector<double>& cur, std::size_t y) {
        std::vector<double> terms(d);
        for (std::size_t x = 0; x < d; ++x) terms[x] = cur[x] + step_weight(x, y);
        if (max_product) return *std::max_element(terms.begin(), terms.end());
        return log_sum_exp(terms);
    };
    for (std::size_t t = 1; t < k; ++t) {
        std::vector<double> next(d);
        for (std::size_t y = 0; y < d; ++y) next[y] = advance(v, y);
        v = std::move(next);
    }

    if (!conditional) {
        if (max_product) return -*std::max_element(v.begin(), v.end());
        const double total = log_sum_exp(v);
        if (gamma == 0.0) return total;
        return total / (1.0 - gamma);
    }
    std::vector<double> per_future(d);
    for (std::size_t y = 0; y < d; ++y) per_future[y] = advance(v, y);
    if (max_product) return -log_sum_exp(per_future);
    if (gamma == 0.0) {
        double best = kNegInf;
        for (std::size_t y = 0; y < d; ++y) {
            if (m.initial[y] > 0.0) best = std::max(best, per_future[y]);
        }
        return best;
    }
    for (auto& v_y : per_future) v_y /= gamma;
    return gamma / (1.0 - gamma) * log_sum_exp(per_future);
}

// HMM (or any tractable model) by exhaustive enumeration of (k+i)-blocks.
double enumerated_block_renyi(const SourceModel& model, std::size_t k, std::size_t i, double gamma,
                              std::uint64_t limit) {
    require_enumerable(model, k + i, limit);
    const auto futures = power_saturating(model.alphabet_size(), i);
    std::vector<double> acc(futures, 0.0);
    double joint_shannon = 0.0;
    std::uint64_t counter = 0;
    enumerate_blocks(
        model, k + i,
        [&](std::span<const Symbol>, double p) {
            const auto y = counter++ % futures;
            if (std::isinf(gamma)) {
                acc[y] = std::max(acc[y], p);
            } else if (gamma == 0.0) {
                acc[y] += p > 0.0 ? 1.0 : 0.0;
            } else if (gamma == 1.0) {
                acc[y] += p;
                if (p > 0.0) joint_shannon -= p * std::log(p);
            } else {
                acc[y] += std::pow(p, gamma);
            }
        },
        limit);
    if (std::isinf(gamma)) return -std::log(std::accumulate(acc.begin(), acc.end(), 0.0));
    if (gamma == 0.0) return std::log(*std::max_element(acc.begin(), acc.end()));
    if (gamma == 1.0) {
        double h_future = 0.0;
        for (double p : acc) {
            if (p > 0.0) h_future -= p * std::log(p);
        }
        return joint_shannon - h_future;
    }
    double s = 0.0;
    for (double a : acc) s += std::pow(a, 1.0 / gamma);
    return gamma / (1.0 - gamma) * std::log(s);
}

}  // namespace

void validate_order(double gamma) {
    if (std::isnan(gamma) || gamma < 0.0) throw std::invalid_argument("entropy order must be >= 0");
    if (gamma != 1.0 && std::abs(gamma - 1.0) < 1e-6) {
        throw std::invalid_argument("entropy order within 1e-6 of 1 is rejected; use exactly 1");
    }
}

EntropyValue renyi_entropy(std::span<const double> dist, double gamma) {
    validate_order(gamma);
    if (dist.empty()) throw std::invalid_argument("empty distribution");
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("distribution has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) throw std::invalid_argument("distribution does not sum to 1");
    double h = 0.0;
    if (gamma == 0.0) {
        h = std::log(static_cast<double>(std::count_if(dist.begin(), dist.end(), [](double p) { return p > 0.0; })));
    } else if (gamma == 1.0) {
        for (double p : dist) {
            if (p > 0.0) h -= p * std::log(p);
        }
    } else if (std::isinf(gamma)) {
        h = -std::log(*std::max_element(dist.begin(), dist.end()));
    } else {
        double s = 0.0;
        for (double p : dist) {
            if (p > 0.0) s += std::pow(p, gamma);
        }
        h = std::log(s) / (1.0 - gamma);
    }
    return EntropyValue::exact(clamp_nonneg(h));
}

EntropyValue conditional_renyi(const Eigen::MatrixXd& joint, double gamma) {
    validate_order(gamma);
    if (joint.size() == 0) throw std::invalid_argument("empty joint distribution");
    if ((joint.array() < 0.0).any()) throw std::invalid_argument("joint distribution has a negative entry");
    if (std::abs(joint.sum() - 1.0) > kSumTolerance) throw std::invalid_argument("joint distribution does not sum to 1");
    double h = 0.0;
    if (std::isinf(gamma)) {
        h = -std::log(joint.colwise().maxCoeff().sum());
    } else if (gamma == 0.0) {
        double best = 0.0;
        for (Eigen::Index y = 0; y < joint.cols(); ++y) {
            best = std::max(best, static_cast<double>((joint.col(y).array() > 0.0).count()));
        }
        h = std::log(best);
    } else if (gamma == 1.0) {
        double h_joint = 0.0, h_y = 0.0;
        for (Eigen::Index y = 0; y < joint.cols(); ++y) {
            const double py = joint.col(y).sum();
            if (py > 0.0) h_y -= py * std::log(py);
            for (Eigen::Index x = 0; x < joint.rows(); ++x) {
                const double p = joint(x, y);
                if (p > 0.0) h_joint -= p * std::log(p);
            }
        }
        h = h_joint - h_y;
    } else {
        double s = 0.0;
        for (Eigen::Index y = 0; y < joint.cols(); ++y) {
            double inner = 0.0;
            for (Eigen::Index x = 0; x < joint.rows(); ++x) {
                if (joint(x, y) > 0.0) inner += std::pow(joint(x, y), gamma);
            }
            s += std::pow(inner, 1.0 / gamma);
        }
        h = gamma / (1.0 - gamma) * std::log(s);
    }
    return EntropyValue::exact(clamp_nonneg(h));
}

JointDistribution::JointDistribution(std::vector<std::size_t> dims, std::vector<double> probs)
    : dims_(std::move(dims)), probs_(std::move(probs)) {
    std::size_t cells = 1;
    for (auto d : dims_) {
        if (d == 0) throw std::invalid_argument("joint distribution axis of size 0");
        cells *= d;
    }
    if (cells != probs_.size()) throw std::invalid_argument("joint distribution size does not match its axes");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw std::invalid_argument("joint distribution has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) throw std::invalid_argument("joint distribution does not sum to 1");
}

JointDistribution JointDistribution::random(std::vector<std::size_t> dims, Rng& rng) {
    std::size_t cells = 1;
    for (auto d : dims) cells *= d;
    std::vector<double> p(cells);
    double sum = 0.0;
    for (auto& v : p) {
        v = -std::log(1.0 - uniform01(rng));
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return JointDistribution(std::move(dims), std::move(p));
}

Eigen::MatrixXd JointDistribution::matrix(std::span<const std::size_t> target,
                                          std::span<const std::size_t> given) const {
    auto extent = [&](std::span<const std::size_t> axes) {
        std::size_t n = 1;
        for (auto a : axes) {
            if (a >= dims_.size()) throw std::out_of_range("joint distribution axis out of range");
            n *= dims_[a];
        }
        return n;
    };
    const auto rows = extent(target), cols = extent(given);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> coord(dims_.size(), 0);
    auto flatten = [&](std::span<const std::size_t> axes) {
        std::size_t idx = 0;
        for (auto a : axes) idx = idx * dims_[a] + coord[a];
        return idx;
    };
    for (std::size_t cell = 0; cell < probs_.size(); ++cell) {
        std::size_t rem = cell;
        for (std::size_t a = dims_.size(); a-- > 0;) {
            coord[a] = rem % dims_[a];
            rem /= dims_[a];
        }
        out(static_cast<Eigen::Index>(flatten(target)), static_cast<Eigen::Index>(flatten(given))) += probs_[cell];
    }
    return out;
}

void enumerate_blocks(const SourceModel& model, std::size_t length,
                      const std::function<void(std::span<const Symbol>, double)>& fn, std::uint64_t limit) {
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    require_enumerable(model, length, limit);
    const auto d = model.alphabet_size();
    std::vector<Symbol> block(length, 0);
    if (length == 0) {
        fn(block, 1.0);
        return;
    }
    if (const auto* hmm = model.get_if<HmmModel>()) {
        const auto s_count = hmm->transition.rows();
        // alpha[t]: unnormalized forward vector after emitting block[0..t].
        std::vector<Eigen::VectorXd> alpha(length, Eigen::VectorXd::Zero(s_count));
        Eigen::VectorXd prior(s_count);
        for (Eigen::Index s = 0; s < s_count; ++s) prior(s) = hmm->initial[static_cast<std::size_t>(s)];
        std::function<void(std::size_t, const Eigen::VectorXd&)> rec = [&](std::size_t t, const Eigen::VectorXd& pred) {
            for (std::size_t x = 0; x < d; ++x) {
                block[t] = static_cast<Symbol>(x);
                alpha[t] = pred.cwiseProduct(hmm->emission.col(static_cast<Eigen::Index>(x)));
                if (t + 1 == length) {
                    fn(block, alpha[t].sum());
                } else {
                    rec(t + 1, (alpha[t].transpose() * hmm->transition).transpose());
                }
            }
        };
        rec(0, prior);
        return;
    }
    const auto* iid = model.get_if<IidModel>();
    const auto* mk = model.get_if<MarkovModel>();
    std::function<void(std::size_t, double)> rec = [&](std::size_t t, double prefix_p) {
        for (std::size_t x = 0; x < d; ++x) {
            block[t] = static_cast<Symbol>(x);
            double p = prefix_p;
            if (iid) p *= iid->probs[x];
            else if (t == 0) p *= mk->initial[x];
            else p *= mk->transition(block[t - 1], static_cast<Eigen::Index>(x));
            if (t + 1 == length) fn(block, p);
            else rec(t + 1, p);
        }
    };
    rec(0, 1.0);
}

ModalBlock modal_block(const SourceModel& model, std::size_t k, std::uint64_t limit) {
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    ModalBlock out;
    if (k == 0) return out;
    if (const auto* iid = model.get_if<IidModel>()) {
        const auto it = std::max_element(iid->probs.begin(), iid->probs.end());
        out.block.assign(k, static_cast<Symbol>(it - iid->probs.begin()));
        out.log_prob = static_cast<double>(k) * std::log(*it);
        return out;
    }
    if (const auto* mk = model.get_if<MarkovModel>()) {
        const auto d = static_cast<std::size_t>(mk->transition.rows());
        const Eigen::MatrixXd lp = log_matrix(mk->transition);
        // tail[t][x]: best log-probability of completing positions t+1..k-1 from x.
        std::vector<std::vector<double>> tail(k, std::vector<double>(d, 0.0));
        for (std::size_t t = k - 1; t-- > 0;) {
            for (std::size_t x = 0; x < d; ++x) {
                double best = kNegInf;
                for (std::size_t y = 0; y < d; ++y) {
                    best = std::max(best, lp(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) + tail[t + 1][y]);
                }
                tail[t][x] = best;
            }
        }
        const auto li = log_initial(*mk);
        double best = kNegInf;
        for (std::size_t x = 0; x < d; ++x) best = std::max(best, li[x] + tail[0][x]);
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            for (std::size_t x = 0; x < d; ++x) {
                const double step = t == 0 ? li[x] : lp(out.block.back(), static_cast<Eigen::Index>(x));
                if (acc + step + tail[t][x] >= best - tol) {
                    out.block.push_back(static_cast<Symbol>(x));
                    acc += step;
                    break;
                }
            }
        }
        out.log_prob = acc;
        return out;
    }
    double best = -1.0;
    enumerate_blocks(
        model, k,
        [&](std::span<const Symbol> block, double p) {
            if (p > best * (1.0 + 1e-12)) {
                best = p;
                out.block.assign(block.begin(), block.end());
            }
        },
        limit);
    out.log_prob = std::log(best);
    return out;
}

EntropyValue block_renyi_entropy(const SourceModel& model, std::size_t k, std::size_t i, double gamma,
                                 std::uint64_t limit) {
    validate_order(gamma);
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    if (k == 0) return EntropyValue::exact(0.0);
    if (const auto* iid = model.get_if<IidModel>()) {
        return EntropyValue::exact(static_cast<double>(k) * renyi_entropy(iid->probs, gamma).lo);
    }
    if (const auto* mk = model.get_if<MarkovModel>()) {
        return EntropyValue::exact(clamp_nonneg(markov_block_renyi(*mk, k, i, gamma)));
    }
    return EntropyValue::exact(clamp_nonneg(enumerated_block_renyi(model, k, i, gamma, limit)));
}

EntropyValue block_min_entropy(const SourceModel& model, std::size_t k, std::uint64_t limit) {
    return block_renyi_entropy(model, k, 0, kInfiniteOrder, limit);
}

EntropyValue conditional_min_entropy(const SourceModel& model, std::size_t k, std::size_t i, std::uint64_t limit) {
    return block_renyi_entropy(model, k, i, kInfiniteOrder, limit);
}

ContextLengthValue context_length(const SourceModel& model, std::size_t k, double gamma, std::uint64_t limit) {
    validate_order(gamma);
    if (!(gamma > 1.0)) throw std::invalid_argument("context length needs gamma > 1");
    if (k == 0) throw std::invalid_argument("block length must be positive");
    const double coef = std::isinf(gamma) ? 1.0 : gamma / (gamma - 1.0);
    const std::uint64_t ceiling = power_saturating(model.alphabet_size(), k);
    auto satisfied = [&](std::uint64_t i) {
        const double h = block_renyi_entropy(model, k, static_cast<std::size_t>(i), gamma, limit).hi;
        // Relative slack absorbs rounding when log i and H coincide exactly.
        return coef * std::log(static_cast<double>(i)) >= h - 1e-12 * std::max(1.0, h);
    };
    ContextLengthValue out{k, gamma, 1};
    if (satisfied(1)) return out;
    std::uint64_t lo = 1, hi = 2;
    while (!satisfied(hi)) {
        lo = hi;
        if (hi >= ceiling) {
            throw std::runtime_error("context length search passed D^k without meeting the threshold");
        }
        hi = (hi > ceiling / 2) ? ceiling : hi * 2;
    }
    // satisfied(hi) and !satisfied(lo)
    while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (satisfied(mid)) hi = mid;
        else lo = mid;
    }
    out.value = hi;
    return out;
}

WeightedEntropyValue weighted_conditional_entropy(const SourceModel& model, std::size_t k,
                                                  std::uint64_t truncation_M, std::uint64_t limit) {
    if (truncation_M == 0) throw std::invalid_argument("truncation must be positive");
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    WeightedEntropyValue out{k, 0.0, 0.0, truncation_M};
    if (model.markov_reducible()) {
        // Every term equals exp(-H(k|1)) and sum 1/(i(i+1)) telescopes to 1.
        const double h = conditional_min_entropy(model, k, 1, limit).hi;
        out.lo = out.hi = h;
        return out;
    }
    std::uint64_t m_eff = 0;
    while (m_eff < truncation_M && power_saturating(model.alphabet_size(), k + m_eff + 1) <= limit) ++m_eff;
    if (m_eff == 0) throw std::length_error("weighted entropy needs at least one enumerable conditioning length");
    double partial = 0.0, last_h = 0.0;
    for (std::uint64_t i = 1; i <= m_eff; ++i) {
        last_h = conditional_min_entropy(model, k, static_cast<std::size_t>(i), limit).hi;
        partial += std::exp(-last_h) / (static_cast<double>(i) * static_cast<double>(i + 1));
    }
    const double tail_scale = 1.0 / static_cast<double>(m_eff + 1);
    out.lo = -std::log(partial + tail_scale);
    out.hi = -std::log(partial + std::exp(-last_h) * tail_scale);
    out.truncation_M = m_eff;
    return out;
}

EntropyValue entropy_rate(const SourceModel& model, int gamma) {
    if (gamma != 1 && gamma != 2) throw std::invalid_argument("entropy rate supports gamma 1 or 2");
    if (const auto* iid = model.get_if<IidModel>()) {
        return renyi_entropy(iid->probs, static_cast<double>(gamma));
    }
    const auto* mk = model.get_if<MarkovModel>();
    if (!mk) throw std::domain_error("entropy rate is only available for IID and Markov sources");
    if (gamma == 1) {
        // H(X_1^2) - H(X_1) = sum_x pi_x H(P(x, .)).
        return EntropyValue::exact(markov_block_renyi(*mk, 1, 1, 1.0));
    }
    const Eigen::MatrixXd squared = mk->transition.cwiseProduct(mk->transition);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(squared, false);
    const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
    return EntropyValue::exact(clamp_nonneg(-std::log(radius)));
}

VarentropyValue varentropy_monte_carlo(const SourceModel& model, std::size_t k, std::uint64_t samples,
                                       std::uint64_t seed) {
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    if (samples < 2) throw std::invalid_argument("Monte Carlo varentropy needs at least 2 samples");
    std::vector<double> v(samples);
    parallel_for(samples, [&](std::size_t s) {
        PathSampler sampler(model, SeedSpec{seed, s});
        std::vector<Symbol> block(k);
        for (auto& x : block) x = sampler.next();
        v[s] = -log_block_probability(model, block);
    });
    const double n = static_cast<double>(samples);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double dev = (x - mean) * (x - mean);
        m2 += dev;
        m4 += dev * dev;
    }
    const double var = m2 / (n - 1.0);
    const double se = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
    VarentropyValue out;
    out.variance = {std::max(0.0, var - 3.0 * se), var + 3.0 * se};
    out.exact = false;
    out.samples = samples;
    out.shannon = model.markov_reducible() ? block_renyi_entropy(model, k, 0, 1.0).hi : mean;
    out.ratio = out.shannon > 0.0 ? std::sqrt(var) / out.shannon : 0.0;
    return out;
}

VarentropyValue varentropy(const SourceModel& model, std::size_t k, std::uint64_t limit,
                           std::uint64_t mc_samples, std::uint64_t seed) {
    if (!model.tractable()) throw std::domain_error("copy source has no tractable block law");
    VarentropyValue out;
    if (const auto* iid = model.get_if<IidModel>()) {
        const double h = renyi_entropy(iid->probs, 1.0).lo;
        double v1 = 0.0;
        for (double p : iid->probs) {
            if (p > 0.0) v1 += p * (-std::log(p) - h) * (-std::log(p) - h);
        }
        out.variance = EntropyValue::exact(static_cast<double>(k) * v1);
        out.shannon = static_cast<double>(k) * h;
    } else if (power_saturating(model.alphabet_size(), k) <= limit) {
        double mean = 0.0;
        enumerate_blocks(model, k, [&](std::span<const Symbol>, double p) {
            if (p > 0.0) mean -= p * std::log(p);
        }, limit);
        double var = 0.0;
        enumerate_blocks(model, k, [&](std::span<const Symbol>, double p) {
            if (p > 0.0) var += p * (-std::log(p) - mean) * (-std::log(p) - mean);
        }, limit);
        out.variance = EntropyValue::exact(var);
        out.shannon = mean;
    } else {
        return varentropy_monte_carlo(model, k, mc_samples, seed);
    }
    out.ratio = out.shannon > 0.0 ? std::sqrt(out.variance.hi) / out.shannon : 0.0;
    return out;
}

PlugInEstimate plug_in_entropy(const SymbolSeq& seq, std::size_t k, double gamma) {
    validate_order(gamma);
    if (k == 0) throw std::invalid_argument("block length must be positive");
    PlugInEstimate out;
    const double d_pow_k = std::pow(static_cast<double>(std::max<std::size_t>(seq.alphabet_size(), 1)),
                                    static_cast<double>(k));
    out.undersampled = 10.0 * d_pow_k > static_cast<double>(seq.size());
    if (seq.size() < k) return out;
    const auto x = seq.symbols();
    std::unordered_map<std::u32string, std::uint64_t> counts;
    std::u32string key(k, U'\0');
    for (std::size_t t = 0; t + k <= x.size(); ++t) {
        for (std::size_t j = 0; j < k; ++j) key[j] = static_cast<char32_t>(x[t + j]);
        ++counts[key];
    }
    out.blocks = x.size() - k + 1;
    std::vector<double> p;
    p.reserve(counts.size());
    for (const auto& [block, c] : counts) p.push_back(static_cast<double>(c) / static_cast<double>(out.blocks));
    std::sort(p.begin(), p.end());  // hash order must not leak into the float sums
    out.value = renyi_entropy(p, gamma);
    return out;
}

ChainRuleCheck check_chain_rule(const JointDistribution& uxyz, double gamma, double slack) {
    if (uxyz.dims().size() != 4) throw std::invalid_argument("chain rule check needs a joint over (U, X, Y, Z)");
    constexpr std::size_t U = 0, X = 1, Y = 2, Z = 3;
    auto h = [&](std::initializer_list<std::size_t> target, std::initializer_list<std::size_t> given, double g) {
        const std::vector<std::size_t> t(target), c(given);
        return conditional_renyi(uxyz.matrix(t, c), g).lo;
    };
    ChainRuleCheck out;
    out.x_given_yz = h({X}, {Y, Z}, gamma);
    out.x_given_y = h({X}, {Y}, gamma);
    out.ux_given_y = h({U, X}, {Y}, gamma);
    out.hartley_u_given_y = h({U}, {Y}, 0.0);
    out.x_given_yu = h({X}, {Y, U}, gamma);
    out.holds = out.x_given_yz <= out.x_given_y + slack && out.x_given_y <= out.ux_given_y + slack &&
                out.ux_given_y <= out.hartley_u_given_y + out.x_given_yu + slack;
    return out;
}

PmiBound pmi_bound_estimate(const SourceModel& model, std::size_t n_max, std::size_t m_max, std::uint64_t limit) {
    if (n_max == 0 || m_max == 0) throw std::invalid_argument("PMI window sizes must be positive");
    require_enumerable(model, n_max + m_max, limit);
    PmiBound out{1.0, kNegInf, n_max, m_max};
    for (std::size_t n = 1; n <= n_max; ++n) {
        for (std::size_t m = 1; m <= m_max; ++m) {
            enumerate_blocks(
                model, n + m,
                [&](std::span<const Symbol> block, double p) {
                    if (p <= 0.0) return;
                    const double r = std::log(p) - log_block_probability(model, block.first(n)) -
                                     log_block_probability(model, block.subspan(n));
                    out.log_ratio = std::max(out.log_ratio, r);
                },
                limit);
        }
    }
    out.ratio = std::exp(out.log_ratio);
    return out;
}

EntropyTable build_entropy_table(const SourceModel& model, std::span<const double> gammas,
                                 std::span<const std::size_t> ks, std::span<const std::size_t> is,
                                 std::uint64_t limit) {
    std::vector<EntropyKey> keys;
    for (double g : gammas)
        for (auto k : ks)
            for (auto i : is) keys.push_back({g, k, i});
    std::vector<EntropyValue> values(keys.size());
    parallel_for(keys.size(), [&](std::size_t c) {
        values[c] = block_renyi_entropy(model, keys[c].k, keys[c].i, keys[c].gamma, limit);
    });
    EntropyTable table;
    for (std::size_t c = 0; c < keys.size(); ++c) table.set(keys[c], values[c]);
    return table;
}

}  // namespace replab
