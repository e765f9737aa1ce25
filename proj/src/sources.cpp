#include "replab/sources.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace replab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void validate_distribution(std::span<const double> p, const std::string& what) {
    if (p.empty()) throw std::invalid_argument(what + " is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
            throw std::invalid_argument(what + " entry " + std::to_string(i) + " is negative or not finite");
        }
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        throw std::invalid_argument(what + " sums to " + fmt_double(sum) + " (must be 1 within 1e-12)");
    }
}

void validate_stochastic(const Eigen::MatrixXd& m, const std::string& what, bool square) {
    if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument(what + " is empty");
    if (square && m.rows() != m.cols()) throw std::invalid_argument(what + " must be square");
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        validate_distribution(row, what + " row " + std::to_string(r));
    }
}

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    return row;
}

void check_symbols(std::span<const Symbol> block, std::size_t d) {
    for (Symbol s : block) {
        if (s >= d) throw std::invalid_argument("block symbol " + std::to_string(s) + " outside alphabet");
    }
}

// Scaled forward pass; returns log P(block) and leaves the normalized state
// distribution (after the last emission) in `alpha`.
double hmm_forward(const HmmModel& m, std::span<const Symbol> block, Eigen::VectorXd& alpha) {
    const Eigen::Index s_count = m.transition.rows();
    alpha.resize(s_count);
    for (Eigen::Index s = 0; s < s_count; ++s) alpha(s) = m.initial[static_cast<std::size_t>(s)];
    double log_p = 0.0;
    for (std::size_t t = 0; t < block.size(); ++t) {
        if (t > 0) alpha = (alpha.transpose() * m.transition).transpose();
        for (Eigen::Index s = 0; s < s_count; ++s) alpha(s) *= m.emission(s, block[t]);
        const double total = alpha.sum();
        if (total <= 0.0) return kNegInf;
        alpha /= total;
        log_p += std::log(total);
    }
    return log_p;
}

}  // namespace

IidModel::IidModel(std::vector<double> p) : probs(std::move(p)) {
    validate_distribution(probs, "probability vector");
}

MarkovModel::MarkovModel(Eigen::MatrixXd p, PeriodicityPolicy policy) : transition(std::move(p)) {
    validate_stochastic(transition, "transition", true);
    initial = stationary_distribution(transition, policy);
}

HmmModel::HmmModel(Eigen::MatrixXd a, Eigen::MatrixXd b, PeriodicityPolicy policy)
    : transition(std::move(a)), emission(std::move(b)) {
    validate_stochastic(transition, "state transition", true);
    validate_stochastic(emission, "emission", false);
    if (emission.rows() != transition.rows()) {
        throw std::invalid_argument("emission matrix needs one row per hidden state");
    }
    initial = stationary_distribution(transition, policy);
}

CopyModel::CopyModel(std::vector<double> base_probs, double copy_probability, std::size_t max_len)
    : base(std::move(base_probs)), copy_prob(copy_probability), max_copy_len(max_len) {
    validate_distribution(base, "base probability vector");
    if (!(copy_prob >= 0.0 && copy_prob < 1.0)) throw std::invalid_argument("copy_prob must lie in [0, 1)");
    if (max_copy_len == 0) throw std::invalid_argument("max_copy_len must be positive");
}

SourceModel::SourceModel(Variant model, std::string label) : model_(std::move(model)), label_(std::move(label)) {
    alphabet_size_ = std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IidModel>) return m.probs.size();
            else if constexpr (std::is_same_v<T, MarkovModel>) return static_cast<std::size_t>(m.transition.rows());
            else if constexpr (std::is_same_v<T, HmmModel>) return static_cast<std::size_t>(m.emission.cols());
            else return m.base.size();
        },
        model_);
}

SourceModel SourceModel::iid(std::vector<double> probs, std::string label) {
    return SourceModel(IidModel(std::move(probs)), std::move(label));
}

SourceModel SourceModel::uniform(std::size_t alphabet_size) {
    if (alphabet_size == 0) throw std::invalid_argument("alphabet size must be positive");
    return iid(std::vector<double>(alphabet_size, 1.0 / static_cast<double>(alphabet_size)),
               "iid-uniform-" + std::to_string(alphabet_size));
}

SourceModel SourceModel::markov(Eigen::MatrixXd transition, std::string label, PeriodicityPolicy policy) {
    return SourceModel(MarkovModel(std::move(transition), policy), std::move(label));
}

SourceModel SourceModel::two_state(double a, double b, std::string label) {
    Eigen::MatrixXd p(2, 2);
    p << 1.0 - a, a, b, 1.0 - b;
    return markov(std::move(p), std::move(label));
}

SourceModel SourceModel::cycle(std::size_t alphabet_size) {
    if (alphabet_size == 0) throw std::invalid_argument("alphabet size must be positive");
    const auto d = static_cast<Eigen::Index>(alphabet_size);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) p(i, (i + 1) % d) = 1.0;
    return markov(std::move(p), "cycle-" + std::to_string(alphabet_size), PeriodicityPolicy::allow_periodic);
}

SourceModel SourceModel::hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission, std::string label) {
    return SourceModel(HmmModel(std::move(transition), std::move(emission)), std::move(label));
}

SourceModel SourceModel::copy_source(std::vector<double> base, double copy_prob, std::size_t max_copy_len,
                                     std::string label) {
    return SourceModel(CopyModel(std::move(base), copy_prob, max_copy_len), std::move(label));
}

std::string SourceModel::type_name() const {
    switch (model_.index()) {
        case 0: return "iid";
        case 1: return "markov";
        case 2: return "hmm";
        default: return "copy";
    }
}

std::vector<double> SourceModel::marginal() const {
    return std::visit(
        [](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IidModel>) {
                return m.probs;
            } else if constexpr (std::is_same_v<T, MarkovModel>) {
                return m.initial;
            } else if constexpr (std::is_same_v<T, HmmModel>) {
                std::vector<double> out(static_cast<std::size_t>(m.emission.cols()), 0.0);
                for (Eigen::Index s = 0; s < m.emission.rows(); ++s)
                    for (Eigen::Index x = 0; x < m.emission.cols(); ++x)
                        out[static_cast<std::size_t>(x)] += m.initial[static_cast<std::size_t>(s)] * m.emission(s, x);
                return out;
            } else {
                return m.base;
            }
        },
        model_);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(const SeedSpec& seed) noexcept {
    return splitmix64(seed.master_seed ^ splitmix64(seed.stream_index + 0x9E3779B97F4A7C15ULL));
}

Rng make_rng(const SeedSpec& seed) { return Rng(derive_stream_seed(seed)); }

double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Categorical::Categorical(std::span<const double> probs) {
    cdf_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf_[i] = acc;
        if (probs[i] > 0.0) last_positive_ = static_cast<Symbol>(i);
    }
}

Symbol Categorical::operator()(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = static_cast<Symbol>(it - cdf_.begin());
    return std::min(idx, last_positive_);
}

PathSampler::PathSampler(const SourceModel& model, const SeedSpec& seed) : rng_(make_rng(seed)) {
    std::visit(
        [this](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IidModel>) {
                kind_ = Kind::iid;
                marginal_ = Categorical(m.probs);
            } else if constexpr (std::is_same_v<T, MarkovModel>) {
                kind_ = Kind::markov;
                marginal_ = Categorical(m.initial);
                for (Eigen::Index r = 0; r < m.transition.rows(); ++r) rows_.emplace_back(row_of(m.transition, r));
            } else if constexpr (std::is_same_v<T, HmmModel>) {
                kind_ = Kind::hmm;
                marginal_ = Categorical(m.initial);
                for (Eigen::Index r = 0; r < m.transition.rows(); ++r) rows_.emplace_back(row_of(m.transition, r));
                for (Eigen::Index r = 0; r < m.emission.rows(); ++r) emissions_.emplace_back(row_of(m.emission, r));
            } else {
                kind_ = Kind::copy;
                marginal_ = Categorical(m.base);
                copy_prob_ = m.copy_prob;
                max_copy_len_ = m.max_copy_len;
            }
        },
        model.variant());
}

Symbol PathSampler::next() {
    switch (kind_) {
        case Kind::iid:
            return marginal_(rng_);
        case Kind::markov:
            state_ = started_ ? rows_[state_](rng_) : marginal_(rng_);
            started_ = true;
            return static_cast<Symbol>(state_);
        case Kind::hmm:
            state_ = started_ ? rows_[state_](rng_) : marginal_(rng_);
            started_ = true;
            return emissions_[state_](rng_);
        case Kind::copy: {
            const std::size_t t = history_.size();
            // No draw when copy_prob == 0 keeps the stream identical to the base IID source.
            if (copy_prob_ > 0.0 && t > 0) {
                if (uniform01(rng_) < copy_prob_) {
                    if (copy_left_ == 0) {
                        copy_src_ = std::min(t - 1, static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(t)));
                        copy_left_ = max_copy_len_;
                    }
                    const Symbol s = history_[copy_src_];
                    ++copy_src_;
                    --copy_left_;
                    history_.push_back(s);
                    return s;
                }
                copy_left_ = 0;
            }
            const Symbol s = marginal_(rng_);
            history_.push_back(s);
            return s;
        }
    }
    return 0;
}

SymbolSeq sample_path(const SourceModel& model, std::size_t n, const SeedSpec& seed) {
    PathSampler sampler(model, seed);
    std::vector<Symbol> out(n);
    for (auto& s : out) s = sampler.next();
    return SymbolSeq(std::move(out), model.alphabet_size());
}

SymbolSeq sample_copy_source(const CopyModel& params, std::size_t n, const SeedSpec& seed) {
    return sample_path(SourceModel(params, "copy"), n, seed);
}

bool is_irreducible(const Eigen::MatrixXd& transition) {
    const auto n = static_cast<std::size_t>(transition.rows());
    if (n == 0) return false;
    auto reach_all = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::deque<std::size_t> queue{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < n; ++v) {
                const double w = forward ? transition(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v))
                                         : transition(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u));
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    queue.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reach_all(true) && reach_all(false);
}

std::size_t chain_period(const Eigen::MatrixXd& transition) {
    const auto n = static_cast<std::size_t>(transition.rows());
    std::vector<long> level(n, -1);
    std::deque<std::size_t> queue{0};
    level[0] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (std::size_t v = 0; v < n; ++v) {
            if (transition(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    long g = 0;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (transition(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) > 0.0 && level[u] >= 0) {
                g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
            }
        }
    }
    return static_cast<std::size_t>(g == 0 ? 1 : g);
}

std::vector<double> stationary_distribution(const Eigen::MatrixXd& transition, PeriodicityPolicy policy) {
    validate_stochastic(transition, "transition", true);
    if (!is_irreducible(transition)) throw std::invalid_argument("transition matrix is reducible");
    if (policy == PeriodicityPolicy::require_aperiodic && chain_period(transition) != 1) {
        throw std::invalid_argument("transition matrix is periodic (period " +
                                    std::to_string(chain_period(transition)) + ")");
    }
    const Eigen::Index n = transition.rows();
    // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < n; ++i) pi(i) = std::max(pi(i), 0.0);
    pi /= pi.sum();
    const double residual = (pi.transpose() * transition - pi.transpose()).cwiseAbs().maxCoeff();
    if (residual >= kStationarityTolerance) {
        throw std::invalid_argument("stationary solve residual " + fmt_double(residual) + " exceeds 1e-10");
    }
    return {pi.data(), pi.data() + n};
}

double log_block_probability(const SourceModel& model, std::span<const Symbol> block) {
    check_symbols(block, model.alphabet_size());
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, IidModel>) {
                double lp = 0.0;
                for (Symbol s : block) lp += std::log(m.probs[s]);
                return lp;
            } else if constexpr (std::is_same_v<T, MarkovModel>) {
                if (block.empty()) return 0.0;
                double lp = std::log(m.initial[block[0]]);
                for (std::size_t t = 1; t < block.size(); ++t) lp += std::log(m.transition(block[t - 1], block[t]));
                return lp;
            } else if constexpr (std::is_same_v<T, HmmModel>) {
                Eigen::VectorXd alpha;
                return hmm_forward(m, block, alpha);
            } else {
                throw std::domain_error("copy source has no tractable block law");
            }
        },
        model.variant());
}

double block_probability(const SourceModel& model, std::span<const Symbol> block) {
    return std::exp(log_block_probability(model, block));
}

double log_conditional_block_probability(const SourceModel& model, std::span<const Symbol> past,
                                         std::span<const Symbol> future) {
    check_symbols(past, model.alphabet_size());
    check_symbols(future, model.alphabet_size());
    if (future.empty()) return log_block_probability(model, past);
    if (model.get_if<IidModel>()) {
        if (log_block_probability(model, future) == kNegInf) throw std::domain_error("conditioning future has probability zero");
        return log_block_probability(model, past);
    }
    if (const auto* mk = model.get_if<MarkovModel>()) {
        if (log_block_probability(model, future) == kNegInf) throw std::domain_error("conditioning future has probability zero");
        if (past.empty()) return 0.0;
        return log_block_probability(model, past) + std::log(mk->transition(past.back(), future.front())) -
               std::log(mk->initial[future.front()]);
    }
    if (model.get_if<HmmModel>()) {
        const double lf = log_block_probability(model, future);
        if (lf == kNegInf) throw std::domain_error("conditioning future has probability zero");
        std::vector<Symbol> joint(past.begin(), past.end());
        joint.insert(joint.end(), future.begin(), future.end());
        return log_block_probability(model, joint) - lf;
    }
    throw std::domain_error("copy source has no tractable block law");
}

double conditional_block_probability(const SourceModel& model, std::span<const Symbol> past,
                                     std::span<const Symbol> future) {
    return std::exp(log_conditional_block_probability(model, past, future));
}

}  // namespace replab
