#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "replab/seqstat.hpp"

namespace replab {

inline constexpr double kProbabilitySumTolerance = 1e-12;
inline constexpr double kStationarityTolerance = 1e-10;

enum class PeriodicityPolicy { require_aperiodic, allow_periodic };

struct IidModel {
    std::vector<double> probs;

    explicit IidModel(std::vector<double> p);
};

// Stationary Markov chain; `initial` is the stationary distribution of
// `transition`, computed at construction.
struct MarkovModel {
    Eigen::MatrixXd transition;
    std::vector<double> initial;

    explicit MarkovModel(Eigen::MatrixXd p,
                         PeriodicityPolicy policy = PeriodicityPolicy::require_aperiodic);
};

// Hidden-state chain with per-state emission rows over the D output symbols.
struct HmmModel {
    Eigen::MatrixXd transition;  // S x S
    Eigen::MatrixXd emission;    // S x D
    std::vector<double> initial;

    HmmModel(Eigen::MatrixXd a, Eigen::MatrixXd b,
             PeriodicityPolicy policy = PeriodicityPolicy::require_aperiodic);
};

// Exploratory generator: fresh symbols from `base` interleaved with copies of
// earlier material. Not certified stationary or ergodic; has no exact law.
struct CopyModel {
    std::vector<double> base;
    double copy_prob = 0.0;
    std::size_t max_copy_len = 1;

    CopyModel(std::vector<double> base_probs, double copy_probability, std::size_t max_len);
};

class SourceModel {
public:
    using Variant = std::variant<IidModel, MarkovModel, HmmModel, CopyModel>;

    SourceModel(Variant model, std::string label);

    static SourceModel iid(std::vector<double> probs, std::string label = "iid");
    static SourceModel uniform(std::size_t alphabet_size);
    static SourceModel markov(Eigen::MatrixXd transition, std::string label = "markov",
                              PeriodicityPolicy policy = PeriodicityPolicy::require_aperiodic);
    // Two-state chain with p(1|0) = a and p(0|1) = b.
    static SourceModel two_state(double a, double b, std::string label = "markov2");
    // Deterministic cycle 0 -> 1 -> ... -> D-1 -> 0 started uniformly.
    static SourceModel cycle(std::size_t alphabet_size);
    static SourceModel hmm(Eigen::MatrixXd transition, Eigen::MatrixXd emission,
                           std::string label = "hmm");
    static SourceModel copy_source(std::vector<double> base, double copy_prob,
                                   std::size_t max_copy_len, std::string label = "copy");

    const Variant& variant() const noexcept { return model_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    std::string type_name() const;

    // Exact block probabilities are available (everything but CopyModel).
    bool tractable() const noexcept { return !std::holds_alternative<CopyModel>(model_); }
    // Exact future-conditioning reduces to one symbol (IID and Markov).
    bool markov_reducible() const noexcept {
        return std::holds_alternative<IidModel>(model_) || std::holds_alternative<MarkovModel>(model_);
    }
    bool exploratory() const noexcept { return std::holds_alternative<CopyModel>(model_); }

    // Marginal law of a single symbol.
    std::vector<double> marginal() const;

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&model_); }

private:
    Variant model_;
    std::string label_;
    std::size_t alphabet_size_ = 0;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
};

// One SplitMix64 step (Steele, Lea, Flood) from state x: add 0x9E3779B97F4A7C15,
// then mix with 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB. splitmix64(0) is
// the generator's first output for seed 0.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
// stream seed = splitmix64(master_seed ^ splitmix64(stream_index + 0x9E3779B97F4A7C15)).
std::uint64_t derive_stream_seed(const SeedSpec& seed) noexcept;

using Rng = std::mt19937_64;
Rng make_rng(const SeedSpec& seed);
// 53-bit uniform in [0, 1), independent of the standard library's distributions.
double uniform01(Rng& rng) noexcept;

// Inverse-CDF sampler over a finite distribution.
class Categorical {
public:
    Categorical() = default;
    explicit Categorical(std::span<const double> probs);
    Symbol operator()(Rng& rng) const;

private:
    std::vector<double> cdf_;
    Symbol last_positive_ = 0;
};

// Draws one trajectory symbol by symbol.
class PathSampler {
public:
    PathSampler(const SourceModel& model, const SeedSpec& seed);
    Symbol next();

private:
    enum class Kind { iid, markov, hmm, copy } kind_;
    Rng rng_;
    Categorical marginal_;               // IID symbols / initial state
    std::vector<Categorical> rows_;      // transition rows
    std::vector<Categorical> emissions_; // HMM emission rows
    std::size_t state_ = 0;
    bool started_ = false;
    double copy_prob_ = 0.0;
    std::size_t max_copy_len_ = 1;
    std::vector<Symbol> history_;
    std::size_t copy_src_ = 0;
    std::size_t copy_left_ = 0;
};

SymbolSeq sample_path(const SourceModel& model, std::size_t n, const SeedSpec& seed);
SymbolSeq sample_copy_source(const CopyModel& params, std::size_t n, const SeedSpec& seed);

// Throws std::invalid_argument for non-stochastic, reducible, or (under
// require_aperiodic) periodic matrices. Residual of pi P = pi is < 1e-10.
std::vector<double> stationary_distribution(
    const Eigen::MatrixXd& transition,
    PeriodicityPolicy policy = PeriodicityPolicy::require_aperiodic);

bool is_irreducible(const Eigen::MatrixXd& transition);
// gcd of cycle lengths of the positive-entry graph (assumes irreducible).
std::size_t chain_period(const Eigen::MatrixXd& transition);

// Natural log of P(X_1^k = block); -inf for impossible blocks. Throws
// std::domain_error for CopyModel.
double log_block_probability(const SourceModel& model, std::span<const Symbol> block);
double block_probability(const SourceModel& model, std::span<const Symbol> block);

// P(X_1^k = past | X_{k+1}^{k+i} = future). Markov uses the one-symbol
// reduction P(past) p(past_k, future_1) / pi(future_1). Throws
// std::domain_error when the future has probability zero or the model is not
// tractable.
double log_conditional_block_probability(const SourceModel& model, std::span<const Symbol> past,
                                         std::span<const Symbol> future);
double conditional_block_probability(const SourceModel& model, std::span<const Symbol> past,
                                     std::span<const Symbol> future);

}  // namespace replab
