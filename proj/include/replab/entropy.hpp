#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "replab/seqstat.hpp"
#include "replab/sources.hpp"

// All entropies are in nats.
namespace replab {

inline constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();
// D^(k+i) ceiling for exhaustive enumeration.
inline constexpr std::uint64_t kDefaultEnumerationLimit = std::uint64_t{1} << 24;
inline constexpr std::uint64_t kDefaultTruncation = 10000;

// Closed interval [lo, hi]; lo == hi for exactly computed quantities.
struct EntropyValue {
    double lo = 0.0;
    double hi = 0.0;

    static EntropyValue exact(double v) { return {v, v}; }
    double mid() const noexcept { return 0.5 * (lo + hi); }
    double width() const noexcept { return hi - lo; }
    bool is_exact() const noexcept { return lo == hi; }
    bool contains(double v, double slack = 0.0) const noexcept { return v >= lo - slack && v <= hi + slack; }
};

// Rejects gamma < 0, NaN, and gamma within 1e-6 of 1 (other than exactly 1).
void validate_order(double gamma);

EntropyValue renyi_entropy(std::span<const double> dist, double gamma);

// Arimoto conditional entropy H_gamma(X|Y) for joint(x, y): rows index X,
// columns index Y.
EntropyValue conditional_renyi(const Eigen::MatrixXd& joint, double gamma);

// Probability table over several finite variables, row-major in `dims`.
class JointDistribution {
public:
    JointDistribution(std::vector<std::size_t> dims, std::vector<double> probs);
    // Flat Dirichlet(1) draw.
    static JointDistribution random(std::vector<std::size_t> dims, Rng& rng);

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::span<const double> probs() const noexcept { return probs_; }
    // P(target, given) with the other variables summed out. Rows enumerate
    // the target tuple, columns the given tuple (one column when empty).
    Eigen::MatrixXd matrix(std::span<const std::size_t> target, std::span<const std::size_t> given) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> probs_;
};

// Calls fn(block, probability) for every block of length `length` in
// lexicographic order. Throws std::length_error when D^length > limit.
void enumerate_blocks(const SourceModel& model, std::size_t length,
                      const std::function<void(std::span<const Symbol>, double)>& fn,
                      std::uint64_t limit = kDefaultEnumerationLimit);

struct ModalBlock {
    std::vector<Symbol> block;  // lexicographically smallest among ties
    double log_prob = 0.0;
};
ModalBlock modal_block(const SourceModel& model, std::size_t k,
                       std::uint64_t limit = kDefaultEnumerationLimit);

// H_gamma(X_1^k | X_{k+1}^{k+i}); i = 0 means unconditional. IID and Markov
// models use closed forms and dynamic programs (any i), HMMs enumerate.
EntropyValue block_renyi_entropy(const SourceModel& model, std::size_t k, std::size_t i, double gamma,
                                 std::uint64_t limit = kDefaultEnumerationLimit);

// H_inf(X_1^k).
EntropyValue block_min_entropy(const SourceModel& model, std::size_t k,
                               std::uint64_t limit = kDefaultEnumerationLimit);
// H_inf(X_1^k | X_{k+1}^{k+i}).
EntropyValue conditional_min_entropy(const SourceModel& model, std::size_t k, std::size_t i,
                                     std::uint64_t limit = kDefaultEnumerationLimit);

struct ContextLengthValue {
    std::size_t k = 0;
    double gamma = kInfiniteOrder;
    std::uint64_t value = 0;
};

// Least i >= 1 with (gamma/(gamma-1)) log i >= H_gamma(X_1^k | X_{k+1}^{k+i})
// (factor 1 for gamma = inf). Requires gamma > 1.
ContextLengthValue context_length(const SourceModel& model, std::size_t k, double gamma = kInfiniteOrder,
                                  std::uint64_t limit = kDefaultEnumerationLimit);

struct WeightedEntropyValue {
    std::size_t k = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t truncation_M = 0;

    double mid() const noexcept { return 0.5 * (lo + hi); }
    double width() const noexcept { return hi - lo; }
};

// -log sum_{i>=1} exp(-H_inf(X_1^k|X_{k+1}^{k+i})) / (i(i+1)). IID and Markov
// terms are constant in i and the sum is exact; otherwise the first M terms
// are summed and the tail bracketed by [exp(-H(k|M))/(M+1), 1/(M+1)]. For
// HMMs M is capped by the enumeration limit and the cap is reported.
WeightedEntropyValue weighted_conditional_entropy(const SourceModel& model, std::size_t k,
                                                  std::uint64_t truncation_M = kDefaultTruncation,
                                                  std::uint64_t limit = kDefaultEnumerationLimit);

// h_1 (Shannon) or h_2 (collision, -log spectral radius of the entrywise
// squared transition matrix). IID and Markov only.
EntropyValue entropy_rate(const SourceModel& model, int gamma);

struct VarentropyValue {
    EntropyValue variance;  // nats^2
    double shannon = 0.0;   // H_1(X_1^k)
    double ratio = 0.0;     // sqrt(Var) / H_1
    bool exact = true;
    std::uint64_t samples = 0;
};

// Var[-log P(X_1^k)]: closed form for IID, enumeration when D^k <= limit,
// otherwise Monte Carlo with a 3-sigma interval.
VarentropyValue varentropy(const SourceModel& model, std::size_t k,
                           std::uint64_t limit = kDefaultEnumerationLimit,
                           std::uint64_t mc_samples = 100000, std::uint64_t seed = 0);
VarentropyValue varentropy_monte_carlo(const SourceModel& model, std::size_t k, std::uint64_t samples,
                                       std::uint64_t seed);

struct PlugInEstimate {
    EntropyValue value;
    bool biased = true;        // plug-in estimates are biased downwards
    bool undersampled = false; // D^k is not much smaller than N
    std::uint64_t blocks = 0;
};

PlugInEstimate plug_in_entropy(const SymbolSeq& seq, std::size_t k, double gamma);

struct ChainRuleCheck {
    double x_given_yz = 0.0;
    double x_given_y = 0.0;
    double ux_given_y = 0.0;
    double hartley_u_given_y = 0.0;
    double x_given_yu = 0.0;
    bool holds = false;
};

// H(X|Y,Z) <= H(X|Y) <= H(U,X|Y) <= H_0(U|Y) + H(X|Y,U) for a joint over
// (U, X, Y, Z) in that axis order.
ChainRuleCheck check_chain_rule(const JointDistribution& uxyz, double gamma, double slack = 1e-9);

struct PmiBound {
    double ratio = 1.0;  // finite-window lower bound on the true supremum
    double log_ratio = 0.0;
    std::size_t n_max = 0;
    std::size_t m_max = 0;
};

PmiBound pmi_bound_estimate(const SourceModel& model, std::size_t n_max, std::size_t m_max,
                            std::uint64_t limit = kDefaultEnumerationLimit);

struct EntropyKey {
    double gamma = 0.0;
    std::size_t k = 0;
    std::size_t i = 0;

    friend auto operator<=>(const EntropyKey&, const EntropyKey&) = default;
};

class EntropyTable {
public:
    void set(const EntropyKey& key, EntropyValue value) { entries_[key] = value; }
    const EntropyValue& at(const EntropyKey& key) const { return entries_.at(key); }
    bool contains(const EntropyKey& key) const { return entries_.count(key) != 0; }
    const std::map<EntropyKey, EntropyValue>& entries() const noexcept { return entries_; }

private:
    std::map<EntropyKey, EntropyValue> entries_;
};

EntropyTable build_entropy_table(const SourceModel& model, std::span<const double> gammas,
                                 std::span<const std::size_t> ks, std::span<const std::size_t> is,
                                 std::uint64_t limit = kDefaultEnumerationLimit);

}  // namespace replab
