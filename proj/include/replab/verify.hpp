#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "replab/entropy.hpp"
#include "replab/seqstat.hpp"
#include "replab/sources.hpp"

namespace replab {

using Json = nlohmann::ordered_json;

enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(Verdict v);

struct VerificationReport {
    std::string check;
    std::string model;
    Json params = Json::object();
    Json empirical = Json::object();
    Json theoretical = Json::object();
    std::optional<double> se;
    Verdict verdict = Verdict::inconclusive;
    // Exploratory runs: recorded but never counted as pass or fail.
    bool informational = false;
};

Json to_json(const VerificationReport& r);

// rho_k > 0 with a finite sum over the grid; the default k^-2 sums to at
// most zeta(2).
class RhoRule {
public:
    RhoRule() = default;
    static RhoRule k_pow_minus_2() { return RhoRule(); }
    // Explicit values; k outside the table throws.
    static RhoRule table(std::map<std::size_t, double> values);

    double operator()(std::size_t k) const;
    double log(std::size_t k) const;
    std::string describe() const;

private:
    std::map<std::size_t, double> table_;
};

// Tightens a bound by the factor `scale` (scale = 1 leaves it alone): upper
// bounds move down by (1 - scale)|b|, lower bounds move up. Used for
// negative controls.
double tighten(double bound, double scale, bool upper);

// Lazily sampled path: symbols are drawn from the stream on demand and kept.
class PathStream {
public:
    PathStream(const SourceModel& model, const SeedSpec& seed);
    Symbol at(std::size_t t);
    std::size_t drawn() const noexcept { return path_.size(); }
    std::span<const Symbol> drawn_symbols() const noexcept { return path_; }
    // Makes sure at least n symbols exist and returns the first n.
    std::span<const Symbol> prefix(std::size_t n);

private:
    PathSampler sampler_;
    std::vector<Symbol> path_;
};

// R1_k for k = 1..k_max as if computed on the first `horizon` symbols of the
// stream, drawing only as many as needed. Equals recurrence_time_curve on
// that prefix point for point.
std::vector<CensoredValue> streaming_recurrence_times(PathStream& path, std::size_t k_max, std::size_t horizon);
// R2_k for k = 1..k_max on the first `horizon` symbols, same contract.
std::vector<CensoredValue> streaming_repetition_times(PathStream& path, std::size_t k_max, std::size_t horizon);

// Occurrences T_r of a block and the gaps W_r = T_r - T_{r-1}.
struct RecurrencePointProcess {
    std::vector<Symbol> block;
    std::vector<std::uint64_t> occurrence_positions;  // 1-based starts, strictly increasing
    std::vector<std::uint64_t> gaps;                   // gaps[r-1] = W_r

    static RecurrencePointProcess from_path(std::span<const Symbol> path, std::vector<Symbol> block,
                                            std::size_t start = 0);
};

struct LocationTest {
    double statistic = 0.0;  // standardized Mann-Whitney U
    double p_value = 1.0;
};
// Two-sided Mann-Whitney test with tie correction (normal approximation).
LocationTest mann_whitney(std::span<const double> a, std::span<const double> b);

struct MonteCarloConfig {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    double bound_scale = 1.0;
};

// Monte Carlo recurrence checks. `block` defaults to the modal block of length k.
VerificationReport verify_kac(const SourceModel& model, std::size_t k, const MonteCarloConfig& cfg,
                              std::optional<std::vector<Symbol>> block = std::nullopt);
VerificationReport verify_kontoyiannis(const SourceModel& model, std::size_t k, const MonteCarloConfig& cfg);

inline constexpr std::size_t kMinChenMoyGaps = 1000;

VerificationReport verify_chen_moy(const SourceModel& model, const std::vector<Symbol>& block,
                                   std::size_t path_length, std::uint64_t seed, double bound_scale = 1.0);

struct PathCheckConfig {
    std::size_t paths = 50;
    std::size_t n = 1000000;
    std::vector<std::size_t> ks{1, 2, 4, 8, 16, 20};
    RhoRule rho;
    std::uint64_t seed = 0;
    std::size_t k0 = 8;
    double path_share = 0.95;
    double bound_scale = 1.0;
    // R1 may look this many times past n before a point stays censored.
    std::size_t r1_horizon_factor = 64;
    std::uint64_t truncation_M = kDefaultTruncation;
};

// Almost-sure sandwich bounds on sampled paths. A path is clean when it has
// no violation at k >= k0. Pass needs a clean share >= path_share even when
// every undecided point counts against it; fail needs the share of paths
// with a certain violation to exceed 1 - path_share; otherwise
// inconclusive.
VerificationReport check_prop1(const SourceModel& model, const PathCheckConfig& cfg);
VerificationReport check_prop2(const SourceModel& model, const PathCheckConfig& cfg);
VerificationReport check_prop3(const SourceModel& model, const PathCheckConfig& cfg);

// Sampling-free context-length sandwich.
VerificationReport check_prop4(const SourceModel& model, const std::vector<std::size_t>& ks,
                               double slack = 1e-9, double bound_scale = 1.0,
                               std::uint64_t truncation_M = kDefaultTruncation);

struct TheoremConfig {
    std::size_t paths = 201;
    std::size_t n = 1 << 20;
    std::size_t thm1_k_min = 2;
    std::size_t thm1_k_max = 20;
    std::size_t thm2_k_min = 4;
    std::size_t thm2_k_max = 32;
    std::size_t r1_horizon_factor = 64;
    double slack = 0.1;
    std::uint64_t seed = 0;
};

// Hilberg-exponent sandwich of both theorems. Realization layers average
// the log statistic over paths at each k; exponents come from the offset
// power fit.
VerificationReport theorem_report(const SourceModel& model, const TheoremConfig& cfg);

}  // namespace replab
