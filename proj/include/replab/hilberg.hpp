#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "replab/seqstat.hpp"
#include "replab/sources.hpp"

namespace replab {

struct SeriesPoint {
    double k = 0.0;
    double value = 0.0;
};

enum class HilbergMethod { tail_max, loglog_regression, offset_power };

std::string_view to_string(HilbergMethod m);

struct HilbergFit {
    double exponent = 0.0;
    double k_min = 0.0;
    double k_max = 0.0;
    HilbergMethod method = HilbergMethod::tail_max;
    // tail_max: gap between the maximum and the ratio at the last point.
    // regression: RMS residual in log-log coordinates.
    // offset_power: RMS residual of the fitted a_k.
    double residual = 0.0;
    std::size_t points = 0;
};

struct HilbergEstimate {
    HilbergFit tail_max;
    HilbergFit regression;
    // a_k ~ c + C (k^e - 1)/e with e >= 0 (log k at e = 0). The additive
    // constant c drops out, which the plain log-log slope cannot do on a
    // short window.
    HilbergFit offset_power;
};

inline constexpr std::size_t kMinHilbergPoints = 8;

// Finite-window proxies for limsup max{0, log a_k / log k}. Points with
// k < 2 are ignored; a_k = 0 is allowed and reads as exponent 0 (a constant
// source has every layer identically 0). Needs at least kMinHilbergPoints
// points inside [k_min, k_max].
HilbergEstimate hilberg_exponent(std::span<const SeriesPoint> series, double k_min = 2.0,
                                 double k_max = std::numeric_limits<double>::infinity());

enum class Law { log_power, stretched_exp };

std::string_view to_string(Law law);
Law law_from_string(std::string_view name);

struct LawFit {
    Law law = Law::log_power;
    double parameter = 0.0;  // alpha (log_power) or beta (stretched_exp)
    double C = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double censored_fraction = 0.0;
};

inline constexpr std::size_t kMinLawPoints = 10;

// log_power: L2_n ~ C (log n)^alpha, fitted as log L2 on log log n over n >= 3
// with L2 > 0. On a curve of length N the fit keeps n >= sqrt(N) when that
// leaves enough points: small n, where L2 is a handful of units, otherwise
// dominates the slope. stretched_exp: log R2_k ~ C k^beta, fitted as log log R2 on
// log k over R2 > 1. Censored points never enter the fit. `indices` selects
// the curve points (1-based); empty means the dyadic grid plus the last index.
LawFit fit_law(const StatCurve& curve, Law law, std::span<const std::size_t> indices = {});
// Same regression on a real-valued series: (n, L2_n) or (k, R2_k).
LawFit fit_law(std::span<const SeriesPoint> series, Law law);

// 1, 2, 4, ... up to n, with n itself appended.
std::vector<std::size_t> dyadic_grid(std::size_t n, std::size_t start = 1);
// Distinct rounded values of 2^(j / per_octave) up to n, with n appended.
std::vector<std::size_t> geometric_grid(std::size_t n, std::size_t per_octave);

enum class EnsembleStatistic { R1, R2, neg_log_prob };

std::string_view to_string(EnsembleStatistic s);
// Accepts "R1", "R2", "neglogp"; anything else throws std::invalid_argument.
EnsembleStatistic ensemble_statistic_from_string(std::string_view name);

struct EnsembleRow {
    std::size_t k = 0;
    double median = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::size_t used = 0;
    std::size_t censored = 0;
};

struct EnsembleSummary {
    EnsembleStatistic statistic = EnsembleStatistic::R1;
    std::size_t paths = 0;
    std::size_t horizon = 0;
    std::vector<EnsembleRow> rows;
};

// Median is sup{r : share of values below r <= 1/2}, i.e. the upper median.
double upper_median(std::vector<double> values);

// Per-k median/mean/variance of the statistic over independently seeded
// paths of length n (stream index = path index). Censored values are
// dropped per k and counted.
EnsembleSummary ensemble_summary(const SourceModel& model, EnsembleStatistic statistic,
                                 std::span<const std::size_t> ks, std::size_t paths, std::size_t n,
                                 std::uint64_t seed);

struct TIncreasingResult {
    bool holds = true;
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t first_violation = 0;  // index k of the first J_{k+1} < J_k o T, 0 if none
};

// J_{k+1}(x) >= J_k(Tx) for every index where both points exist and are
// uncensored. `on_path` is computed on x, `on_shift` on x with its first
// symbol dropped.
TIncreasingResult check_t_increasing(const StatCurve& on_path, const StatCurve& on_shift,
                                     std::size_t k_max = 0);
TIncreasingResult check_t_increasing(const SymbolSeq& seq, CurveKind kind, std::size_t k_max = 0);
// -log P(X_1^k) along the path.
TIncreasingResult check_t_increasing_neg_log_prob(const SourceModel& model, const SymbolSeq& seq,
                                                  std::size_t k_max);
// Samples one path of length n and checks the named statistic: L1, L2, R1,
// R2 or neglogp.
TIncreasingResult check_t_increasing(const SourceModel& model, std::string_view statistic, std::size_t k_max,
                                     std::size_t n, std::uint64_t seed);

}  // namespace replab
