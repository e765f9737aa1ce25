#include "replab/hilberg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "replab/parallel.hpp"

namespace replab {

namespace {

struct Regression {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double rms = 0.0;
};

Regression least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sxx += (x[t] - mx) * (x[t] - mx);
        sxy += (x[t] - mx) * (y[t] - my);
        syy += (y[t] - my) * (y[t] - my);
    }
    Regression r;
    if (sxx <= 0.0) throw std::invalid_argument("regression needs at least two distinct abscissae");
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double sse = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double e = y[t] - (r.intercept + r.slope * x[t]);
        sse += e * e;
    }
    r.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    r.rms = std::sqrt(sse / n);
    return r;
}

LawFit fit_linearized(std::span<const SeriesPoint> pts, Law law, double censored_fraction) {
    std::vector<double> x, y;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : pts) {
        double xv = 0.0, yv = 0.0;
        if (law == Law::log_power) {
            if (p.k < 3.0 || !(p.value > 0.0)) continue;
            xv = std::log(std::log(p.k));
            yv = std::log(p.value);
        } else {
            if (p.k < 1.0 || !(p.value > 1.0)) continue;
            xv = std::log(p.k);
            yv = std::log(std::log(p.value));
        }
        x.push_back(xv);
        y.push_back(yv);
        lo = std::min(lo, p.k);
        hi = std::max(hi, p.k);
    }
    if (x.size() < kMinLawPoints) {
        throw std::invalid_argument("law fit needs at least " + std::to_string(kMinLawPoints) +
                                    " usable uncensored points, got " + std::to_string(x.size()));
    }
    const auto r = least_squares(x, y);
    LawFit fit;
    fit.law = law;
    fit.parameter = r.slope;
    fit.C = std::exp(r.intercept);
    fit.r_squared = r.r_squared;
    fit.points = x.size();
    fit.window_lo = lo;
    fit.window_hi = hi;
    fit.censored_fraction = censored_fraction;
    return fit;
}

}  // namespace

std::string_view to_string(HilbergMethod m) {
    switch (m) {
        case HilbergMethod::tail_max: return "tail_max";
        case HilbergMethod::loglog_regression: return "loglog_regression";
        case HilbergMethod::offset_power: return "offset_power";
    }
    return "?";
}

HilbergEstimate hilberg_exponent(std::span<const SeriesPoint> series, double k_min, double k_max) {
    k_min = std::max(k_min, 2.0);
    if (!(k_min <= k_max)) throw std::invalid_argument("empty Hilberg window");
    std::vector<SeriesPoint> pts;
    for (const auto& p : series) {
        if (p.k < k_min || p.k > k_max) continue;
        if (!(p.value >= 0.0) || !std::isfinite(p.value)) {
            throw std::invalid_argument("Hilberg series values must be finite and non-negative");
        }
        pts.push_back(p);
    }
    if (pts.size() < kMinHilbergPoints) {
        throw std::invalid_argument("Hilberg window holds " + std::to_string(pts.size()) + " points, need " +
                                    std::to_string(kMinHilbergPoints));
    }
    std::sort(pts.begin(), pts.end(), [](const SeriesPoint& a, const SeriesPoint& b) { return a.k < b.k; });

    HilbergEstimate out;
    auto& tail = out.tail_max;
    tail.method = HilbergMethod::tail_max;
    tail.k_min = pts.front().k;
    tail.k_max = pts.back().k;
    tail.points = pts.size();
    auto ratio = [](const SeriesPoint& p) {
        return p.value > 0.0 ? std::max(0.0, std::log(p.value) / std::log(p.k)) : 0.0;
    };
    for (const auto& p : pts) tail.exponent = std::max(tail.exponent, ratio(p));
    tail.residual = tail.exponent - ratio(pts.back());

    auto& reg = out.regression;
    reg.method = HilbergMethod::loglog_regression;
    reg.k_min = tail.k_min;
    reg.k_max = tail.k_max;
    std::vector<double> x, y;
    for (const auto& p : pts) {
        if (p.value > 0.0) {
            x.push_back(std::log(p.k));
            y.push_back(std::log(p.value));
        }
    }
    reg.points = x.size();
    if (x.size() >= 2) {
        const auto r = least_squares(x, y);
        reg.exponent = std::max(0.0, r.slope);
        reg.residual = r.rms;
    }

    auto& off = out.offset_power;
    off.method = HilbergMethod::offset_power;
    off.k_min = tail.k_min;
    off.k_max = tail.k_max;
    off.points = pts.size();
    std::vector<double> ks, as;
    for (const auto& p : pts) {
        ks.push_back(p.k);
        as.push_back(p.value);
    }
    const double mean_a = std::accumulate(as.begin(), as.end(), 0.0) / static_cast<double>(as.size());
    double spread = 0.0;
    for (double a : as) spread = std::max(spread, std::abs(a - mean_a));
    if (spread > 0.0) {
        off.residual = std::numeric_limits<double>::infinity();
        const auto fit_at = [&](double e) {
            std::vector<double> basis;
            for (double k : ks) basis.push_back(e == 0.0 ? std::log(k) : std::expm1(e * std::log(k)) / e);
            const auto r = least_squares(basis, as);
            // A decreasing fit carries no growth; it is scored but yields e = 0.
            return std::pair{r.rms, r.slope};
        };
        double best_e = 0.0;
        for (int step = 0; step <= 400; ++step) {
            const double e = 0.01 * step;
            const auto [rms, slope] = fit_at(e);
            if (rms < off.residual) {
                off.residual = rms;
                best_e = slope > 0.0 ? e : 0.0;
            }
        }
        // Golden-section refinement inside the neighbouring grid cells.
        double lo = std::max(0.0, best_e - 0.01), hi = best_e + 0.01;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 40; ++it) {
            const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
            if (fit_at(m1).first <= fit_at(m2).first) hi = m2;
            else lo = m1;
        }
        const double e = 0.5 * (lo + hi);
        const auto [rms, slope] = fit_at(e);
        if (rms <= off.residual && slope > 0.0) {
            off.residual = rms;
            best_e = e;
        }
        off.exponent = best_e;
    }
    return out;
}

std::string_view to_string(Law law) { return law == Law::log_power ? "log_power" : "stretched_exp"; }

Law law_from_string(std::string_view name) {
    if (name == "log_power") return Law::log_power;
    if (name == "stretched_exp") return Law::stretched_exp;
    throw std::invalid_argument("unknown law '" + std::string(name) + "'");
}

std::vector<std::size_t> dyadic_grid(std::size_t n, std::size_t start) {
    std::vector<std::size_t> grid;
    for (std::size_t v = std::max<std::size_t>(start, 1); v < n; v *= 2) grid.push_back(v);
    if (n >= 1 && (grid.empty() || grid.back() != n)) grid.push_back(n);
    return grid;
}

std::vector<std::size_t> geometric_grid(std::size_t n, std::size_t per_octave) {
    if (per_octave == 0) throw std::invalid_argument("points per octave must be positive");
    std::vector<std::size_t> grid;
    for (std::size_t j = 0;; ++j) {
        const auto v = static_cast<std::size_t>(std::llround(std::exp2(static_cast<double>(j) / static_cast<double>(per_octave))));
        if (v >= n) break;
        if (grid.empty() || grid.back() != v) grid.push_back(v);
    }
    if (n >= 1) grid.push_back(n);
    return grid;
}

LawFit fit_law(const StatCurve& curve, Law law, std::span<const std::size_t> indices) {
    const CurveKind want = law == Law::log_power ? CurveKind::L2 : CurveKind::R2;
    if (curve.kind() != want) {
        throw std::invalid_argument(std::string(to_string(law)) + " fits need an " + std::string(to_string(want)) +
                                    " curve");
    }
    std::vector<std::size_t> grid(indices.begin(), indices.end());
    if (grid.empty()) grid = dyadic_grid(curve.size());
    std::vector<SeriesPoint> pts;
    std::size_t censored = 0;
    for (auto idx : grid) {
        const auto& v = curve.at(idx);
        if (v.censored) {
            ++censored;
            continue;
        }
        pts.push_back({static_cast<double>(idx), static_cast<double>(v.value)});
    }
    const double frac = grid.empty() ? 0.0 : static_cast<double>(censored) / static_cast<double>(grid.size());
    if (law == Law::log_power) {
        const double floor = std::sqrt(static_cast<double>(curve.size()));
        std::vector<SeriesPoint> upper;
        for (const auto& p : pts) {
            if (p.k >= floor && p.value > 0.0) upper.push_back(p);
        }
        if (upper.size() >= kMinLawPoints) return fit_linearized(upper, law, frac);
    }
    return fit_linearized(pts, law, frac);
}

LawFit fit_law(std::span<const SeriesPoint> series, Law law) { return fit_linearized(series, law, 0.0); }

std::string_view to_string(EnsembleStatistic s) {
    switch (s) {
        case EnsembleStatistic::R1: return "R1";
        case EnsembleStatistic::R2: return "R2";
        case EnsembleStatistic::neg_log_prob: return "neglogp";
    }
    return "?";
}

EnsembleStatistic ensemble_statistic_from_string(std::string_view name) {
    if (name == "R1") return EnsembleStatistic::R1;
    if (name == "R2") return EnsembleStatistic::R2;
    if (name == "neglogp") return EnsembleStatistic::neg_log_prob;
    throw std::invalid_argument("ensemble statistic must be R1, R2 or neglogp, got '" + std::string(name) + "'");
}

double upper_median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

EnsembleSummary ensemble_summary(const SourceModel& model, EnsembleStatistic statistic,
                                 std::span<const std::size_t> ks, std::size_t paths, std::size_t n,
                                 std::uint64_t seed) {
    if (paths < 2) throw std::invalid_argument("ensemble needs at least 2 paths");
    if (statistic == EnsembleStatistic::neg_log_prob && !model.tractable()) {
        throw std::domain_error("-log P needs a tractable model");
    }
    for (auto k : ks) {
        if (k == 0 || k > n) throw std::invalid_argument("ensemble k grid must lie in [1, n]");
    }
    // values[path][j], censored flag alongside.
    std::vector<std::vector<CensoredValue>> raw(paths);
    std::vector<std::vector<double>> logp(paths);
    parallel_for(paths, [&](std::size_t p) {
        const auto seq = sample_path(model, n, SeedSpec{seed, p});
        if (statistic == EnsembleStatistic::neg_log_prob) {
            for (auto k : ks) logp[p].push_back(-log_block_probability(model, seq.symbols().first(k)));
            return;
        }
        const auto curve = statistic == EnsembleStatistic::R1 ? recurrence_time_curve(seq) : repetition_time_curve(seq);
        for (auto k : ks) raw[p].push_back(curve.at(k));
    });
    EnsembleSummary out;
    out.statistic = statistic;
    out.paths = paths;
    out.horizon = n;
    for (std::size_t j = 0; j < ks.size(); ++j) {
        EnsembleRow row;
        row.k = ks[j];
        std::vector<double> v;
        for (std::size_t p = 0; p < paths; ++p) {
            if (statistic == EnsembleStatistic::neg_log_prob) {
                v.push_back(logp[p][j]);
            } else if (raw[p][j].censored) {
                ++row.censored;
            } else {
                v.push_back(static_cast<double>(raw[p][j].value));
            }
        }
        row.used = v.size();
        if (!v.empty()) {
            row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - row.mean) * (x - row.mean);
            row.variance = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
            row.median = upper_median(std::move(v));
        } else {
            row.mean = row.median = std::numeric_limits<double>::quiet_NaN();
        }
        out.rows.push_back(row);
    }
    return out;
}

TIncreasingResult check_t_increasing(const StatCurve& on_path, const StatCurve& on_shift, std::size_t k_max) {
    if (on_path.kind() != on_shift.kind()) throw std::invalid_argument("T-increasing check needs matching kinds");
    TIncreasingResult out;
    std::size_t limit = std::min(on_shift.size(), on_path.size() > 0 ? on_path.size() - 1 : 0);
    if (k_max > 0) limit = std::min(limit, k_max);
    for (std::size_t k = 1; k <= limit; ++k) {
        const auto& next = on_path.at(k + 1);
        const auto& shifted = on_shift.at(k);
        if (next.censored || shifted.censored) continue;
        ++out.checked;
        if (next.value < shifted.value) {
            if (out.violations++ == 0) out.first_violation = k;
        }
    }
    out.holds = out.violations == 0;
    return out;
}

TIncreasingResult check_t_increasing(const SymbolSeq& seq, CurveKind kind, std::size_t k_max) {
    if (seq.size() < 2) return {};
    return check_t_increasing(compute_curve(seq, kind), compute_curve(seq.suffix(1), kind), k_max);
}

TIncreasingResult check_t_increasing_neg_log_prob(const SourceModel& model, const SymbolSeq& seq,
                                                  std::size_t k_max) {
    TIncreasingResult out;
    const auto x = seq.symbols();
    const std::size_t limit = std::min(k_max, x.size() > 0 ? x.size() - 1 : 0);
    for (std::size_t k = 1; k <= limit; ++k) {
        const double next = -log_block_probability(model, x.first(k + 1));
        const double shifted = -log_block_probability(model, x.subspan(1, k));
        ++out.checked;
        // Relative slack: both sides are long floating-point sums.
        if (next < shifted - 1e-9 * std::max(1.0, std::abs(shifted))) {
            if (out.violations++ == 0) out.first_violation = k;
        }
    }
    out.holds = out.violations == 0;
    return out;
}

TIncreasingResult check_t_increasing(const SourceModel& model, std::string_view statistic, std::size_t k_max,
                                     std::size_t n, std::uint64_t seed) {
    const auto seq = sample_path(model, n, SeedSpec{seed, 0});
    if (statistic == "neglogp") return check_t_increasing_neg_log_prob(model, seq, k_max);
    return check_t_increasing(seq, curve_kind_from_string(statistic), k_max);
}

}  // namespace replab
