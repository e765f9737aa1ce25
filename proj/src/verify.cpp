#include "replab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "replab/hilberg.hpp"
#include "replab/parallel.hpp"

namespace replab {

namespace {

constexpr std::uint64_t kRecurrenceCap = std::uint64_t{1} << 40;

// fail[q]: longest proper border of pattern[0, q).
std::vector<std::size_t> failure_function(std::span<const Symbol> pattern) {
    std::vector<std::size_t> fail(pattern.size() + 1, 0);
    std::size_t b = 0;
    for (std::size_t q = 1; q < pattern.size(); ++q) {
        while (b > 0 && pattern[q] != pattern[b]) b = fail[b];
        if (pattern[q] == pattern[b]) ++b;
        fail[q + 1] = b;
    }
    return fail;
}

// Least i >= 1 with X_{i+1..i+k} = pattern, where the text is `buffered`
// followed by fresh draws from `sampler`.
std::uint64_t first_recurrence(std::span<const Symbol> pattern, const std::vector<std::size_t>& fail,
                               std::span<const Symbol> buffered, PathSampler& sampler) {
    const std::size_t k = pattern.size();
    std::size_t m = 0;
    for (std::uint64_t t = 1; t < kRecurrenceCap; ++t) {
        const Symbol c = t < buffered.size() ? buffered[t] : sampler.next();
        while (m > 0 && pattern[m] != c) m = fail[m];
        if (pattern[m] == c) ++m;
        if (m == k) return t - k + 1;
    }
    throw std::runtime_error("recurrence not observed within 2^40 symbols");
}

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Moments moments(std::span<const double> v) {
    Moments m;
    m.n = v.size();
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    m.se = m.sd / std::sqrt(static_cast<double>(v.size()));
    return m;
}

Json block_json(std::span<const Symbol> block) {
    Json a = Json::array();
    for (auto s : block) a.push_back(s);
    return a;
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void require_tractable(const SourceModel& model, std::string_view check) {
    if (!model.tractable()) {
        throw std::domain_error(std::string(check) + " needs exact block probabilities; " + model.type_name() +
                                " has none");
    }
}

void require_reducible(const SourceModel& model, std::string_view check) {
    if (!model.markov_reducible()) {
        throw std::domain_error(std::string(check) + " supports IID and Markov sources only, got " +
                                model.type_name());
    }
}

// Per-path outcome of an almost-sure bound check.
struct PathOutcome {
    std::vector<std::size_t> violated_ks;
    std::vector<std::size_t> undecided_ks;  // only k >= k0
    bool violated_late = false;
    bool undecided_late = false;
};

enum class PointState { holds, violated, undecided };

struct SideTally {
    std::string name;
    std::map<std::size_t, std::size_t> violations_by_k;
    std::map<std::size_t, std::size_t> undecided_by_k;
};

void record(PathOutcome& out, SideTally& tally, std::size_t k, std::size_t k0, PointState s) {
    if (s == PointState::violated) {
        out.violated_ks.push_back(k);
        ++tally.violations_by_k[k];
        if (k >= k0) out.violated_late = true;
    } else if (s == PointState::undecided) {
        ++tally.undecided_by_k[k];
        if (k >= k0) {
            out.undecided_ks.push_back(k);
            out.undecided_late = true;
        }
    }
}

Json tally_json(const std::vector<SideTally>& sides) {
    Json j = Json::object();
    for (const auto& s : sides) {
        Json v = Json::object(), u = Json::object();
        for (auto [k, c] : s.violations_by_k) v[std::to_string(k)] = c;
        for (auto [k, c] : s.undecided_by_k) u[std::to_string(k)] = c;
        j[s.name] = {{"violations_by_k", v}, {"undecided_by_k", u}};
    }
    return j;
}

// Shared verdict logic and report body for the almost-sure path checks.
void summarize_paths(VerificationReport& r, const std::vector<PathOutcome>& outcomes, const PathCheckConfig& cfg,
                     const std::vector<SideTally>& sides) {
    std::size_t clean = 0, violated = 0, undecided = 0;
    Json largest = Json::array();
    for (const auto& o : outcomes) {
        if (o.violated_late) ++violated;
        else if (o.undecided_late) ++undecided;
        else ++clean;
        largest.push_back(o.violated_ks.empty() ? Json(nullptr) : Json(*std::max_element(o.violated_ks.begin(), o.violated_ks.end())));
    }
    const double paths = static_cast<double>(outcomes.size());
    const double clean_share = static_cast<double>(clean) / paths;
    const double violated_share = static_cast<double>(violated) / paths;
    r.empirical["paths"] = outcomes.size();
    r.empirical["clean_paths"] = clean;
    r.empirical["violating_paths"] = violated;
    r.empirical["undecided_paths"] = undecided;
    r.empirical["clean_share"] = clean_share;
    r.empirical["largest_violating_k"] = largest;
    r.empirical["sides"] = tally_json(sides);
    r.theoretical["k0"] = cfg.k0;
    r.theoretical["required_clean_share"] = cfg.path_share;
    if (clean_share >= cfg.path_share) r.verdict = Verdict::pass;
    else if (violated_share > 1.0 - cfg.path_share) r.verdict = Verdict::fail;
    else r.verdict = Verdict::inconclusive;
}

Json path_params(const PathCheckConfig& cfg) {
    Json ks = Json::array();
    for (auto k : cfg.ks) ks.push_back(k);
    return {{"paths", cfg.paths},
            {"n", cfg.n},
            {"k", ks},
            {"rho", cfg.rho.describe()},
            {"seed", cfg.seed},
            {"k0", cfg.k0},
            {"path_share", cfg.path_share},
            {"bound_scale", cfg.bound_scale}};
}

void validate_path_config(const PathCheckConfig& cfg) {
    if (cfg.paths == 0) throw std::invalid_argument("path count must be positive");
    if (cfg.ks.empty()) throw std::invalid_argument("k grid is empty");
    for (auto k : cfg.ks) {
        if (k == 0 || k + 1 > cfg.n) throw std::invalid_argument("every k must satisfy 1 <= k < n");
    }
    if (!(cfg.path_share > 0.0 && cfg.path_share <= 1.0)) throw std::invalid_argument("path share must be in (0, 1]");
}

std::size_t max_k(const std::vector<std::size_t>& ks) { return *std::max_element(ks.begin(), ks.end()); }

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

Json to_json(const VerificationReport& r) {
    return {{"check", r.check},
            {"model", r.model},
            {"params", r.params},
            {"empirical", r.empirical},
            {"theoretical", r.theoretical},
            {"se", r.se ? Json(*r.se) : Json(nullptr)},
            {"verdict", to_string(r.verdict)},
            {"informational", r.informational}};
}

RhoRule RhoRule::table(std::map<std::size_t, double> values) {
    for (auto [k, v] : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("rho values must be positive and finite");
    }
    RhoRule r;
    r.table_ = std::move(values);
    return r;
}

double RhoRule::operator()(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("rho is indexed from k = 1");
    if (table_.empty()) return 1.0 / (static_cast<double>(k) * static_cast<double>(k));
    const auto it = table_.find(k);
    if (it == table_.end()) throw std::out_of_range("rho table has no entry for k = " + std::to_string(k));
    return it->second;
}

double RhoRule::log(std::size_t k) const { return std::log((*this)(k)); }

std::string RhoRule::describe() const {
    if (table_.empty()) return "k^-2";
    std::string s = "table:";
    for (auto [k, v] : table_) s += " " + std::to_string(k) + "=" + std::to_string(v);
    return s;
}

double tighten(double bound, double scale, bool upper) {
    const double delta = (1.0 - scale) * std::abs(bound);
    return upper ? bound - delta : bound + delta;
}

PathStream::PathStream(const SourceModel& model, const SeedSpec& seed) : sampler_(model, seed) {}

Symbol PathStream::at(std::size_t t) {
    while (path_.size() <= t) path_.push_back(sampler_.next());
    return path_[t];
}

std::span<const Symbol> PathStream::prefix(std::size_t n) {
    if (n > 0) at(n - 1);
    return std::span<const Symbol>(path_).first(n);
}

std::vector<CensoredValue> streaming_recurrence_times(PathStream& path, std::size_t k_max, std::size_t horizon) {
    const std::size_t kk = std::min(k_max, horizon);
    std::vector<CensoredValue> out(kk);
    if (kk == 0) return out;
    const std::vector<Symbol> pattern(path.prefix(kk).begin(), path.prefix(kk).end());
    const auto fail = failure_function(pattern);
    std::size_t k0 = 1;  // smallest unresolved k; resolved ks always form a prefix
    std::size_t m = 0;
    for (std::size_t t = 1; t < horizon && k0 <= kk; ++t) {
        const Symbol c = path.at(t);
        if (m == kk) m = fail[m];
        while (m > 0 && pattern[m] != c) m = fail[m];
        if (pattern[m] == c) ++m;
        // Every border of the current match ends an occurrence at t.
        std::size_t top = 0;
        for (std::size_t b = m; b >= k0 && b > 0; b = fail[b]) {
            out[b - 1] = {static_cast<std::uint64_t>(t + 1 - b), false};
            top = std::max(top, b);
        }
        if (top >= k0) k0 = top + 1;
    }
    for (std::size_t k = k0; k <= kk; ++k) out[k - 1] = {static_cast<std::uint64_t>(horizon - k + 1), true};
    return out;
}

std::vector<CensoredValue> streaming_repetition_times(PathStream& path, std::size_t k_max, std::size_t horizon) {
    const std::size_t kk = std::min(k_max, horizon);
    std::vector<CensoredValue> out(kk);
    MaximalRepetitionTracker tracker;
    std::size_t k0 = 1;
    for (std::size_t t = 0; t < horizon && k0 <= kk; ++t) {
        tracker.append(path.at(t));
        const std::size_t n = t + 1;
        // R2_k = min{m : L2_{m+k} >= k}; the first prefix length reaching k gives m + k.
        while (k0 <= kk && tracker.maximal_repetition() >= k0) {
            out[k0 - 1] = {static_cast<std::uint64_t>(n - k0), false};
            ++k0;
        }
    }
    for (std::size_t k = k0; k <= kk; ++k) out[k - 1] = {static_cast<std::uint64_t>(horizon - k + 1), true};
    return out;
}

RecurrencePointProcess RecurrencePointProcess::from_path(std::span<const Symbol> path, std::vector<Symbol> block,
                                                         std::size_t start) {
    if (block.empty()) throw std::invalid_argument("block must be non-empty");
    RecurrencePointProcess p;
    p.block = std::move(block);
    const auto k = p.block.size();
    const auto fail = failure_function(p.block);
    std::size_t m = 0;
    for (std::size_t t = 0; t < path.size(); ++t) {
        if (m == k) m = fail[m];
        while (m > 0 && p.block[m] != path[t]) m = fail[m];
        if (p.block[m] == path[t]) ++m;
        if (m == k && t + 1 - k >= start) {
            const std::uint64_t pos = t + 2 - k;  // 1-based start
            if (!p.occurrence_positions.empty()) p.gaps.push_back(pos - p.occurrence_positions.back());
            p.occurrence_positions.push_back(pos);
        }
    }
    return p;
}

LocationTest mann_whitney(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("Mann-Whitney needs two non-empty samples");
    struct Item {
        double v;
        bool first;
    };
    std::vector<Item> all;
    all.reserve(a.size() + b.size());
    for (double v : a) all.push_back({v, true});
    for (double v : b) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Item& x, const Item& y) { return x.v < y.v; });
    const double n = static_cast<double>(all.size());
    double rank_a = 0.0, tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].v == all[i].v) ++j;
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t q = i; q < j; ++q) {
            if (all[q].first) rank_a += avg;
        }
        i = j;
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double u = rank_a - na * (na + 1.0) / 2.0;
    const double mean = na * nb / 2.0;
    const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    LocationTest out;
    if (var <= 0.0) return out;  // every value tied: no evidence of a shift
    out.statistic = (u - mean) / std::sqrt(var);
    out.p_value = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
    return out;
}

VerificationReport verify_kac(const SourceModel& model, std::size_t k, const MonteCarloConfig& cfg,
                              std::optional<std::vector<Symbol>> block) {
    require_tractable(model, "Kac check");
    if (k == 0) throw std::invalid_argument("block length must be positive");
    if (cfg.trials < 2) throw std::invalid_argument("Kac check needs at least 2 trials");
    const std::vector<Symbol> x = block ? *block : modal_block(model, k).block;
    if (x.size() != k) throw std::invalid_argument("block length does not match k");
    for (auto s : x) {
        if (s >= model.alphabet_size()) throw std::invalid_argument("block symbol outside the alphabet");
    }
    const double p = block_probability(model, x);
    if (!(p > 0.0)) throw std::invalid_argument("block has probability 0");
    const auto fail = failure_function(x);

    std::vector<double> r(cfg.trials);
    std::vector<std::uint64_t> attempts(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t trial) {
        const auto trial_seed = derive_stream_seed(SeedSpec{cfg.seed, trial});
        std::vector<Symbol> head(k);
        // Each attempt restarts a stationary path; reject until X_1^k = x.
        for (std::uint64_t attempt = 0;; ++attempt) {
            PathSampler sampler(model, SeedSpec{trial_seed, attempt});
            bool ok = true;
            for (std::size_t t = 0; t < k && ok; ++t) {
                head[t] = sampler.next();
                ok = head[t] == x[t];
            }
            if (!ok) continue;
            attempts[trial] = attempt + 1;
            r[trial] = static_cast<double>(first_recurrence(x, fail, head, sampler));
            return;
        }
    });
    const auto m = moments(r);
    const double exact = 1.0 / p;
    const double target = tighten(exact, cfg.bound_scale, true);

    VerificationReport rep;
    rep.check = "kac";
    rep.model = model.label();
    rep.params = {{"k", k}, {"block", block_json(x)}, {"trials", cfg.trials}, {"seed", cfg.seed},
                  {"bound_scale", cfg.bound_scale}};
    rep.empirical = {{"mean_recurrence", m.mean},
                     {"sd", m.sd},
                     {"attempts", std::accumulate(attempts.begin(), attempts.end(), std::uint64_t{0})}};
    rep.theoretical = {{"inverse_probability", target}, {"block_probability", p}};
    rep.se = m.se;
    rep.verdict = std::abs(m.mean - target) <= 3.0 * m.se ? Verdict::pass : Verdict::fail;
    return rep;
}

VerificationReport verify_kontoyiannis(const SourceModel& model, std::size_t k, const MonteCarloConfig& cfg) {
    require_reducible(model, "Kontoyiannis check");
    if (k == 0) throw std::invalid_argument("block length must be positive");
    if (cfg.trials < 2) throw std::invalid_argument("Kontoyiannis check needs at least 2 trials");
    std::vector<double> stat(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t trial) {
        PathSampler sampler(model, SeedSpec{cfg.seed, trial});
        std::vector<Symbol> head(std::max<std::size_t>(k, 2));
        for (auto& s : head) s = sampler.next();
        const std::span<const Symbol> x(head.data(), k);
        const auto fail = failure_function(x);
        const auto r = first_recurrence(x, fail, head, sampler);
        // P(X_1^k | X_2^inf) = P(X_1 | X_2) on the path, the rest being fixed by X_2^inf.
        const double cond = conditional_block_probability(model, std::span<const Symbol>(head).first(1),
                                                          std::span<const Symbol>(head).subspan(1, 1));
        stat[trial] = 1.0 / (static_cast<double>(r) * cond);
    });
    const auto m = moments(stat);
    const double bound = tighten(1.0 + static_cast<double>(k) * std::log(static_cast<double>(model.alphabet_size())),
                                 cfg.bound_scale, true);
    VerificationReport rep;
    rep.check = "kontoyiannis";
    rep.model = model.label();
    rep.params = {{"k", k}, {"trials", cfg.trials}, {"seed", cfg.seed}, {"bound_scale", cfg.bound_scale}};
    rep.empirical = {{"mean", m.mean}, {"sd", m.sd}};
    rep.theoretical = {{"upper_bound", bound}};
    rep.se = m.se;
    rep.verdict = m.mean - 3.0 * m.se <= bound ? Verdict::pass : Verdict::fail;
    return rep;
}

VerificationReport verify_chen_moy(const SourceModel& model, const std::vector<Symbol>& block,
                                   std::size_t path_length, std::uint64_t seed, double bound_scale) {
    require_tractable(model, "Chen-Moy check");
    if (block.empty()) throw std::invalid_argument("block must be non-empty");
    const double p = block_probability(model, block);
    if (!(p > 0.0)) throw std::invalid_argument("block has probability 0");
    const auto burn_in = static_cast<std::size_t>(std::ceil(10.0 / p));
    const auto path = sample_path(model, path_length, SeedSpec{seed, 0});
    // Collection starts at the first occurrence after the burn-in (Palm approximation).
    const auto proc = RecurrencePointProcess::from_path(path.symbols(), block, burn_in);
    std::vector<double> w1, w2, all;
    for (std::size_t r = 0; r < proc.gaps.size(); ++r) {
        const auto g = static_cast<double>(proc.gaps[r]);
        all.push_back(g);
        (r % 2 == 0 ? w1 : w2).push_back(g);
    }
    const double exact = 1.0 / p;
    const double target = tighten(exact, bound_scale, true);

    VerificationReport rep;
    rep.check = "chen_moy";
    rep.model = model.label();
    rep.params = {{"block", block_json(block)}, {"path_length", path_length}, {"seed", seed},
                  {"burn_in", burn_in}, {"bound_scale", bound_scale}};
    rep.theoretical = {{"mean_gap", target}, {"block_probability", p}, {"location_test_level", 0.01}};
    rep.empirical["gaps"] = proc.gaps.size();
    if (proc.gaps.size() < kMinChenMoyGaps || w2.empty()) {
        rep.verdict = Verdict::inconclusive;
        rep.empirical["reason"] = "fewer than " + std::to_string(kMinChenMoyGaps) + " gaps";
        return rep;
    }
    const auto m1 = moments(w1), m2 = moments(w2), ma = moments(all);
    const auto test = mann_whitney(w1, w2);
    const bool mean1 = std::abs(m1.mean - target) <= 3.0 * m1.se;
    const bool mean2 = std::abs(m2.mean - target) <= 3.0 * m2.se;
    const bool stationary = test.p_value >= 0.01;
    rep.empirical["mean_w1"] = m1.mean;
    rep.empirical["se_w1"] = m1.se;
    rep.empirical["mean_w2"] = m2.mean;
    rep.empirical["se_w2"] = m2.se;
    rep.empirical["mean_all"] = ma.mean;
    rep.empirical["location_z"] = test.statistic;
    rep.empirical["location_p"] = test.p_value;
    rep.empirical["w1_within_3se"] = mean1;
    rep.empirical["w2_within_3se"] = mean2;
    rep.empirical["stationarity_rejected"] = !stationary;
    rep.se = ma.se;
    rep.verdict = mean1 && mean2 && stationary ? Verdict::pass : Verdict::fail;
    return rep;
}

VerificationReport check_prop1(const SourceModel& model, const PathCheckConfig& cfg) {
    require_tractable(model, "prop1 check");
    validate_path_config(cfg);
    const bool lower_available = model.markov_reducible();
    const std::size_t kmax = max_k(cfg.ks);
    std::vector<PathOutcome> outcomes(cfg.paths);
    std::vector<SideTally> upper_t(cfg.paths), lower_t(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t p) {
        PathStream path(model, SeedSpec{cfg.seed, p});
        const auto head = path.prefix(kmax + 1);
        const std::vector<Symbol> x(head.begin(), head.end());
        const auto r1 = streaming_recurrence_times(path, kmax, cfg.n * cfg.r1_horizon_factor);
        for (auto k : cfg.ks) {
            const auto v = r1[k - 1];
            const double logr = std::log(static_cast<double>(v.value));
            const std::span<const Symbol> past(x.data(), k);
            const double upper = tighten(-log_block_probability(model, past) - cfg.rho.log(k), cfg.bound_scale, true);
            PointState s;
            if (logr >= upper) s = PointState::violated;  // a censored value only grows
            else s = v.censored ? PointState::undecided : PointState::holds;
            record(outcomes[p], upper_t[p], k, cfg.k0, s);
            if (!lower_available) continue;
            const double lower = tighten(-log_conditional_block_probability(model, past, std::span<const Symbol>(x).subspan(k, 1)) +
                                             cfg.rho.log(k) - std::log(static_cast<double>(k)),
                                         cfg.bound_scale, false);
            record(outcomes[p], lower_t[p], k, cfg.k0, logr > lower ? PointState::holds : PointState::violated);
        }
    });
    SideTally up{"upper", {}, {}}, lo{"lower", {}, {}};
    for (std::size_t p = 0; p < cfg.paths; ++p) {
        for (auto [k, c] : upper_t[p].violations_by_k) up.violations_by_k[k] += c;
        for (auto [k, c] : upper_t[p].undecided_by_k) up.undecided_by_k[k] += c;
        for (auto [k, c] : lower_t[p].violations_by_k) lo.violations_by_k[k] += c;
    }
    VerificationReport rep;
    rep.check = "prop1";
    rep.model = model.label();
    rep.params = path_params(cfg);
    rep.params["r1_horizon"] = cfg.n * cfg.r1_horizon_factor;
    summarize_paths(rep, outcomes, cfg, lower_available ? std::vector{up, lo} : std::vector{up});
    rep.theoretical["upper"] = "log R1_k < -log P(X_1^k) - log rho_k";
    rep.theoretical["lower"] = "log R1_k > -log P(X_1^k | X_{k+1}^inf) + log rho_k - log k";
    rep.empirical["lower_skipped"] = !lower_available;
    return rep;
}

VerificationReport check_prop2(const SourceModel& model, const PathCheckConfig& cfg) {
    require_tractable(model, "prop2 check");
    validate_path_config(cfg);
    const std::size_t kmax = max_k(cfg.ks);
    std::map<std::size_t, double> bound;
    for (auto k : cfg.ks) {
        bound[k] = tighten(block_min_entropy(model, k).hi - cfg.rho.log(k), cfg.bound_scale, true);
    }
    std::vector<PathOutcome> outcomes(cfg.paths);
    std::vector<SideTally> tallies(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t p) {
        PathStream path(model, SeedSpec{cfg.seed, p});
        const auto r2 = streaming_repetition_times(path, kmax, cfg.n);
        for (auto k : cfg.ks) {
            const auto v = r2[k - 1];
            const double logr = std::log(static_cast<double>(v.value));
            PointState s;
            if (logr >= bound[k]) s = PointState::violated;
            else s = v.censored ? PointState::undecided : PointState::holds;
            record(outcomes[p], tallies[p], k, cfg.k0, s);
        }
    });
    SideTally up{"upper", {}, {}};
    for (const auto& t : tallies) {
        for (auto [k, c] : t.violations_by_k) up.violations_by_k[k] += c;
        for (auto [k, c] : t.undecided_by_k) up.undecided_by_k[k] += c;
    }
    VerificationReport rep;
    rep.check = "prop2";
    rep.model = model.label();
    rep.params = path_params(cfg);
    summarize_paths(rep, outcomes, cfg, {up});
    Json b = Json::object();
    for (auto [k, v] : bound) b[std::to_string(k)] = v;
    rep.theoretical["log_bound_by_k"] = b;
    rep.theoretical["upper"] = "log R2_k < H_inf(X_1^k) - log rho_k";
    return rep;
}

VerificationReport check_prop3(const SourceModel& model, const PathCheckConfig& cfg) {
    require_tractable(model, "prop3 check");
    validate_path_config(cfg);
    const std::size_t kmax = max_k(cfg.ks);
    std::map<std::size_t, std::pair<double, double>> bound;
    for (auto k : cfg.ks) {
        const auto hw = weighted_conditional_entropy(model, k, cfg.truncation_M);
        const double lr = cfg.rho.log(k) / 3.0;
        bound[k] = {tighten(hw.lo / 3.0 + lr, cfg.bound_scale, false), tighten(hw.hi / 3.0 + lr, cfg.bound_scale, false)};
    }
    std::vector<PathOutcome> outcomes(cfg.paths);
    std::vector<SideTally> tallies(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t p) {
        PathStream path(model, SeedSpec{cfg.seed, p});
        const auto r2 = streaming_repetition_times(path, kmax, cfg.n);
        for (auto k : cfg.ks) {
            const auto v = r2[k - 1];
            const double logr = std::log(static_cast<double>(v.value));
            const auto [blo, bhi] = bound[k];
            PointState s;
            if (logr > bhi) s = PointState::holds;  // also certain when censored
            else if (!v.censored && logr <= blo) s = PointState::violated;
            else s = PointState::undecided;
            record(outcomes[p], tallies[p], k, cfg.k0, s);
        }
    });
    SideTally lo{"lower", {}, {}};
    for (const auto& t : tallies) {
        for (auto [k, c] : t.violations_by_k) lo.violations_by_k[k] += c;
        for (auto [k, c] : t.undecided_by_k) lo.undecided_by_k[k] += c;
    }
    VerificationReport rep;
    rep.check = "prop3";
    rep.model = model.label();
    rep.params = path_params(cfg);
    rep.params["truncation_M"] = cfg.truncation_M;
    summarize_paths(rep, outcomes, cfg, {lo});
    Json b = Json::object();
    for (auto [k, v] : bound) b[std::to_string(k)] = {v.first, v.second};
    rep.theoretical["log_bound_interval_by_k"] = b;
    rep.theoretical["lower"] = "log R2_k > H_w(X_1^k | X_{k+1}^inf)/3 + log(rho_k)/3";
    return rep;
}

VerificationReport check_prop4(const SourceModel& model, const std::vector<std::size_t>& ks, double slack,
                               double bound_scale, std::uint64_t truncation_M) {
    require_tractable(model, "prop4 check");
    if (ks.empty()) throw std::invalid_argument("k grid is empty");
    const auto marginal = model.marginal();
    const double h0 = std::log(static_cast<double>(std::count_if(marginal.begin(), marginal.end(), [](double p) { return p > 0.0; })));
    VerificationReport rep;
    rep.check = "prop4";
    rep.model = model.label();
    Json kj = Json::array();
    for (auto k : ks) kj.push_back(k);
    rep.params = {{"k", kj}, {"slack", slack}, {"bound_scale", bound_scale}, {"truncation_M", truncation_M}};
    Json rows = Json::array();
    bool all_hold = true, undecided = false;
    for (auto k : ks) {
        const auto ik = context_length(model, k).value;
        const double log_i = std::log(static_cast<double>(ik));
        const auto hw = weighted_conditional_entropy(model, k, truncation_M);
        const double h_ctx = conditional_min_entropy(model, k, static_cast<std::size_t>(ik)).hi;
        const double b1 = tighten(log_i - std::log(2.0), bound_scale, false);
        const double b2 = tighten(3.0 * log_i + 1.0 / static_cast<double>(ik), bound_scale, true);
        const double b3 = tighten(ik > 1 ? std::log(static_cast<double>(ik - 1)) - h0 : -std::numeric_limits<double>::infinity(),
                                  bound_scale, false);
        const double b4 = tighten(log_i, bound_scale, true);
        // The weighted entropy is an interval: a side is decided only when
        // the whole interval is on one side of the bound.
        auto decide = [&](bool certain_ok, bool certain_bad) {
            if (certain_ok) return 1;
            if (certain_bad) return -1;
            return 0;
        };
        const int s1 = decide(hw.lo >= b1 - slack, hw.hi < b1 - slack);
        const int s2 = decide(hw.hi <= b2 + slack, hw.lo > b2 + slack);
        const bool s3 = b3 <= h_ctx + slack;
        const bool s4 = h_ctx <= b4 + slack;
        const bool ok = s1 == 1 && s2 == 1 && s3 && s4;
        if (s1 == -1 || s2 == -1 || !s3 || !s4) all_hold = false;
        else if (!ok) undecided = true;
        rows.push_back({{"k", k},
                        {"context_length", ik},
                        {"weighted_entropy", {hw.lo, hw.hi}},
                        {"context_min_entropy", h_ctx},
                        {"bounds_weighted", {b1, b2}},
                        {"bounds_context", {nullable(b3), b4}},
                        {"holds", ok}});
    }
    rep.empirical = {{"rows", rows}};
    rep.theoretical = {{"weighted", "log I_k - log 2 <= H_w <= 3 log I_k + 1/I_k"},
                       {"context", "log(I_k - 1) - H_0(X) <= H_inf(X_1^k | X_{k+1}^{k+I_k}) <= log I_k"},
                       {"hartley_marginal", h0}};
    rep.verdict = !all_hold ? Verdict::fail : (undecided ? Verdict::inconclusive : Verdict::pass);
    return rep;
}

namespace {

struct Layer {
    std::string name;
    std::vector<SeriesPoint> series;
    std::string unavailable;  // reason, empty when computed
};

// Per-k average of log values across paths. Paths are equal in law, so a
// fit on the averages is the pooled fit over all paths. A k where any path
// is censored is dropped rather than biased.
std::vector<SeriesPoint> mean_log_series(const std::vector<std::vector<CensoredValue>>& per_path,
                                         std::size_t k_min, std::size_t k_max) {
    std::vector<SeriesPoint> out;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        double sum = 0.0;
        bool censored = false;
        for (const auto& path : per_path) {
            const auto& c = path[k - 1];
            censored = censored || c.censored;
            sum += std::log(static_cast<double>(c.value));
        }
        if (!censored) out.push_back({static_cast<double>(k), sum / static_cast<double>(per_path.size())});
    }
    return out;
}

std::vector<SeriesPoint> mean_series(const std::vector<std::vector<double>>& per_path, std::size_t k_min,
                                     std::size_t k_max) {
    std::vector<SeriesPoint> out;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        double sum = 0.0;
        for (const auto& path : per_path) sum += path[k - k_min];
        out.push_back({static_cast<double>(k), sum / static_cast<double>(per_path.size())});
    }
    return out;
}

template <class Fn>
Layer deterministic_layer(std::string name, std::size_t k_min, std::size_t k_max, Fn&& fn) {
    Layer l{std::move(name), {}, {}};
    try {
        for (std::size_t k = k_min; k <= k_max; ++k) l.series.push_back({static_cast<double>(k), fn(k)});
    } catch (const std::exception& e) {
        l.series.clear();
        l.unavailable = e.what();
    }
    return l;
}

Json evaluate_chain(std::vector<Layer>& layers, double k_min, double k_max, double slack, bool& holds, bool& complete) {
    Json out = Json::array();
    std::optional<double> prev;
    std::string prev_name;
    Json links = Json::array();
    std::size_t available = 0;
    for (auto& l : layers) {
        Json j = {{"layer", l.name}};
        if (l.unavailable.empty()) {
            try {
                const auto est = hilberg_exponent(l.series, k_min, k_max);
                const double e = est.offset_power.exponent;
                j["exponent"] = e;
                j["loglog_slope"] = est.regression.exponent;
                j["tail_max"] = est.tail_max.exponent;
                j["fit_residual"] = est.offset_power.residual;
                j["points"] = est.offset_power.points;
                ++available;
                if (prev) {
                    const bool ok = *prev <= e + slack;
                    links.push_back({{"from", prev_name}, {"to", l.name}, {"holds", ok}});
                    holds = holds && ok;
                }
                prev = e;
                prev_name = l.name;
            } catch (const std::exception& e) {
                l.unavailable = e.what();
            }
        }
        if (!l.unavailable.empty()) j["unavailable"] = l.unavailable;
        out.push_back(j);
    }
    complete = complete && available >= 2;
    return {{"layers", out}, {"chain", links}};
}

}  // namespace

VerificationReport theorem_report(const SourceModel& model, const TheoremConfig& cfg) {
    if (cfg.paths == 0) throw std::invalid_argument("path count must be positive");
    if (cfg.thm1_k_min < 2 || cfg.thm1_k_min > cfg.thm1_k_max || cfg.thm2_k_min < 2 || cfg.thm2_k_min > cfg.thm2_k_max) {
        throw std::invalid_argument("theorem windows need 2 <= k_min <= k_max");
    }
    const std::size_t kmax = std::max(cfg.thm1_k_max, cfg.thm2_k_max);
    if (kmax + 1 > cfg.n) throw std::invalid_argument("path length must exceed the largest k");
    const bool tractable = model.tractable();
    const bool reducible = model.markov_reducible();

    std::vector<std::vector<CensoredValue>> r1(cfg.paths), r2(cfg.paths);
    std::vector<std::vector<double>> nlp(cfg.paths), nlp_cond(cfg.paths);
    parallel_for(cfg.paths, [&](std::size_t p) {
        PathStream path(model, SeedSpec{cfg.seed, p});
        const auto head = path.prefix(kmax + 1);
        const std::vector<Symbol> x(head.begin(), head.end());
        r2[p] = streaming_repetition_times(path, cfg.thm2_k_max, cfg.n);
        r1[p] = streaming_recurrence_times(path, cfg.thm1_k_max, cfg.n * cfg.r1_horizon_factor);
        if (!tractable) return;
        for (std::size_t k = cfg.thm1_k_min; k <= cfg.thm1_k_max; ++k) {
            const std::span<const Symbol> past(x.data(), k);
            nlp[p].push_back(-log_block_probability(model, past));
            if (reducible) {
                nlp_cond[p].push_back(-log_conditional_block_probability(model, past, std::span<const Symbol>(x).subspan(k, 1)));
            }
        }
    });

    const auto k1a = cfg.thm1_k_min, k1b = cfg.thm1_k_max, k2a = cfg.thm2_k_min, k2b = cfg.thm2_k_max;
    const std::string no_law = "no exact block law for " + model.type_name();
    std::vector<Layer> thm1, thm2;
    if (reducible) thm1.push_back({"-log P(X_1^k|X_{k+1}^inf)", mean_series(nlp_cond, k1a, k1b), {}});
    else thm1.push_back({"-log P(X_1^k|X_{k+1}^inf)", {}, tractable ? "future conditioning needs IID or Markov" : no_law});
    thm1.push_back({"log R1_k", mean_log_series(r1, k1a, k1b), {}});
    if (tractable) {
        thm1.push_back({"-log P(X_1^k)", mean_series(nlp, k1a, k1b), {}});
        thm1.push_back(deterministic_layer("H_1(X_1^k)", k1a, k1b, [&](std::size_t k) { return block_renyi_entropy(model, k, 0, 1.0).hi; }));
    } else {
        thm1.push_back({"-log P(X_1^k)", {}, no_law});
        thm1.push_back({"H_1(X_1^k)", {}, no_law});
    }

    std::map<std::size_t, std::uint64_t> ctx;
    if (tractable) {
        thm2.push_back(deterministic_layer("H_inf(X_1^k|X_{k+1}^{k+I_k})", k2a, k2b, [&](std::size_t k) {
            ctx[k] = context_length(model, k).value;
            return conditional_min_entropy(model, k, static_cast<std::size_t>(ctx[k])).hi;
        }));
        thm2.push_back(deterministic_layer("log I_k", k2a, k2b, [&](std::size_t k) {
            if (!ctx.count(k)) ctx[k] = context_length(model, k).value;
            return std::log(static_cast<double>(ctx[k]));
        }));
    } else {
        thm2.push_back({"H_inf(X_1^k|X_{k+1}^{k+I_k})", {}, no_law});
        thm2.push_back({"log I_k", {}, no_law});
    }
    thm2.push_back({"log R2_k", mean_log_series(r2, k2a, k2b), {}});
    if (tractable) {
        thm2.push_back(deterministic_layer("H_inf(X_1^k)", k2a, k2b, [&](std::size_t k) { return block_min_entropy(model, k).hi; }));
    } else {
        thm2.push_back({"H_inf(X_1^k)", {}, no_law});
    }

    bool holds = true, complete = true;
    VerificationReport rep;
    rep.check = "theorems";
    rep.model = model.label();
    rep.params = {{"paths", cfg.paths},       {"n", cfg.n},
                  {"thm1_window", {k1a, k1b}}, {"thm2_window", {k2a, k2b}},
                  {"slack", cfg.slack},         {"seed", cfg.seed},
                  {"r1_horizon", cfg.n * cfg.r1_horizon_factor}};
    rep.empirical["theorem1"] = evaluate_chain(thm1, static_cast<double>(k1a), static_cast<double>(k1b), cfg.slack, holds, complete);
    rep.empirical["theorem2"] = evaluate_chain(thm2, static_cast<double>(k2a), static_cast<double>(k2b), cfg.slack, holds, complete);
    if (tractable) {
        try {
            const auto v = varentropy(model, k1b, kDefaultEnumerationLimit, 20000, cfg.seed);
            rep.empirical["varentropy_ratio"] = {{"k", k1b}, {"ratio", v.ratio}, {"exact", v.exact}};
        } catch (const std::exception& e) {
            rep.empirical["varentropy_ratio"] = {{"unavailable", e.what()}};
        }
    }
    rep.theoretical = {{"theorem1", "-log P(X_1^k|future) <~ log R1_k <~ -log P(X_1^k) <~ H_1(X_1^k)"},
                       {"theorem2", "H_inf(X_1^k|X_{k+1}^{k+I_k}) <~ log I_k <~ log R2_k <~ H_inf(X_1^k)"},
                       {"varentropy_condition", "right-most theorem1 link is an equivalence when sqrt(Var)/H_1 stays below 1"},
                       {"finite_alphabet", "left-most theorem2 link is an equivalence for a finite alphabet"}};
    rep.informational = model.exploratory();
    if (rep.informational) rep.verdict = Verdict::inconclusive;
    else if (!complete) rep.verdict = Verdict::inconclusive;
    else rep.verdict = holds ? Verdict::pass : Verdict::fail;
    return rep;
}

}  // namespace replab
