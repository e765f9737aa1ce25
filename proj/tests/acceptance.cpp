// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "replab/entropy.hpp"
#include "replab/hilberg.hpp"
#include "replab/io.hpp"
#include "replab/seqstat.hpp"
#include "replab/sources.hpp"
#include "replab/verify.hpp"

using namespace replab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Options {
    std::string cli;
    std::string corpus_dir;
    std::string work_dir = "acceptance_work";
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class F>
void for_each_binary(std::size_t max_len, F f) {
    for (std::size_t n = 1; n <= max_len; ++n) {
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
            std::vector<Symbol> v(n);
            for (std::size_t t = 0; t < n; ++t) v[t] = static_cast<Symbol>((bits >> (n - 1 - t)) & 1);
            f(SymbolSeq(std::move(v), 2));
        }
    }
}

const CurveKind kKinds[] = {CurveKind::L1, CurveKind::L2, CurveKind::R1, CurveKind::R2};

StatCurve fast_curve(const SymbolSeq& x, CurveKind kind) {
    switch (kind) {
        case CurveKind::L1: return longest_match_curve(x);
        case CurveKind::L2: return maximal_repetition_curve(x);
        case CurveKind::R1: return recurrence_time_curve(x);
        case CurveKind::R2: return repetition_time_curve(x);
    }
    throw std::logic_error("unknown curve kind");
}

// Fast curves against the library's brute force and, when `with_oracle`, the
// independent test oracle too (it shares no code with either, but is quartic).
std::size_t mismatches(const SymbolSeq& x, bool with_oracle) {
    std::size_t bad = 0;
    const std::vector<Symbol> raw(x.symbols().begin(), x.symbols().end());
    for (auto kind : kKinds) {
        const auto fast = fast_curve(x, kind);
        const auto brute = brute_force_curve(x, kind);
        bad += !(fast == brute);
        if (!with_oracle) continue;
        for (std::size_t i = 1; i <= x.size(); ++i) {
            switch (kind) {
                case CurveKind::L1: bad += fast.at(i).value != oracle::l1(raw, i); break;
                case CurveKind::L2: bad += fast.at(i).value != oracle::l2(raw, i); break;
                case CurveKind::R1: bad += !(fast.at(i) == oracle::r1(raw, i)); break;
                case CurveKind::R2: bad += !(fast.at(i) == oracle::r2(raw, i)); break;
            }
        }
    }
    return bad;
}

Outcome criterion1(const Options&) {
    const auto t0 = Clock::now();
    std::size_t strings = 0, bad = 0;
    for_each_binary(12, [&](const SymbolSeq& x) {
        ++strings;
        bad += mismatches(x, true);
    });
    std::mt19937_64 rng(20240601);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t d = rep % 2 ? 4 : 2;
        const std::size_t n = 1 + rng() % 500;
        std::vector<Symbol> v(n);
        for (auto& s : v) s = static_cast<Symbol>(rng() % d);
        bad += mismatches(SymbolSeq(std::move(v), d), false);
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < 120.0,
            fmt("%zu exhaustive + 200 random strings, %zu mismatches, %.1f s (limit 120 s)", strings, bad, secs)};
}

Outcome criterion2(const Options&) {
    std::size_t strings = 0, duality_bad = 0, violated = 0, held = 0, undecided = 0;
    for_each_binary(12, [&](const SymbolSeq& x) {
        ++strings;
        duality_bad += !check_duality(longest_match_curve(x), recurrence_time_curve(x));
        duality_bad += !check_duality(maximal_repetition_curve(x), repetition_time_curve(x));
        for (std::size_t k = 1; k <= x.size(); ++k) {
            switch (check_min_decomposition(x, k)) {
                case DecompositionResult::holds: ++held; break;
                case DecompositionResult::violated: ++violated; break;
                case DecompositionResult::inconclusive: ++undecided; break;
            }
        }
    });
    return {duality_bad == 0 && violated == 0 && held > 0,
            fmt("%zu strings: %zu duality failures; minimum decomposition %zu hold, %zu violated, %zu censored",
                strings, duality_bad, held, violated, undecided)};
}

Outcome criterion3(const Options&) {
    MonteCarloConfig cfg;
    cfg.trials = 100000;
    std::string detail;
    bool ok = true;
    struct Case {
        SourceModel model;
        std::vector<Symbol> block;
        double expected;
    };
    const std::vector<Case> cases{{SourceModel::uniform(2), {0, 0, 0}, 8.0},
                                  {SourceModel::two_state(0.1, 0.2), {0, 1}, 15.0}};
    for (const auto& c : cases) {
        const auto t0 = Clock::now();
        const auto r = verify_kac(c.model, c.block.size(), cfg, c.block);
        const double secs = seconds_since(t0);
        const double mean = r.empirical["mean_recurrence"].get<double>();
        const bool hit = std::abs(mean - c.expected) <= 3.0 * *r.se && secs < 60.0;
        ok = ok && hit && r.verdict == Verdict::pass;
        detail += fmt("%s block of length %zu: mean %.4f vs %.0f (se %.4f, %.1f s); ", r.model.c_str(), c.block.size(),
                      mean, c.expected, *r.se, secs);
    }
    return {ok, detail};
}

Outcome criterion4(const Options&) {
    const auto r = verify_chen_moy(SourceModel::two_state(0.1, 0.2), {0, 0}, 100000, 0);
    const auto gaps = r.empirical["gaps"].get<std::size_t>();
    const bool ok = r.verdict == Verdict::pass && gaps >= 10000;
    return {ok, fmt("%zu gaps, mean W1 %.4f, mean W2 %.4f vs 1/P = %.4f, location test p = %.3f", gaps,
                    r.empirical.value("mean_w1", 0.0), r.empirical.value("mean_w2", 0.0),
                    r.theoretical["mean_gap"].get<double>(), r.empirical.value("location_p", 0.0))};
}

Outcome criterion5(const Options&) {
    MonteCarloConfig cfg;
    cfg.trials = 100000;
    bool ok = true;
    std::string detail;
    for (std::size_t k : {2, 4, 8}) {
        const auto r = verify_kontoyiannis(SourceModel::uniform(2), k, cfg);
        ok = ok && r.verdict == Verdict::pass;
        detail += fmt("k=%zu mean %.4f <= %.4f; ", k, r.empirical["mean"].get<double>(),
                      r.theoretical["upper_bound"].get<double>());
    }
    return {ok, detail};
}

Outcome criterion6(const Options&) {
    const auto t0 = Clock::now();
    std::size_t runs = 0, not_pass = 0;
    std::string first;
    auto run = [&](const SourceModel& m, std::size_t k_max) {
        std::vector<std::size_t> ks;
        for (std::size_t k = 1; k <= k_max; ++k) ks.push_back(k);
        const auto r = check_prop4(m, ks, 1e-9);
        ++runs;
        if (r.verdict != Verdict::pass) {
            ++not_pass;
            if (first.empty()) first = m.label() + " " + std::string(to_string(r.verdict));
        }
    };
    run(SourceModel::uniform(2), 8);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int c = 0; c < 20; ++c) {
        const double a = u(rng), b = u(rng);
        run(SourceModel::two_state(a, b), 12);
    }
    const double secs = seconds_since(t0);
    return {not_pass == 0 && secs < 60.0,
            fmt("%zu sources, %zu not passing%s%s, %.1f s (limit 60 s)", runs, not_pass, first.empty() ? "" : ", first: ",
                first.c_str(), secs)};
}

Outcome criterion7(const Options&) {
    const auto t0 = Clock::now();
    PathCheckConfig cfg;  // 50 paths, N = 1e6, rho_k = k^-2, k0 = 8, share 0.95
    cfg.ks = {1, 2, 4, 8, 16};
    bool ok = true;
    std::string detail;
    for (const auto& m : {SourceModel::uniform(2), SourceModel::two_state(0.1, 0.2)}) {
        for (auto check : {&check_prop1, &check_prop2, &check_prop3}) {
            const auto r = check(m, cfg);
            ok = ok && r.verdict == Verdict::pass;
            detail += fmt("%s/%s %s clean %.2f; ", r.check.c_str(), r.model.c_str(),
                          std::string(to_string(r.verdict)).c_str(), r.empirical["clean_share"].get<double>());
        }
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 600.0;
    return {ok, detail + fmt("%.1f s (limit 600 s)", secs)};
}

Outcome criterion8(const Options&) {
    Rng rng(8);
    std::size_t mono_bad = 0, chain_bad = 0;
    const std::vector<double> gammas{0.0, 0.5, 1.0, 2.0, 3.0, kInfiniteOrder};
    for (int rep = 0; rep < 500; ++rep) {
        const auto j = JointDistribution::random({2, 3, 2, 2}, rng);
        const std::size_t x[] = {1}, y[] = {2};
        const auto xy = j.matrix(x, y);
        double prev = std::numeric_limits<double>::infinity();
        for (double g : gammas) {
            const double h = conditional_renyi(xy, g).hi;
            mono_bad += h > prev + 1e-9;
            prev = h;
        }
        for (double g : gammas) chain_bad += !check_chain_rule(j, g, 1e-9).holds;
    }

    // h2 against H_2(X_1^k)/k at k = 10.
    std::string rate_detail;
    bool rate_ok = true;
    for (auto [a, b] : {std::pair{0.1, 0.2}, std::pair{0.3, 0.6}, std::pair{0.5, 0.5}, std::pair{0.05, 0.05}}) {
        const auto m = SourceModel::two_state(a, b);
        const double h2 = entropy_rate(m, 2).hi;
        const double gap10 = std::abs(block_renyi_entropy(m, 10, 0, 2.0).hi / 10.0 - h2);
        const double gap100 = std::abs(block_renyi_entropy(m, 100, 0, 2.0).hi / 100.0 - h2);
        rate_ok = rate_ok && gap10 <= 0.01;
        rate_detail += fmt("(%.2f,%.2f) gap %.4f at k=10, %.4f at k=100; ", a, b, gap10, gap100);
    }

    // Bernoulli varentropy: closed form against direct enumeration.
    double worst = 0.0;
    for (double p : {0.1, 0.3, 0.5, 0.77}) {
        const auto m = SourceModel::iid({p, 1 - p});
        for (std::size_t k = 1; k <= 12; ++k) {
            double mean = 0, sq = 0;
            oracle::for_each_string(2, k, [&](const oracle::Seq& s) {
                double prob = 1.0;
                for (auto v : s) prob *= v == 0 ? p : 1 - p;
                const double info = -std::log(prob);
                mean += prob * info;
                sq += prob * info * info;
            });
            worst = std::max(worst, std::abs(varentropy(m, k).variance.hi - (sq - mean * mean)));
        }
    }
    const bool ok = mono_bad == 0 && chain_bad == 0 && rate_ok && worst <= 1e-9;
    return {ok, fmt("monotonicity violations %zu, chain rule violations %zu (500 joints); ", mono_bad, chain_bad) +
                    rate_detail + fmt("varentropy max error %.2e", worst)};
}

Outcome criterion9(const Options&) {
    double worst_alpha = 0, worst_beta = 0;
    for (double alpha : {1.0, 2.0, 3.0}) {
        std::vector<SeriesPoint> s;
        for (auto n : dyadic_grid(1 << 20)) s.push_back({double(n), 1.7 * std::pow(std::log(double(n)), alpha)});
        worst_alpha = std::max(worst_alpha, std::abs(fit_law(s, Law::log_power).parameter - alpha));
    }
    for (double beta : {0.25, 1.0 / 3.0, 0.5}) {
        std::vector<SeriesPoint> s;
        for (std::size_t k = 1; k <= 200; ++k) s.push_back({double(k), std::exp(0.8 * std::pow(double(k), beta))});
        worst_beta = std::max(worst_beta, std::abs(fit_law(s, Law::stretched_exp).parameter - beta));
    }
    std::vector<SeriesPoint> pw;
    for (auto k : geometric_grid(100000, 4)) {
        if (k >= 2) pw.push_back({double(k), std::pow(double(k), 0.4)});
    }
    const double e04 = hilberg_exponent(pw).offset_power.exponent;

    std::mt19937_64 rng(9);
    std::size_t failing[4] = {0, 0, 0, 0};
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<Symbol> v(200);
        for (auto& s : v) s = static_cast<Symbol>(rng() & 1);
        const SymbolSeq x(std::move(v), 2);
        for (int i = 0; i < 4; ++i) failing[i] += !check_t_increasing(x, kKinds[i]).holds;
    }
    const bool fits_ok = worst_alpha <= 0.05 && worst_beta <= 0.02 && std::abs(e04 - 0.4) <= 0.05;
    const bool t_ok = failing[0] + failing[1] + failing[2] + failing[3] == 0;
    return {fits_ok && t_ok,
            fmt("alpha error %.1e, beta error %.1e, exponent of k^0.4 = %.4f; T-increasing failures out of 500: "
                "L1 %zu, L2 %zu, R1 %zu, R2 %zu",
                worst_alpha, worst_beta, e04, failing[0], failing[1], failing[2], failing[3])};
}

bool chain_holds(const Json& theorem) {
    for (const auto& link : theorem["chain"]) {
        if (!link["holds"].get<bool>()) return false;
    }
    return true;
}

Outcome criterion10(const Options&) {
    const auto t0 = Clock::now();
    const TheoremConfig cfg;
    const auto coin = theorem_report(SourceModel::uniform(2), cfg);
    const auto& t2 = coin.empirical["theorem2"];
    bool coin_ok = chain_holds(t2);
    std::string exps;
    for (const auto& l : t2["layers"]) {
        if (!l.contains("exponent")) {
            coin_ok = false;
            exps += "missing ";
            continue;
        }
        const double e = l["exponent"].get<double>();
        coin_ok = coin_ok && std::abs(e - 1.0) <= cfg.slack;
        exps += fmt("%.3f ", e);
    }
    TheoremConfig small = cfg;
    small.paths = 5;
    const auto flat = theorem_report(SourceModel::iid({1.0}), small);
    bool flat_ok = true;
    for (const char* t : {"theorem1", "theorem2"}) {
        for (const auto& l : flat.empirical[t]["layers"]) flat_ok = flat_ok && l.value("exponent", -1.0) == 0.0;
    }
    const auto copy = theorem_report(SourceModel::copy_source({0.5, 0.5}, 0.5, 20), small);
    const bool copy_ok = copy.informational && copy.verdict == Verdict::inconclusive;
    return {coin_ok && flat_ok && copy_ok,
            fmt("fair coin theorem2 layer exponents [ %s] chain %s; constant source all zero: %s; copy source "
                "informational: %s; %.1f s",
                exps.c_str(), chain_holds(t2) ? "holds" : "broken", flat_ok ? "yes" : "no", copy_ok ? "yes" : "no",
                seconds_since(t0))};
}

Outcome criterion11(const Options& opt) {
    if (opt.cli.empty() || opt.corpus_dir.empty()) return {false, "needs --cli and --corpus-dir"};
    const fs::path work = fs::absolute(opt.work_dir);
    fs::create_directories(work);
    const fs::path text = work / "corpus.txt";
    std::string corpus;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(opt.corpus_dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) corpus += read_file(f);
    // Repeat the corpus if it falls short of a megabyte.
    const std::string once = corpus;
    while (!once.empty() && corpus.size() < (1u << 20)) corpus += once;
    atomic_write(text, corpus);
    const fs::path out = work / "analyze_out";
    fs::remove_all(out);
    const std::string cmd = "\"" + opt.cli + "\" analyze --input \"" + text.string() + "\" --out \"" + out.string() +
                            "\" > \"" + (work / "analyze.log").string() + "\" 2>&1";
    const auto t0 = Clock::now();
    const int rc = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    if (rc != 0) return {false, fmt("analyze exited with status %d", rc)};
    try {
        const auto rows = parse_curves_csv(read_file(out / "curves.csv"));
        const auto fits = Json::parse(read_file(out / "fits.json"));
        Json l2;
        for (const auto& f : fits.at("fits")) {
            if (f.at("law") == "log_power") l2 = f;
        }
        const double alpha = l2.at("parameter").get<double>();
        const double r2 = l2.at("r_squared").get<double>();
        return {secs < 30.0 && !rows.empty() && corpus.size() >= (1u << 20),
                fmt("%zu bytes from %zu files, %zu curve rows, alpha %.3f (r^2 %.3f), %.2f s (limit 30 s)", corpus.size(),
                    files.size(), rows.size(), alpha, r2, secs)};
    } catch (const std::exception& e) {
        return {false, std::string("malformed output: ") + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"replab acceptance run"};
    Options opt;
    std::vector<int> only;
    app.add_option("--cli", opt.cli, "path to the replab executable");
    app.add_option("--corpus-dir", opt.corpus_dir, "directory of text files for the corpus smoke test");
    app.add_option("--work-dir", opt.work_dir, "scratch directory");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome(const Options&)>> criteria{
        criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i](opt);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
