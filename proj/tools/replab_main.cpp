// replab: recurrence and repetition statistics, entropies, and sandwich checks.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "replab/entropy.hpp"
#include "replab/hilberg.hpp"
#include "replab/io.hpp"
#include "replab/seqstat.hpp"
#include "replab/sources.hpp"
#include "replab/verify.hpp"

namespace fs = std::filesystem;
using namespace replab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Values given on the command line, keyed like the config file.
struct Overrides {
    std::string config_path;
    Json values = Json::object();
};

std::vector<std::size_t> size_list(const Json& v, const char* key) {
    std::vector<std::size_t> out;
    if (v.is_number_unsigned() || v.is_number_integer()) {
        if (v.get<long long>() <= 0) throw UsageError(std::string(key) + " must be positive");
        out.push_back(v.get<std::size_t>());
        return out;
    }
    if (!v.is_array()) throw UsageError(std::string(key) + " must be an integer or an array of integers");
    for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() <= 0) {
            throw UsageError(std::string(key) + " entries must be positive integers");
        }
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

std::vector<double> gamma_list(const Json& v) {
    std::vector<double> out;
    auto one = [&](const Json& e) {
        if (e.is_string()) out.push_back(parse_gamma(e.get<std::string>()));
        else if (e.is_number()) {
            validate_order(e.get<double>());
            out.push_back(e.get<double>());
        } else {
            throw UsageError("gamma entries must be numbers or \"inf\"");
        }
    };
    if (v.is_array()) {
        for (const auto& e : v) one(e);
    } else {
        one(v);
    }
    return out;
}

Json parse_json_text(const std::string& text, const std::string& where) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw UsageError(where + ": " + e.what());
    }
}

// defaults <- config file <- REPLAB_SEED <- flags
Json effective_config(const Json& defaults, const Overrides& o) {
    Json cfg = defaults;
    if (!o.config_path.empty()) {
        std::string text;
        try {
            text = read_file(o.config_path);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        const auto file = parse_json_text(text, o.config_path);
        if (!file.is_object()) throw UsageError(o.config_path + ": config must be a JSON object");
        cfg.merge_patch(file);
    }
    if (const char* env = std::getenv("REPLAB_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto seed = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            cfg["seed"] = seed;
        } catch (const std::exception&) {
            throw UsageError("REPLAB_SEED must be an unsigned integer");
        }
    }
    for (const auto& [k, v] : o.values.items()) cfg[k] = v;
    return cfg;
}

std::uint64_t seed_of(const Json& cfg) {
    const auto& s = cfg.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) {
        if (!s.is_number_unsigned()) throw UsageError("seed must be a non-negative integer");
    }
    return s.get<std::uint64_t>();
}

SourceModel model_of(const Json& cfg) {
    if (!cfg.contains("model") || cfg.at("model").is_null()) throw UsageError("a model spec is required (config key 'model')");
    return model_from_json(cfg.at("model"));
}

fs::path out_dir(const Json& cfg) { return fs::path(cfg.at("out").get<std::string>()); }

RhoRule rho_of(const Json& cfg) {
    const auto& r = cfg.at("rho");
    if (r.is_string()) {
        if (r.get<std::string>() != "k^-2") throw UsageError("rho must be \"k^-2\" or an object mapping k to rho_k");
        return RhoRule::k_pow_minus_2();
    }
    if (!r.is_object()) throw UsageError("rho must be \"k^-2\" or an object mapping k to rho_k");
    std::map<std::size_t, double> table;
    for (const auto& [k, v] : r.items()) {
        if (!v.is_number()) throw UsageError("rho." + k + " must be a number");
        table[static_cast<std::size_t>(std::stoull(k))] = v.get<double>();
    }
    return RhoRule::table(std::move(table));
}

std::vector<CurveRow> curve_rows(const SymbolSeq& seq, const std::vector<std::size_t>& n_grid,
                                 const std::vector<std::size_t>& k_grid, std::map<CurveKind, StatCurve>& curves) {
    curves[CurveKind::L1] = longest_match_curve(seq);
    curves[CurveKind::L2] = maximal_repetition_curve(seq);
    curves[CurveKind::R1] = recurrence_time_curve(seq);
    curves[CurveKind::R2] = repetition_time_from_l2(curves[CurveKind::L2]);
    std::vector<CurveRow> rows;
    for (auto kind : {CurveKind::L1, CurveKind::L2, CurveKind::R1, CurveKind::R2}) {
        const auto sel = select_rows(curves[kind], is_length_kind(kind) ? n_grid : k_grid);
        rows.insert(rows.end(), sel.begin(), sel.end());
    }
    return rows;
}

std::vector<std::size_t> grid_or_default(const Json& cfg, const char* key, std::size_t n) {
    if (cfg.contains(key) && !cfg.at(key).is_null()) return size_list(cfg.at(key), key);
    return dyadic_grid(n);
}

// ---- analyze ----------------------------------------------------------------

int run_analyze(const Overrides& o) {
    const Json defaults = {{"command", "analyze"}, {"input", nullptr}, {"mode", "bytes"}, {"out", "."},
                           {"n_grid", nullptr},    {"k_grid", nullptr}, {"fit_points_per_octave", 4}};
    const auto cfg = effective_config(defaults, o);
    if (!cfg.at("input").is_string()) throw UsageError("--input is required");
    const auto mode_name = cfg.at("mode").get<std::string>();
    if (mode_name != "bytes" && mode_name != "tokens") throw UsageError("mode must be bytes or tokens");
    std::string text;
    try {
        text = read_file(cfg.at("input").get<std::string>());
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const auto ingested = ingest_text(text, mode_name == "bytes" ? IngestMode::bytes : IngestMode::tokens);
    const auto& seq = ingested.seq;
    if (seq.empty()) std::cerr << "warning: input is empty; curves are empty\n";

    std::map<CurveKind, StatCurve> curves;
    const auto rows = curve_rows(seq, grid_or_default(cfg, "n_grid", seq.size()), grid_or_default(cfg, "k_grid", seq.size()), curves);
    const auto dir = out_dir(cfg);
    atomic_write(dir / "curves.csv", format_curves_csv(cfg, rows));

    const auto per_octave = cfg.at("fit_points_per_octave").get<std::size_t>();
    Json fits = Json::array();
    const auto fit_grid = seq.empty() ? std::vector<std::size_t>{} : geometric_grid(seq.size(), per_octave);
    for (auto [law, kind] : {std::pair{Law::log_power, CurveKind::L2}, std::pair{Law::stretched_exp, CurveKind::R2}}) {
        try {
            if (seq.empty()) throw std::invalid_argument("empty input");
            fits.push_back(law_fit_json(fit_law(curves[kind], law, fit_grid)));
        } catch (const std::invalid_argument& e) {
            std::cerr << "warning: " << to_string(law) << " fit unavailable: " << e.what() << "\n";
            fits.push_back({{"law", std::string(to_string(law))}, {"parameter", nullptr}, {"error", e.what()}});
        }
    }
    Json doc = provenance(cfg);
    doc["alphabet_size"] = seq.alphabet_size();
    doc["length"] = seq.size();
    doc["fits"] = fits;
    atomic_write(dir / "fits.json", doc.dump(2) + "\n");
    for (const auto& f : fits) {
        std::cout << f.at("law").get<std::string>() << ": "
                  << (f.at("parameter").is_null() ? std::string("n/a") : std::to_string(f.at("parameter").get<double>()));
        if (f.contains("r_squared")) std::cout << " (r^2 " << f.at("r_squared").get<double>() << ")";
        std::cout << "\n";
    }
    return kExitPass;
}

// ---- simulate ---------------------------------------------------------------

int run_simulate(const Overrides& o) {
    const Json defaults = {{"command", "simulate"}, {"seed", 0}, {"n", 1000}, {"out", "."}, {"model", nullptr},
                           {"n_grid", nullptr},     {"k_grid", nullptr}};
    const auto cfg = effective_config(defaults, o);
    const auto model = model_of(cfg);
    const auto n = cfg.at("n").get<std::size_t>();
    const auto seq = sample_path(model, n, SeedSpec{seed_of(cfg), 0});
    Json meta = provenance(cfg);
    meta["model_type"] = model.type_name();
    meta["exploratory"] = model.exploratory();
    const auto dir = out_dir(cfg);
    atomic_write(dir / "sequence.txt", format_sequence(seq, meta));
    std::map<CurveKind, StatCurve> curves;
    const auto rows = curve_rows(seq, grid_or_default(cfg, "n_grid", seq.size()), grid_or_default(cfg, "k_grid", seq.size()), curves);
    atomic_write(dir / "curves.csv", format_curves_csv(cfg, rows));
    if (model.exploratory()) std::cerr << "note: " << model.type_name() << " is exploratory (no stationarity guarantee)\n";
    return kExitPass;
}

// ---- verify -----------------------------------------------------------------

const std::vector<std::string> kSuites = {"kac", "kontoyiannis", "chenmoy", "prop1", "prop2", "prop3", "prop4", "theorems"};

std::vector<VerificationReport> run_suite(const std::string& suite, const SourceModel& model, const Json& cfg) {
    const auto seed = seed_of(cfg);
    const double scale = cfg.at("bound_scale").get<double>();
    const auto ks_or = [&](std::vector<std::size_t> fallback) {
        return cfg.at("k").is_null() ? fallback : size_list(cfg.at("k"), "k");
    };
    std::vector<VerificationReport> out;
    if (suite == "kac" || suite == "kontoyiannis") {
        const MonteCarloConfig mc{cfg.at("trials").get<std::uint64_t>(), seed, scale};
        std::optional<std::vector<Symbol>> block;
        if (!cfg.at("block").is_null()) block = cfg.at("block").get<std::vector<Symbol>>();
        const auto ks = suite == "kac" ? ks_or(block ? std::vector<std::size_t>{block->size()} : std::vector<std::size_t>{3})
                                       : ks_or({2, 4, 8});
        for (auto k : ks) {
            if (suite == "kac") out.push_back(verify_kac(model, k, mc, block));
            else out.push_back(verify_kontoyiannis(model, k, mc));
        }
        return out;
    }
    if (suite == "chenmoy") {
        std::vector<Symbol> block;
        if (!cfg.at("block").is_null()) block = cfg.at("block").get<std::vector<Symbol>>();
        else block = modal_block(model, ks_or({2}).front()).block;
        out.push_back(verify_chen_moy(model, block, cfg.at("path_length").get<std::size_t>(), seed, scale));
        return out;
    }
    if (suite == "prop1" || suite == "prop2" || suite == "prop3") {
        PathCheckConfig pc;
        pc.paths = cfg.at("paths").get<std::size_t>();
        pc.n = cfg.at("n").get<std::size_t>();
        pc.ks = ks_or({1, 2, 4, 8, 16, 20});
        pc.rho = rho_of(cfg);
        pc.seed = seed;
        pc.k0 = cfg.at("k0").get<std::size_t>();
        pc.path_share = cfg.at("path_share").get<double>();
        pc.bound_scale = scale;
        pc.truncation_M = cfg.at("truncation_M").get<std::uint64_t>();
        if (suite == "prop1") out.push_back(check_prop1(model, pc));
        else if (suite == "prop2") out.push_back(check_prop2(model, pc));
        else out.push_back(check_prop3(model, pc));
        return out;
    }
    if (suite == "prop4") {
        out.push_back(check_prop4(model, ks_or({1, 2, 3, 4, 5, 6, 7, 8}), cfg.at("slack").get<double>(), scale,
                                  cfg.at("truncation_M").get<std::uint64_t>()));
        return out;
    }
    if (suite == "theorems") {
        TheoremConfig tc;
        tc.paths = cfg.at("theorem_paths").get<std::size_t>();
        tc.n = cfg.at("theorem_n").get<std::size_t>();
        const auto w1 = size_list(cfg.at("thm1_window"), "thm1_window");
        const auto w2 = size_list(cfg.at("thm2_window"), "thm2_window");
        if (w1.size() != 2 || w2.size() != 2) throw UsageError("theorem windows are [k_min, k_max] pairs");
        tc.thm1_k_min = w1[0];
        tc.thm1_k_max = w1[1];
        tc.thm2_k_min = w2[0];
        tc.thm2_k_max = w2[1];
        tc.slack = cfg.at("theorem_slack").get<double>();
        tc.seed = seed;
        out.push_back(theorem_report(model, tc));
        return out;
    }
    throw UsageError("unknown suite '" + suite + "'");
}

int run_verify(const std::string& suite, const Overrides& o) {
    const Json defaults = {{"command", "verify"},
                           {"suite", suite},
                           {"seed", 0},
                           {"out", "."},
                           {"model", {{"type", "uniform"}, {"alphabet_size", 2}}},
                           {"k", nullptr},
                           {"block", nullptr},
                           {"trials", 100000},
                           {"path_length", 200000},
                           {"paths", 50},
                           {"n", 1000000},
                           {"k0", 8},
                           {"path_share", 0.95},
                           {"rho", "k^-2"},
                           {"truncation_M", kDefaultTruncation},
                           {"slack", 1e-9},
                           {"bound_scale", 1.0},
                           {"theorem_paths", 201},
                           {"theorem_n", 1 << 20},
                           {"thm1_window", {2, 20}},
                           {"thm2_window", {4, 32}},
                           {"theorem_slack", 0.1}};
    const auto cfg = effective_config(defaults, o);
    const auto model = model_of(cfg);
    std::vector<std::string> suites;
    if (suite == "all") suites = kSuites;
    else if (std::find(kSuites.begin(), kSuites.end(), suite) != kSuites.end()) suites = {suite};
    else throw UsageError("unknown suite '" + suite + "'");

    Json reports = Json::array();
    bool all_pass = true;
    for (const auto& s : suites) {
        std::vector<VerificationReport> rs;
        try {
            rs = run_suite(s, model, cfg);
        } catch (const std::domain_error& e) {
            // A single incompatible suite is a usage error; under "all" it is
            // recorded and skipped.
            if (suite != "all") throw;
            VerificationReport skipped;
            skipped.check = s;
            skipped.model = model.label();
            skipped.informational = true;
            skipped.empirical = {{"skipped", e.what()}};
            rs.push_back(skipped);
        }
        for (const auto& r : rs) {
            auto j = to_json(r);
            j["provenance"] = provenance(cfg);
            reports.push_back(j);
            if (!r.informational && r.verdict != Verdict::pass) all_pass = false;
            std::cout << r.check << " [" << r.model << "]: " << to_string(r.verdict)
                      << (r.informational ? " (informational)" : "") << "\n";
        }
    }
    atomic_write(out_dir(cfg) / "report.json", reports.dump(2) + "\n");
    return all_pass ? kExitPass : kExitCheckFailed;
}

// ---- entropy ----------------------------------------------------------------

int run_entropy(const Overrides& o, bool bits) {
    const Json defaults = {{"command", "entropy"}, {"out", "."},      {"model", nullptr},
                           {"gamma", {"0", "1", "2", "inf"}}, {"k", {1, 2, 4, 8}}, {"i", {0, 1}},
                           {"weighted", true},     {"context", true}, {"truncation_M", kDefaultTruncation}};
    const auto cfg = effective_config(defaults, o);
    const auto model = model_of(cfg);
    const auto gammas = gamma_list(cfg.at("gamma"));
    const auto ks = size_list(cfg.at("k"), "k");
    std::vector<std::size_t> is;
    for (const auto& v : cfg.at("i")) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw UsageError("i entries must be non-negative integers");
        is.push_back(v.get<std::size_t>());
    }
    const auto table = build_entropy_table(model, gammas, ks, is);
    std::vector<EntropyRow> rows;
    for (const auto& [key, v] : table.entries()) rows.push_back({key.gamma, key.k, key.i, v.lo, v.hi, "plain"});
    for (auto k : ks) {
        if (cfg.at("weighted").get<bool>()) {
            const auto w = weighted_conditional_entropy(model, k, cfg.at("truncation_M").get<std::uint64_t>());
            rows.push_back({kInfiniteOrder, k, w.truncation_M, w.lo, w.hi, "weighted"});
        }
        if (cfg.at("context").get<bool>()) {
            const auto c = context_length(model, k);
            const auto h = conditional_min_entropy(model, k, static_cast<std::size_t>(c.value));
            rows.push_back({kInfiniteOrder, k, c.value, h.lo, h.hi, "context_length"});
        }
    }
    atomic_write(out_dir(cfg) / "entropy.csv", format_entropy_csv(cfg, rows));
    const double unit = bits ? 1.0 / std::log(2.0) : 1.0;
    std::cout << "gamma\tk\ti\tlo\thi\tkind\t(" << (bits ? "bits" : "nats") << ")\n";
    for (const auto& r : rows) {
        std::cout << format_gamma(r.gamma) << "\t" << r.k << "\t" << r.i << "\t" << r.lo * unit << "\t" << r.hi * unit
                  << "\t" << r.kind << "\n";
    }
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"replab: recurrence and repetition statistics, entropies and sandwich checks"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    Overrides o;
    std::string out, input, mode, model_json, suite;
    std::vector<std::size_t> n_grid, k_grid, ks, block, windows1, windows2;
    std::vector<std::string> gammas;
    std::vector<std::size_t> is;
    std::uint64_t seed = 0, trials = 0, truncation = 0;
    std::size_t n = 0, paths = 0, path_length = 0, k0 = 0;
    double bound_scale = 1.0, share = 0.95;
    bool bits = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON config file");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "master seed (overrides REPLAB_SEED and the config)");
        sub->add_option("--model", model_json, "inline JSON model spec");
    };

    auto* analyze = app.add_subcommand("analyze", "curves and law fits for a text file");
    common(analyze);
    analyze->add_option("--input", input, "input file");
    analyze->add_option("--mode", mode, "bytes or tokens");
    analyze->add_option("--n-grid", n_grid, "n indices for L curves")->delimiter(',');
    analyze->add_option("--k-grid", k_grid, "k indices for R curves")->delimiter(',');

    auto* simulate = app.add_subcommand("simulate", "sample a path and its curves");
    common(simulate);
    simulate->add_option("--n", n, "path length");

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    common(verify);
    verify->add_option("suite", suite, "kac, kontoyiannis, chenmoy, prop1, prop2, prop3, prop4, theorems or all")->required();
    verify->add_option("--k", ks, "block length(s)")->delimiter(',');
    verify->add_option("--block", block, "explicit block, e.g. 0,1")->delimiter(',');
    verify->add_option("--trials", trials, "Monte Carlo trials");
    verify->add_option("--paths", paths, "paths for almost-sure checks");
    verify->add_option("--n", n, "path length for almost-sure checks");
    verify->add_option("--path-length", path_length, "path length for the Chen-Moy check");
    verify->add_option("--k0", k0, "smallest k that must be violation-free");
    verify->add_option("--share", share, "required share of clean paths");
    verify->add_option("--bound-scale", bound_scale, "debug: tighten theoretical bounds by this factor");
    verify->add_option("--thm1-window", windows1, "k_min,k_max")->delimiter(',');
    verify->add_option("--thm2-window", windows2, "k_min,k_max")->delimiter(',');

    auto* entropy = app.add_subcommand("entropy", "entropy table for a model");
    common(entropy);
    entropy->add_option("--gamma", gammas, "orders, e.g. 0,1,2,inf")->delimiter(',');
    entropy->add_option("--k", ks, "block lengths")->delimiter(',');
    entropy->add_option("--i", is, "conditioning lengths (0 = none)")->delimiter(',');
    entropy->add_option("--truncation", truncation, "truncation M of the weighted entropy");
    entropy->add_flag("--bits", bits, "display in bits (files stay in nats)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    auto* sub = app.get_subcommands().front();
    auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
    try {
        auto& v = o.values;
        if (given("--out")) v["out"] = out;
        if (given("--seed")) v["seed"] = seed;
        if (given("--model")) v["model"] = parse_json_text(model_json, "--model");
        if (given("--input")) v["input"] = input;
        if (given("--mode")) v["mode"] = mode;
        if (given("--n-grid")) v["n_grid"] = n_grid;
        if (given("--k-grid")) v["k_grid"] = k_grid;
        if (given("--n")) v["n"] = n;
        if (given("--k")) v["k"] = ks;
        if (given("--block")) v["block"] = block;
        if (given("--trials")) v["trials"] = trials;
        if (given("--paths")) v["paths"] = paths;
        if (given("--path-length")) v["path_length"] = path_length;
        if (given("--k0")) v["k0"] = k0;
        if (given("--share")) v["path_share"] = share;
        if (given("--bound-scale")) v["bound_scale"] = bound_scale;
        if (given("--thm1-window")) v["thm1_window"] = windows1;
        if (given("--thm2-window")) v["thm2_window"] = windows2;
        if (given("--gamma")) v["gamma"] = gammas;
        if (given("--i")) v["i"] = is;
        if (given("--truncation")) v["truncation_M"] = truncation;

        if (sub == analyze) return run_analyze(o);
        if (sub == simulate) return run_simulate(o);
        if (sub == verify) return run_verify(suite, o);
        return run_entropy(o, bits);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const Json::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitUsage;
}
