#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "replab/entropy.hpp"
#include "replab/hilberg.hpp"
#include "replab/io.hpp"
#include "replab/seqstat.hpp"
#include "replab/sources.hpp"
#include "replab/verify.hpp"

namespace py = pybind11;
using namespace replab;

namespace {

SymbolSeq to_seq(const std::vector<Symbol>& symbols, std::size_t alphabet_size) {
    return alphabet_size == 0 ? SymbolSeq(symbols) : SymbolSeq(symbols, alphabet_size);
}

py::tuple curve_tuple(const StatCurve& c) {
    std::vector<std::uint64_t> values;
    std::vector<bool> censored;
    for (std::size_t i = 1; i <= c.size(); ++i) {
        values.push_back(c.at(i).value);
        censored.push_back(c.at(i).censored);
    }
    return py::make_tuple(values, censored);
}

std::vector<SeriesPoint> series_of(const std::vector<double>& ks, const std::vector<double>& values) {
    if (ks.size() != values.size()) throw std::invalid_argument("ks and values differ in length");
    std::vector<SeriesPoint> s;
    for (std::size_t i = 0; i < ks.size(); ++i) s.push_back({ks[i], values[i]});
    return s;
}

py::dict fit_dict(const HilbergFit& f) {
    py::dict d;
    d["exponent"] = f.exponent;
    d["k_min"] = f.k_min;
    d["k_max"] = f.k_max;
    d["residual"] = f.residual;
    d["points"] = f.points;
    return d;
}

std::string report_json(const VerificationReport& r) { return to_json(r).dump(); }

}  // namespace

PYBIND11_MODULE(_replab, m) {
    m.doc() = "Recurrence and repetition statistics, entropies and sandwich checks";
    m.attr("__version__") = std::string(version());

    py::class_<SourceModel>(m, "SourceModel")
        .def_static("uniform", &SourceModel::uniform, py::arg("alphabet_size"))
        .def_static("iid", &SourceModel::iid, py::arg("probs"), py::arg("label") = "iid")
        .def_static(
            "markov",
            [](const Eigen::MatrixXd& p, const std::string& label, bool allow_periodic) {
                return SourceModel::markov(p, label,
                                           allow_periodic ? PeriodicityPolicy::allow_periodic
                                                          : PeriodicityPolicy::require_aperiodic);
            },
            py::arg("transition"), py::arg("label") = "markov", py::arg("allow_periodic") = false)
        .def_static("two_state", &SourceModel::two_state, py::arg("a"), py::arg("b"), py::arg("label") = "markov2")
        .def_static("cycle", &SourceModel::cycle, py::arg("alphabet_size"))
        .def_static("hmm", &SourceModel::hmm, py::arg("transition"), py::arg("emission"), py::arg("label") = "hmm")
        .def_static("copy_source", &SourceModel::copy_source, py::arg("base"), py::arg("copy_prob"),
                    py::arg("max_copy_len"), py::arg("label") = "copy")
        .def_static(
            "from_json", [](const std::string& text) { return model_from_json(Json::parse(text)); }, py::arg("spec"))
        .def_property_readonly("label", &SourceModel::label)
        .def_property_readonly("alphabet_size", &SourceModel::alphabet_size)
        .def_property_readonly("type_name", &SourceModel::type_name)
        .def_property_readonly("exploratory", &SourceModel::exploratory)
        .def("__repr__", [](const SourceModel& s) { return "<SourceModel " + s.label() + ">"; });

    m.def(
        "sample",
        [](const SourceModel& model, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
            const auto s = sample_path(model, n, SeedSpec{seed, stream});
            return std::vector<Symbol>(s.symbols().begin(), s.symbols().end());
        },
        py::arg("model"), py::arg("n"), py::arg("seed") = 0, py::arg("stream") = 0);
    m.def(
        "block_probability",
        [](const SourceModel& model, const std::vector<Symbol>& block) { return block_probability(model, block); },
        py::arg("model"), py::arg("block"));

    m.def(
        "curve",
        [](const std::vector<Symbol>& symbols, const std::string& kind, std::size_t alphabet_size) {
            const auto x = to_seq(symbols, alphabet_size);
            switch (curve_kind_from_string(kind)) {
                case CurveKind::L1: return curve_tuple(longest_match_curve(x));
                case CurveKind::L2: return curve_tuple(maximal_repetition_curve(x));
                case CurveKind::R1: return curve_tuple(recurrence_time_curve(x));
                case CurveKind::R2: return curve_tuple(repetition_time_curve(x));
            }
            throw std::logic_error("unknown curve kind");
        },
        py::arg("symbols"), py::arg("kind"), py::arg("alphabet_size") = 0,
        "(values, censored) for indices 1..N of L1, L2, R1 or R2.");
    m.def(
        "ingest",
        [](const std::string& text, const std::string& mode) {
            if (mode != "bytes" && mode != "tokens") throw std::invalid_argument("mode must be bytes or tokens");
            const auto r = ingest_text(text, mode == "bytes" ? IngestMode::bytes : IngestMode::tokens);
            return py::make_tuple(std::vector<Symbol>(r.seq.symbols().begin(), r.seq.symbols().end()),
                                  r.seq.alphabet_size());
        },
        py::arg("text"), py::arg("mode") = "bytes");

    m.def(
        "renyi_entropy", [](const std::vector<double>& p, double g) { return renyi_entropy(p, g).hi; }, py::arg("dist"),
        py::arg("gamma"));
    m.def(
        "block_entropy",
        [](const SourceModel& model, std::size_t k, std::size_t i, double g) {
            const auto v = block_renyi_entropy(model, k, i, g);
            return py::make_tuple(v.lo, v.hi);
        },
        py::arg("model"), py::arg("k"), py::arg("i") = 0, py::arg("gamma") = 1.0,
        "H_gamma(X_1^k | X_{k+1}^{k+i}) as a (lo, hi) interval in nats.");
    m.def(
        "context_length", [](const SourceModel& model, std::size_t k, double g) { return context_length(model, k, g).value; },
        py::arg("model"), py::arg("k"), py::arg("gamma") = kInfiniteOrder);
    m.def(
        "weighted_entropy",
        [](const SourceModel& model, std::size_t k, std::uint64_t truncation) {
            const auto w = weighted_conditional_entropy(model, k, truncation);
            return py::make_tuple(w.lo, w.hi);
        },
        py::arg("model"), py::arg("k"), py::arg("truncation_M") = kDefaultTruncation);
    m.def(
        "entropy_rate", [](const SourceModel& model, int g) { return entropy_rate(model, g).hi; }, py::arg("model"),
        py::arg("gamma"));

    m.def(
        "hilberg_exponent",
        [](const std::vector<double>& ks, const std::vector<double>& values, double k_min, double k_max) {
            const auto e = hilberg_exponent(series_of(ks, values), k_min, k_max);
            py::dict d;
            d["offset_power"] = fit_dict(e.offset_power);
            d["tail_max"] = fit_dict(e.tail_max);
            d["loglog_regression"] = fit_dict(e.regression);
            return d;
        },
        py::arg("ks"), py::arg("values"), py::arg("k_min") = 2.0,
        py::arg("k_max") = std::numeric_limits<double>::infinity());
    m.def(
        "fit_law",
        [](const std::vector<double>& ks, const std::vector<double>& values, const std::string& law) {
            return law_fit_json(fit_law(series_of(ks, values), law_from_string(law))).dump();
        },
        py::arg("ks"), py::arg("values"), py::arg("law"));

    m.def(
        "verify_kac",
        [](const SourceModel& model, std::size_t k, std::uint64_t trials, std::uint64_t seed,
           std::optional<std::vector<Symbol>> block) {
            return report_json(verify_kac(model, k, MonteCarloConfig{trials, seed, 1.0}, std::move(block)));
        },
        py::arg("model"), py::arg("k"), py::arg("trials") = 100000, py::arg("seed") = 0, py::arg("block") = py::none());
    m.def(
        "verify_kontoyiannis",
        [](const SourceModel& model, std::size_t k, std::uint64_t trials, std::uint64_t seed) {
            return report_json(verify_kontoyiannis(model, k, MonteCarloConfig{trials, seed, 1.0}));
        },
        py::arg("model"), py::arg("k"), py::arg("trials") = 100000, py::arg("seed") = 0);
    m.def(
        "check_prop4",
        [](const SourceModel& model, const std::vector<std::size_t>& ks) { return report_json(check_prop4(model, ks)); },
        py::arg("model"), py::arg("ks"));
    m.def(
        "check_path_bounds",
        [](const SourceModel& model, int which, std::size_t paths, std::size_t n, std::vector<std::size_t> ks,
           std::uint64_t seed) {
            PathCheckConfig cfg;
            cfg.paths = paths;
            cfg.n = n;
            cfg.ks = std::move(ks);
            cfg.seed = seed;
            switch (which) {
                case 1: return report_json(check_prop1(model, cfg));
                case 2: return report_json(check_prop2(model, cfg));
                case 3: return report_json(check_prop3(model, cfg));
            }
            throw std::invalid_argument("proposition must be 1, 2 or 3");
        },
        py::arg("model"), py::arg("proposition"), py::arg("paths") = 50, py::arg("n") = 1000000,
        py::arg("ks") = std::vector<std::size_t>{1, 2, 4, 8, 16, 20}, py::arg("seed") = 0);
    m.def(
        "theorem_report",
        [](const SourceModel& model, std::size_t paths, std::size_t n, std::uint64_t seed) {
            TheoremConfig cfg;
            cfg.paths = paths;
            cfg.n = n;
            cfg.seed = seed;
            return report_json(theorem_report(model, cfg));
        },
        py::arg("model"), py::arg("paths") = 201, py::arg("n") = std::size_t{1} << 20, py::arg("seed") = 0);
}
