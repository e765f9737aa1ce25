#include "replab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef REPLAB_VERSION
#define REPLAB_VERSION "0.0.0"
#endif

namespace replab {

namespace fs = std::filesystem;

std::string_view version() { return REPLAB_VERSION; }

void atomic_write(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json provenance(const Json& config) {
    return {{"tool", "replab"}, {"version", std::string(version())}, {"config", config}};
}

std::vector<CurveRow> select_rows(const StatCurve& curve, std::span<const std::size_t> indices) {
    std::vector<CurveRow> rows;
    for (auto idx : indices) {
        if (idx == 0 || idx > curve.size()) continue;
        const auto& v = curve.at(idx);
        rows.push_back({curve.kind(), idx, v.value, v.censored});
    }
    return rows;
}

std::string format_curves_csv(const Json& config, const std::vector<CurveRow>& rows) {
    std::string out = "# " + provenance(config).dump() + "\n";
    out += "kind,index,value,censored\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.kind)) + "," + std::to_string(r.index) + "," + std::to_string(r.value) + "," +
               (r.censored ? "1" : "0") + "\n";
    }
    return out;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

template <class T>
T parse_uint(std::string_view s, std::string_view what) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("malformed " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    auto lines = split(text, '\n');
    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::vector<CurveRow> parse_curves_csv(std::string_view text) {
    std::vector<CurveRow> rows;
    bool header = false;
    std::size_t line_no = 0;
    for (auto line : lines_of(text)) {
        ++line_no;
        if (!line.empty() && line.front() == '#') continue;
        if (!header) {
            if (line != "kind,index,value,censored") throw std::runtime_error("curves.csv: unexpected header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 4) throw std::runtime_error("curves.csv line " + std::to_string(line_no) + ": expected 4 fields");
        CurveRow r;
        r.kind = curve_kind_from_string(f[0]);
        r.index = parse_uint<std::size_t>(f[1], "index");
        r.value = parse_uint<std::uint64_t>(f[2], "value");
        if (f[3] != "0" && f[3] != "1") throw std::runtime_error("curves.csv line " + std::to_string(line_no) + ": censored must be 0 or 1");
        r.censored = f[3] == "1";
        if (r.censored && is_length_kind(r.kind)) {
            throw std::runtime_error("curves.csv line " + std::to_string(line_no) + ": length curves are never censored");
        }
        rows.push_back(r);
    }
    if (!header) throw std::runtime_error("curves.csv: missing header");
    return rows;
}

std::string format_gamma(double gamma) { return fmt(gamma); }

std::string format_entropy_csv(const Json& config, const std::vector<EntropyRow>& rows) {
    std::string out = "# " + provenance(config).dump() + "\n";
    out += "gamma,k,i,lo,hi,kind\n";
    for (const auto& r : rows) {
        out += format_gamma(r.gamma) + "," + std::to_string(r.k) + "," + std::to_string(r.i) + "," + fmt(r.lo) + "," +
               fmt(r.hi) + "," + r.kind + "\n";
    }
    return out;
}

Json law_fit_json(const LawFit& fit) {
    return {{"law", std::string(to_string(fit.law))},
            {"parameter", fit.parameter},
            {"C", fit.C},
            {"r_squared", fit.r_squared},
            {"window", {fit.window_lo, fit.window_hi}},
            {"points", fit.points},
            {"censored_fraction", fit.censored_fraction}};
}

std::string format_sequence(const SymbolSeq& seq, const Json& metadata) {
    std::string out = std::to_string(seq.alphabet_size()) + " " + std::to_string(seq.size()) + "\n";
    out += "# " + metadata.dump() + "\n";
    for (auto s : seq.symbols()) out += std::to_string(s) + "\n";
    return out;
}

SymbolSeq parse_sequence(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw std::runtime_error("sequence file is empty");
    const auto head = split(lines[0], ' ');
    if (head.size() != 2) throw std::runtime_error("sequence file: first line must be 'D N'");
    const auto d = parse_uint<std::size_t>(head[0], "alphabet size");
    const auto n = parse_uint<std::size_t>(head[1], "length");
    std::vector<Symbol> symbols;
    symbols.reserve(n);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (!lines[i].empty() && lines[i].front() == '#') continue;
        symbols.push_back(parse_uint<Symbol>(lines[i], "symbol"));
    }
    if (symbols.size() != n) {
        throw std::runtime_error("sequence file declares N = " + std::to_string(n) + " but holds " +
                                 std::to_string(symbols.size()) + " symbols");
    }
    return SymbolSeq(std::move(symbols), d);
}

namespace {

std::vector<double> vector_field(const Json& model, const char* key) {
    const std::string name = std::string("model.") + key;
    if (!model.contains(key)) throw std::invalid_argument(name + " is required");
    const auto& v = model.at(key);
    if (!v.is_array()) throw std::invalid_argument(name + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw std::invalid_argument(name + "[" + std::to_string(i) + "] is not a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

Eigen::MatrixXd matrix_field(const Json& model, const char* key) {
    const std::string name = std::string("model.") + key;
    if (!model.contains(key)) throw std::invalid_argument(name + " is required");
    const auto& m = model.at(key);
    if (!m.is_array() || m.empty()) throw std::invalid_argument(name + " must be a non-empty array of rows");
    const auto rows = m.size();
    const auto cols = m[0].is_array() ? m[0].size() : 0;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!m[r].is_array() || m[r].size() != cols) {
            throw std::invalid_argument(name + " row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!m[r][c].is_number()) {
                throw std::invalid_argument(name + " row " + std::to_string(r) + " entry " + std::to_string(c) +
                                            " is not a number");
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c].get<double>();
        }
    }
    return out;
}

template <class Fn>
SourceModel with_field_context(const std::string& field, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(field + ": " + e.what());
    }
}

}  // namespace

SourceModel model_from_json(const Json& model) {
    if (!model.is_object()) throw std::invalid_argument("model must be an object");
    if (!model.contains("type") || !model.at("type").is_string()) throw std::invalid_argument("model.type is required");
    const auto type = model.at("type").get<std::string>();
    const auto label = model.value("label", type);
    const auto policy = model.value("allow_periodic", false) ? PeriodicityPolicy::allow_periodic
                                                               : PeriodicityPolicy::require_aperiodic;
    if (type == "iid") {
        auto probs = vector_field(model, "probs");
        return with_field_context("model.probs", [&] { return SourceModel::iid(std::move(probs), label); });
    }
    if (type == "uniform") {
        const auto d = model.value("alphabet_size", 2);
        if (d <= 0) throw std::invalid_argument("model.alphabet_size must be positive");
        return SourceModel::uniform(static_cast<std::size_t>(d));
    }
    if (type == "markov") {
        auto p = matrix_field(model, "transition");
        return with_field_context("model.transition", [&] { return SourceModel::markov(std::move(p), label, policy); });
    }
    if (type == "hmm") {
        auto a = matrix_field(model, "transition");
        auto b = matrix_field(model, "emission");
        return with_field_context("model", [&] { return SourceModel::hmm(std::move(a), std::move(b), label); });
    }
    if (type == "copy") {
        auto base = vector_field(model, "probs");
        if (!model.contains("copy_prob") || !model.at("copy_prob").is_number()) {
            throw std::invalid_argument("model.copy_prob is required");
        }
        const auto copy_prob = model.at("copy_prob").get<double>();
        const auto max_len = model.value("max_copy_len", 1);
        if (max_len <= 0) throw std::invalid_argument("model.max_copy_len must be positive");
        return with_field_context("model", [&] {
            return SourceModel::copy_source(std::move(base), copy_prob, static_cast<std::size_t>(max_len), label);
        });
    }
    throw std::invalid_argument("model.type must be one of iid, uniform, markov, hmm, copy; got '" + type + "'");
}

double parse_gamma(std::string_view text) {
    if (text == "inf" || text == "infinity") return kInfiniteOrder;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("gamma must be a number or 'inf', got '" + std::string(text) + "'");
    }
    validate_order(v);
    return v;
}

}  // namespace replab
