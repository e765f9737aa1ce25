#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "replab/entropy.hpp"
#include "replab/hilberg.hpp"
#include "replab/seqstat.hpp"
#include "replab/sources.hpp"
#include "replab/verify.hpp"

namespace replab {

std::string_view version();

// Writes to a sibling temp file, then renames over the target.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Provenance block embedded in every output: tool, version, full config.
Json provenance(const Json& config);

struct CurveRow {
    CurveKind kind = CurveKind::L1;
    std::size_t index = 0;
    std::uint64_t value = 0;
    bool censored = false;

    friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

// Rows of `curves` at the requested 1-based indices (indices beyond a curve
// are skipped).
std::vector<CurveRow> select_rows(const StatCurve& curve, std::span<const std::size_t> indices);

// '#'-prefixed provenance lines, then "kind,index,value,censored".
std::string format_curves_csv(const Json& config, const std::vector<CurveRow>& rows);
// Skips '#' lines; throws std::runtime_error on a malformed header or row.
std::vector<CurveRow> parse_curves_csv(std::string_view text);

struct EntropyRow {
    double gamma = 0.0;
    std::size_t k = 0;
    std::uint64_t i = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::string kind;  // plain, weighted, context_length
};

std::string format_entropy_csv(const Json& config, const std::vector<EntropyRow>& rows);
std::string format_gamma(double gamma);

Json law_fit_json(const LawFit& fit);

// First line "D N", then '#' metadata lines, then one symbol per line.
std::string format_sequence(const SymbolSeq& seq, const Json& metadata);
SymbolSeq parse_sequence(std::string_view text);

// Builds a model from the "model" object of a config. Errors name the
// offending field, e.g. "model.transition: row 1 sums to 0.9".
SourceModel model_from_json(const Json& model);

// Parses "inf" or a non-negative number.
double parse_gamma(std::string_view text);

}  // namespace replab
