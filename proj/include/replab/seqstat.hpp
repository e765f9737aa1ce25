#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace replab {

using Symbol = std::uint32_t;

// A finite sequence X_1..X_N over a D-ary alphabet. Stored 0-based: symbol()
// at offset t is X_{t+1}. Immutable after construction.
class SymbolSeq {
public:
    enum class AlphabetMode { declared, observed };

    SymbolSeq() = default;

    // Alphabet size is the number of distinct ids; ids must already be dense.
    explicit SymbolSeq(std::vector<Symbol> symbols);
    SymbolSeq(std::vector<Symbol> symbols, std::size_t alphabet_size);

    // "abab" -> {0,1,0,1}; letters are mapped in order of first appearance.
    static SymbolSeq from_string(std::string_view text);

    std::span<const Symbol> symbols() const noexcept { return symbols_; }
    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }
    std::size_t alphabet_size() const noexcept { return alphabet_size_; }
    AlphabetMode alphabet_mode() const noexcept { return mode_; }
    Symbol operator[](std::size_t t) const { return symbols_[t]; }

    // Shift view T^offset: drops the first `offset` symbols, keeps D.
    SymbolSeq suffix(std::size_t offset) const;
    // First n symbols, keeps D.
    SymbolSeq prefix(std::size_t n) const;

    friend bool operator==(const SymbolSeq&, const SymbolSeq&) = default;

private:
    std::vector<Symbol> symbols_;
    std::size_t alphabet_size_ = 0;
    AlphabetMode mode_ = AlphabetMode::observed;
};

// Maps external tokens (bytes or whitespace-separated words) to dense ids in
// order of first appearance.
class SymbolDictionary {
public:
    Symbol intern(std::string_view token);
    std::optional<Symbol> find(std::string_view token) const;
    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(Symbol id) const { return tokens_.at(id); }

private:
    std::unordered_map<std::string, Symbol> ids_;
    std::vector<std::string> tokens_;
};

enum class IngestMode { bytes, tokens };

struct Ingested {
    SymbolSeq seq;
    SymbolDictionary dictionary;
};

Ingested ingest_text(std::string_view text, IngestMode mode);

enum class CurveKind { L1, L2, R1, R2 };

std::string_view to_string(CurveKind kind);
CurveKind curve_kind_from_string(std::string_view name);
constexpr bool is_length_kind(CurveKind k) { return k == CurveKind::L1 || k == CurveKind::L2; }
// 1 for L1/R1, 2 for L2/R2.
constexpr int curve_order(CurveKind k) { return (k == CurveKind::L1 || k == CurveKind::R1) ? 1 : 2; }

// censored=true means the true statistic is >= value but not determined by
// the finite sample.
struct CensoredValue {
    std::uint64_t value = 0;
    bool censored = false;

    friend bool operator==(const CensoredValue&, const CensoredValue&) = default;
};

// Point index is 1-based: n = 1..N for L-kinds, k = 1..N for R-kinds.
class StatCurve {
public:
    StatCurve() = default;
    StatCurve(CurveKind kind, std::vector<CensoredValue> points);

    CurveKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    // index is 1-based.
    const CensoredValue& at(std::size_t index) const;
    CensoredValue& mutable_at(std::size_t index);
    std::span<const CensoredValue> points() const noexcept { return points_; }
    std::size_t censored_count() const noexcept;

    friend bool operator==(const StatCurve&, const StatCurve&) = default;

private:
    CurveKind kind_ = CurveKind::L1;
    std::vector<CensoredValue> points_;
};

// Z-array: z[t] = length of the longest common prefix of x and x[t..], z[0] = N.
std::vector<std::size_t> z_array(std::span<const Symbol> x);

StatCurve longest_match_curve(const SymbolSeq& seq);
StatCurve maximal_repetition_curve(const SymbolSeq& seq);
StatCurve recurrence_time_curve(const SymbolSeq& seq);
StatCurve repetition_time_curve(const SymbolSeq& seq);
// R2 from an already computed L2 curve via R_k = min{n : L_{n+k} >= k}.
StatCurve repetition_time_from_l2(const StatCurve& l2);
StatCurve compute_curve(const SymbolSeq& seq, CurveKind kind);

// Online structure for L2. After each append, reports the length of the
// longest suffix of the current prefix that occurs at least twice in it.
class MaximalRepetitionTracker {
public:
    MaximalRepetitionTracker();
    void reserve(std::size_t n);
    // Returns the longest repeated suffix length after appending.
    std::size_t append(Symbol symbol);
    std::size_t size() const noexcept { return length_; }
    // Running maximum, i.e. L2 of the prefix seen so far.
    std::size_t maximal_repetition() const noexcept { return best_; }

private:
    using Edge = std::pair<Symbol, std::uint32_t>;
    // Up to two edges live inline; larger fan-outs move to a sorted vector in
    // `wide_`. Binary alphabets never allocate per state.
    struct State {
        std::uint32_t len = 0;
        std::int32_t link = -1;
        std::uint32_t count = 0;
        std::int32_t wide = -1;
        Edge inline_edges[2]{};
    };
    std::int32_t find(std::uint32_t state, Symbol s) const;
    void set(std::uint32_t state, Symbol s, std::uint32_t target);
    std::uint32_t clone_of(std::uint32_t q, std::uint32_t len);

    std::vector<State> states_;
    std::vector<std::vector<Edge>> wide_;
    std::uint32_t last_ = 0;
    std::size_t length_ = 0;
    std::size_t best_ = 0;
};

inline constexpr std::size_t kDefaultOracleLimit = 2000;

// Direct-enumeration oracle; throws std::length_error above `limit`.
StatCurve brute_force_curve(const SymbolSeq& seq, CurveKind kind,
                            std::size_t limit = kDefaultOracleLimit);

// R_k > n <=> L_{n+k} < k for every n + k <= N. Throws on mismatched order.
bool check_duality(const StatCurve& l, const StatCurve& r);

enum class DecompositionResult { holds, violated, inconclusive };

// R2_k = min_{0 <= i < R2_k} (i + R1_k(T^i x)).
DecompositionResult check_min_decomposition(const SymbolSeq& seq, std::size_t k);

}  // namespace replab
