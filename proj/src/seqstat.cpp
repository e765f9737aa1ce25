#include "replab/seqstat.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace replab {

namespace {

std::size_t count_distinct(std::span<const Symbol> symbols) {
    std::unordered_set<Symbol> seen(symbols.begin(), symbols.end());
    return seen.size();
}

}  // namespace

SymbolSeq::SymbolSeq(std::vector<Symbol> symbols)
    : symbols_(std::move(symbols)), alphabet_size_(count_distinct(symbols_)),
      mode_(AlphabetMode::observed) {
    for (Symbol s : symbols_) {
        if (s >= alphabet_size_) {
            throw std::invalid_argument("symbol ids are not dense (id " + std::to_string(s) +
                                        " with " + std::to_string(alphabet_size_) +
                                        " distinct symbols); declare the alphabet size");
        }
    }
}

SymbolSeq::SymbolSeq(std::vector<Symbol> symbols, std::size_t alphabet_size)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size), mode_(AlphabetMode::declared) {
    if (alphabet_size_ == 0) throw std::invalid_argument("alphabet size must be positive");
    for (Symbol s : symbols_) {
        if (s >= alphabet_size_) {
            throw std::invalid_argument("symbol id " + std::to_string(s) +
                                        " out of range for alphabet size " +
                                        std::to_string(alphabet_size_));
        }
    }
}

SymbolSeq SymbolSeq::from_string(std::string_view text) {
    return ingest_text(text, IngestMode::bytes).seq;
}

SymbolSeq SymbolSeq::suffix(std::size_t offset) const {
    offset = std::min(offset, symbols_.size());
    SymbolSeq out;
    out.symbols_.assign(symbols_.begin() + static_cast<std::ptrdiff_t>(offset), symbols_.end());
    out.alphabet_size_ = alphabet_size_;
    out.mode_ = mode_;
    return out;
}

SymbolSeq SymbolSeq::prefix(std::size_t n) const {
    n = std::min(n, symbols_.size());
    SymbolSeq out;
    out.symbols_.assign(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n));
    out.alphabet_size_ = alphabet_size_;
    out.mode_ = mode_;
    return out;
}

Symbol SymbolDictionary::intern(std::string_view token) {
    auto it = ids_.find(std::string(token));
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<Symbol>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    return id;
}

std::optional<Symbol> SymbolDictionary::find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

Ingested ingest_text(std::string_view text, IngestMode mode) {
    Ingested out;
    std::vector<Symbol> symbols;
    if (mode == IngestMode::bytes) {
        // Byte values get dense ids through a 256-entry table.
        std::array<std::int32_t, 256> table;
        table.fill(-1);
        symbols.reserve(text.size());
        for (char c : text) {
            const auto b = static_cast<unsigned char>(c);
            if (table[b] < 0) {
                table[b] = static_cast<std::int32_t>(out.dictionary.intern(std::string_view(&c, 1)));
            }
            symbols.push_back(static_cast<Symbol>(table[b]));
        }
    } else {
        std::size_t t = 0;
        while (t < text.size()) {
            while (t < text.size() && std::isspace(static_cast<unsigned char>(text[t]))) ++t;
            const std::size_t start = t;
            while (t < text.size() && !std::isspace(static_cast<unsigned char>(text[t]))) ++t;
            if (t > start) symbols.push_back(out.dictionary.intern(text.substr(start, t - start)));
        }
    }
    if (symbols.empty()) {
        out.seq = SymbolSeq();
    } else {
        out.seq = SymbolSeq(std::move(symbols), out.dictionary.size());
    }
    return out;
}

std::string_view to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::L1: return "L1";
        case CurveKind::L2: return "L2";
        case CurveKind::R1: return "R1";
        case CurveKind::R2: return "R2";
    }
    return "?";
}

CurveKind curve_kind_from_string(std::string_view name) {
    if (name == "L1") return CurveKind::L1;
    if (name == "L2") return CurveKind::L2;
    if (name == "R1") return CurveKind::R1;
    if (name == "R2") return CurveKind::R2;
    throw std::invalid_argument("unknown curve kind '" + std::string(name) + "'");
}

StatCurve::StatCurve(CurveKind kind, std::vector<CensoredValue> points)
    : kind_(kind), points_(std::move(points)) {}

const CensoredValue& StatCurve::at(std::size_t index) const {
    if (index == 0 || index > points_.size()) throw std::out_of_range("curve index out of range");
    return points_[index - 1];
}

CensoredValue& StatCurve::mutable_at(std::size_t index) {
    if (index == 0 || index > points_.size()) throw std::out_of_range("curve index out of range");
    return points_[index - 1];
}

std::size_t StatCurve::censored_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(points_.begin(), points_.end(), [](const CensoredValue& v) { return v.censored; }));
}

std::vector<std::size_t> z_array(std::span<const Symbol> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> z(n, 0);
    if (n == 0) return z;
    z[0] = n;
    std::size_t l = 0, r = 0;  // [l, r) is the rightmost match window
    for (std::size_t t = 1; t < n; ++t) {
        std::size_t len = 0;
        if (t < r) len = std::min(r - t, z[t - l]);
        while (t + len < n && x[len] == x[t + len]) ++len;
        z[t] = len;
        if (t + len > r) {
            l = t;
            r = t + len;
        }
    }
    return z;
}

namespace {

// first[k-1] = min{i >= 1 : z[i] >= k}, for k = 1..max z.
std::vector<std::size_t> first_recurrence(std::span<const Symbol> x) {
    const auto z = z_array(x);
    std::vector<std::size_t> first;
    for (std::size_t i = 1; i < z.size(); ++i) {
        while (first.size() < z[i]) first.push_back(i);
    }
    return first;
}

}  // namespace

StatCurve longest_match_curve(const SymbolSeq& seq) {
    const std::size_t n_total = seq.size();
    const auto first = first_recurrence(seq.symbols());
    // first[k-1] + k is strictly increasing, so L1_n is a pointer sweep.
    std::vector<CensoredValue> pts(n_total);
    std::size_t k = 0;
    for (std::size_t n = 1; n <= n_total; ++n) {
        while (k < first.size() && first[k] + (k + 1) <= n) ++k;
        pts[n - 1] = {k, false};
    }
    return StatCurve(CurveKind::L1, std::move(pts));
}

StatCurve recurrence_time_curve(const SymbolSeq& seq) {
    const std::size_t n_total = seq.size();
    const auto first = first_recurrence(seq.symbols());
    std::vector<CensoredValue> pts(n_total);
    for (std::size_t k = 1; k <= n_total; ++k) {
        if (k <= first.size()) {
            pts[k - 1] = {first[k - 1], false};
        } else {
            pts[k - 1] = {n_total - k + 1, true};
        }
    }
    return StatCurve(CurveKind::R1, std::move(pts));
}

MaximalRepetitionTracker::MaximalRepetitionTracker() { states_.push_back(State{}); }

void MaximalRepetitionTracker::reserve(std::size_t n) { states_.reserve(2 * n + 1); }

std::int32_t MaximalRepetitionTracker::find(std::uint32_t state, Symbol s) const {
    const auto& st = states_[state];
    if (st.wide >= 0) {
        const auto& next = wide_[static_cast<std::size_t>(st.wide)];
        auto it = std::lower_bound(next.begin(), next.end(), s, [](const Edge& e, Symbol v) { return e.first < v; });
        if (it == next.end() || it->first != s) return -1;
        return static_cast<std::int32_t>(it->second);
    }
    for (std::uint32_t i = 0; i < st.count; ++i) {
        if (st.inline_edges[i].first == s) return static_cast<std::int32_t>(st.inline_edges[i].second);
    }
    return -1;
}

void MaximalRepetitionTracker::set(std::uint32_t state, Symbol s, std::uint32_t target) {
    auto& st = states_[state];
    if (st.wide < 0) {
        for (std::uint32_t i = 0; i < st.count; ++i) {
            if (st.inline_edges[i].first == s) {
                st.inline_edges[i].second = target;
                return;
            }
        }
        if (st.count < 2) {
            st.inline_edges[st.count++] = {s, target};
            return;
        }
        std::vector<Edge> next(st.inline_edges, st.inline_edges + st.count);
        std::sort(next.begin(), next.end());
        st.wide = static_cast<std::int32_t>(wide_.size());
        st.count = 0;
        wide_.push_back(std::move(next));
    }
    auto& next = wide_[static_cast<std::size_t>(st.wide)];
    auto it = std::lower_bound(next.begin(), next.end(), s, [](const Edge& e, Symbol v) { return e.first < v; });
    if (it != next.end() && it->first == s) it->second = target;
    else next.insert(it, {s, target});
}

std::uint32_t MaximalRepetitionTracker::clone_of(std::uint32_t q, std::uint32_t len) {
    State copy = states_[q];
    copy.len = len;
    if (copy.wide >= 0) {
        auto edges = wide_[static_cast<std::size_t>(copy.wide)];
        copy.wide = static_cast<std::int32_t>(wide_.size());
        wide_.push_back(std::move(edges));
    }
    const auto id = static_cast<std::uint32_t>(states_.size());
    states_.push_back(copy);
    return id;
}

std::size_t MaximalRepetitionTracker::append(Symbol symbol) {
    const auto cur = static_cast<std::uint32_t>(states_.size());
    states_.push_back(State{states_[last_].len + 1, -1, 0, -1, {}});
    std::int32_t p = static_cast<std::int32_t>(last_);
    while (p != -1 && find(static_cast<std::uint32_t>(p), symbol) == -1) {
        set(static_cast<std::uint32_t>(p), symbol, cur);
        p = states_[p].link;
    }
    if (p == -1) {
        states_[cur].link = 0;
    } else {
        const auto q = static_cast<std::uint32_t>(find(static_cast<std::uint32_t>(p), symbol));
        if (states_[p].len + 1 == states_[q].len) {
            states_[cur].link = static_cast<std::int32_t>(q);
        } else {
            const auto clone = clone_of(q, states_[p].len + 1);
            while (p != -1 && find(static_cast<std::uint32_t>(p), symbol) == static_cast<std::int32_t>(q)) {
                set(static_cast<std::uint32_t>(p), symbol, clone);
                p = states_[p].link;
            }
            states_[q].link = static_cast<std::int32_t>(clone);
            states_[cur].link = static_cast<std::int32_t>(clone);
        }
    }
    last_ = cur;
    ++length_;
    const std::size_t repeated = states_[states_[cur].link].len;
    best_ = std::max(best_, repeated);
    return repeated;
}

StatCurve maximal_repetition_curve(const SymbolSeq& seq) {
    MaximalRepetitionTracker tracker;
    tracker.reserve(seq.size());
    std::vector<CensoredValue> pts;
    pts.reserve(seq.size());
    for (Symbol s : seq.symbols()) {
        tracker.append(s);
        pts.push_back({tracker.maximal_repetition(), false});
    }
    return StatCurve(CurveKind::L2, std::move(pts));
}

StatCurve repetition_time_from_l2(const StatCurve& l2) {
    if (l2.kind() != CurveKind::L2) throw std::invalid_argument("expected an L2 curve");
    const std::size_t n_total = l2.size();
    std::vector<CensoredValue> pts(n_total);
    std::size_t m = 1;  // smallest prefix length with L2_m >= k
    for (std::size_t k = 1; k <= n_total; ++k) {
        while (m <= n_total && l2.at(m).value < k) ++m;
        if (m <= n_total) {
            pts[k - 1] = {m - k, false};
        } else {
            pts[k - 1] = {n_total - k + 1, true};
        }
    }
    return StatCurve(CurveKind::R2, std::move(pts));
}

StatCurve repetition_time_curve(const SymbolSeq& seq) {
    return repetition_time_from_l2(maximal_repetition_curve(seq));
}

StatCurve compute_curve(const SymbolSeq& seq, CurveKind kind) {
    switch (kind) {
        case CurveKind::L1: return longest_match_curve(seq);
        case CurveKind::L2: return maximal_repetition_curve(seq);
        case CurveKind::R1: return recurrence_time_curve(seq);
        case CurveKind::R2: return repetition_time_curve(seq);
    }
    throw std::invalid_argument("unknown curve kind");
}

StatCurve brute_force_curve(const SymbolSeq& seq, CurveKind kind, std::size_t limit) {
    const std::size_t n_total = seq.size();
    if (n_total > limit) {
        throw std::length_error("brute-force oracle refuses N=" + std::to_string(n_total) +
                                " above limit " + std::to_string(limit));
    }
    const auto x = seq.symbols();
    auto common = [&](std::size_t a, std::size_t b) {
        std::size_t len = 0;
        while (b + len < n_total && x[a + len] == x[b + len]) ++len;
        return len;
    };
    // best[i]: longest block starting at offset i (i >= 1) that also starts at
    // offset 0 (order 1) or at some offset j < i (order 2).
    std::vector<std::size_t> best(n_total, 0);
    for (std::size_t i = 1; i < n_total; ++i) {
        if (curve_order(kind) == 1) {
            best[i] = common(0, i);
        } else {
            for (std::size_t j = 0; j < i; ++j) best[i] = std::max(best[i], common(j, i));
        }
    }
    std::vector<CensoredValue> pts(n_total);
    if (is_length_kind(kind)) {
        for (std::size_t n = 1; n <= n_total; ++n) {
            std::size_t v = 0;
            for (std::size_t i = 1; i < n; ++i) v = std::max(v, std::min(best[i], n - i));
            pts[n - 1] = {v, false};
        }
    } else {
        for (std::size_t k = 1; k <= n_total; ++k) {
            pts[k - 1] = {n_total - k + 1, true};
            for (std::size_t i = 1; i + k <= n_total; ++i) {
                if (best[i] >= k) {
                    pts[k - 1] = {i, false};
                    break;
                }
            }
        }
    }
    return StatCurve(kind, std::move(pts));
}

bool check_duality(const StatCurve& l, const StatCurve& r) {
    if (!is_length_kind(l.kind()) || is_length_kind(r.kind()) || curve_order(l.kind()) != curve_order(r.kind())) {
        throw std::invalid_argument("check_duality needs matching (L1,R1) or (L2,R2) curves");
    }
    if (l.size() != r.size()) throw std::invalid_argument("curves come from sequences of different length");
    const std::size_t n_total = l.size();
    for (std::size_t k = 1; k <= n_total; ++k) {
        const auto& rk = r.at(k);
        for (std::size_t n = 0; n + k <= n_total; ++n) {
            const bool r_exceeds = rk.value > n;
            const bool l_short = l.at(n + k).value < k;
            if (r_exceeds != l_short) return false;
        }
    }
    return true;
}

DecompositionResult check_min_decomposition(const SymbolSeq& seq, std::size_t k) {
    if (k == 0) throw std::invalid_argument("block length must be positive");
    if (k > seq.size()) return DecompositionResult::inconclusive;
    const auto r2 = repetition_time_curve(seq).at(k);
    if (r2.censored) return DecompositionResult::inconclusive;
    std::uint64_t best = UINT64_MAX;
    for (std::size_t i = 0; i < r2.value; ++i) {
        // i < R2_k <= N - k, so the shifted horizon always holds a k-block.
        const auto r1 = recurrence_time_curve(seq.suffix(i)).at(k).value;
        best = std::min<std::uint64_t>(best, i + r1);
    }
    return best == r2.value ? DecompositionResult::holds : DecompositionResult::violated;
}

}  // namespace replab
