#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kcount {

class Kmer;
class ReadSource;

/// Largest m-mer length whose rank table is materialized (4^12 entries).
inline constexpr unsigned kMaxMinimizerLength = 12;

enum class OrderingStrategy { cgat, roberts, kmc2, random, dfp, lexicographic };

/// Everything needed to rebuild an ordering deterministically.
struct OrderingSpec {
    OrderingStrategy strategy = OrderingStrategy::kmc2;
    std::uint64_t seed = 0;               // random
    double pivot = 0.0;                   // dfp
    std::uint64_t sample_budget = 1'000'000;  // dfp

    /// "kmc2", "random:42", "dfp:0.5", ...
    std::string tag() const;
    static OrderingSpec parse(std::string_view tag);

    friend bool operator==(const OrderingSpec&, const OrderingSpec&) = default;
};

std::string_view strategy_name(OrderingStrategy s);
OrderingStrategy parse_strategy(std::string_view name);

/// Sampled occurrence counts of every m-mer.
struct FrequencyTable {
    unsigned m = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
};

/// Total order on all 4^m m-mers, materialized as a rank table indexed by the
/// m-mer's 2-bit code (first base most significant).
class MinimizerOrdering {
public:
    MinimizerOrdering() = default;
    MinimizerOrdering(OrderingSpec spec, unsigned m, std::vector<std::uint32_t> rank);

    unsigned m() const noexcept { return m_; }
    const OrderingSpec& spec() const noexcept { return spec_; }
    std::uint32_t rank(std::uint32_t code) const noexcept { return rank_[code]; }
    const std::vector<std::uint32_t>& ranks() const noexcept { return rank_; }
    std::size_t size() const noexcept { return rank_.size(); }

    /// m-mer code holding rank r.
    std::uint32_t code_at_rank(std::uint32_t r) const noexcept { return inverse_[r]; }

private:
    OrderingSpec spec_;
    unsigned m_ = 0;
    std::vector<std::uint32_t> rank_;
    std::vector<std::uint32_t> inverse_;
};

/// Plain A<C<G<T lexicographic order.
MinimizerOrdering build_lexicographic(unsigned m);
/// Lexicographic under C<G<A<T.
MinimizerOrdering build_cgat(unsigned m);
/// Lexicographic under C<A<T<G after complementing the bases at odd 0-based
/// indices, so alternating patterns like CGCGCG map to the minimum CCCCCC.
MinimizerOrdering build_roberts(unsigned m);
/// A<C<G<T lexicographic with every m-mer starting AAA or ACA moved after all
/// others. Falls back to plain lexicographic for m < 3.
MinimizerOrdering build_kmc2_style(unsigned m);
/// Fisher-Yates shuffle driven by std::mt19937_64(seed).
MinimizerOrdering build_random(unsigned m, std::uint64_t seed);
/// Distance-from-pivot: m-mers sorted ascending by frequency (ties by code)
/// give initial positions; final rank sorts by |position - 4^m * pivot|,
/// ties to the smaller initial position.
MinimizerOrdering build_dfp(const FrequencyTable& freq, double pivot);

FrequencyTable sample_frequencies(ReadSource& reads, unsigned m, std::uint64_t budget);
FrequencyTable sample_frequencies(const std::vector<std::string>& reads, unsigned m,
                                  std::uint64_t budget);

/// Builds any non-dfp strategy directly; dfp needs `sampler` to supply frequencies.
MinimizerOrdering build_ordering(const OrderingSpec& spec, unsigned m,
                                 const std::function<FrequencyTable(unsigned, std::uint64_t)>& sampler = {});

struct OrderingMetrics {
    std::uint64_t total_supermers = 0;
    std::uint64_t max_distinct_kmers_per_minimizer = 0;
};

OrderingMetrics evaluate_ordering(const std::vector<std::string>& reads, unsigned k,
                                  const MinimizerOrdering& ord, bool canonical_mode);
OrderingMetrics evaluate_ordering(ReadSource& reads, unsigned k, const MinimizerOrdering& ord,
                                  bool canonical_mode);

}  // namespace kcount
