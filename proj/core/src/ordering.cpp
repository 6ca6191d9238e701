#include "kcount/ordering.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "kcount/errors.hpp"
#include "kcount/kmer.hpp"
#include "kcount/minimizer.hpp"
#include "kcount/seqio.hpp"

namespace kcount {

namespace {

void check_m(unsigned m) {
    if (m < 1 || m > kMaxMinimizerLength)
        throw UsageError("minimizer length " + std::to_string(m) + " outside 1.." +
                         std::to_string(kMaxMinimizerLength));
}

std::size_t table_size(unsigned m) { return std::size_t{1} << (2 * m); }

// Rank = the m-mer read as a base-4 number after remapping each letter
// through `order` (order[code] = position of the letter in the alphabet).
std::vector<std::uint32_t> remapped_lexicographic(unsigned m, const std::array<std::uint32_t, 4>& order,
                                                  bool complement_odd) {
    std::vector<std::uint32_t> rank(table_size(m));
    for (std::uint32_t code = 0; code < rank.size(); ++code) {
        std::uint32_t r = 0;
        for (unsigned i = 0; i < m; ++i) {
            std::uint8_t b = static_cast<std::uint8_t>((code >> (2 * (m - 1 - i))) & 3u);
            if (complement_odd && (i & 1u)) b = base::complement(b);
            r = (r << 2) | order[b];
        }
        rank[code] = r;
    }
    return rank;
}

}  // namespace

std::string_view strategy_name(OrderingStrategy s) {
    switch (s) {
        case OrderingStrategy::cgat: return "cgat";
        case OrderingStrategy::roberts: return "roberts";
        case OrderingStrategy::kmc2: return "kmc2";
        case OrderingStrategy::random: return "random";
        case OrderingStrategy::dfp: return "dfp";
        case OrderingStrategy::lexicographic: return "lexicographic";
    }
    return "?";
}

OrderingStrategy parse_strategy(std::string_view name) {
    for (auto s : {OrderingStrategy::cgat, OrderingStrategy::roberts, OrderingStrategy::kmc2,
                   OrderingStrategy::random, OrderingStrategy::dfp, OrderingStrategy::lexicographic})
        if (strategy_name(s) == name) return s;
    if (name == "lex" || name == "acgt") return OrderingStrategy::lexicographic;
    throw UsageError("unknown ordering strategy '" + std::string(name) + "'");
}

std::string OrderingSpec::tag() const {
    std::string out(strategy_name(strategy));
    if (strategy == OrderingStrategy::random) out += ":" + std::to_string(seed);
    if (strategy == OrderingStrategy::dfp) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, pivot);
        out += ":" + std::string(buf, res.ptr);
    }
    return out;
}

OrderingSpec OrderingSpec::parse(std::string_view tag) {
    OrderingSpec spec;
    const auto colon = tag.find(':');
    spec.strategy = parse_strategy(tag.substr(0, colon));
    if (colon == std::string_view::npos) return spec;
    const auto arg = tag.substr(colon + 1);
    std::from_chars_result res{};
    if (spec.strategy == OrderingStrategy::random)
        res = std::from_chars(arg.data(), arg.data() + arg.size(), spec.seed);
    else if (spec.strategy == OrderingStrategy::dfp)
        res = std::from_chars(arg.data(), arg.data() + arg.size(), spec.pivot);
    else
        throw UsageError("ordering '" + std::string(tag) + "' takes no argument");
    if (res.ec != std::errc{} || res.ptr != arg.data() + arg.size())
        throw UsageError("bad ordering argument in '" + std::string(tag) + "'");
    if (spec.strategy == OrderingStrategy::dfp && !(spec.pivot >= 0.0 && spec.pivot <= 1.0))
        throw UsageError("dfp pivot must lie in [0, 1]");
    return spec;
}

std::uint64_t FrequencyTable::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

MinimizerOrdering::MinimizerOrdering(OrderingSpec spec, unsigned m, std::vector<std::uint32_t> rank)
    : spec_(spec), m_(m), rank_(std::move(rank)), inverse_(rank_.size(), 0) {
    if (rank_.size() != table_size(m)) throw InternalError("rank table size does not match 4^m");
    std::vector<bool> seen(rank_.size(), false);
    for (std::uint32_t code = 0; code < rank_.size(); ++code) {
        const std::uint32_t r = rank_[code];
        if (r >= rank_.size() || seen[r]) throw InternalError("rank table is not a permutation");
        seen[r] = true;
        inverse_[r] = code;
    }
}

MinimizerOrdering build_lexicographic(unsigned m) {
    check_m(m);
    return MinimizerOrdering({OrderingStrategy::lexicographic}, m,
                             remapped_lexicographic(m, {0, 1, 2, 3}, false));
}

MinimizerOrdering build_cgat(unsigned m) {
    check_m(m);
    // C<G<A<T
    return MinimizerOrdering({OrderingStrategy::cgat}, m, remapped_lexicographic(m, {2, 0, 1, 3}, false));
}

MinimizerOrdering build_roberts(unsigned m) {
    check_m(m);
    // C<A<T<G
    return MinimizerOrdering({OrderingStrategy::roberts}, m, remapped_lexicographic(m, {1, 0, 3, 2}, true));
}

MinimizerOrdering build_kmc2_style(unsigned m) {
    check_m(m);
    if (m < 3) {
        auto lex = build_lexicographic(m);
        return MinimizerOrdering({OrderingStrategy::kmc2}, m, lex.ranks());
    }
    const std::size_t n = table_size(m);
    const unsigned shift = 2 * (m - 3);
    const std::uint32_t aaa = 0b000000;
    const std::uint32_t aca = 0b000100;
    std::vector<std::uint32_t> rank(n);
    std::uint32_t next = 0;
    for (std::uint32_t code = 0; code < n; ++code) {
        const std::uint32_t prefix = code >> shift;
        if (prefix != aaa && prefix != aca) rank[code] = next++;
    }
    for (std::uint32_t code = 0; code < n; ++code) {
        const std::uint32_t prefix = code >> shift;
        if (prefix == aaa || prefix == aca) rank[code] = next++;
    }
    return MinimizerOrdering({OrderingStrategy::kmc2}, m, std::move(rank));
}

MinimizerOrdering build_random(unsigned m, std::uint64_t seed) {
    check_m(m);
    std::vector<std::uint32_t> perm(table_size(m));
    std::iota(perm.begin(), perm.end(), 0u);
    // std::uniform_int_distribution is implementation-defined; draw bounded
    // values by rejection so tables are identical across standard libraries.
    std::mt19937_64 gen(seed);
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
        const std::uint64_t bound = i + 1;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do r = gen();
        while (r >= limit);
        std::swap(perm[i], perm[r % bound]);
    }
    OrderingSpec spec{OrderingStrategy::random};
    spec.seed = seed;
    return MinimizerOrdering(spec, m, std::move(perm));
}

MinimizerOrdering build_dfp(const FrequencyTable& freq, double pivot) {
    if (!(pivot >= 0.0 && pivot <= 1.0)) throw UsageError("dfp pivot must lie in [0, 1]");
    const unsigned m = freq.m;
    check_m(m);
    const std::size_t n = table_size(m);
    if (freq.counts.size() != n) throw UsageError("frequency table size does not match 4^m");

    std::vector<std::uint32_t> by_freq(n);
    std::iota(by_freq.begin(), by_freq.end(), 0u);
    std::stable_sort(by_freq.begin(), by_freq.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return freq.counts[a] < freq.counts[b]; });

    const double pivot_pos = static_cast<double>(n) * pivot;
    std::vector<std::uint32_t> positions(n);
    std::iota(positions.begin(), positions.end(), 0u);
    std::stable_sort(positions.begin(), positions.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::abs(a - pivot_pos) < std::abs(b - pivot_pos);
    });

    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t r = 0; r < n; ++r) rank[by_freq[positions[r]]] = r;
    OrderingSpec spec{OrderingStrategy::dfp};
    spec.pivot = pivot;
    return MinimizerOrdering(spec, m, std::move(rank));
}

FrequencyTable sample_frequencies(ReadSource& reads, unsigned m, std::uint64_t budget) {
    check_m(m);
    if (budget == 0) throw UsageError("sample budget must be positive");
    FrequencyTable freq{m, std::vector<std::uint64_t>(table_size(m), 0)};
    const std::uint32_t mask = static_cast<std::uint32_t>(table_size(m) - 1);
    std::uint64_t sampled = 0;
    std::string read;
    while (sampled < budget && reads.next(read)) {
        std::uint32_t code = 0;
        unsigned valid = 0;
        for (char c : read) {
            const auto b = base_code(c);
            if (b == base::invalid) {
                valid = 0;
                continue;
            }
            code = ((code << 2) | b) & mask;
            if (++valid >= m) {
                ++freq.counts[code];
                if (++sampled == budget) break;
            }
        }
    }
    return freq;
}

FrequencyTable sample_frequencies(const std::vector<std::string>& reads, unsigned m, std::uint64_t budget) {
    VectorReadSource source(reads);
    return sample_frequencies(source, m, budget);
}

MinimizerOrdering build_ordering(const OrderingSpec& spec, unsigned m,
                                 const std::function<FrequencyTable(unsigned, std::uint64_t)>& sampler) {
    switch (spec.strategy) {
        case OrderingStrategy::cgat: return build_cgat(m);
        case OrderingStrategy::roberts: return build_roberts(m);
        case OrderingStrategy::kmc2: return build_kmc2_style(m);
        case OrderingStrategy::random: return build_random(m, spec.seed);
        case OrderingStrategy::lexicographic: return build_lexicographic(m);
        case OrderingStrategy::dfp: {
            if (!sampler) throw UsageError("dfp ordering needs a frequency sample");
            auto ord = build_dfp(sampler(m, spec.sample_budget), spec.pivot);
            OrderingSpec full = spec;
            return MinimizerOrdering(full, m, ord.ranks());
        }
    }
    throw InternalError("unhandled ordering strategy");
}

OrderingMetrics evaluate_ordering(ReadSource& reads, unsigned k, const MinimizerOrdering& ord,
                                  bool canonical_mode) {
    OrderingMetrics metrics;
    SuperMerScanner scanner(k, ord, canonical_mode);
    std::unordered_map<std::uint32_t, std::unordered_set<Kmer, KmerHash>> per_minimizer;
    std::vector<std::uint8_t> scratch;
    std::string read;
    while (reads.next(read)) {
        for_each_fragment(read, k, scratch, [&](std::span<const std::uint8_t> codes, std::size_t) {
            scanner.scan(codes, [&](const SuperMerSpan& s) {
                ++metrics.total_supermers;
                auto& bucket = per_minimizer[s.minimizer];
                Kmer x = Kmer::from_codes(codes.subspan(s.start, k));
                for (std::size_t i = s.start;; ++i) {
                    bucket.insert(canonical_mode ? x.canonical() : x);
                    if (i + k >= s.start + s.length) break;
                    x.roll_forward(codes[i + k]);
                }
            });
        });
    }
    for (const auto& [code, kmers] : per_minimizer)
        metrics.max_distinct_kmers_per_minimizer =
            std::max<std::uint64_t>(metrics.max_distinct_kmers_per_minimizer, kmers.size());
    return metrics;
}

OrderingMetrics evaluate_ordering(const std::vector<std::string>& reads, unsigned k,
                                  const MinimizerOrdering& ord, bool canonical_mode) {
    VectorReadSource source(reads);
    return evaluate_ordering(source, k, ord, canonical_mode);
}

}  // namespace kcount
