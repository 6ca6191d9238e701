#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "kcount/errors.hpp"
#include "kcount/minimizer.hpp"
#include "kcount/ordering.hpp"
#include "kcount/seqio.hpp"
#include "test_util.hpp"

using namespace kcount;

namespace {

std::uint32_t rank_of(const MinimizerOrdering& ord, const std::string& s) {
    return ord.rank(Mmer::from_string(s).code);
}

std::vector<std::string> all_mmers(unsigned m) {
    std::vector<std::string> out{""};
    for (unsigned i = 0; i < m; ++i) {
        std::vector<std::string> next;
        for (const auto& s : out)
            for (char c : std::string("ACGT")) next.push_back(s + c);
        out = std::move(next);
    }
    return out;
}

bool is_permutation(const MinimizerOrdering& ord) {
    std::vector<std::uint32_t> r = ord.ranks();
    std::sort(r.begin(), r.end());
    for (std::uint32_t i = 0; i < r.size(); ++i)
        if (r[i] != i) return false;
    return true;
}

// Sorts all m-mers under a key function and checks that the table agrees.
template <class Key>
void expect_sorted_by(const MinimizerOrdering& ord, unsigned m, Key key) {
    auto mmers = all_mmers(m);
    std::stable_sort(mmers.begin(), mmers.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    for (std::uint32_t r = 0; r < mmers.size(); ++r) EXPECT_EQ(rank_of(ord, mmers[r]), r) << mmers[r];
}

std::string remap(const std::string& s, const std::string& alphabet) {
    std::string out;
    for (char c : s) out += static_cast<char>('a' + alphabet.find(c));
    return out;
}

}  // namespace

TEST(Ordering, CgatSingleBases) {
    const auto ord = build_cgat(1);
    EXPECT_EQ(rank_of(ord, "C"), 0u);
    EXPECT_EQ(rank_of(ord, "G"), 1u);
    EXPECT_EQ(rank_of(ord, "A"), 2u);
    EXPECT_EQ(rank_of(ord, "T"), 3u);
    EXPECT_EQ(rank_of(build_cgat(2), "CC"), 0u);
}

TEST(Ordering, CgatFullTableAgainstSortOracle) {
    expect_sorted_by(build_cgat(3), 3, [](const std::string& s) { return remap(s, "CGAT"); });
}

TEST(Ordering, RobertsFixtures) {
    EXPECT_EQ(rank_of(build_roberts(1), "C"), 0u);
    EXPECT_EQ(rank_of(build_roberts(2), "CG"), 0u);
    EXPECT_EQ(rank_of(build_roberts(6), "CGCGCG"), 0u);
}

TEST(Ordering, RobertsAgainstTransformOracle) {
    auto transform = [](const std::string& s) {
        std::string t = s;
        for (std::size_t i = 1; i < t.size(); i += 2) t[i] = test::rc_string(std::string(1, t[i]))[0];
        return remap(t, "CATG");
    };
    for (unsigned m = 1; m <= 4; ++m) expect_sorted_by(build_roberts(m), m, transform);
}

TEST(Ordering, Kmc2Fixtures) {
    const auto ord = build_kmc2_style(3);
    EXPECT_EQ(rank_of(ord, "AAC"), 0u);
    EXPECT_EQ(rank_of(ord, "AAA"), 62u);
    EXPECT_EQ(rank_of(ord, "ACA"), 63u);
}

TEST(Ordering, Kmc2DemotedSetSize) {
    const auto ord = build_kmc2_style(7);
    const std::uint32_t demoted_from = static_cast<std::uint32_t>(ord.size() - 2 * 256);
    std::size_t demoted = 0;
    for (const auto& s : all_mmers(7)) {
        const bool bad = s.rfind("AAA", 0) == 0 || s.rfind("ACA", 0) == 0;
        EXPECT_EQ(rank_of(ord, s) >= demoted_from, bad) << s;
        demoted += bad;
    }
    EXPECT_EQ(demoted, 2u * 256u);
}

TEST(Ordering, Kmc2AgainstSortOracle) {
    expect_sorted_by(build_kmc2_style(4), 4, [](const std::string& s) {
        const bool bad = s.rfind("AAA", 0) == 0 || s.rfind("ACA", 0) == 0;
        return std::make_pair(bad, s);
    });
}

TEST(Ordering, RandomIsDeterministicPerSeed) {
    EXPECT_EQ(build_random(5, 42).ranks(), build_random(5, 42).ranks());
    EXPECT_NE(build_random(5, 42).ranks(), build_random(5, 43).ranks());
    EXPECT_NE(build_random(2, 1).ranks(), build_random(2, 2).ranks());
}

TEST(Ordering, EveryStrategyIsAPermutation) {
    test::TempDir dir;
    FrequencyTable freq{5, std::vector<std::uint64_t>(1024)};
    std::mt19937_64 rng(1);
    for (auto& c : freq.counts) c = rng() % 7;
    for (unsigned m = 1; m <= 7; ++m) {
        EXPECT_TRUE(is_permutation(build_lexicographic(m)));
        EXPECT_TRUE(is_permutation(build_cgat(m)));
        EXPECT_TRUE(is_permutation(build_roberts(m)));
        EXPECT_TRUE(is_permutation(build_kmc2_style(m)));
        EXPECT_TRUE(is_permutation(build_random(m, 42)));
    }
    for (double p : {0.0, 0.3, 0.5, 0.8, 1.0}) EXPECT_TRUE(is_permutation(build_dfp(freq, p)));
}

TEST(Ordering, CodeAtRankInvertsRank) {
    const auto ord = build_random(6, 9);
    for (std::uint32_t code = 0; code < ord.size(); ++code) EXPECT_EQ(ord.code_at_rank(ord.rank(code)), code);
}

TEST(Ordering, RejectsNonPermutation) {
    EXPECT_THROW(MinimizerOrdering(OrderingSpec{}, 1, {0, 1, 1, 3}), Error);
}

TEST(Ordering, SpecTagRoundTrip) {
    for (const char* tag : {"kmc2", "cgat", "roberts", "lexicographic", "random:42", "dfp:0.5", "dfp:1"}) {
        const auto spec = OrderingSpec::parse(tag);
        EXPECT_EQ(OrderingSpec::parse(spec.tag()), spec) << tag;
    }
    EXPECT_EQ(OrderingSpec::parse("random:42").seed, 42u);
    EXPECT_DOUBLE_EQ(OrderingSpec::parse("dfp:0.8").pivot, 0.8);
    EXPECT_THROW(OrderingSpec::parse("bogus"), UsageError);
    EXPECT_THROW(OrderingSpec::parse("dfp:2"), UsageError);
}

TEST(Frequencies, SingleRead) {
    const auto f = sample_frequencies(std::vector<std::string>{"ACGT"}, 2, 3);
    EXPECT_EQ(f.counts[Mmer::from_string("AC").code], 1u);
    EXPECT_EQ(f.counts[Mmer::from_string("CG").code], 1u);
    EXPECT_EQ(f.counts[Mmer::from_string("GT").code], 1u);
    EXPECT_EQ(f.total(), 3u);
}

TEST(Frequencies, BudgetCapsTotal) {
    const auto reads = test::random_reads(3, 20, 100, 100, 0.0);
    EXPECT_EQ(sample_frequencies(reads, 4, 250).total(), 250u);
}

TEST(Frequencies, UnboundedBudgetMatchesExhaustiveCount) {
    std::mt19937_64 rng(11);
    const std::string s = test::random_bases(rng, 1000, 0.02);
    const auto f = sample_frequencies(std::vector<std::string>{s}, 5, ~std::uint64_t{0});
    std::vector<std::uint64_t> want(1024, 0);
    for (std::size_t i = 0; i + 5 <= s.size(); ++i) {
        const std::string w = s.substr(i, 5);
        if (test::valid_window(w)) ++want[Mmer::from_string(w).code];
    }
    EXPECT_EQ(f.counts, want);
}

TEST(Dfp, PivotZeroIsFrequencyAscending) {
    FrequencyTable f{1, {5, 1, 2, 0}};
    const auto ord = build_dfp(f, 0.0);
    EXPECT_EQ(rank_of(ord, "T"), 0u);
    EXPECT_EQ(rank_of(ord, "C"), 1u);
    EXPECT_EQ(rank_of(ord, "G"), 2u);
    EXPECT_EQ(rank_of(ord, "A"), 3u);
}

TEST(Dfp, PivotOneFavoursMostFrequent) {
    FrequencyTable f{1, {5, 1, 2, 0}};
    const auto ord = build_dfp(f, 1.0);
    EXPECT_EQ(rank_of(ord, "A"), 0u);
    EXPECT_EQ(rank_of(ord, "G"), 1u);
    EXPECT_EQ(rank_of(ord, "C"), 2u);
    EXPECT_EQ(rank_of(ord, "T"), 3u);
}

TEST(Dfp, PivotHalf) {
    FrequencyTable f{1, {5, 1, 2, 0}};
    const auto ord = build_dfp(f, 0.5);
    EXPECT_EQ(rank_of(ord, "G"), 0u);
    EXPECT_EQ(rank_of(ord, "C"), 1u);
    EXPECT_EQ(rank_of(ord, "A"), 2u);
    EXPECT_EQ(rank_of(ord, "T"), 3u);
}

TEST(Dfp, BuildOrderingUsesSampler) {
    OrderingSpec spec = OrderingSpec::parse("dfp:0.5");
    unsigned calls = 0;
    const auto ord = build_ordering(spec, 1, [&](unsigned m, std::uint64_t) {
        ++calls;
        return FrequencyTable{m, {5, 1, 2, 0}};
    });
    EXPECT_EQ(calls, 1u);
    EXPECT_EQ(rank_of(ord, "G"), 0u);
    EXPECT_THROW(build_ordering(spec, 1), UsageError);
}

TEST(Evaluate, WorkedExample) {
    const auto m = evaluate_ordering(std::vector<std::string>{"CAAGAACAGTG"}, 4, build_lexicographic(3), false);
    EXPECT_EQ(m.total_supermers, 5u);
    EXPECT_EQ(m.max_distinct_kmers_per_minimizer, 2u);
}

TEST(Evaluate, SingleWindow) {
    const auto m = evaluate_ordering(std::vector<std::string>{"ACGTTGCA"}, 8, build_kmc2_style(4), true);
    EXPECT_EQ(m.total_supermers, 1u);
    EXPECT_EQ(m.max_distinct_kmers_per_minimizer, 1u);
}

TEST(Evaluate, AgainstOracle) {
    const auto reads = test::random_reads(12, 50, 50, 300, 0.02);
    const unsigned k = 21;
    const auto ord = build_random(5, 42);
    std::uint64_t supermers = 0;
    std::map<std::uint32_t, std::set<std::string>> per_min;
    for (const auto& r : reads) {
        for (const auto& frag : split_on_invalid(r, k)) {
            const std::string s = frag.bases.to_string();
            std::uint32_t prev = ~0u;
            for (std::size_t i = 0; i + k <= s.size(); ++i) {
                const auto hit = minimizer(Kmer::from_string(s.substr(i, k)), ord, true);
                if (hit.rank != prev) ++supermers;
                prev = hit.rank;
                const std::string w = s.substr(i, k);
                per_min[hit.mmer.code].insert(std::min(w, test::rc_string(w)));
            }
        }
    }
    std::uint64_t max_distinct = 0;
    for (const auto& [code, set] : per_min) max_distinct = std::max<std::uint64_t>(max_distinct, set.size());
    const auto m = evaluate_ordering(reads, k, ord, true);
    EXPECT_EQ(m.total_supermers, supermers);
    EXPECT_EQ(m.max_distinct_kmers_per_minimizer, max_distinct);
}
