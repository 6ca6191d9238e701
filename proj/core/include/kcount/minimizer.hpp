#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kcount/kmer.hpp"
#include "kcount/ordering.hpp"
#include "kcount/packed_seq.hpp"

namespace kcount {

/// m-mer of at most 16 bases held as a 2-bit code word.
struct Mmer {
    std::uint32_t code = 0;
    std::uint8_t m = 0;

    std::string to_string() const;
    static Mmer from_string(const std::string& text);

    friend bool operator==(const Mmer&, const Mmer&) = default;
};

struct MinimizerHit {
    Mmer mmer;
    std::uint32_t rank = 0;
    /// Forward-strand start of the m-mer.
    std::size_t position = 0;
    /// True when the minimizer is the reverse complement of the forward m-mer at `position`.
    bool reverse = false;
};

/// Minimum-rank m-mer of `x`. With canonical_mode the reverse complements of
/// all m-mers compete too, which makes the result strand-symmetric. Ties go to
/// the leftmost forward position, forward strand first.
MinimizerHit minimizer(const Kmer& x, const MinimizerOrdering& ord, bool canonical_mode);

struct SuperMer {
    PackedSeq seq;
    Mmer minimizer;
    std::uint32_t minimizer_rank = 0;
};

/// Position of one super-mer inside a code array.
struct SuperMerSpan {
    std::size_t start = 0;
    std::size_t length = 0;
    std::uint32_t minimizer = 0;  // m-mer code
    std::uint32_t rank = 0;
};

/// Streaming super-mer decomposition over 2-bit codes. Keeps its scratch
/// buffers between calls, so one instance per worker.
class SuperMerScanner {
public:
    SuperMerScanner(unsigned k, const MinimizerOrdering& ord, bool canonical_mode);

    unsigned k() const noexcept { return k_; }

    template <class Fn>
    void scan(std::span<const std::uint8_t> codes, Fn&& on_supermer) {
        if (codes.size() < k_) return;
        compute_ranks(codes);
        const std::size_t window = k_ - m_ + 1;
        const std::size_t kmers = codes.size() - k_ + 1;

        std::size_t min_pos = scan_min(0, window);
        std::size_t start = 0;
        std::uint32_t current = ranks_[min_pos];
        for (std::size_t j = 1; j < kmers; ++j) {
            const std::size_t incoming = j + window - 1;
            if (min_pos < j)
                min_pos = scan_min(j, window);
            else if (ranks_[incoming] < ranks_[min_pos])
                min_pos = incoming;
            if (ranks_[min_pos] != current) {
                on_supermer(SuperMerSpan{start, j - 1 - start + k_, ord_->code_at_rank(current), current});
                start = j;
                current = ranks_[min_pos];
            }
        }
        on_supermer(SuperMerSpan{start, kmers - 1 - start + k_, ord_->code_at_rank(current), current});
    }

private:
    void compute_ranks(std::span<const std::uint8_t> codes);
    std::size_t scan_min(std::size_t from, std::size_t count) const noexcept {
        std::size_t best = from;
        for (std::size_t i = from + 1; i < from + count; ++i)
            if (ranks_[i] < ranks_[best]) best = i;
        return best;
    }

    unsigned k_;
    unsigned m_;
    const MinimizerOrdering* ord_;
    bool canonical_;
    std::vector<std::uint32_t> ranks_;
};

/// Splits a fragment into maximal runs of consecutive k-mers that share one
/// minimizer. Consecutive super-mers overlap by k-1 bases. Fragments shorter
/// than k yield nothing.
std::vector<SuperMer> decompose_supermers(const PackedSeq& fragment, unsigned k,
                                          const MinimizerOrdering& ord, bool canonical_mode);

}  // namespace kcount
