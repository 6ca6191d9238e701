#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcount/packed_seq.hpp"

namespace kcount {

inline constexpr unsigned kMinK = 8;
inline constexpr unsigned kMaxK = 479;

/// Fixed-length nucleotide string of 1..kMaxK bases stored in 64-bit words,
/// most significant base pair first. Ordering over equal-length k-mers is the
/// lexicographic order of their strings under A<C<G<T.
class Kmer {
public:
    static constexpr std::size_t kWords = (kMaxK + 31) / 32;

    Kmer() = default;
    /// All-A k-mer of length k.
    explicit Kmer(unsigned k);

    static Kmer from_string(std::string_view text);
    static Kmer from_codes(std::span<const std::uint8_t> codes);
    /// Reads the first packed_bytes(k) bytes of a packed image.
    static Kmer from_bytes(std::span<const std::uint8_t> bytes, unsigned k);
    static Kmer from_packed(const PackedSeq& seq, std::size_t pos, unsigned k);

    unsigned k() const noexcept { return k_; }
    std::size_t word_count() const noexcept { return (k_ + 31) / 32; }
    std::size_t byte_count() const noexcept { return packed_bytes(k_); }

    std::uint8_t at(unsigned i) const noexcept {
        return static_cast<std::uint8_t>((words_[i >> 5] >> (62 - 2 * (i & 31))) & 3u);
    }
    void set(unsigned i, std::uint8_t code) noexcept;

    /// Drops the first base and appends `code` at the end.
    void roll_forward(std::uint8_t code) noexcept;
    /// Drops the last base and prepends `code` at the front.
    void roll_reverse(std::uint8_t code) noexcept;

    Kmer reverse_complement() const;
    Kmer canonical() const;

    /// Packed byte image (pad bits zero); `out` must hold byte_count() bytes.
    void write_bytes(std::span<std::uint8_t> out) const noexcept;
    std::vector<std::uint8_t> bytes() const;

    std::string to_string() const;
    std::span<const std::uint64_t> words() const noexcept { return {words_.data(), word_count()}; }

    friend bool operator==(const Kmer& a, const Kmer& b) noexcept;
    friend std::strong_ordering operator<=>(const Kmer& a, const Kmer& b) noexcept;

private:
    void clear_padding() noexcept;

    std::array<std::uint64_t, kWords> words_{};
    std::uint16_t k_ = 0;
};

Kmer reverse_complement(const Kmer& x);
Kmer canonicalize(const Kmer& x);

struct KmerHash {
    std::size_t operator()(const Kmer& x) const noexcept;
};

}  // namespace kcount
