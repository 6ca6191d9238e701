#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcount {

/// 2-bit nucleotide codes: A=0, C=1, G=2, T=3.
namespace base {
inline constexpr std::uint8_t A = 0;
inline constexpr std::uint8_t C = 1;
inline constexpr std::uint8_t G = 2;
inline constexpr std::uint8_t T = 3;
inline constexpr std::uint8_t invalid = 0xFF;

constexpr std::uint8_t complement(std::uint8_t code) noexcept { return code ^ 3u; }
}  // namespace base

namespace detail {
struct CodeTable {
    std::uint8_t code[256];
    constexpr CodeTable() : code{} {
        for (auto& c : code) c = base::invalid;
        code['A'] = code['a'] = base::A;
        code['C'] = code['c'] = base::C;
        code['G'] = code['g'] = base::G;
        code['T'] = code['t'] = base::T;
    }
};
inline constexpr CodeTable kCodeTable{};
}  // namespace detail

/// Code for an ASCII base letter (either case), or base::invalid.
constexpr std::uint8_t base_code(char c) noexcept {
    return detail::kCodeTable.code[static_cast<unsigned char>(c)];
}

constexpr char base_letter(std::uint8_t code) noexcept { return "ACGT"[code & 3u]; }

/// Number of bytes needed to pack `length` bases four to a byte.
constexpr std::size_t packed_bytes(std::size_t length) noexcept { return (length + 3) / 4; }

/// Nucleotide string packed four bases per byte, first base in the two most
/// significant bits. Bits past `size()` are always zero.
class PackedSeq {
public:
    PackedSeq() = default;

    static PackedSeq from_codes(std::span<const std::uint8_t> codes);
    static PackedSeq from_bytes(std::span<const std::uint8_t> bytes, std::size_t length);

    std::size_t size() const noexcept { return length_; }
    bool empty() const noexcept { return length_ == 0; }

    std::uint8_t at(std::size_t i) const noexcept {
        return static_cast<std::uint8_t>((bytes_[i >> 2] >> (6 - 2 * (i & 3))) & 3u);
    }

    void push_back(std::uint8_t code);

    std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t> codes() const;
    std::string to_string() const;

    PackedSeq substr(std::size_t pos, std::size_t len) const;

    friend bool operator==(const PackedSeq&, const PackedSeq&) = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t length_ = 0;
};

/// Packs an ASCII nucleotide string. Lowercase letters are accepted; any other
/// character raises IoError naming its position.
PackedSeq encode_sequence(std::string_view text);

std::string decode_sequence(const PackedSeq& seq);

/// Appends the packed image of `codes` to `out`.
void pack_codes(std::span<const std::uint8_t> codes, std::vector<std::uint8_t>& out);

}  // namespace kcount
