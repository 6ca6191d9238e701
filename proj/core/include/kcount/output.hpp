#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kcount/kmer.hpp"

namespace kcount {

struct ResultEntry {
    Kmer kmer;
    std::uint32_t count = 0;

    friend bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

/// Result file grammar, one entry after another with no header:
///   count < 255  -> one byte holding the count
///   count >= 255 -> 0xFF, then the count as 4 bytes big-endian
/// followed by the packed k-mer (packed_bytes(k) bytes, pad bits zero).
void encode_entry(std::span<const std::uint8_t> packed_kmer, std::uint32_t count, std::vector<std::uint8_t>& out);
void encode_entry(const ResultEntry& entry, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode_entry(const ResultEntry& entry);

inline std::size_t encoded_size(std::uint32_t count, unsigned k) noexcept {
    return (count < 255 ? 1 : 5) + packed_bytes(k);
}

/// Decodes the entry at `offset` and advances it. Throws IoError naming the
/// byte offset when the stream ends mid-entry.
ResultEntry decode_entry(std::span<const std::uint8_t> bytes, std::size_t& offset, unsigned k);

/// Whole result file in memory.
std::vector<ResultEntry> read_results(const std::filesystem::path& path, unsigned k);

/// Writes the entries with count >= min_count.
void write_results(std::span<const ResultEntry> entries, std::uint32_t min_count, std::ostream& sink);

/// "KMER,COUNT" lines for entries with count >= min_count, sorted by k-mer.
void emit_histogram_csv(std::span<const ResultEntry> entries, std::uint32_t min_count, std::ostream& sink);

}  // namespace kcount
