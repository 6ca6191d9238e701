#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kcount/config.hpp"
#include "kcount/minimizer.hpp"
#include "kcount/ordering.hpp"
#include "kcount/packed_seq.hpp"

namespace kcount {

/// Longest super-mer one record can hold (16-bit length field).
inline constexpr std::size_t kMaxRecordLength = 65535;

/// Bin for a minimizer m-mer: multiply-shift mix of its code word, modulo `bins`.
std::uint32_t assign_bin(std::uint32_t mmer_code, unsigned bins) noexcept;
inline std::uint32_t assign_bin(const Mmer& mmer, unsigned bins) noexcept { return assign_bin(mmer.code, bins); }

/// On-disk super-mer: 16-bit little-endian base count, then the packed bases.
struct SuperMerRecord {
    std::uint16_t length = 0;
    std::vector<std::uint8_t> payload;

    PackedSeq sequence() const { return PackedSeq::from_bytes(payload, length); }
};

/// Appends one record image. `codes` must not exceed kMaxRecordLength bases.
void append_record(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> codes);
void append_record(std::vector<std::uint8_t>& out, const PackedSeq& seq);

/// Buffered append-only bin (or spill) file.
class BinWriter {
public:
    explicit BinWriter(const std::filesystem::path& path, bool append = false);
    ~BinWriter();

    BinWriter(const BinWriter&) = delete;
    BinWriter& operator=(const BinWriter&) = delete;

    void write(const PackedSeq& seq);
    void write_raw(std::span<const std::uint8_t> bytes);
    void close();

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
};

void write_supermer(BinWriter& writer, const SuperMer& supermer);

/// Sequential record reader for bin and spill files.
class BinReader {
public:
    explicit BinReader(const std::filesystem::path& path);
    ~BinReader();

    BinReader(const BinReader&) = delete;
    BinReader& operator=(const BinReader&) = delete;

    bool next(SuperMerRecord& record);
    /// Reads whole records until `out` holds at least `target` bytes or the
    /// file ends. Returns false when nothing was read.
    bool next_chunk(std::vector<std::uint8_t>& out, std::size_t target);

private:
    bool read_exact(std::uint8_t* dst, std::size_t n);

    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::uint64_t offset_ = 0;
};

std::vector<PackedSeq> read_bin(const std::filesystem::path& path);

/// Calls fn(codes) for each record in a chunk produced by BinReader::next_chunk.
template <class Fn>
void for_each_record(std::span<const std::uint8_t> chunk, std::vector<std::uint8_t>& scratch, Fn&& fn) {
    std::size_t pos = 0;
    while (pos + 2 <= chunk.size()) {
        const std::size_t length = std::size_t{chunk[pos]} | (std::size_t{chunk[pos + 1]} << 8);
        pos += 2;
        scratch.resize(length);
        for (std::size_t i = 0; i < length; ++i)
            scratch[i] = static_cast<std::uint8_t>((chunk[pos + (i >> 2)] >> (6 - 2 * (i & 3))) & 3u);
        pos += packed_bytes(length);
        fn(std::span<const std::uint8_t>(scratch));
    }
}

struct BinStat {
    std::uint64_t supermers = 0;
    std::uint64_t kmers = 0;

    friend bool operator==(const BinStat&, const BinStat&) = default;
};

/// Contents of the stats file written next to the bins.
struct DistributionStats {
    unsigned k = 0;
    unsigned m = 0;
    OrderingSpec ordering{};
    bool canonical = true;
    std::uint64_t reads = 0;
    std::uint64_t bases = 0;
    std::vector<BinStat> bins;

    std::uint64_t total_kmers() const;
    std::uint64_t total_supermers() const;

    friend bool operator==(const DistributionStats&, const DistributionStats&) = default;
};

inline constexpr const char* kStatsMagic = "kcount-binstats 1";

std::filesystem::path stats_path(const std::filesystem::path& work_dir);
std::filesystem::path bin_path(const std::filesystem::path& work_dir, std::uint32_t bin);

void write_stats(const std::filesystem::path& path, const DistributionStats& stats);
/// Throws IoError on a missing file, wrong magic line or malformed field.
DistributionStats read_stats(const std::filesystem::path& path);

/// Removes bin files and the stats file of a work directory.
void remove_temporary_files(const std::filesystem::path& work_dir, unsigned bins);

/// Phase one: reads every input, splits reads into super-mers and writes them
/// to `config.bins` bin files plus the stats file in `config.work_dir`.
DistributionStats run_phase_one(const PipelineConfig& config);

}  // namespace kcount
