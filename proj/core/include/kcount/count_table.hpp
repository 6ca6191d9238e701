#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kcount/kmer.hpp"

namespace kcount {

inline constexpr std::uint32_t kMaxCount = 0xFFFFFFFFu;

struct HashPair {
    std::uint32_t h1 = 0;
    std::uint32_t h2 = 0;
};

/// Byte-wise double hash over a packed k-mer image:
/// h1 = 31*h1 + b, h2 = 37*h2 + (b ^ 0xFF), all modulo 2^32.
HashPair hash_pair(std::span<const std::uint8_t> key) noexcept;

/// h1 + trial*h2 (mod 2^32).
std::uint32_t probe_hash(std::span<const std::uint8_t> key, std::uint32_t trial) noexcept;
std::uint32_t probe_hash(const Kmer& x, std::uint32_t trial);

/// Hasher worker for k-mer `x` among `workers`. Uses its own word mixer so
/// the split is independent of the probe sequence.
std::uint32_t partition_kmer(const Kmer& x, unsigned workers) noexcept;

/// Smallest odd prime >= max(n, 3).
std::uint64_t next_prime(std::uint64_t n);
/// Largest odd prime <= n, or 0 when n < 3.
std::uint64_t prev_prime(std::uint64_t n);

/// Destination for k-mers a table could not place within theta trials.
/// File-backed when given a path (records of length k, same container as the
/// bin files), in-memory otherwise.
class SpillChannel {
public:
    SpillChannel(unsigned k, std::filesystem::path path = {});
    ~SpillChannel();

    SpillChannel(const SpillChannel&) = delete;
    SpillChannel& operator=(const SpillChannel&) = delete;
    SpillChannel(SpillChannel&&) noexcept;
    SpillChannel& operator=(SpillChannel&&) noexcept;

    void spill(std::span<const std::uint8_t> key);
    /// Flushes and closes the file; spilled keys stay readable via the path.
    void close();

    std::uint64_t count() const noexcept { return count_; }
    bool file_backed() const noexcept { return !path_.empty(); }
    const std::filesystem::path& path() const noexcept { return path_; }
    /// In-memory keys, back to back, packed_bytes(k) each.
    const std::vector<std::uint8_t>& memory() const noexcept { return memory_; }

private:
    unsigned k_;
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::vector<std::uint8_t> buffer_;
    std::vector<std::uint8_t> memory_;
    std::uint64_t count_ = 0;

    void flush();
};

enum class InsertOutcome { counted, inserted, spilled };

struct ProbeStats {
    std::uint64_t insertions = 0;
    /// Insertions resolved in the window of trial 0.
    std::uint64_t first_trial = 0;
    std::uint64_t spilled = 0;
    std::uint64_t slot_inspections = 0;
    unsigned max_trials = 0;

    double first_trial_fraction() const noexcept {
        return insertions == 0 ? 1.0 : static_cast<double>(first_trial) / static_cast<double>(insertions);
    }
    ProbeStats& operator+=(const ProbeStats& o) noexcept;
};

/// Open-addressing (k-mer, 32-bit counter) table with bounded double-hash
/// probing. Each trial inspects `window` consecutive slots starting at the
/// probed index. A counter of 0 marks an empty slot. After `theta` failed
/// trials the k-mer goes to the spill channel.
class CountTable {
public:
    CountTable(unsigned k, std::uint64_t capacity, unsigned theta = 64, unsigned window = 1,
               std::filesystem::path spill_path = {});

    InsertOutcome insert(std::span<const std::uint8_t> key) { return add(key, 1); }
    InsertOutcome insert(const Kmer& x);
    /// Adds `n` occurrences; counters saturate at kMaxCount. A spilled key
    /// is written to the spill channel `n` times.
    InsertOutcome add(std::span<const std::uint8_t> key, std::uint32_t n);

    std::optional<std::uint32_t> find(std::span<const std::uint8_t> key) const;
    std::optional<std::uint32_t> find(const Kmer& x) const;

    unsigned k() const noexcept { return k_; }
    std::uint64_t capacity() const noexcept { return capacity_; }
    std::uint64_t size() const noexcept { return occupied_; }
    std::size_t key_bytes() const noexcept { return key_bytes_; }
    static std::size_t slot_bytes(unsigned k) noexcept { return packed_bytes(k) + sizeof(std::uint32_t); }
    std::uint64_t memory_bytes() const noexcept { return capacity_ * slot_bytes(k_); }

    const ProbeStats& probe_stats() const noexcept { return stats_; }
    SpillChannel& spill() noexcept { return spill_; }
    const SpillChannel& spill() const noexcept { return spill_; }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::uint64_t s = 0; s < capacity_; ++s)
            if (counts_[s] != 0)
                fn(std::span<const std::uint8_t>(keys_.data() + s * key_bytes_, key_bytes_), counts_[s]);
    }

    std::vector<std::pair<Kmer, std::uint32_t>> entries() const;

private:
    unsigned k_;
    std::size_t key_bytes_;
    std::uint64_t capacity_;
    unsigned theta_;
    unsigned window_;
    std::vector<std::uint8_t> keys_;
    std::vector<std::uint32_t> counts_;
    std::uint64_t occupied_ = 0;
    ProbeStats stats_;
    SpillChannel spill_;
};

/// Table sizing: distinct ≈ ratio * kmers; slots = distinct / load_factor.
struct SizingModel {
    double ratio = 0.2;
    double load_factor = 0.7;
    std::uint64_t memory_bytes = std::uint64_t{1} << 30;
};

struct CapacityEstimate {
    /// ceil(kmers * ratio / load_factor) before rounding and clamping.
    std::uint64_t raw = 0;
    std::uint64_t per_table = 0;
    std::uint64_t total = 0;
    bool clamped = false;
};

/// Splits the estimate across `tables` concurrent tables, rounds each up to a
/// prime and clamps so that tables * per_table * slot_bytes fits the memory
/// cap. Throws UsageError if not even a minimal table fits.
CapacityEstimate estimate_capacity(std::uint64_t kmers_in_bin, const SizingModel& model, std::size_t slot_bytes,
                                   unsigned tables = 1);

/// ratio <- max(ratio, 1.1 * distinct/total), capped at 1. Empty bins leave it unchanged.
SizingModel update_ratio(SizingModel model, std::uint64_t distinct, std::uint64_t total);

struct SpillOptions {
    unsigned k = 0;
    /// Capacity of the table that spilled; the first recount uses twice this.
    std::uint64_t base_capacity = 1;
    unsigned theta = 64;
    unsigned window = 1;
    /// Growth stops when a table would exceed this; the rest is sorted.
    std::uint64_t max_table_bytes = std::uint64_t{1} << 30;
};

struct SpillSummary {
    std::uint64_t spilled = 0;
    unsigned rounds = 0;
    bool sorted_fallback = false;
    std::uint64_t peak_table_bytes = 0;
};

using CountSink = std::function<void(std::span<const std::uint8_t> key, std::uint32_t count)>;

/// Counts the keys held by a finished spill channel. Each round builds a table
/// of doubled capacity; whatever overflows again goes into the next round.
/// Once doubling would break max_table_bytes the remaining keys are sorted and
/// run-length counted. Spill files are deleted as they are consumed.
SpillSummary process_spill(SpillChannel& spill, const SpillOptions& options, const CountSink& sink);

std::vector<std::pair<Kmer, std::uint32_t>> process_spill(SpillChannel& spill, const SpillOptions& options);

}  // namespace kcount
