#include "kcount/count_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "kcount/distribution.hpp"
#include "kcount/errors.hpp"

namespace fs = std::filesystem;

namespace kcount {

HashPair hash_pair(std::span<const std::uint8_t> key) noexcept {
    std::uint32_t h1 = 0;
    std::uint32_t h2 = 0;
    for (std::uint8_t b : key) {
        h1 = 31u * h1 + b;
        h2 = 37u * h2 + (b ^ 0xFFu);
    }
    return {h1, h2};
}

std::uint32_t probe_hash(std::span<const std::uint8_t> key, std::uint32_t trial) noexcept {
    const auto [h1, h2] = hash_pair(key);
    return h1 + trial * h2;
}

std::uint32_t probe_hash(const Kmer& x, std::uint32_t trial) {
    std::uint8_t buf[packed_bytes(kMaxK)];
    x.write_bytes(buf);
    return probe_hash(std::span<const std::uint8_t>(buf, x.byte_count()), trial);
}

std::uint32_t partition_kmer(const Kmer& x, unsigned workers) noexcept {
    if (workers <= 1) return 0;
    std::uint64_t h = 0xCBF29CE484222325ull ^ x.k();
    for (std::uint64_t w : x.words()) {
        h ^= w;
        h *= 0x100000001B3ull;
        h ^= h >> 29;
    }
    // splitmix64 finalizer
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBull;
    h ^= h >> 31;
    return static_cast<std::uint32_t>(h % workers);
}

namespace {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::uint64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

}  // namespace

std::uint64_t next_prime(std::uint64_t n) {
    std::uint64_t p = std::max<std::uint64_t>(n, 3) | 1u;
    while (!is_prime(p)) p += 2;
    return p;
}

std::uint64_t prev_prime(std::uint64_t n) {
    if (n < 3) return 0;
    std::uint64_t p = (n % 2 == 0) ? n - 1 : n;
    while (p >= 3 && !is_prime(p)) p -= 2;
    return p >= 3 ? p : 0;
}

SpillChannel::SpillChannel(unsigned k, fs::path path) : k_(k), path_(std::move(path)) {}

SpillChannel::~SpillChannel() {
    if (file_ != nullptr) std::fclose(file_);
}

SpillChannel::SpillChannel(SpillChannel&& o) noexcept
    : k_(o.k_), path_(std::move(o.path_)), file_(std::exchange(o.file_, nullptr)), buffer_(std::move(o.buffer_)),
      memory_(std::move(o.memory_)), count_(std::exchange(o.count_, 0)) {}

SpillChannel& SpillChannel::operator=(SpillChannel&& o) noexcept {
    if (this != &o) {
        if (file_ != nullptr) std::fclose(file_);
        k_ = o.k_;
        path_ = std::move(o.path_);
        file_ = std::exchange(o.file_, nullptr);
        buffer_ = std::move(o.buffer_);
        memory_ = std::move(o.memory_);
        count_ = std::exchange(o.count_, 0);
    }
    return *this;
}

void SpillChannel::spill(std::span<const std::uint8_t> key) {
    ++count_;
    if (path_.empty()) {
        memory_.insert(memory_.end(), key.begin(), key.end());
        return;
    }
    buffer_.push_back(static_cast<std::uint8_t>(k_ & 0xFF));
    buffer_.push_back(static_cast<std::uint8_t>(k_ >> 8));
    buffer_.insert(buffer_.end(), key.begin(), key.end());
    if (buffer_.size() >= (1u << 16)) flush();
}

void SpillChannel::flush() {
    if (buffer_.empty()) return;
    if (file_ == nullptr) {
        file_ = std::fopen(path_.c_str(), "wb");
        if (file_ == nullptr) throw IoError("cannot create spill file '" + path_.string() + "'");
    }
    if (std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size())
        throw IoError("write failed on spill file '" + path_.string() + "'");
    buffer_.clear();
}

void SpillChannel::close() {
    if (path_.empty()) return;
    flush();
    if (file_ != nullptr) {
        const int rc = std::fclose(file_);
        file_ = nullptr;
        if (rc != 0) throw IoError("closing spill file '" + path_.string() + "' failed");
    }
}

ProbeStats& ProbeStats::operator+=(const ProbeStats& o) noexcept {
    insertions += o.insertions;
    first_trial += o.first_trial;
    spilled += o.spilled;
    slot_inspections += o.slot_inspections;
    max_trials = std::max(max_trials, o.max_trials);
    return *this;
}

CountTable::CountTable(unsigned k, std::uint64_t capacity, unsigned theta, unsigned window, fs::path spill_path)
    : k_(k),
      key_bytes_(packed_bytes(k)),
      capacity_(capacity),
      theta_(theta),
      window_(window),
      spill_(k, std::move(spill_path)) {
    if (k == 0 || k > kMaxK) throw UsageError("k outside supported range");
    if (capacity == 0) throw UsageError("table capacity must be at least 1");
    if (theta == 0) throw UsageError("theta must be at least 1");
    if (window == 0) throw UsageError("probe window must be at least 1");
    keys_.assign(capacity * key_bytes_, 0);
    counts_.assign(capacity, 0);
}

InsertOutcome CountTable::insert(const Kmer& x) {
    if (x.k() != k_) throw UsageError("k-mer length does not match table");
    std::uint8_t buf[packed_bytes(kMaxK)];
    x.write_bytes(buf);
    return add(std::span<const std::uint8_t>(buf, key_bytes_), 1);
}

InsertOutcome CountTable::add(std::span<const std::uint8_t> key, std::uint32_t n) {
    const auto [h1, h2] = hash_pair(key);
    const std::uint32_t step = h2 | 1u;
    ++stats_.insertions;
    for (unsigned trial = 0; trial < theta_; ++trial) {
        std::uint64_t slot = static_cast<std::uint32_t>(h1 + trial * step) % capacity_;
        for (unsigned w = 0; w < window_; ++w) {
            ++stats_.slot_inspections;
            std::uint32_t& count = counts_[slot];
            std::uint8_t* stored = keys_.data() + slot * key_bytes_;
            InsertOutcome outcome;
            if (count == 0) {
                std::memcpy(stored, key.data(), key_bytes_);
                count = n;
                ++occupied_;
                outcome = InsertOutcome::inserted;
            } else if (std::memcmp(stored, key.data(), key_bytes_) == 0) {
                count = (kMaxCount - count < n) ? kMaxCount : count + n;
                outcome = InsertOutcome::counted;
            } else {
                if (++slot == capacity_) slot = 0;
                continue;
            }
            if (trial == 0) ++stats_.first_trial;
            stats_.max_trials = std::max(stats_.max_trials, trial + 1);
            return outcome;
        }
    }
    ++stats_.spilled;
    stats_.max_trials = std::max(stats_.max_trials, theta_);
    for (std::uint32_t i = 0; i < n; ++i) spill_.spill(key);
    return InsertOutcome::spilled;
}

std::optional<std::uint32_t> CountTable::find(std::span<const std::uint8_t> key) const {
    const auto [h1, h2] = hash_pair(key);
    const std::uint32_t step = h2 | 1u;
    for (unsigned trial = 0; trial < theta_; ++trial) {
        std::uint64_t slot = static_cast<std::uint32_t>(h1 + trial * step) % capacity_;
        for (unsigned w = 0; w < window_; ++w) {
            if (counts_[slot] == 0) return std::nullopt;
            if (std::memcmp(keys_.data() + slot * key_bytes_, key.data(), key_bytes_) == 0) return counts_[slot];
            if (++slot == capacity_) slot = 0;
        }
    }
    return std::nullopt;
}

std::optional<std::uint32_t> CountTable::find(const Kmer& x) const {
    std::uint8_t buf[packed_bytes(kMaxK)];
    x.write_bytes(buf);
    return find(std::span<const std::uint8_t>(buf, key_bytes_));
}

std::vector<std::pair<Kmer, std::uint32_t>> CountTable::entries() const {
    std::vector<std::pair<Kmer, std::uint32_t>> out;
    out.reserve(occupied_);
    for_each([&](std::span<const std::uint8_t> key, std::uint32_t count) {
        out.emplace_back(Kmer::from_bytes(key, k_), count);
    });
    return out;
}

CapacityEstimate estimate_capacity(std::uint64_t kmers_in_bin, const SizingModel& model, std::size_t slot_bytes,
                                   unsigned tables) {
    if (!(model.ratio > 0.0 && model.ratio <= 1.0)) throw UsageError("distinct ratio must lie in (0, 1]");
    if (!(model.load_factor > 0.0 && model.load_factor <= 1.0)) throw UsageError("load factor must lie in (0, 1]");
    tables = std::max(tables, 1u);

    CapacityEstimate est;
    est.raw = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(kmers_in_bin) * model.ratio / model.load_factor - 1e-9));
    const std::uint64_t share = (est.raw + tables - 1) / tables;
    est.per_table = next_prime(share);

    const std::uint64_t limit = model.memory_bytes / (std::uint64_t{tables} * slot_bytes);
    const std::uint64_t max_per_table = prev_prime(limit);
    if (max_per_table == 0)
        throw UsageError("memory cap of " + std::to_string(model.memory_bytes) +
                         " bytes is smaller than one minimal count table");
    if (est.per_table > max_per_table) {
        est.per_table = max_per_table;
        est.clamped = true;
    }
    est.total = est.per_table * tables;
    return est;
}

SizingModel update_ratio(SizingModel model, std::uint64_t distinct, std::uint64_t total) {
    if (total == 0) return model;
    const double observed = static_cast<double>(distinct) / static_cast<double>(total) * 1.1;
    model.ratio = std::min(1.0, std::max(model.ratio, observed));
    return model;
}

namespace {

fs::path round_path(const fs::path& base, unsigned round) {
    if (base.empty()) return {};
    fs::path p = base;
    p += ".r" + std::to_string(round);
    return p;
}

// Loads every key of a closed channel into one flat buffer.
std::vector<std::uint8_t> drain_keys(SpillChannel& channel, unsigned k) {
    if (!channel.file_backed()) return channel.memory();
    std::vector<std::uint8_t> keys;
    if (channel.count() == 0 || !fs::exists(channel.path())) return keys;
    BinReader reader(channel.path());
    SuperMerRecord record;
    while (reader.next(record)) {
        if (record.length != k) throw IoError("spill file '" + channel.path().string() + "' holds a record of wrong length");
        keys.insert(keys.end(), record.payload.begin(), record.payload.end());
    }
    return keys;
}

void sort_and_count(std::vector<std::uint8_t>& keys, std::size_t width, const CountSink& sink) {
    const std::size_t n = keys.size() / width;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const std::uint8_t* base = keys.data();
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::memcmp(base + a * width, base + b * width, width) < 0;
    });
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && std::memcmp(base + order[i] * width, base + order[j] * width, width) == 0) ++j;
        const std::uint64_t run = j - i;
        sink(std::span<const std::uint8_t>(base + order[i] * width, width),
             run >= kMaxCount ? kMaxCount : static_cast<std::uint32_t>(run));
        i = j;
    }
}

}  // namespace

SpillSummary process_spill(SpillChannel& spill, const SpillOptions& options, const CountSink& sink) {
    SpillSummary summary;
    spill.close();
    summary.spilled = spill.count();
    if (spill.count() == 0) {
        if (spill.file_backed()) fs::remove(spill.path());
        return summary;
    }

    const unsigned k = options.k;
    const std::size_t width = packed_bytes(k);
    const std::size_t slot_bytes = CountTable::slot_bytes(k);
    const fs::path base = spill.path();
    SpillChannel current = std::move(spill);
    spill = SpillChannel(k, base);
    std::uint64_t capacity = std::max<std::uint64_t>(options.base_capacity, 1) * 2;

    for (;;) {
        ++summary.rounds;
        std::vector<std::uint8_t> keys = drain_keys(current, k);
        if (current.file_backed()) fs::remove(current.path());

        if (capacity * slot_bytes > options.max_table_bytes) {
            summary.sorted_fallback = true;
            sort_and_count(keys, width, sink);
            return summary;
        }

        CountTable table(k, capacity, options.theta, options.window, round_path(base, summary.rounds));
        summary.peak_table_bytes = std::max(summary.peak_table_bytes, table.memory_bytes());
        for (std::size_t off = 0; off < keys.size(); off += width)
            table.insert(std::span<const std::uint8_t>(keys.data() + off, width));
        keys = {};
        table.for_each(sink);
        table.spill().close();
        if (table.spill().count() == 0) {
            if (table.spill().file_backed()) fs::remove(table.spill().path());
            return summary;
        }
        current = std::move(table.spill());
        capacity *= 2;
    }
}

std::vector<std::pair<Kmer, std::uint32_t>> process_spill(SpillChannel& spill, const SpillOptions& options) {
    std::vector<std::pair<Kmer, std::uint32_t>> out;
    process_spill(spill, options, [&](std::span<const std::uint8_t> key, std::uint32_t count) {
        out.emplace_back(Kmer::from_bytes(key, options.k), count);
    });
    return out;
}

}  // namespace kcount
