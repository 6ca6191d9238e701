#include "kcount/counting.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <thread>

#include "kcount/bounded_queue.hpp"
#include "kcount/errors.hpp"
#include "kcount/output.hpp"
#include "failure_latch.hpp"

namespace fs = std::filesystem;

namespace kcount {

namespace {

constexpr std::size_t kReadChunkBytes = 256 * 1024;
constexpr std::size_t kKmerBatchBytes = 64 * 1024;
constexpr std::size_t kResultBatchBytes = 64 * 1024;

using Bytes = std::vector<std::uint8_t>;

fs::path spill_file(const fs::path& work_dir, std::uint32_t bin, unsigned hasher) {
    char name[48];
    std::snprintf(name, sizeof name, "spill_%05u_%03u.bin", bin, hasher);
    return work_dir / name;
}

// Single output worker shared by all bins.
class ResultWriter {
public:
    ResultWriter(const PipelineConfig& config, std::size_t queue_items)
        : k_(config.k), csv_(config.histogram_csv), output_(config.output), queue_(queue_items, 1) {
        out_.open(output_, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot create output file '" + output_.string() + "'");
        thread_ = std::thread([this] { run(); });
    }

    ~ResultWriter() {
        if (thread_.joinable()) {
            queue_.abort();
            thread_.join();
        }
    }

    BoundedQueue<Bytes>& queue() noexcept { return queue_; }
    detail::FailureLatch& failure() noexcept { return failure_; }

    /// Drains the queue and finishes both files.
    void finish() {
        queue_.producer_done();
        thread_.join();
        failure_.rethrow();
        out_.close();
        if (!out_) throw IoError("closing output file '" + output_.string() + "' failed");
        if (csv_) {
            std::ofstream csv(histogram_path(output_), std::ios::trunc);
            if (!csv) throw IoError("cannot create histogram file");
            emit_histogram_csv(entries_, 1, csv);
        }
    }

private:
    void run() {
        try {
            while (auto batch = queue_.pop()) {
                out_.write(reinterpret_cast<const char*>(batch->data()), static_cast<std::streamsize>(batch->size()));
                if (!out_) throw IoError("write failed on output file '" + output_.string() + "'");
                if (csv_) {
                    std::size_t offset = 0;
                    while (offset < batch->size()) entries_.push_back(decode_entry(*batch, offset, k_));
                }
            }
        } catch (...) {
            failure_.fail(queue_);
        }
    }

    unsigned k_;
    bool csv_;
    fs::path output_;
    std::ofstream out_;
    BoundedQueue<Bytes> queue_;
    detail::FailureLatch failure_;
    std::vector<ResultEntry> entries_;
    std::thread thread_;
};

struct HasherResult {
    std::uint64_t distinct = 0;
    std::uint64_t written = 0;
    std::uint64_t spilled = 0;
    bool sorted_fallback = false;
    std::uint64_t peak_bytes = 0;
    ProbeStats probes;
};

}  // namespace

fs::path histogram_path(const fs::path& output) {
    fs::path p = output;
    p += ".csv";
    return p;
}

CountingTotals run_phase_two(const PipelineConfig& config, const DistributionStats& stats) {
    if (stats.k != config.k)
        throw UsageError("bins were written for k=" + std::to_string(stats.k) + " but counting was asked for k=" +
                         std::to_string(config.k));
    if (stats.canonical != config.canonical)
        throw UsageError("bins were written with normalization " + std::string(stats.canonical ? "on" : "off") +
                         "; rerun with the same -d setting");
    if (config.output.empty()) throw UsageError("phase two needs an output path");

    const unsigned k = config.k;
    const std::size_t key_bytes = packed_bytes(k);
    const std::size_t slot_bytes = CountTable::slot_bytes(k);
    const WorkerPlan plan = plan_workers(effective_cores(config), 1);
    const unsigned splitters = plan.count.splitters;
    const unsigned hashers = plan.count.hashers;

    SizingModel model{config.distinct_ratio, config.load_factor, config.memory_bytes};
    CountingTotals totals;

    ResultWriter writer(config, config.queue_items);

    for (std::uint32_t bin = 0; bin < stats.bins.size(); ++bin) {
        const fs::path path = bin_path(config.work_dir, bin);
        if (!fs::exists(path)) throw IoError("bin " + std::to_string(bin) + " missing: '" + path.string() + "'");
        const std::uint64_t bin_kmers = stats.bins[bin].kmers;
        if (bin_kmers == 0) {
            if (fs::file_size(path) != 0) throw IoError("bin " + std::to_string(bin) + " does not match the stats file");
            if (!config.keep_temporary) fs::remove(path);
            ++totals.bins_processed;
            continue;
        }

        std::uint64_t per_table = 0;
        if (config.table_capacity != 0) {
            per_table = config.table_capacity;
            if (per_table * slot_bytes * hashers > config.memory_bytes)
                throw UsageError("forced table capacity exceeds the memory cap");
        } else {
            const CapacityEstimate est = estimate_capacity(bin_kmers, model, slot_bytes, hashers);
            per_table = est.per_table;
            if (est.clamped) ++totals.clamped_bins;
        }

        BoundedQueue<Bytes> chunks(config.queue_items, 1);
        std::vector<std::unique_ptr<BoundedQueue<Bytes>>> kmer_queues;
        for (unsigned h = 0; h < hashers; ++h)
            kmer_queues.push_back(std::make_unique<BoundedQueue<Bytes>>(config.queue_items, splitters));
        detail::FailureLatch failure;
        auto abort_all = [&] {
            failure.fail(chunks);
            for (auto& q : kmer_queues) q->abort();
        };
        std::vector<HasherResult> results(hashers);
        std::uint64_t kmers_seen = 0;
        std::mutex seen_mutex;

        std::vector<std::thread> threads;
        threads.emplace_back([&] {
            try {
                BinReader reader(path);
                Bytes chunk;
                while (reader.next_chunk(chunk, kReadChunkBytes)) {
                    chunks.push(std::move(chunk));
                    chunk = Bytes();
                }
            } catch (...) {
                abort_all();
            }
            chunks.producer_done();
        });

        for (unsigned s = 0; s < splitters; ++s) {
            threads.emplace_back([&] {
                try {
                    std::vector<Bytes> batches(hashers);
                    std::vector<std::uint8_t> codes;
                    std::uint8_t image[packed_bytes(kMaxK)];
                    std::uint64_t seen = 0;
                    while (auto chunk = chunks.pop()) {
                        for_each_record(*chunk, codes, [&](std::span<const std::uint8_t> rec) {
                            if (rec.size() < k) throw IoError("bin " + std::to_string(bin) + " holds a record shorter than k");
                            Kmer fwd = Kmer::from_codes(rec.first(k));
                            Kmer rc = fwd.reverse_complement();
                            for (std::size_t i = 0;; ++i) {
                                const Kmer& key = (config.canonical && rc < fwd) ? rc : fwd;
                                key.write_bytes(image);
                                auto& batch = batches[partition_kmer(key, hashers)];
                                batch.insert(batch.end(), image, image + key_bytes);
                                if (batch.size() >= kKmerBatchBytes) {
                                    kmer_queues[&batch - batches.data()]->push(std::move(batch));
                                    batch = Bytes();
                                }
                                ++seen;
                                if (i + k >= rec.size()) break;
                                const std::uint8_t next = rec[i + k];
                                fwd.roll_forward(next);
                                if (config.canonical) rc.roll_reverse(base::complement(next));
                            }
                        });
                    }
                    for (unsigned h = 0; h < hashers; ++h)
                        if (!batches[h].empty()) kmer_queues[h]->push(std::move(batches[h]));
                    std::lock_guard lock(seen_mutex);
                    kmers_seen += seen;
                } catch (...) {
                    abort_all();
                }
                for (auto& q : kmer_queues) q->producer_done();
            });
        }

        for (unsigned h = 0; h < hashers; ++h) {
            threads.emplace_back([&, h] {
                try {
                    HasherResult& result = results[h];
                    Bytes out;
                    const auto sink = [&](std::span<const std::uint8_t> key, std::uint32_t count) {
                        ++result.distinct;
                        if (count < config.min_count) return;
                        ++result.written;
                        encode_entry(key, count, out);
                        if (out.size() >= kResultBatchBytes) {
                            writer.queue().push(std::move(out));
                            out = Bytes();
                        }
                    };

                    auto table = std::make_unique<CountTable>(k, per_table, config.theta, config.window,
                                                              spill_file(config.work_dir, bin, h));
                    const std::uint64_t main_bytes = table->memory_bytes();
                    while (auto batch = kmer_queues[h]->pop())
                        for (std::size_t off = 0; off < batch->size(); off += key_bytes)
                            table->insert(std::span<const std::uint8_t>(batch->data() + off, key_bytes));
                    if (failure) return;

                    table->for_each(sink);
                    result.probes = table->probe_stats();
                    result.spilled = table->spill().count();
                    SpillChannel spill = std::move(table->spill());
                    table.reset();

                    SpillOptions options;
                    options.k = k;
                    options.base_capacity = per_table;
                    options.theta = config.theta;
                    options.window = config.window;
                    options.max_table_bytes = std::max<std::uint64_t>(config.memory_bytes / hashers, main_bytes);
                    const SpillSummary summary = process_spill(spill, options, sink);
                    result.sorted_fallback = summary.sorted_fallback;
                    result.peak_bytes = std::max(main_bytes, summary.peak_table_bytes);
                    if (!out.empty()) writer.queue().push(std::move(out));
                } catch (...) {
                    abort_all();
                }
            });
        }

        for (auto& t : threads) t.join();
        if (failure) {
            for (unsigned h = 0; h < hashers; ++h) {
                std::error_code ec;
                fs::remove(spill_file(config.work_dir, bin, h), ec);
            }
            failure.rethrow();
        }
        if (writer.failure()) writer.finish();

        if (kmers_seen != bin_kmers)
            throw IoError("bin " + std::to_string(bin) + " holds " + std::to_string(kmers_seen) +
                          " k-mers but the stats file lists " + std::to_string(bin_kmers));

        std::uint64_t bin_distinct = 0;
        std::uint64_t bin_peak = 0;
        for (const auto& r : results) {
            bin_distinct += r.distinct;
            totals.written += r.written;
            totals.spill_events += r.spilled;
            totals.sorted_fallbacks += r.sorted_fallback ? 1 : 0;
            totals.probes += r.probes;
            bin_peak += r.peak_bytes;
        }
        totals.peak_table_bytes = std::max(totals.peak_table_bytes, bin_peak);
        totals.distinct_kmers += bin_distinct;
        totals.total_kmers += bin_kmers;
        ++totals.bins_processed;
        model = update_ratio(model, bin_distinct, bin_kmers);

        if (!config.keep_temporary) fs::remove(path);
    }

    writer.finish();
    totals.final_ratio = model.ratio;
    return totals;
}

}  // namespace kcount
