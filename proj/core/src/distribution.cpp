#include "kcount/distribution.hpp"

#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "kcount/bounded_queue.hpp"
#include "kcount/errors.hpp"
#include "kcount/seqio.hpp"
#include "failure_latch.hpp"

namespace fs = std::filesystem;

namespace kcount {

std::uint32_t assign_bin(std::uint32_t mmer_code, unsigned bins) noexcept {
    if (bins <= 1) return 0;
    const std::uint64_t mixed = (std::uint64_t{mmer_code} + 1) * 0x9E3779B97F4A7C15ull;
    return static_cast<std::uint32_t>((mixed >> 32) % bins);
}

void append_record(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> codes) {
    out.push_back(static_cast<std::uint8_t>(codes.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(codes.size() >> 8));
    pack_codes(codes, out);
}

void append_record(std::vector<std::uint8_t>& out, const PackedSeq& seq) {
    if (seq.size() > kMaxRecordLength) throw InternalError("super-mer exceeds record length limit");
    out.push_back(static_cast<std::uint8_t>(seq.size() & 0xFF));
    out.push_back(static_cast<std::uint8_t>(seq.size() >> 8));
    out.insert(out.end(), seq.bytes().begin(), seq.bytes().end());
}

BinWriter::BinWriter(const fs::path& path, bool append) : path_(path) {
    file_ = std::fopen(path.c_str(), append ? "ab" : "wb");
    if (file_ == nullptr) throw IoError("cannot create '" + path.string() + "'");
}

BinWriter::~BinWriter() {
    if (file_ != nullptr) std::fclose(file_);
}

void BinWriter::write_raw(std::span<const std::uint8_t> bytes) {
    if (file_ == nullptr) throw InternalError("write to closed bin '" + path_.string() + "'");
    if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size())
        throw IoError("write failed on '" + path_.string() + "'");
}

void BinWriter::write(const PackedSeq& seq) {
    std::vector<std::uint8_t> image;
    append_record(image, seq);
    write_raw(image);
}

void BinWriter::close() {
    if (file_ == nullptr) return;
    const int rc = std::fclose(file_);
    file_ = nullptr;
    if (rc != 0) throw IoError("closing '" + path_.string() + "' failed");
}

void write_supermer(BinWriter& writer, const SuperMer& supermer) { writer.write(supermer.seq); }

BinReader::BinReader(const fs::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (file_ == nullptr) throw IoError("cannot open bin file '" + path.string() + "'");
}

BinReader::~BinReader() {
    if (file_ != nullptr) std::fclose(file_);
}

bool BinReader::read_exact(std::uint8_t* dst, std::size_t n) {
    const std::size_t got = std::fread(dst, 1, n, file_);
    offset_ += got;
    if (got == n) return true;
    if (got == 0 && std::feof(file_)) return false;
    throw IoError("'" + path_.string() + "' truncated at byte " + std::to_string(offset_));
}

bool BinReader::next(SuperMerRecord& record) {
    std::uint8_t header[2];
    if (!read_exact(header, 2)) return false;
    record.length = static_cast<std::uint16_t>(header[0] | (header[1] << 8));
    record.payload.resize(packed_bytes(record.length));
    if (!record.payload.empty() && !read_exact(record.payload.data(), record.payload.size()))
        throw IoError("'" + path_.string() + "' truncated at byte " + std::to_string(offset_));
    return true;
}

bool BinReader::next_chunk(std::vector<std::uint8_t>& out, std::size_t target) {
    out.clear();
    std::uint8_t header[2];
    while (out.size() < target) {
        if (!read_exact(header, 2)) break;
        const std::size_t length = header[0] | (header[1] << 8);
        const std::size_t at = out.size();
        out.resize(at + 2 + packed_bytes(length));
        out[at] = header[0];
        out[at + 1] = header[1];
        if (packed_bytes(length) != 0 && !read_exact(out.data() + at + 2, packed_bytes(length)))
            throw IoError("'" + path_.string() + "' truncated at byte " + std::to_string(offset_));
    }
    return !out.empty();
}

std::vector<PackedSeq> read_bin(const fs::path& path) {
    BinReader reader(path);
    std::vector<PackedSeq> out;
    SuperMerRecord record;
    while (reader.next(record)) out.push_back(record.sequence());
    return out;
}

std::uint64_t DistributionStats::total_kmers() const {
    std::uint64_t n = 0;
    for (const auto& b : bins) n += b.kmers;
    return n;
}

std::uint64_t DistributionStats::total_supermers() const {
    std::uint64_t n = 0;
    for (const auto& b : bins) n += b.supermers;
    return n;
}

fs::path stats_path(const fs::path& work_dir) { return work_dir / "binstats.txt"; }

fs::path bin_path(const fs::path& work_dir, std::uint32_t bin) {
    char name[32];
    std::snprintf(name, sizeof name, "bin_%05u.bin", bin);
    return work_dir / name;
}

void write_stats(const fs::path& path, const DistributionStats& stats) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write stats file '" + path.string() + "'");
    out << kStatsMagic << '\n'
        << "k=" << stats.k << '\n'
        << "m=" << stats.m << '\n'
        << "bins=" << stats.bins.size() << '\n'
        << "ordering=" << stats.ordering.tag() << '\n'
        << "sample_budget=" << stats.ordering.sample_budget << '\n'
        << "canonical=" << (stats.canonical ? 1 : 0) << '\n'
        << "reads=" << stats.reads << '\n'
        << "bases=" << stats.bases << '\n'
        << "bin,supermers,kmers\n";
    for (std::size_t i = 0; i < stats.bins.size(); ++i)
        out << i << ',' << stats.bins[i].supermers << ',' << stats.bins[i].kmers << '\n';
    out.flush();
    if (!out) throw IoError("write failed on stats file '" + path.string() + "'");
}

namespace {

template <class T>
T parse_number(std::string_view text, const fs::path& path, std::size_t line) {
    T value{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    return value;
}

}  // namespace

DistributionStats read_stats(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stats file '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kStatsMagic)
        throw IoError(path.string() + ": not a stats file or unsupported version");

    DistributionStats stats;
    std::size_t bins = 0;
    bool have[7] = {};
    while (std::getline(in, line)) {
        ++line_no;
        if (line == "bin,supermers,kmers") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string_view value = std::string_view(line).substr(eq + 1);
        if (key == "k") stats.k = parse_number<unsigned>(value, path, line_no), have[0] = true;
        else if (key == "m") stats.m = parse_number<unsigned>(value, path, line_no), have[1] = true;
        else if (key == "bins") bins = parse_number<std::size_t>(value, path, line_no), have[2] = true;
        else if (key == "ordering") {
            const auto budget = stats.ordering.sample_budget;
            stats.ordering = OrderingSpec::parse(value);
            stats.ordering.sample_budget = budget;
            have[3] = true;
        } else if (key == "sample_budget") stats.ordering.sample_budget = parse_number<std::uint64_t>(value, path, line_no);
        else if (key == "canonical") stats.canonical = parse_number<int>(value, path, line_no) != 0, have[4] = true;
        else if (key == "reads") stats.reads = parse_number<std::uint64_t>(value, path, line_no), have[5] = true;
        else if (key == "bases") stats.bases = parse_number<std::uint64_t>(value, path, line_no), have[6] = true;
        else throw IoError(path.string() + ":" + std::to_string(line_no) + ": unknown field '" + key + "'");
    }
    for (bool h : have)
        if (!h) throw IoError(path.string() + ": missing header field");

    stats.bins.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        if (!std::getline(in, line)) throw IoError(path.string() + ": expected " + std::to_string(bins) + " bin rows");
        ++line_no;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed bin row");
        const std::string_view row(line);
        if (parse_number<std::size_t>(row.substr(0, c1), path, line_no) != i)
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": bin rows out of order");
        stats.bins[i].supermers = parse_number<std::uint64_t>(row.substr(c1 + 1, c2 - c1 - 1), path, line_no);
        stats.bins[i].kmers = parse_number<std::uint64_t>(row.substr(c2 + 1), path, line_no);
    }
    return stats;
}

void remove_temporary_files(const fs::path& work_dir, unsigned bins) {
    std::error_code ec;
    for (unsigned b = 0; b < bins; ++b) fs::remove(bin_path(work_dir, b), ec);
    fs::remove(stats_path(work_dir), ec);
}

namespace {

struct BinChunk {
    std::uint32_t bin = 0;
    std::vector<std::uint8_t> bytes;
};

constexpr std::size_t kFlushBytes = 16 * 1024;

}  // namespace

DistributionStats run_phase_one(const PipelineConfig& config) {
    const auto files = expand_inputs(config.inputs, config.input_format);
    const InputFormat file_format = config.input_format == InputFormat::list ? InputFormat::detect : config.input_format;
    fs::create_directories(config.work_dir);

    const auto sampler = [&](unsigned m, std::uint64_t budget) {
        MultiFileReader reads(files, file_format);
        return sample_frequencies(reads, m, budget);
    };
    const MinimizerOrdering ordering = build_ordering(config.ordering, config.m, sampler);

    const WorkerPlan plan = plan_workers(effective_cores(config), files.size());
    const unsigned readers = plan.distribute.readers;
    const unsigned splitters = plan.distribute.splitters;
    const unsigned bins = config.bins;
    const unsigned k = config.k;

    DistributionStats stats;
    stats.k = k;
    stats.m = config.m;
    stats.ordering = config.ordering;
    stats.canonical = config.canonical;
    stats.bins.assign(bins, BinStat{});

    BoundedQueue<ReadBundle> bundles(config.queue_items, readers);
    BoundedQueue<BinChunk> chunks(config.queue_items, splitters);
    detail::FailureLatch failure;
    std::mutex stats_mutex;
    std::atomic<std::size_t> next_file{0};

    std::vector<std::unique_ptr<BinWriter>> writers;
    try {
        writers.reserve(bins);
        for (unsigned b = 0; b < bins; ++b) writers.push_back(std::make_unique<BinWriter>(bin_path(config.work_dir, b)));
    } catch (...) {
        writers.clear();
        remove_temporary_files(config.work_dir, bins);
        throw;
    }

    std::vector<std::thread> threads;
    for (unsigned r = 0; r < readers; ++r) {
        threads.emplace_back([&] {
            try {
                for (std::size_t f; (f = next_file.fetch_add(1)) < files.size();) {
                    SequenceFileReader reader(files[f], file_format);
                    while (auto bundle = next_read_bundle(reader, config.bundle_bytes)) {
                        if (failure) break;
                        bundles.push(std::move(*bundle));
                    }
                }
            } catch (...) {
                failure.fail(bundles, chunks);
            }
            bundles.producer_done();
        });
    }

    for (unsigned s = 0; s < splitters; ++s) {
        threads.emplace_back([&] {
            try {
                SuperMerScanner scanner(k, ordering, config.canonical);
                std::vector<std::vector<std::uint8_t>> buffers(bins);
                std::vector<BinStat> local(bins);
                std::vector<std::uint8_t> scratch;
                std::uint64_t reads = 0;
                std::uint64_t bases = 0;

                auto emit = [&](std::span<const std::uint8_t> codes, std::uint32_t minimizer) {
                    const std::uint32_t bin = assign_bin(minimizer, bins);
                    auto& buf = buffers[bin];
                    append_record(buf, codes);
                    ++local[bin].supermers;
                    local[bin].kmers += codes.size() - k + 1;
                    if (buf.size() >= kFlushBytes) {
                        chunks.push(BinChunk{bin, std::move(buf)});
                        buf = std::vector<std::uint8_t>();
                        buf.reserve(kFlushBytes + 1024);
                    }
                };

                while (auto bundle = bundles.pop()) {
                    for (const auto& read : bundle->reads) {
                        ++reads;
                        bases += read.size();
                        for_each_fragment(read, k, scratch, [&](std::span<const std::uint8_t> codes, std::size_t) {
                            scanner.scan(codes, [&](const SuperMerSpan& sm) {
                                auto piece = codes.subspan(sm.start, sm.length);
                                // Records cap at 65535 bases; longer runs continue with a k-1 overlap.
                                while (piece.size() > kMaxRecordLength) {
                                    emit(piece.first(kMaxRecordLength), sm.minimizer);
                                    piece = piece.subspan(kMaxRecordLength - (k - 1));
                                }
                                emit(piece, sm.minimizer);
                            });
                        });
                    }
                }
                for (std::uint32_t b = 0; b < bins; ++b)
                    if (!buffers[b].empty()) chunks.push(BinChunk{b, std::move(buffers[b])});

                std::lock_guard lock(stats_mutex);
                stats.reads += reads;
                stats.bases += bases;
                for (unsigned b = 0; b < bins; ++b) {
                    stats.bins[b].supermers += local[b].supermers;
                    stats.bins[b].kmers += local[b].kmers;
                }
            } catch (...) {
                failure.fail(bundles, chunks);
            }
            chunks.producer_done();
        });
    }

    // The single bin writer owns every file handle.
    threads.emplace_back([&] {
        try {
            while (auto chunk = chunks.pop()) writers[chunk->bin]->write_raw(chunk->bytes);
            for (auto& w : writers) w->close();
        } catch (...) {
            failure.fail(bundles, chunks);
        }
    });

    for (auto& t : threads) t.join();
    writers.clear();

    if (failure) {
        remove_temporary_files(config.work_dir, bins);
        failure.rethrow();
    }
    try {
        write_stats(stats_path(config.work_dir), stats);
    } catch (...) {
        remove_temporary_files(config.work_dir, bins);
        throw;
    }
    return stats;
}

}  // namespace kcount
