#include "kcount/output.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "kcount/errors.hpp"

namespace kcount {

void encode_entry(std::span<const std::uint8_t> packed_kmer, std::uint32_t count, std::vector<std::uint8_t>& out) {
    if (count < 255) {
        out.push_back(static_cast<std::uint8_t>(count));
    } else {
        out.push_back(0xFF);
        out.push_back(static_cast<std::uint8_t>(count >> 24));
        out.push_back(static_cast<std::uint8_t>(count >> 16));
        out.push_back(static_cast<std::uint8_t>(count >> 8));
        out.push_back(static_cast<std::uint8_t>(count));
    }
    out.insert(out.end(), packed_kmer.begin(), packed_kmer.end());
}

void encode_entry(const ResultEntry& entry, std::vector<std::uint8_t>& out) {
    if (entry.count == 0) throw InternalError("result entries need a count of at least 1");
    std::uint8_t buf[packed_bytes(kMaxK)];
    entry.kmer.write_bytes(buf);
    encode_entry(std::span<const std::uint8_t>(buf, entry.kmer.byte_count()), entry.count, out);
}

std::vector<std::uint8_t> encode_entry(const ResultEntry& entry) {
    std::vector<std::uint8_t> out;
    encode_entry(entry, out);
    return out;
}

ResultEntry decode_entry(std::span<const std::uint8_t> bytes, std::size_t& offset, unsigned k) {
    const std::size_t start = offset;
    auto truncated = [&] {
        return IoError("result stream truncated in entry starting at byte " + std::to_string(start));
    };
    if (offset >= bytes.size()) throw truncated();
    std::uint32_t count = bytes[offset++];
    if (count == 255) {
        if (bytes.size() - offset < 4) throw truncated();
        count = (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
                (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
        offset += 4;
    }
    const std::size_t n = packed_bytes(k);
    if (bytes.size() - offset < n) throw truncated();
    ResultEntry entry{Kmer::from_bytes(bytes.subspan(offset, n), k), count};
    offset += n;
    return entry;
}

std::vector<ResultEntry> read_results(const std::filesystem::path& path, unsigned k) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open result file '" + path.string() + "'");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<ResultEntry> out;
    std::size_t offset = 0;
    while (offset < bytes.size()) out.push_back(decode_entry(bytes, offset, k));
    return out;
}

void write_results(std::span<const ResultEntry> entries, std::uint32_t min_count, std::ostream& sink) {
    std::vector<std::uint8_t> buffer;
    for (const auto& e : entries) {
        if (e.count < min_count) continue;
        encode_entry(e, buffer);
        if (buffer.size() >= (1u << 16)) {
            sink.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
            buffer.clear();
        }
    }
    sink.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (!sink) throw IoError("writing results failed");
}

void emit_histogram_csv(std::span<const ResultEntry> entries, std::uint32_t min_count, std::ostream& sink) {
    std::vector<const ResultEntry*> kept;
    for (const auto& e : entries)
        if (e.count >= min_count) kept.push_back(&e);
    std::sort(kept.begin(), kept.end(), [](const ResultEntry* a, const ResultEntry* b) { return a->kmer < b->kmer; });
    for (const auto* e : kept) sink << e->kmer.to_string() << ',' << e->count << '\n';
    if (!sink) throw IoError("writing histogram failed");
}

}  // namespace kcount
