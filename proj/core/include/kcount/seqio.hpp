#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcount/packed_seq.hpp"

namespace kcount {

enum class InputFormat { detect, fasta, fastq, list };

std::string_view format_name(InputFormat f);
InputFormat parse_input_format(std::string_view name);

/// Pull-based stream of reads (raw base letters, never empty).
class ReadSource {
public:
    virtual ~ReadSource() = default;

    bool next(std::string& read);
    /// Pushes one read back; the next call to next() returns it.
    void unread(std::string read) { pending_ = std::move(read); }

protected:
    virtual bool read_next(std::string& read) = 0;

private:
    std::optional<std::string> pending_;
};

/// In-memory reads; empty entries are skipped.
class VectorReadSource : public ReadSource {
public:
    explicit VectorReadSource(std::vector<std::string> reads) : reads_(std::move(reads)) {}

protected:
    bool read_next(std::string& read) override;

private:
    std::vector<std::string> reads_;
    std::size_t pos_ = 0;
};

/// One FASTA or FASTQ file, plain or gzip-compressed.
class SequenceFileReader : public ReadSource {
public:
    explicit SequenceFileReader(const std::filesystem::path& path, InputFormat format = InputFormat::detect);
    ~SequenceFileReader() override;

    SequenceFileReader(const SequenceFileReader&) = delete;
    SequenceFileReader& operator=(const SequenceFileReader&) = delete;

    /// fasta or fastq; detect only for an empty file.
    InputFormat format() const noexcept { return format_; }
    bool gzipped() const noexcept { return gzipped_; }
    const std::filesystem::path& path() const noexcept { return path_; }

protected:
    bool read_next(std::string& read) override;

private:
    class LineReader;

    bool next_fasta(std::string& read);
    bool next_fastq(std::string& read);
    [[noreturn]] void malformed(const std::string& what) const;

    std::filesystem::path path_;
    InputFormat format_;
    bool gzipped_ = false;
    std::unique_ptr<LineReader> lines_;
    std::string line_;
    bool have_line_ = false;
};

/// Concatenation of several files, read in order.
class MultiFileReader : public ReadSource {
public:
    explicit MultiFileReader(std::vector<std::filesystem::path> paths, InputFormat format = InputFormat::detect);

protected:
    bool read_next(std::string& read) override;

private:
    std::vector<std::filesystem::path> paths_;
    InputFormat format_;
    std::size_t index_ = 0;
    std::unique_ptr<SequenceFileReader> current_;
};

/// True when the file starts with the gzip magic bytes 1F 8B.
bool is_gzip(const std::filesystem::path& path);

/// Resolves file lists into the sequence files they name. A plain-text file
/// whose first line is an existing path is a list (unless `format` says
/// otherwise); relative entries resolve against the working directory first,
/// then against the list's own directory.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs,
                                                 InputFormat format = InputFormat::detect);

std::unique_ptr<ReadSource> open_input(const std::filesystem::path& path,
                                       InputFormat format = InputFormat::detect);

struct ReadBundle {
    std::vector<std::string> reads;
    std::size_t total_bytes = 0;
};

/// Fills a bundle with reads until adding the next one would exceed
/// `capacity` bytes; a bundle always holds at least one read. Returns nullopt
/// at end of stream.
std::optional<ReadBundle> next_read_bundle(ReadSource& source, std::size_t capacity);

struct Fragment {
    PackedSeq bases;
    std::uint64_t read_id = 0;
    std::size_t offset = 0;
};

/// Cuts a read at every character outside ACGT (case-insensitive) and keeps
/// the pieces of at least k bases.
std::vector<Fragment> split_on_invalid(std::string_view read, unsigned k, std::uint64_t read_id = 0);

/// Allocation-free form of split_on_invalid: calls fn(codes, offset) for each
/// valid run of at least `min_length` bases. `scratch` is reused.
template <class Fn>
void for_each_fragment(std::string_view read, std::size_t min_length, std::vector<std::uint8_t>& scratch,
                       Fn&& fn) {
    std::size_t start = 0;
    scratch.clear();
    for (std::size_t i = 0; i <= read.size(); ++i) {
        const std::uint8_t code = i < read.size() ? base_code(read[i]) : base::invalid;
        if (code != base::invalid) {
            scratch.push_back(code);
            continue;
        }
        if (scratch.size() >= min_length && !scratch.empty())
            fn(std::span<const std::uint8_t>(scratch), start);
        scratch.clear();
        start = i + 1;
    }
}

}  // namespace kcount
