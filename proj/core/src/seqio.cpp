#include "kcount/seqio.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "kcount/errors.hpp"

namespace fs = std::filesystem;

namespace kcount {

std::string_view format_name(InputFormat f) {
    switch (f) {
        case InputFormat::detect: return "detect";
        case InputFormat::fasta: return "fasta";
        case InputFormat::fastq: return "fastq";
        case InputFormat::list: return "list";
    }
    return "?";
}

InputFormat parse_input_format(std::string_view name) {
    if (name == "auto" || name == "detect") return InputFormat::detect;
    if (name == "fasta" || name == "fa") return InputFormat::fasta;
    if (name == "fastq" || name == "fq") return InputFormat::fastq;
    if (name == "list") return InputFormat::list;
    throw UsageError("unknown input type '" + std::string(name) + "'");
}

bool ReadSource::next(std::string& read) {
    if (pending_) {
        read = std::move(*pending_);
        pending_.reset();
        return true;
    }
    return read_next(read);
}

bool VectorReadSource::read_next(std::string& read) {
    while (pos_ < reads_.size()) {
        if (!reads_[pos_].empty()) {
            read = reads_[pos_++];
            return true;
        }
        ++pos_;
    }
    return false;
}

// Buffered line reader on top of zlib; gzread passes plain files through untouched.
class SequenceFileReader::LineReader {
public:
    explicit LineReader(const fs::path& path) : file_(gzopen(path.c_str(), "rb")) {
        if (file_ == nullptr) throw IoError("cannot open '" + path.string() + "'");
        gzbuffer(file_, 1 << 17);
    }
    ~LineReader() { gzclose(file_); }

    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool getline(std::string& line) {
        line.clear();
        for (;;) {
            if (pos_ == size_) {
                if (!fill()) {
                    if (line.empty()) return false;
                    break;
                }
            }
            const char* begin = buffer_.data() + pos_;
            const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', size_ - pos_));
            if (nl != nullptr) {
                line.append(begin, nl);
                pos_ += static_cast<std::size_t>(nl - begin) + 1;
                break;
            }
            line.append(begin, size_ - pos_);
            pos_ = size_;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no_;
        return true;
    }

    std::size_t line_number() const noexcept { return line_no_; }

private:
    bool fill() {
        const int n = gzread(file_, buffer_.data(), static_cast<unsigned>(buffer_.size()));
        if (n < 0) {
            int err = 0;
            throw IoError(std::string("decompression failed: ") + gzerror(file_, &err));
        }
        pos_ = 0;
        size_ = static_cast<std::size_t>(n);
        return n > 0;
    }

    gzFile file_;
    std::array<char, 1 << 16> buffer_{};
    std::size_t pos_ = 0;
    std::size_t size_ = 0;
    std::size_t line_no_ = 0;
};

bool is_gzip(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    return in.gcount() == 2 && magic[0] == 0x1F && magic[1] == 0x8B;
}

SequenceFileReader::SequenceFileReader(const fs::path& path, InputFormat format)
    : path_(path), format_(format) {
    if (!fs::exists(path)) throw IoError("input file '" + path.string() + "' does not exist");
    if (format == InputFormat::list) throw UsageError("file lists must be expanded before reading");
    gzipped_ = is_gzip(path);
    lines_ = std::make_unique<LineReader>(path);
    while ((have_line_ = lines_->getline(line_)) && line_.empty()) {
    }
    if (!have_line_) return;
    if (format_ == InputFormat::detect) {
        if (line_[0] == '>')
            format_ = InputFormat::fasta;
        else if (line_[0] == '@')
            format_ = InputFormat::fastq;
        else
            malformed("unknown format (expected '>' or '@' at start of file)");
    }
}

SequenceFileReader::~SequenceFileReader() = default;

void SequenceFileReader::malformed(const std::string& what) const {
    throw IoError(path_.string() + ":" + std::to_string(lines_->line_number()) + ": " + what);
}

bool SequenceFileReader::read_next(std::string& read) {
    for (;;) {
        if (!have_line_) return false;
        const bool ok = format_ == InputFormat::fastq ? next_fastq(read) : next_fasta(read);
        if (!ok) return false;
        if (!read.empty()) return true;
    }
}

bool SequenceFileReader::next_fasta(std::string& read) {
    while (have_line_ && line_.empty()) have_line_ = lines_->getline(line_);
    if (!have_line_) return false;
    if (line_[0] != '>') malformed("expected FASTA header '>'");
    read.clear();
    while ((have_line_ = lines_->getline(line_))) {
        if (line_.empty() || line_[0] == ';') continue;
        if (line_[0] == '>') break;
        read += line_;
    }
    return true;
}

bool SequenceFileReader::next_fastq(std::string& read) {
    while (have_line_ && line_.empty()) have_line_ = lines_->getline(line_);
    if (!have_line_) return false;
    if (line_[0] != '@') malformed("expected FASTQ header '@'");
    read.clear();
    bool separator = false;
    while (lines_->getline(line_)) {
        if (!line_.empty() && line_[0] == '+') {
            separator = true;
            break;
        }
        read += line_;
    }
    if (!separator) malformed("FASTQ record without '+' separator");
    std::size_t quality = 0;
    while (quality < read.size()) {
        if (!lines_->getline(line_)) malformed("FASTQ record truncated in quality line");
        quality += line_.size();
    }
    if (quality != read.size()) malformed("FASTQ quality length differs from sequence length");
    have_line_ = lines_->getline(line_);
    return true;
}

MultiFileReader::MultiFileReader(std::vector<fs::path> paths, InputFormat format)
    : paths_(std::move(paths)), format_(format) {}

bool MultiFileReader::read_next(std::string& read) {
    for (;;) {
        if (!current_) {
            if (index_ == paths_.size()) return false;
            current_ = std::make_unique<SequenceFileReader>(paths_[index_++], format_);
        }
        if (current_->next(read)) return true;
        current_.reset();
    }
}

namespace {

std::string first_line(const fs::path& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    char buf[4096];
    if (gzgets(f, buf, sizeof buf) != nullptr) line = buf;
    gzclose(f);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' '))
        line.pop_back();
    return line;
}

std::optional<fs::path> resolve_entry(const std::string& entry, const fs::path& list) {
    if (entry.empty()) return std::nullopt;
    fs::path p(entry);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p;
    if (p.is_relative()) {
        fs::path q = list.parent_path() / p;
        if (fs::is_regular_file(q, ec)) return q;
    }
    return std::nullopt;
}

std::vector<fs::path> read_list(const fs::path& list) {
    std::ifstream in(list);
    if (!in) throw IoError("cannot open file list '" + list.string() + "'");
    std::vector<fs::path> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        auto p = resolve_entry(line, list);
        if (!p) throw IoError(list.string() + ":" + std::to_string(line_no) + ": no such file '" + line + "'");
        out.push_back(*p);
    }
    return out;
}

bool looks_like_list(const fs::path& path) {
    const std::string line = first_line(path);
    if (line.empty() || line[0] == '>' || line[0] == '@') return false;
    return resolve_entry(line, path).has_value();
}

}  // namespace

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs, InputFormat format) {
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (!fs::exists(in)) throw IoError("input file '" + in.string() + "' does not exist");
        const bool list = format == InputFormat::list || (format == InputFormat::detect && looks_like_list(in));
        if (list) {
            for (auto& p : read_list(in)) out.push_back(std::move(p));
        } else {
            out.push_back(in);
        }
    }
    return out;
}

std::unique_ptr<ReadSource> open_input(const fs::path& path, InputFormat format) {
    auto files = expand_inputs({path}, format);
    const InputFormat per_file = format == InputFormat::list ? InputFormat::detect : format;
    if (files.size() == 1 && files.front() == path)
        return std::make_unique<SequenceFileReader>(path, per_file);
    return std::make_unique<MultiFileReader>(std::move(files), per_file);
}

std::optional<ReadBundle> next_read_bundle(ReadSource& source, std::size_t capacity) {
    ReadBundle bundle;
    std::string read;
    while (source.next(read)) {
        if (!bundle.reads.empty() && bundle.total_bytes + read.size() > capacity) {
            source.unread(std::move(read));
            break;
        }
        bundle.total_bytes += read.size();
        bundle.reads.push_back(std::move(read));
        read = std::string();
    }
    if (bundle.reads.empty()) return std::nullopt;
    return bundle;
}

std::vector<Fragment> split_on_invalid(std::string_view read, unsigned k, std::uint64_t read_id) {
    std::vector<Fragment> out;
    std::vector<std::uint8_t> scratch;
    for_each_fragment(read, std::max<std::size_t>(k, 1), scratch,
                      [&](std::span<const std::uint8_t> codes, std::size_t offset) {
                          out.push_back(Fragment{PackedSeq::from_codes(codes), read_id, offset});
                      });
    return out;
}

}  // namespace kcount
