#include "kcount/kmer.hpp"

#include "kcount/errors.hpp"

namespace kcount {

namespace {

void check_length(std::size_t k) {
    if (k == 0 || k > kMaxK)
        throw UsageError("k-mer length " + std::to_string(k) + " outside 1.." + std::to_string(kMaxK));
}

}  // namespace

Kmer::Kmer(unsigned k) : k_(static_cast<std::uint16_t>(k)) { check_length(k); }

Kmer Kmer::from_string(std::string_view text) {
    Kmer x(static_cast<unsigned>(text.size()));
    for (unsigned i = 0; i < text.size(); ++i) {
        const auto code = base_code(text[i]);
        if (code == base::invalid)
            throw IoError("invalid nucleotide '" + std::string(1, text[i]) + "' at position " +
                          std::to_string(i));
        x.set(i, code);
    }
    return x;
}

Kmer Kmer::from_codes(std::span<const std::uint8_t> codes) {
    Kmer x(static_cast<unsigned>(codes.size()));
    for (unsigned i = 0; i < codes.size(); ++i) x.set(i, codes[i]);
    return x;
}

Kmer Kmer::from_bytes(std::span<const std::uint8_t> bytes, unsigned k) {
    Kmer x(k);
    const std::size_t n = packed_bytes(k);
    if (bytes.size() < n) throw IoError("k-mer image truncated");
    for (std::size_t b = 0; b < n; ++b)
        x.words_[b >> 3] |= std::uint64_t{bytes[b]} << (56 - 8 * (b & 7));
    x.clear_padding();
    return x;
}

Kmer Kmer::from_packed(const PackedSeq& seq, std::size_t pos, unsigned k) {
    Kmer x(k);
    for (unsigned i = 0; i < k; ++i) x.set(i, seq.at(pos + i));
    return x;
}

void Kmer::set(unsigned i, std::uint8_t code) noexcept {
    const unsigned shift = 62 - 2 * (i & 31);
    auto& w = words_[i >> 5];
    w = (w & ~(std::uint64_t{3} << shift)) | (std::uint64_t{code & 3u} << shift);
}

void Kmer::clear_padding() noexcept {
    const std::size_t n = word_count();
    const unsigned rem = k_ - 32 * static_cast<unsigned>(n - 1);
    if (rem < 32) words_[n - 1] &= ~std::uint64_t{0} << (64 - 2 * rem);
    for (std::size_t w = n; w < kWords; ++w) words_[w] = 0;
}

void Kmer::roll_forward(std::uint8_t code) noexcept {
    const std::size_t n = word_count();
    for (std::size_t w = 0; w + 1 < n; ++w) words_[w] = (words_[w] << 2) | (words_[w + 1] >> 62);
    words_[n - 1] <<= 2;
    set(k_ - 1, code);
}

void Kmer::roll_reverse(std::uint8_t code) noexcept {
    const std::size_t n = word_count();
    for (std::size_t w = n - 1; w > 0; --w) words_[w] = (words_[w] >> 2) | (words_[w - 1] << 62);
    words_[0] >>= 2;
    clear_padding();
    set(0, code);
}

Kmer Kmer::reverse_complement() const {
    Kmer out(k_);
    for (unsigned i = 0; i < k_; ++i) out.set(k_ - 1 - i, base::complement(at(i)));
    return out;
}

Kmer Kmer::canonical() const {
    Kmer rc = reverse_complement();
    return rc < *this ? rc : *this;
}

void Kmer::write_bytes(std::span<std::uint8_t> out) const noexcept {
    const std::size_t n = byte_count();
    for (std::size_t b = 0; b < n; ++b)
        out[b] = static_cast<std::uint8_t>(words_[b >> 3] >> (56 - 8 * (b & 7)));
}

std::vector<std::uint8_t> Kmer::bytes() const {
    std::vector<std::uint8_t> out(byte_count());
    write_bytes(out);
    return out;
}

std::string Kmer::to_string() const {
    std::string out(k_, 'A');
    for (unsigned i = 0; i < k_; ++i) out[i] = base_letter(at(i));
    return out;
}

bool operator==(const Kmer& a, const Kmer& b) noexcept {
    if (a.k_ != b.k_) return false;
    const std::size_t n = a.word_count();
    for (std::size_t w = 0; w < n; ++w)
        if (a.words_[w] != b.words_[w]) return false;
    return true;
}

std::strong_ordering operator<=>(const Kmer& a, const Kmer& b) noexcept {
    const std::size_t n = std::min(a.word_count(), b.word_count());
    for (std::size_t w = 0; w < n; ++w)
        if (a.words_[w] != b.words_[w]) return a.words_[w] <=> b.words_[w];
    return a.k_ <=> b.k_;
}

Kmer reverse_complement(const Kmer& x) { return x.reverse_complement(); }
Kmer canonicalize(const Kmer& x) { return x.canonical(); }

std::size_t KmerHash::operator()(const Kmer& x) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ x.k();
    for (auto w : x.words()) {
        h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

}  // namespace kcount
