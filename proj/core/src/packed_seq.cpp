#include "kcount/packed_seq.hpp"

#include "kcount/errors.hpp"

namespace kcount {

PackedSeq PackedSeq::from_codes(std::span<const std::uint8_t> codes) {
    PackedSeq seq;
    pack_codes(codes, seq.bytes_);
    seq.length_ = codes.size();
    return seq;
}

PackedSeq PackedSeq::from_bytes(std::span<const std::uint8_t> bytes, std::size_t length) {
    if (bytes.size() < packed_bytes(length))
        throw IoError("packed sequence truncated: need " + std::to_string(packed_bytes(length)) +
                      " bytes, have " + std::to_string(bytes.size()));
    PackedSeq seq;
    seq.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(packed_bytes(length)));
    seq.length_ = length;
    if (length % 4 != 0) seq.bytes_.back() &= static_cast<std::uint8_t>(0xFF00u >> (2 * (length % 4)));
    return seq;
}

void PackedSeq::push_back(std::uint8_t code) {
    if ((length_ & 3) == 0) bytes_.push_back(0);
    bytes_.back() |= static_cast<std::uint8_t>((code & 3u) << (6 - 2 * (length_ & 3)));
    ++length_;
}

std::vector<std::uint8_t> PackedSeq::codes() const {
    std::vector<std::uint8_t> out(length_);
    for (std::size_t i = 0; i < length_; ++i) out[i] = at(i);
    return out;
}

std::string PackedSeq::to_string() const {
    std::string out(length_, 'A');
    for (std::size_t i = 0; i < length_; ++i) out[i] = base_letter(at(i));
    return out;
}

PackedSeq PackedSeq::substr(std::size_t pos, std::size_t len) const {
    PackedSeq out;
    out.bytes_.reserve(packed_bytes(len));
    for (std::size_t i = pos; i < pos + len && i < length_; ++i) out.push_back(at(i));
    return out;
}

PackedSeq encode_sequence(std::string_view text) {
    PackedSeq seq;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto code = base_code(text[i]);
        if (code == base::invalid)
            throw IoError("invalid nucleotide '" + std::string(1, text[i]) + "' at position " +
                          std::to_string(i));
        seq.push_back(code);
    }
    return seq;
}

std::string decode_sequence(const PackedSeq& seq) { return seq.to_string(); }

void pack_codes(std::span<const std::uint8_t> codes, std::vector<std::uint8_t>& out) {
    const std::size_t full = codes.size() / 4;
    const std::uint8_t* c = codes.data();
    for (std::size_t i = 0; i < full; ++i, c += 4)
        out.push_back(static_cast<std::uint8_t>((c[0] << 6) | (c[1] << 4) | (c[2] << 2) | c[3]));
    const std::size_t rest = codes.size() % 4;
    if (rest != 0) {
        std::uint8_t last = 0;
        for (std::size_t j = 0; j < rest; ++j) last |= static_cast<std::uint8_t>(c[j] << (6 - 2 * j));
        out.push_back(last);
    }
}

}  // namespace kcount
