#include "kcount/minimizer.hpp"

#include "kcount/errors.hpp"

namespace kcount {

std::string Mmer::to_string() const {
    std::string out(m, 'A');
    for (unsigned i = 0; i < m; ++i) out[i] = base_letter(static_cast<std::uint8_t>(code >> (2 * (m - 1 - i))));
    return out;
}

Mmer Mmer::from_string(const std::string& text) {
    if (text.empty() || text.size() > 16) throw UsageError("m-mer length must be 1..16");
    Mmer out{0, static_cast<std::uint8_t>(text.size())};
    for (char c : text) {
        const auto code = base_code(c);
        if (code == base::invalid) throw IoError("invalid nucleotide in m-mer '" + text + "'");
        out.code = (out.code << 2) | code;
    }
    return out;
}

MinimizerHit minimizer(const Kmer& x, const MinimizerOrdering& ord, bool canonical_mode) {
    const unsigned k = x.k();
    const unsigned m = ord.m();
    if (m >= k) throw UsageError("minimizer length must be smaller than k");
    const std::uint32_t mask = m == 16 ? ~0u : (1u << (2 * m)) - 1;

    MinimizerHit best;
    bool have = false;
    for (unsigned i = 0; i + m <= k; ++i) {
        std::uint32_t fwd = 0;
        std::uint32_t rc = 0;
        for (unsigned j = 0; j < m; ++j) {
            fwd = (fwd << 2) | x.at(i + j);
            rc = (rc << 2) | base::complement(x.at(i + m - 1 - j));
        }
        fwd &= mask;
        rc &= mask;
        auto consider = [&](std::uint32_t code, bool reverse) {
            const std::uint32_t r = ord.rank(code);
            if (!have || r < best.rank) {
                best = MinimizerHit{Mmer{code, static_cast<std::uint8_t>(m)}, r, i, reverse};
                have = true;
            }
        };
        consider(fwd, false);
        if (canonical_mode) consider(rc, true);
    }
    return best;
}

SuperMerScanner::SuperMerScanner(unsigned k, const MinimizerOrdering& ord, bool canonical_mode)
    : k_(k), m_(ord.m()), ord_(&ord), canonical_(canonical_mode) {
    if (m_ == 0 || m_ >= k_) throw UsageError("minimizer length must satisfy 1 <= m < k");
}

void SuperMerScanner::compute_ranks(std::span<const std::uint8_t> codes) {
    const std::size_t positions = codes.size() - m_ + 1;
    ranks_.resize(positions);
    const std::uint32_t mask = m_ == 16 ? ~0u : (1u << (2 * m_)) - 1;
    const unsigned top = 2 * (m_ - 1);
    std::uint32_t fwd = 0;
    std::uint32_t rc = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        fwd = ((fwd << 2) | codes[i]) & mask;
        rc = (rc >> 2) | (std::uint32_t{base::complement(codes[i])} << top);
        if (i + 1 >= m_) {
            std::uint32_t r = ord_->rank(fwd);
            if (canonical_) r = std::min(r, ord_->rank(rc));
            ranks_[i + 1 - m_] = r;
        }
    }
}

std::vector<SuperMer> decompose_supermers(const PackedSeq& fragment, unsigned k,
                                          const MinimizerOrdering& ord, bool canonical_mode) {
    std::vector<SuperMer> out;
    if (fragment.size() < k) return out;
    const auto codes = fragment.codes();
    SuperMerScanner scanner(k, ord, canonical_mode);
    scanner.scan(codes, [&](const SuperMerSpan& s) {
        out.push_back(SuperMer{
            PackedSeq::from_codes(std::span(codes).subspan(s.start, s.length)),
            Mmer{s.minimizer, static_cast<std::uint8_t>(ord.m())},
            s.rank,
        });
    });
    return out;
}

}  // namespace kcount
