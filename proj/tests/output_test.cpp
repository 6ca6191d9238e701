#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "kcount/errors.hpp"
#include "kcount/output.hpp"
#include "test_util.hpp"

using namespace kcount;

namespace {

ResultEntry entry(const std::string& s, std::uint32_t count) { return {Kmer::from_string(s), count}; }

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Encode, SmallCount) {
    EXPECT_EQ(encode_entry(entry("AACGTG", 67)), (std::vector<std::uint8_t>{0x43, 0x06, 0xE0}));
}

TEST(Encode, LargeCount) {
    EXPECT_EQ(encode_entry(entry("TGGATC", 345)),
              (std::vector<std::uint8_t>{0xFF, 0x00, 0x00, 0x01, 0x59, 0xE8, 0xD0}));
}

TEST(Encode, ThresholdBoundary) {
    const auto a = encode_entry(entry("AAAAAAAA", 254));
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[0], 0xFE);
    const auto b = encode_entry(entry("AAAAAAAA", 255));
    EXPECT_EQ(b, (std::vector<std::uint8_t>{0xFF, 0x00, 0x00, 0x00, 0xFF, 0x00, 0x00}));
    std::size_t off = 0;
    EXPECT_EQ(decode_entry(b, off, 8).count, 255u);
    EXPECT_EQ(off, b.size());
    EXPECT_EQ(encoded_size(254, 8), 3u);
    EXPECT_EQ(encoded_size(255, 8), 7u);
}

TEST(Decode, AppendixFixtures) {
    std::vector<std::uint8_t> bytes;
    encode_entry(entry("AACGTG", 67), bytes);
    encode_entry(entry("TGGATC", 345), bytes);
    std::size_t off = 0;
    EXPECT_EQ(decode_entry(bytes, off, 6), entry("AACGTG", 67));
    EXPECT_EQ(decode_entry(bytes, off, 6), entry("TGGATC", 345));
    EXPECT_EQ(off, bytes.size());
}

TEST(Decode, RandomRoundTrip) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i) {
        const unsigned k = 8 + static_cast<unsigned>(rng() % (kMaxK - 7));
        const std::uint32_t count = (i % 3 == 0) ? static_cast<std::uint32_t>(rng()) | 1u
                                                 : 1 + static_cast<std::uint32_t>(rng() % 300);
        const ResultEntry e{Kmer::from_string(test::random_bases(rng, k)), count};
        const auto bytes = encode_entry(e);
        EXPECT_EQ(bytes.size(), encoded_size(count, k));
        std::size_t off = 0;
        EXPECT_EQ(decode_entry(bytes, off, k), e);
    }
}

TEST(Decode, TruncationNamesOffset) {
    auto bytes = encode_entry(entry("TGGATC", 345));
    bytes.pop_back();
    std::size_t off = 0;
    try {
        decode_entry(bytes, off, 6);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("byte 0"), std::string::npos) << e.what();
    }
}

TEST(Write, BelowThresholdIsEmpty) {
    std::ostringstream out;
    const std::vector<ResultEntry> entries{entry("ACGTACGT", 1), entry("CCCCCCCC", 2)};
    write_results(entries, 3, out);
    EXPECT_TRUE(out.str().empty());
}

TEST(Write, DecodedFileEqualsEntries) {
    test::TempDir dir;
    std::mt19937_64 rng(2);
    std::vector<ResultEntry> entries;
    for (int i = 0; i < 200; ++i)
        entries.push_back({Kmer::from_string(test::random_bases(rng, 33)), 1 + static_cast<std::uint32_t>(rng() % 600)});
    {
        std::ofstream out(dir / "r.bin", std::ios::binary);
        write_results(entries, 1, out);
    }
    EXPECT_EQ(read_results(dir / "r.bin", 33), entries);
    std::size_t want = 0;
    for (const auto& e : entries) want += encoded_size(e.count, 33);
    EXPECT_EQ(std::filesystem::file_size(dir / "r.bin"), want);
}

TEST(Csv, SingleLine) {
    std::ostringstream out;
    const std::vector<ResultEntry> entries{entry("ACCG", 3)};
    emit_histogram_csv(entries, 1, out);
    EXPECT_EQ(out.str(), "ACCG,3\n");
}

TEST(Csv, SortedAndFilteredLikeBinary) {
    const std::vector<ResultEntry> entries{entry("TTTTAAAA", 5), entry("AAAACCCC", 1), entry("CCCCGGGG", 9)};
    std::ostringstream csv;
    std::ostringstream bin;
    emit_histogram_csv(entries, 2, csv);
    write_results(entries, 2, bin);
    EXPECT_EQ(csv.str(), "CCCCGGGG,9\nTTTTAAAA,5\n");
    const auto bytes = to_bytes(bin.str());
    std::size_t off = 0;
    std::size_t rows = 0;
    while (off < bytes.size()) {
        decode_entry(bytes, off, 8);
        ++rows;
    }
    EXPECT_EQ(rows, 2u);
}
