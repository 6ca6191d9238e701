#include <gtest/gtest.h>
#include <zlib.h>

#include <fstream>

#include "kcount/errors.hpp"
#include "kcount/seqio.hpp"
#include "test_util.hpp"

using namespace kcount;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

void write_gz(const fs::path& p, const std::string& text) {
    gzFile f = gzopen(p.c_str(), "wb");
    ASSERT_NE(f, nullptr);
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
}

std::vector<std::string> drain(ReadSource& src) {
    std::vector<std::string> out;
    std::string r;
    while (src.next(r)) out.push_back(r);
    return out;
}

std::vector<std::string> read_file(const fs::path& p, InputFormat f = InputFormat::detect) {
    SequenceFileReader reader(p, f);
    return drain(reader);
}

}  // namespace

TEST(Fastq, FourLineRecord) {
    test::TempDir dir;
    write_text(dir / "a.fq", "@r1\nACGTN\n+\n!!+@I\n@r2 desc\nGGCA\n+r2 desc\nIIII\n");
    SequenceFileReader reader(dir / "a.fq");
    EXPECT_EQ(drain(reader), (std::vector<std::string>{"ACGTN", "GGCA"}));
    EXPECT_EQ(reader.format(), InputFormat::fastq);
}

TEST(Fastq, QualityStartingWithAtSign) {
    test::TempDir dir;
    write_text(dir / "a.fq", "@r1\nACGT\n+\n@@@@\n@r2\nTTTT\n+\n@III\n");
    EXPECT_EQ(read_file(dir / "a.fq"), (std::vector<std::string>{"ACGT", "TTTT"}));
}

TEST(Fastq, MalformedReportsLine) {
    test::TempDir dir;
    write_text(dir / "bad.fq", "@r1\nACGT\n+\nIII\n");
    try {
        read_file(dir / "bad.fq");
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.fq"), std::string::npos);
    }
    write_text(dir / "bad2.fq", "@r1\nACGT\n");
    EXPECT_THROW(read_file(dir / "bad2.fq"), IoError);
}

TEST(Fasta, MultiLineRecord) {
    test::TempDir dir;
    write_text(dir / "a.fa", ">r1\nACGT\nacgt\r\nNNA\n>r2\n\nGG\n");
    EXPECT_EQ(read_file(dir / "a.fa"), (std::vector<std::string>{"ACGTacgtNNA", "GG"}));
}

TEST(Fasta, EmptyRecordsAreSkipped) {
    test::TempDir dir;
    write_text(dir / "a.fa", ">r1\n>r2\nAC\n");
    EXPECT_EQ(read_file(dir / "a.fa"), (std::vector<std::string>{"AC"}));
}

TEST(Gzip, SameReadsAsPlain) {
    test::TempDir dir;
    const auto reads = test::random_reads(1, 300, 50, 500, 0.02);
    test::write_fasta(dir / "a.fa", reads);
    write_gz(dir / "a.fa.gz", test::slurp(dir / "a.fa"));
    EXPECT_TRUE(is_gzip(dir / "a.fa.gz"));
    EXPECT_FALSE(is_gzip(dir / "a.fa"));
    SequenceFileReader gz(dir / "a.fa.gz");
    EXPECT_TRUE(gz.gzipped());
    EXPECT_EQ(drain(gz), reads);
    EXPECT_EQ(read_file(dir / "a.fa"), reads);
}

TEST(Gzip, Fastq) {
    test::TempDir dir;
    const auto reads = test::random_reads(2, 100, 50, 150, 0.0);
    test::write_fastq(dir / "a.fq", reads);
    write_gz(dir / "a.fq.gz", test::slurp(dir / "a.fq"));
    EXPECT_EQ(read_file(dir / "a.fq.gz"), reads);
}

TEST(Inputs, MissingFileIsIoError) {
    EXPECT_THROW(SequenceFileReader("/nonexistent/reads.fa"), IoError);
}

TEST(Inputs, UnknownFormat) {
    test::TempDir dir;
    write_text(dir / "x.txt", "hello\n");
    EXPECT_THROW(read_file(dir / "x.txt"), IoError);
}

TEST(Inputs, ListExpansion) {
    test::TempDir dir;
    test::write_fasta(dir / "a.fa", {"ACGT"});
    test::write_fastq(dir / "b.fq", {"GGGG", "CCCC"});
    write_text(dir / "list.txt", (dir / "a.fa").string() + "\n\nb.fq\n");
    const auto files = expand_inputs({dir / "list.txt"});
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[0], dir / "a.fa");
    MultiFileReader reader(files);
    EXPECT_EQ(drain(reader), (std::vector<std::string>{"ACGT", "GGGG", "CCCC"}));

    auto src = open_input(dir / "list.txt");
    EXPECT_EQ(drain(*src), (std::vector<std::string>{"ACGT", "GGGG", "CCCC"}));
    EXPECT_EQ(expand_inputs({dir / "a.fa"}), std::vector<fs::path>{dir / "a.fa"});
}

TEST(Split, SingleN) {
    const auto f = split_on_invalid("ACGTNACGT", 4);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[0].bases.to_string(), "ACGT");
    EXPECT_EQ(f[0].offset, 0u);
    EXPECT_EQ(f[1].bases.to_string(), "ACGT");
    EXPECT_EQ(f[1].offset, 5u);
}

TEST(Split, PiecesShorterThanK) {
    EXPECT_TRUE(split_on_invalid("ACGNT", 4).empty());
}

TEST(Split, IupacAndLowercase) {
    const auto f = split_on_invalid("acgtRACGT.GGGG", 4);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[0].bases.to_string(), "ACGT");
}

TEST(Split, FragmentWindowsMatchNaiveCounter) {
    const auto reads = test::random_reads(3, 200, 50, 500, 0.02);
    for (unsigned k : {8u, 21u, 31u}) {
        test::CountMap got;
        for (const auto& r : reads)
            for (const auto& frag : split_on_invalid(r, k)) {
                const std::string s = frag.bases.to_string();
                for (std::size_t i = 0; i + k <= s.size(); ++i) ++got[s.substr(i, k)];
            }
        EXPECT_EQ(got, test::naive_count(reads, k, false));
    }
}

TEST(Bundles, EmptyStream) {
    VectorReadSource src({});
    EXPECT_FALSE(next_read_bundle(src, 1024).has_value());
}

TEST(Bundles, OneByteCapacity) {
    VectorReadSource src({"ACGT", "GG", "T"});
    for (const char* want : {"ACGT", "GG", "T"}) {
        auto b = next_read_bundle(src, 1);
        ASSERT_TRUE(b.has_value());
        ASSERT_EQ(b->reads.size(), 1u);
        EXPECT_EQ(b->reads[0], want);
    }
    EXPECT_FALSE(next_read_bundle(src, 1).has_value());
}

TEST(Bundles, ConcatenationEqualsInput) {
    const auto reads = test::random_reads(4, 500, 10, 300, 0.0);
    std::size_t bytes = 0;
    for (const auto& r : reads) bytes += r.size();
    for (std::size_t cap : {1u, 100u, 1000u, 1u << 20}) {
        VectorReadSource src(reads);
        std::vector<std::string> got;
        std::size_t total = 0;
        while (auto b = next_read_bundle(src, cap)) {
            if (b->reads.size() > 1) EXPECT_LE(b->total_bytes, cap);
            total += b->total_bytes;
            got.insert(got.end(), b->reads.begin(), b->reads.end());
        }
        EXPECT_EQ(got, reads);
        EXPECT_EQ(total, bytes);
    }
}
