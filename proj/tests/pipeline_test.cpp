#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "kcount/bounded_queue.hpp"
#include "kcount/counting.hpp"
#include "kcount/distribution.hpp"
#include "kcount/errors.hpp"
#include "test_util.hpp"

using namespace kcount;
namespace fs = std::filesystem;

TEST(Queue, DeliversEverythingInOrder) {
    BoundedQueue<int> q(1);
    std::thread producer([&] {
        for (int i = 0; i < 1000; ++i) q.push(i);
        q.producer_done();
    });
    int expected = 0;
    while (auto v = q.pop()) EXPECT_EQ(*v, expected++);
    producer.join();
    EXPECT_EQ(expected, 1000);
}

TEST(Queue, ManyProducers) {
    BoundedQueue<int> q(3, 4);
    std::vector<std::thread> producers;
    for (int p = 0; p < 4; ++p)
        producers.emplace_back([&] {
            for (int i = 1; i <= 500; ++i) q.push(i);
            q.producer_done();
        });
    long sum = 0;
    while (auto v = q.pop()) sum += *v;
    for (auto& t : producers) t.join();
    EXPECT_EQ(sum, 4L * 500 * 501 / 2);
}

TEST(Queue, AbortWakesBlockedProducer) {
    BoundedQueue<int> q(1);
    q.push(1);
    std::thread producer([&] { q.push(2); });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    q.abort();
    producer.join();
    EXPECT_FALSE(q.pop().has_value());
}

TEST(Workers, SingleCore) {
    const WorkerPlan p = plan_workers(1, 3);
    EXPECT_EQ(p.distribute.readers, 2u);
    EXPECT_EQ(p.distribute.splitters, 1u);
    EXPECT_EQ(p.distribute.writers, 1u);
    EXPECT_EQ(p.count.readers, 1u);
    EXPECT_EQ(p.count.splitters, 1u);
    EXPECT_EQ(p.count.hashers, 1u);
    EXPECT_EQ(p.count.writers, 1u);
}

TEST(Workers, Deterministic) {
    const WorkerPlan p = plan_workers(4, 1);
    EXPECT_EQ(p.distribute.readers, 1u);
    EXPECT_EQ(p.distribute.splitters, 2u);
    EXPECT_EQ(p.count.splitters, 1u);
    EXPECT_EQ(p.count.hashers, 1u);
    const WorkerPlan q = plan_workers(16, 5);
    EXPECT_EQ(q.distribute.readers, 2u);
    EXPECT_EQ(q.distribute.splitters, 14u);
    EXPECT_EQ(q.count.splitters, 7u);
    EXPECT_EQ(q.count.hashers, 7u);
    PipelineConfig cfg;
    cfg.threads = 4;
    EXPECT_EQ(effective_cores(cfg), 4u);
}

TEST(Config, Validation) {
    test::TempDir dir;
    PipelineConfig cfg = test::small_config(dir, 28, 8, true);
    EXPECT_NO_THROW(cfg.validate());
    cfg.k = 7;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.k = 480;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.k = 28;
    cfg.m = 28;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.m = 7;
    cfg.bins = 0;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.bins = 8;
    cfg.phase = PhaseSelect::distribute_only;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.output.clear();
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Run, WorkedExampleEndToEnd) {
    test::TempDir dir;
    test::write_fasta(dir / "reads.fa", {"CAAGAACAGTG"});
    PipelineConfig cfg = test::small_config(dir, 8, 4, false);
    cfg.k = 4;
    cfg.m = 3;
    cfg.ordering = OrderingSpec::parse("lexicographic");
    const auto stats = run_phase_one(cfg);
    const auto totals = run_phase_two(cfg, stats);
    EXPECT_EQ(totals.total_kmers, 8u);
    EXPECT_EQ(totals.distinct_kmers, 8u);
    const auto got = test::load_results(cfg.output, 4);
    EXPECT_EQ(got.size(), 8u);
    for (const auto& [kmer, count] : got) EXPECT_EQ(count, 1u) << kmer;
    EXPECT_EQ(got, test::naive_count({"CAAGAACAGTG"}, 4, false));

    cfg.min_count = 2;
    run_phase_two(cfg, run_phase_one(cfg));
    EXPECT_EQ(fs::file_size(cfg.output), 0u);
}

TEST(Run, EmptyInput) {
    test::TempDir dir;
    test::write_fasta(dir / "reads.fa", {});
    const auto report = run(test::small_config(dir, 28, 8, true));
    EXPECT_EQ(report.distinct_kmers, 0u);
    EXPECT_EQ(fs::file_size(dir / "out.bin"), 0u);
}

TEST(Run, MatchesNaiveCounter) {
    test::TempDir dir;
    const auto reads = test::random_reads(1, 150, 50, 400, 0.02);
    test::write_fastq(dir / "reads.fa", reads);
    for (unsigned k : {8u, 31u, 32u, 33u, 64u, 65u}) {
        for (bool canonical : {true, false}) {
            PipelineConfig cfg = test::small_config(dir, k, 8, canonical);
            const auto report = run(cfg);
            const auto want = test::naive_count(reads, k, canonical);
            EXPECT_EQ(test::load_results(cfg.output, k), want) << k << " " << canonical;
            EXPECT_EQ(report.distinct_kmers, want.size());
            EXPECT_FALSE(fs::exists(stats_path(cfg.work_dir)));
        }
    }
}

TEST(Run, MinCountFilter) {
    test::TempDir dir;
    std::vector<std::string> reads(3, "ACGTTGCAACGTAGCTAGCTAGGATCGA");
    reads.push_back("GGGGGGGGGGGGGGGGGGGGGGGGGGGGGGGG");
    test::write_fasta(dir / "reads.fa", reads);
    PipelineConfig cfg = test::small_config(dir, 21, 4, true);
    cfg.min_count = 3;
    run(cfg);
    test::CountMap want;
    for (const auto& [kmer, c] : test::naive_count(reads, 21, true))
        if (c >= 3) want[kmer] = c;
    EXPECT_EQ(test::load_results(cfg.output, 21), want);
}

TEST(Run, ForcedSpillingIsExact) {
    test::TempDir dir;
    const auto reads = test::random_reads(2, 40, 200, 400, 0.0);
    test::write_fasta(dir / "reads.fa", reads);
    PipelineConfig cfg = test::small_config(dir, 25, 4, true);
    cfg.table_capacity = 2;
    cfg.theta = 1;
    const auto report = run(cfg);
    EXPECT_GT(report.spill_events, 0u);
    EXPECT_EQ(test::load_results(cfg.output, 25), test::naive_count(reads, 25, true));
}

TEST(Run, SplitPhasesMatchSingleRun) {
    test::TempDir dir;
    const auto reads = test::random_reads(3, 100, 50, 300, 0.02);
    test::write_fasta(dir / "reads.fa", reads);
    PipelineConfig cfg = test::small_config(dir, 31, 16, true);
    cfg.histogram_csv = true;
    run(cfg);
    const std::string single = test::slurp(histogram_path(cfg.output));

    PipelineConfig one = cfg;
    one.phase = PhaseSelect::distribute_only;
    one.output.clear();
    run(one);
    EXPECT_TRUE(fs::exists(stats_path(cfg.work_dir)));
    PipelineConfig two = cfg;
    two.phase = PhaseSelect::count_only;
    two.output = dir / "split.bin";
    run(two);
    EXPECT_EQ(test::slurp(histogram_path(two.output)), single);
    EXPECT_EQ(test::load_results(two.output, 31), test::load_results(cfg.output, 31));
}

TEST(Run, CountOnlyRejectsMismatchedK) {
    test::TempDir dir;
    test::write_fasta(dir / "reads.fa", test::random_reads(4, 10, 100, 100, 0.0));
    PipelineConfig cfg = test::small_config(dir, 31, 4, true);
    cfg.phase = PhaseSelect::distribute_only;
    cfg.output.clear();
    run(cfg);
    cfg.phase = PhaseSelect::count_only;
    cfg.output = dir / "out.bin";
    cfg.k = 29;
    EXPECT_THROW(run(cfg), UsageError);
    cfg.k = 31;
    cfg.canonical = false;
    EXPECT_THROW(run(cfg), UsageError);
}

TEST(Run, CountOnlyWithoutStatsIsIoError) {
    test::TempDir dir;
    PipelineConfig cfg = test::small_config(dir, 31, 4, true);
    cfg.phase = PhaseSelect::count_only;
    EXPECT_THROW(run(cfg), IoError);
}

TEST(Run, KeepTemporaryFiles) {
    test::TempDir dir;
    test::write_fasta(dir / "reads.fa", test::random_reads(5, 10, 100, 100, 0.0));
    PipelineConfig cfg = test::small_config(dir, 31, 4, true);
    cfg.keep_temporary = true;
    run(cfg);
    EXPECT_TRUE(fs::exists(stats_path(cfg.work_dir)));
    EXPECT_TRUE(fs::exists(bin_path(cfg.work_dir, 3)));
}

TEST(Run, OutputIndependentOfWorkersAndBuffers) {
    test::TempDir dir;
    test::write_fasta(dir / "reads.fa", test::random_reads(6, 200, 50, 400, 0.02));
    std::string first;
    for (unsigned threads : {1u, 3u, 8u}) {
        PipelineConfig cfg = test::small_config(dir, 27, 8, true);
        cfg.threads = threads;
        cfg.queue_items = threads;
        cfg.bundle_bytes = 100 * threads;
        cfg.histogram_csv = true;
        cfg.ordering = OrderingSpec::parse("random:42");
        run(cfg);
        const std::string csv = test::slurp(histogram_path(cfg.output));
        if (first.empty()) first = csv;
        EXPECT_EQ(csv, first) << threads;
    }
    EXPECT_FALSE(first.empty());
}

TEST(Run, GzipAndListInputs) {
    test::TempDir dir;
    const auto a = test::random_reads(7, 30, 100, 200, 0.0);
    const auto b = test::random_reads(8, 30, 100, 200, 0.0);
    test::write_fasta(dir / "a.fa", a);
    test::write_fastq(dir / "b.fq", b);
    std::ofstream(dir / "list.txt") << (dir / "a.fa").string() << '\n' << (dir / "b.fq").string() << '\n';
    PipelineConfig cfg = test::small_config(dir, 21, 4, true);
    cfg.inputs = {dir / "list.txt"};
    run(cfg);
    std::vector<std::string> all = a;
    all.insert(all.end(), b.begin(), b.end());
    EXPECT_EQ(test::load_results(cfg.output, 21), test::naive_count(all, 21, true));
}

TEST(Run, MissingInputIsIoError) {
    test::TempDir dir;
    PipelineConfig cfg = test::small_config(dir, 21, 4, true);
    cfg.inputs = {dir / "nope.fa"};
    EXPECT_THROW(run(cfg), IoError);
}
