#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "kcount/ordering.hpp"
#include "kcount/seqio.hpp"

namespace kcount {

enum class PhaseSelect { both, distribute_only, count_only };

struct PipelineConfig {
    unsigned k = 28;
    unsigned m = 7;
    unsigned bins = 512;
    std::uint32_t min_count = 3;
    unsigned theta = 64;
    unsigned window = 1;
    /// Cap on the bytes of concurrently live count tables.
    std::uint64_t memory_bytes = std::uint64_t{1} << 30;
    /// 0 = detect.
    unsigned threads = 0;
    OrderingSpec ordering{};
    bool canonical = true;
    PhaseSelect phase = PhaseSelect::both;
    /// Keep the stats file and the bin files after counting.
    bool keep_temporary = false;
    bool histogram_csv = false;
    unsigned verbosity = 0;

    double distinct_ratio = 0.2;
    double load_factor = 0.7;
    /// Per-table slot count override; 0 = estimate from the stats file.
    std::uint64_t table_capacity = 0;
    std::size_t bundle_bytes = std::size_t{4} << 20;
    std::size_t queue_items = 64;

    InputFormat input_format = InputFormat::detect;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path work_dir;
    std::filesystem::path output;

    /// Throws UsageError for out-of-range values.
    void validate() const;
};

}  // namespace kcount

namespace kcount {

/// Worker counts per pipeline stage.
struct WorkerPlan {
    struct PhaseOne {
        unsigned readers = 1;
        unsigned splitters = 1;
        unsigned writers = 1;
    } distribute;
    struct PhaseTwo {
        unsigned readers = 1;
        unsigned splitters = 1;
        unsigned hashers = 1;
        unsigned writers = 1;
    } count;
};

/// Deterministic allocation from a core count (the -t value when given):
/// phase one runs min(files, 2) readers, max(1, cores-2) splitters and one
/// writer; phase two one reader, max(1, cores/2-1) splitters,
/// max(1, cores-splitters-2) hashers and one writer.
WorkerPlan plan_workers(unsigned cores, std::size_t input_files);

/// Cores from -t or std::thread::hardware_concurrency().
unsigned effective_cores(const PipelineConfig& config);

}  // namespace kcount
