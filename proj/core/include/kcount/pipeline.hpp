#pragma once

#include <cstdint>
#include <iosfwd>

#include "kcount/config.hpp"
#include "kcount/counting.hpp"
#include "kcount/distribution.hpp"

namespace kcount {

inline constexpr const char* kVersion = "1.0.0";

struct RunReport {
    bool ran_distribution = false;
    bool ran_counting = false;
    double distribution_seconds = 0.0;
    double counting_seconds = 0.0;
    /// Size of the input files on disk (phase one only).
    std::uint64_t input_bytes = 0;
    std::uint64_t bases = 0;
    std::uint64_t reads = 0;
    std::uint64_t bins_written = 0;
    std::uint64_t supermers = 0;
    std::uint64_t total_kmers = 0;
    std::uint64_t distinct_kmers = 0;
    std::uint64_t written_kmers = 0;
    std::uint64_t spill_events = 0;
    std::uint64_t peak_table_bytes = 0;
    double first_trial_fraction = 1.0;
    WorkerPlan workers;
};

/// Runs phase one, phase two, or both as selected by config.phase. Bins and
/// the stats file are removed after a full run unless keep_temporary is set;
/// a distribution-only run always keeps them.
RunReport run(const PipelineConfig& config);

void print_report(const RunReport& report, const PipelineConfig& config, std::ostream& out);

std::uint64_t physical_memory_bytes();

}  // namespace kcount
