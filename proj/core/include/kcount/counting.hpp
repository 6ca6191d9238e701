#pragma once

#include <cstdint>

#include "kcount/config.hpp"
#include "kcount/count_table.hpp"
#include "kcount/distribution.hpp"

namespace kcount {

struct CountingTotals {
    std::uint64_t total_kmers = 0;
    std::uint64_t distinct_kmers = 0;
    /// Entries that passed the minimum count and went to the result file.
    std::uint64_t written = 0;
    /// k-mer insertions routed to a spill channel (first round only).
    std::uint64_t spill_events = 0;
    std::uint64_t sorted_fallbacks = 0;
    /// Estimated peak bytes of concurrently live count tables.
    std::uint64_t peak_table_bytes = 0;
    std::uint64_t clamped_bins = 0;
    unsigned bins_processed = 0;
    double final_ratio = 0.0;
    ProbeStats probes;
};

/// Phase two: counts every bin listed in `stats` (bins are processed one
/// after another) and writes the result file, plus the CSV histogram when
/// requested. Refuses stats written for a different k or normalization.
CountingTotals run_phase_two(const PipelineConfig& config, const DistributionStats& stats);

/// Path of the CSV histogram written next to the binary result file.
std::filesystem::path histogram_path(const std::filesystem::path& output);

}  // namespace kcount
