#include "kcount/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <thread>

#include "kcount/errors.hpp"

namespace fs = std::filesystem;

namespace kcount {

void PipelineConfig::validate() const {
    if (k < kMinK || k > kMaxK)
        throw UsageError("k=" + std::to_string(k) + " outside supported range " + std::to_string(kMinK) + ".." +
                         std::to_string(kMaxK));
    if (m < 1 || m >= k) throw UsageError("minimizer length m must satisfy 1 <= m < k");
    if (m > kMaxMinimizerLength) throw UsageError("minimizer length above " + std::to_string(kMaxMinimizerLength));
    if (bins < 1) throw UsageError("need at least one temporary file");
    if (min_count < 1) throw UsageError("minimum count must be at least 1");
    if (theta < 1) throw UsageError("theta must be at least 1");
    if (window < 1) throw UsageError("probe window must be at least 1");
    if (!(distinct_ratio > 0.0 && distinct_ratio <= 1.0)) throw UsageError("distinct ratio must lie in (0, 1]");
    if (!(load_factor > 0.0 && load_factor < 1.0)) throw UsageError("load factor must lie in (0, 1)");
    if (ordering.strategy == OrderingStrategy::dfp && !(ordering.pivot >= 0.0 && ordering.pivot <= 1.0))
        throw UsageError("dfp pivot must lie in [0, 1]");
    if (work_dir.empty()) throw UsageError("a working directory is required");
    if (phase != PhaseSelect::count_only && inputs.empty()) throw UsageError("no input files given");
    if (phase == PhaseSelect::distribute_only && !output.empty())
        throw UsageError("-x 1 stops after distribution; no output allowed");
    if (phase != PhaseSelect::distribute_only && output.empty()) throw UsageError("an output path is required");
}

WorkerPlan plan_workers(unsigned cores, std::size_t input_files) {
    cores = std::max(cores, 1u);
    WorkerPlan plan;
    plan.distribute.readers = static_cast<unsigned>(std::clamp<std::size_t>(input_files, 1, 2));
    plan.distribute.splitters = cores > 2 ? cores - 2 : 1;
    plan.distribute.writers = 1;
    plan.count.readers = 1;
    plan.count.splitters = std::max(1, static_cast<int>(cores / 2) - 1);
    plan.count.hashers = std::max(1, static_cast<int>(cores) - static_cast<int>(plan.count.splitters) - 2);
    plan.count.writers = 1;
    return plan;
}

unsigned effective_cores(const PipelineConfig& config) {
    if (config.threads != 0) return config.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t physical_memory_bytes() {
    const long pages = ::sysconf(_SC_PHYS_PAGES);
    const long page = ::sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page <= 0) return std::uint64_t{4} << 30;
    return static_cast<std::uint64_t>(pages) * static_cast<std::uint64_t>(page);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunReport run(const PipelineConfig& config) {
    config.validate();
    RunReport report;
    fs::create_directories(config.work_dir);

    DistributionStats stats;
    if (config.phase != PhaseSelect::count_only) {
        const auto t0 = std::chrono::steady_clock::now();
        stats = run_phase_one(config);
        report.distribution_seconds = seconds_since(t0);
        report.ran_distribution = true;
        report.bins_written = stats.bins.size();
        report.supermers = stats.total_supermers();
        report.reads = stats.reads;
        report.bases = stats.bases;
        for (const auto& in : expand_inputs(config.inputs, config.input_format)) {
            std::error_code ec;
            const auto size = fs::file_size(in, ec);
            if (!ec) report.input_bytes += size;
        }
        report.workers = plan_workers(effective_cores(config), config.inputs.size());
        if (config.phase == PhaseSelect::distribute_only) return report;
    } else {
        stats = read_stats(stats_path(config.work_dir));
        report.workers = plan_workers(effective_cores(config), 1);
    }

    const auto t1 = std::chrono::steady_clock::now();
    const CountingTotals totals = run_phase_two(config, stats);
    report.counting_seconds = seconds_since(t1);
    report.ran_counting = true;
    report.total_kmers = totals.total_kmers;
    report.distinct_kmers = totals.distinct_kmers;
    report.written_kmers = totals.written;
    report.spill_events = totals.spill_events;
    report.peak_table_bytes = totals.peak_table_bytes;
    report.first_trial_fraction = totals.probes.first_trial_fraction();
    if (report.bases == 0) report.bases = stats.bases;

    if (!config.keep_temporary) remove_temporary_files(config.work_dir, static_cast<unsigned>(stats.bins.size()));
    return report;
}

void print_report(const RunReport& report, const PipelineConfig& config, std::ostream& out) {
    const double mb = static_cast<double>(report.input_bytes != 0 ? report.input_bytes : report.bases) / 1e6;
    out << std::fixed << std::setprecision(2);
    if (report.ran_distribution) {
        out << "phase one: " << report.distribution_seconds << " s";
        if (report.distribution_seconds > 0) out << " (" << mb / report.distribution_seconds << " MB/s)";
        out << ", " << report.reads << " reads, " << report.supermers << " super-mers in " << report.bins_written
            << " bins\n";
    }
    if (report.ran_counting) {
        out << "phase two: " << report.counting_seconds << " s";
        if (report.counting_seconds > 0) out << " (" << mb / report.counting_seconds << " MB/s)";
        out << ", " << report.total_kmers << " k-mers, " << report.distinct_kmers << " distinct, "
            << report.written_kmers << " written (count >= " << config.min_count << ")\n";
        out << "spill events: " << report.spill_events << ", peak table bytes: " << report.peak_table_bytes
            << ", first-trial insertions: " << std::setprecision(4) << report.first_trial_fraction * 100 << "%\n";
    }
    if (config.verbosity > 0) {
        const auto& w = report.workers;
        out << "workers: phase one " << w.distribute.readers << " reader(s), " << w.distribute.splitters
            << " splitter(s), 1 writer; phase two 1 reader, " << w.count.splitters << " splitter(s), "
            << w.count.hashers << " hasher(s), 1 writer\n";
    }
}

}  // namespace kcount
