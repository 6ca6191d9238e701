#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kcount/config.hpp"
#include "kcount/ordering.hpp"

namespace kcount::cli {

enum class Command { count, eval_ordering, system_check, version, help };

struct CliInvocation {
    Command command = Command::count;
    PipelineConfig config;
    /// -x arguments as given.
    std::vector<std::string> stages;
    bool gpu_requested = false;
    bool memory_auto = true;
    bool minimizer_auto = true;
    /// eval-ordering strategies.
    std::vector<OrderingSpec> orderings;
    std::filesystem::path check_dir = ".";
    std::string help;
};

/// Pure function of argv (argv[0] is the program name). The subcommand may be
/// omitted, in which case `count` is assumed. Throws UsageError.
CliInvocation parse_args(const std::vector<std::string>& argv);

std::string help_text();

/// "512MB", "4GB", "4g", "300" (MB) -> bytes.
std::uint64_t parse_memory_size(const std::string& text);

struct SystemReport {
    unsigned cores = 0;
    std::uint64_t memory_bytes = 0;
    std::filesystem::path directory;
    std::uint64_t free_before = 0;
    /// Free space while the probe file exists.
    std::uint64_t free_during = 0;
    std::uint64_t probe_bytes = 0;
    double write_mb_per_s = 0.0;
    double read_mb_per_s = 0.0;
    bool probe_ok = false;
    bool probe_removed = false;
    std::string error;
};

/// Core count, memory, free space and a sequential write/read probe of `dir`.
/// Probe failures are reported in the result, never thrown.
SystemReport system_check(const std::filesystem::path& dir, std::uint64_t probe_bytes = std::uint64_t{64} << 20);
void print_system_report(const SystemReport& report, std::ostream& out);

/// Entry point behind main(); returns the process exit status.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace kcount::cli
