#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cctype>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "kcount/errors.hpp"
#include "kcount/ordering.hpp"
#include "kcount/pipeline.hpp"
#include "kcount/seqio.hpp"

namespace fs = std::filesystem;

namespace kcount::cli {

namespace {

struct CountOptions {
    unsigned k = 28;
    std::string m = "auto";
    std::string memory = "auto";
    unsigned bins = 512;
    std::string threads = "auto";
    std::uint32_t min_count = 3;
    std::vector<std::string> stages;
    std::vector<std::string> paths;
    std::string ordering = "kmc2";
    std::uint64_t sample = 1'000'000;
    unsigned theta = 64;
    unsigned window = 1;
    double ratio = 0.2;
    double load = 0.7;
    std::uint64_t table_capacity = 0;
    std::size_t bundle = std::size_t{4} << 20;
    std::string input_type = "auto";
};

struct EvalOptions {
    unsigned k = 28;
    unsigned m = 7;
    std::vector<std::string> orderings;
    std::uint64_t sample = 1'000'000;
    std::string input_type = "auto";
    std::string input;
};

struct Apps {
    CLI::App app{"Two-phase disk-based k-mer counter", "kcount"};
    CLI::App* count = nullptr;
    CLI::App* eval = nullptr;
    bool version = false;
    bool check = false;
    std::string check_dir = ".";
    CountOptions c;
    bool verbose_count = false;
    std::size_t verbosity = 0;
    bool gpu = false;
    bool no_norm = false;
    EvalOptions e;
    bool eval_no_norm = false;

    Apps() {
        app.set_help_flag("-h,--help", "Print this help message and exit");
        app.add_flag("-v", version, "Show version number");
        app.add_flag("-s", check, "Perform a system check and display information about the system");
        app.add_option("--check-dir", check_dir, "Directory probed by the system check")->capture_default_str();

        count = app.add_subcommand("count", "Count k-mers: count [options] <input> <tempDirectory> [<output>]");
        count->add_option("-k", c.k, "Length of the k-mers to count (8..479)")->capture_default_str();
        count->add_option("-m", c.m, "Minimizer length (auto = 7)")->capture_default_str();
        count->add_option("-e", c.memory, "Maximal main memory for count tables, in MB or GB (auto = 75% of RAM)")
            ->capture_default_str();
        count->add_option("-f", c.bins, "Number of temporary files")->capture_default_str();
        count->add_option("-t", c.threads, "Maximal number of parallel threads (auto = all cores)")
            ->capture_default_str();
        count->add_option("-l", c.min_count, "Minimal occurrence of a k-mer to be written")->capture_default_str();
        count->add_flag("-i", verbosity, "Enable additional output");
        count->add_flag("-g", gpu, "Enable GPU mode (not available in this build; counting stays on the CPU)");
        count->add_flag("-d", no_norm, "Disable normalization: count a k-mer and its reverse complement separately");
        count->add_option("-x", c.stages,
                          "1: stop after phase one (keeps bins and binStatFile, no output allowed); "
                          "2: only run phase two; b: keep binStatFile and bins; h: also write a CSV histogram")
            ->expected(1)
            ->allow_extra_args(false)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
            ->check(CLI::IsMember({"1", "2", "b", "h"}));
        count->add_option("--ordering", c.ordering,
                          "Minimizer ordering: kmc2, cgat, roberts, random:<seed>, dfp:<pivot>, lexicographic")
            ->capture_default_str();
        count->add_option("--sample", c.sample, "Sampled m-mer positions for dfp")->capture_default_str();
        count->add_option("--theta", c.theta, "Maximal probe trials before a k-mer is spilled")->capture_default_str();
        count->add_option("--window", c.window, "Consecutive slots scanned per probe trial")->capture_default_str();
        count->add_option("--ratio", c.ratio, "Initial distinct/total k-mer ratio for table sizing")
            ->capture_default_str();
        count->add_option("--load-factor", c.load, "Target count table load factor")->capture_default_str();
        count->add_option("--table-capacity", c.table_capacity, "Fixed slots per count table (0 = estimate)")
            ->capture_default_str();
        count->add_option("--bundle-bytes", c.bundle, "Read bundle capacity in bytes")->capture_default_str();
        count->add_option("--input-type", c.input_type, "Input type: auto, fasta, fastq, list")->capture_default_str();
        count->add_option("paths", c.paths, "<input> <tempDirectory> [<output>]")->expected(1, 3);

        eval = app.add_subcommand("eval-ordering",
                                  "Compare minimizer orderings; prints "
                                  "strategy,m,k,total_supermers,max_distinct_kmers_per_minimizer");
        eval->add_option("-k", e.k, "k-mer length")->capture_default_str();
        eval->add_option("-m", e.m, "Minimizer length")->capture_default_str();
        eval->add_option("--ordering", e.orderings, "Orderings to evaluate (default: all strategies)");
        eval->add_option("--sample", e.sample, "Sampled m-mer positions for dfp")->capture_default_str();
        eval->add_flag("-d", eval_no_norm, "Disable normalization");
        eval->add_option("--input-type", e.input_type, "Input type: auto, fasta, fastq, list")->capture_default_str();
        eval->add_option("input", e.input, "Reads to evaluate")->required();

        app.require_subcommand(0, 1);
    }
};

bool is_top_level(const std::string& arg) {
    return arg == "count" || arg == "eval-ordering" || arg == "-v" || arg == "-s" || arg == "-h" ||
           arg == "--help" || arg.rfind("--check-dir", 0) == 0;
}

unsigned parse_unsigned(const std::string& text, const char* what) {
    unsigned value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
        throw UsageError(std::string("invalid value for ") + what + ": '" + text + "'");
    return value;
}

std::vector<OrderingSpec> default_orderings() {
    std::vector<OrderingSpec> out;
    for (const char* tag : {"cgat", "roberts", "kmc2", "random:42", "dfp:0", "dfp:0.5", "dfp:0.8", "dfp:1"})
        out.push_back(OrderingSpec::parse(tag));
    return out;
}

void fill_count(CliInvocation& inv, const Apps& a) {
    const CountOptions& c = a.c;
    PipelineConfig& cfg = inv.config;
    cfg.k = c.k;
    inv.minimizer_auto = c.m == "auto";
    cfg.m = inv.minimizer_auto ? 7 : parse_unsigned(c.m, "-m");
    inv.memory_auto = c.memory == "auto";
    cfg.memory_bytes = inv.memory_auto ? physical_memory_bytes() / 4 * 3 : parse_memory_size(c.memory);
    cfg.bins = c.bins;
    cfg.threads = c.threads == "auto" ? 0 : parse_unsigned(c.threads, "-t");
    if (c.threads != "auto" && cfg.threads == 0) throw UsageError("-t needs at least one thread");
    cfg.min_count = c.min_count;
    cfg.verbosity = static_cast<unsigned>(a.verbosity);
    cfg.canonical = !a.no_norm;
    inv.gpu_requested = a.gpu;

    inv.stages = c.stages;
    std::set<std::string> seen;
    for (const auto& s : c.stages)
        if (!seen.insert(s).second) throw UsageError("-x " + s + " given twice");
    if (seen.count("1") && seen.count("2")) throw UsageError("-x 1 and -x 2 exclude each other");
    cfg.phase = seen.count("1") ? PhaseSelect::distribute_only
              : seen.count("2") ? PhaseSelect::count_only
                                : PhaseSelect::both;
    cfg.keep_temporary = seen.count("b") > 0;
    cfg.histogram_csv = seen.count("h") > 0;

    cfg.ordering = OrderingSpec::parse(c.ordering);
    cfg.ordering.sample_budget = c.sample;
    cfg.theta = c.theta;
    cfg.window = c.window;
    cfg.distinct_ratio = c.ratio;
    cfg.load_factor = c.load;
    cfg.table_capacity = c.table_capacity;
    cfg.bundle_bytes = c.bundle;
    cfg.input_format = parse_input_format(c.input_type);

    const auto& p = c.paths;
    switch (cfg.phase) {
        case PhaseSelect::distribute_only:
            if (p.size() == 3) throw UsageError("-x 1 stops after phase one; no output allowed");
            if (p.size() != 2) throw UsageError("expected <input> <tempDirectory>");
            cfg.inputs = {p[0]};
            cfg.work_dir = p[1];
            break;
        case PhaseSelect::count_only:
            if (p.size() == 2) {
                cfg.work_dir = p[0];
                cfg.output = p[1];
            } else if (p.size() == 3) {
                cfg.work_dir = p[1];
                cfg.output = p[2];
            } else {
                throw UsageError("expected [<input>] <tempDirectory> <output>");
            }
            break;
        case PhaseSelect::both:
            if (p.size() != 3) throw UsageError("expected <input> <tempDirectory> <output>");
            cfg.inputs = {p[0]};
            cfg.work_dir = p[1];
            cfg.output = p[2];
            break;
    }
    cfg.validate();
}

}  // namespace

std::uint64_t parse_memory_size(const std::string& text) {
    std::size_t digits = 0;
    while (digits < text.size() && (std::isdigit(static_cast<unsigned char>(text[digits])) || text[digits] == '.'))
        ++digits;
    if (digits == 0) throw UsageError("invalid memory size '" + text + "'");
    double value = 0;
    try {
        value = std::stod(text.substr(0, digits));
    } catch (const std::exception&) {
        throw UsageError("invalid memory size '" + text + "'");
    }
    std::string unit = text.substr(digits);
    std::transform(unit.begin(), unit.end(), unit.begin(), [](unsigned char ch) { return std::toupper(ch); });
    double scale = 0;
    if (unit.empty() || unit == "M" || unit == "MB") scale = 1 << 20;
    else if (unit == "G" || unit == "GB") scale = 1 << 30;
    else throw UsageError("unknown memory unit '" + unit + "' (use MB or GB)");
    const auto bytes = static_cast<std::uint64_t>(value * scale);
    if (bytes == 0) throw UsageError("memory size must be positive");
    return bytes;
}

CliInvocation parse_args(const std::vector<std::string>& argv) {
    std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
    if (!args.empty() && !is_top_level(args.front())) args.insert(args.begin(), "count");

    Apps a;
    CliInvocation inv;
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        a.app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        inv.command = Command::help;
        inv.help = help_text();
        return inv;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (a.version) {
        inv.command = Command::version;
        return inv;
    }
    if (a.check) {
        inv.command = Command::system_check;
        inv.check_dir = a.check_dir;
        return inv;
    }
    if (a.eval->parsed()) {
        inv.command = Command::eval_ordering;
        inv.config.k = a.e.k;
        inv.config.m = a.e.m;
        inv.config.canonical = !a.eval_no_norm;
        inv.config.input_format = parse_input_format(a.e.input_type);
        inv.config.inputs = {a.e.input};
        if (inv.config.k < kMinK || inv.config.k > kMaxK) throw UsageError("k outside 8..479");
        if (inv.config.m < 1 || inv.config.m >= inv.config.k || inv.config.m > kMaxMinimizerLength)
            throw UsageError("minimizer length must satisfy 1 <= m < k and m <= 12");
        if (a.e.orderings.empty()) {
            inv.orderings = default_orderings();
        } else {
            for (const auto& tag : a.e.orderings) inv.orderings.push_back(OrderingSpec::parse(tag));
        }
        for (auto& o : inv.orderings) o.sample_budget = a.e.sample;
        return inv;
    }
    if (!a.count->parsed()) {
        inv.command = Command::help;
        inv.help = help_text();
        return inv;
    }
    inv.command = Command::count;
    fill_count(inv, a);
    return inv;
}

std::string help_text() {
    Apps a;
    return a.app.help() + "\n" + a.count->help() + "\n" + a.eval->help();
}

SystemReport system_check(const fs::path& dir, std::uint64_t probe_bytes) {
    SystemReport r;
    r.cores = std::max(1u, std::thread::hardware_concurrency());
    r.memory_bytes = physical_memory_bytes();
    r.directory = dir;
    r.probe_bytes = probe_bytes;

    std::error_code ec;
    const auto before = fs::space(dir, ec);
    if (ec) {
        r.error = "cannot query free space of '" + dir.string() + "': " + ec.message();
        return r;
    }
    r.free_before = before.available;

    const fs::path probe = dir / ("kcount_probe_" + std::to_string(::getpid()) + ".tmp");
    using clock = std::chrono::steady_clock;
    std::vector<char> block(1 << 20, 'x');
    try {
        std::FILE* f = std::fopen(probe.c_str(), "wb");
        if (f == nullptr) throw IoError("cannot create probe file '" + probe.string() + "'");
        const auto t0 = clock::now();
        std::uint64_t written = 0;
        while (written < probe_bytes) {
            const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(block.size(), probe_bytes - written));
            if (std::fwrite(block.data(), 1, n, f) != n) {
                std::fclose(f);
                throw IoError("write probe failed");
            }
            written += n;
        }
        std::fflush(f);
        ::fsync(::fileno(f));
        std::fclose(f);
        const double wsec = std::chrono::duration<double>(clock::now() - t0).count();
        r.write_mb_per_s = static_cast<double>(probe_bytes) / 1e6 / std::max(wsec, 1e-9);

        const auto during = fs::space(dir, ec);
        r.free_during = ec ? 0 : during.available;

        f = std::fopen(probe.c_str(), "rb");
        if (f == nullptr) throw IoError("cannot reopen probe file");
        const auto t1 = clock::now();
        std::uint64_t read = 0;
        for (std::size_t n; (n = std::fread(block.data(), 1, block.size(), f)) > 0;) read += n;
        std::fclose(f);
        const double rsec = std::chrono::duration<double>(clock::now() - t1).count();
        r.read_mb_per_s = static_cast<double>(read) / 1e6 / std::max(rsec, 1e-9);
        r.probe_ok = read == probe_bytes;
        if (!r.probe_ok) r.error = "read back " + std::to_string(read) + " of " + std::to_string(probe_bytes) + " bytes";
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    fs::remove(probe, ec);
    r.probe_removed = !fs::exists(probe);
    return r;
}

void print_system_report(const SystemReport& r, std::ostream& out) {
    const auto mib = [](std::uint64_t b) { return static_cast<double>(b) / (1 << 20); };
    out << std::fixed << std::setprecision(1);
    out << "cores:            " << r.cores << '\n'
        << "main memory:      " << mib(r.memory_bytes) << " MiB\n"
        << "working dir:      " << r.directory.string() << '\n'
        << "free space:       " << mib(r.free_before) << " MiB\n";
    if (r.probe_ok) {
        out << "sequential write: " << r.write_mb_per_s << " MB/s (" << mib(r.probe_bytes) << " MiB probe)\n"
            << "sequential read:  " << r.read_mb_per_s << " MB/s\n";
    } else {
        out << "disk probe failed: " << r.error << '\n';
    }
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    try {
        const CliInvocation inv = parse_args(argv);
        switch (inv.command) {
            case Command::help:
                out << inv.help;
                return 0;
            case Command::version:
                out << "kcount " << kVersion << '\n';
                return 0;
            case Command::system_check:
                print_system_report(system_check(inv.check_dir), out);
                return 0;
            case Command::eval_ordering: {
                const auto files = expand_inputs(inv.config.inputs, inv.config.input_format);
                const InputFormat per_file =
                    inv.config.input_format == InputFormat::list ? InputFormat::detect : inv.config.input_format;
                out << "strategy,m,k,total_supermers,max_distinct_kmers_per_minimizer\n";
                for (const auto& spec : inv.orderings) {
                    const auto ord = build_ordering(spec, inv.config.m, [&](unsigned m, std::uint64_t budget) {
                        MultiFileReader reads(files, per_file);
                        return sample_frequencies(reads, m, budget);
                    });
                    MultiFileReader reads(files, per_file);
                    const auto metrics = evaluate_ordering(reads, inv.config.k, ord, inv.config.canonical);
                    out << spec.tag() << ',' << inv.config.m << ',' << inv.config.k << ','
                        << metrics.total_supermers << ',' << metrics.max_distinct_kmers_per_minimizer << '\n';
                }
                return 0;
            }
            case Command::count: {
                if (inv.gpu_requested) err << "GPU mode unsupported in this build\n";
                const RunReport report = run(inv.config);
                if (inv.config.verbosity > 0 || inv.config.phase != PhaseSelect::both)
                    print_report(report, inv.config, err);
                return 0;
            }
        }
    } catch (const Error& e) {
        err << "kcount: " << e.what() << '\n';
        if (e.kind() == ErrorKind::usage) err << "run 'kcount --help' for usage\n";
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        err << "kcount: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::io);
    } catch (const std::exception& e) {
        err << "kcount: internal error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::internal);
    }
    return static_cast<int>(ErrorKind::internal);
}

}  // namespace kcount::cli
