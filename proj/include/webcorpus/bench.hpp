#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace webcorpus {

// One repetition of one scenario in one mode.
struct BenchRow {
    int scenario = 0;
    std::string mode;
    int rep = 0;
    double wall_ms = 0;
    std::uint64_t cdx_lines = 0;
    std::uint64_t records_fetched = 0;
    std::uint64_t archive_bytes = 0;
    std::uint64_t records_out = 0;
    std::uint64_t length_sum = 0;
};

struct ScenarioResult {
    int scenario = 0;
    std::string mode;
    std::string description;  // the concrete filter the scenario resolved to
    std::vector<BenchRow> rows;
    double wall_min_ms = 0;
    double wall_median_ms = 0;
    double wall_max_ms = 0;
    std::uint64_t records_out = 0;
    std::uint64_t length_sum = 0;
    std::uint64_t archive_bytes = 0;
    std::uint64_t total_archive_bytes = 0;  // on-disk archive size, for ratios
};

// Benchmark scenarios over a generated corpus directory (archives plus
// index.cdx):
//   1: every capture of one URL (the first URL in CDX order)
//   2: one domain restricted to mime text/html
//   3: one month restricted to status 200, then latest capture per URL
// All three then derive string content, its length, and sum the lengths.
// mode is "selective" or "scan"; each repetition runs the identical plan.
ScenarioResult run_scenario(int scenario, const std::string& mode,
                            const std::filesystem::path& corpus_dir, int reps = 5,
                            std::size_t workers = 0);

// Human-readable comparison table.
std::string format_results(const std::vector<ScenarioResult>& results);

// Machine-readable rows: scenario, mode, rep, wall_ms, cdx_lines,
// records_fetched, archive_bytes, records_out, length_sum.
void write_results_csv(const std::vector<ScenarioResult>& results,
                       const std::filesystem::path& path);

}  // namespace webcorpus
