#include "webcorpus/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "webcorpus/cdx.hpp"
#include "webcorpus/filter.hpp"
#include "webcorpus/json_output.hpp"
#include "webcorpus/pipeline.hpp"

namespace webcorpus {

namespace {

struct ScenarioSpec {
    FilterExpr filter;
    bool latest = false;
    std::string description;
};

// Scenario parameters come from the corpus itself so the harness runs on
// any generated corpus: the first CDX row fixes the URL and domain, the
// earliest timestamp fixes the month.
ScenarioSpec resolve_scenario(int scenario, const std::filesystem::path& cdx_path) {
    std::string first_url;
    std::string first_surt;
    std::string min_ts;
    bool first = true;
    for_each_cdx_record(cdx_path, [&](CdxRecord&& row) {
        if (first) {
            first_url = row.original_url;
            first_surt = row.surt_url;
            first = false;
        }
        if (min_ts.empty() || row.timestamp < min_ts) min_ts = row.timestamp;
    });
    if (first) throw Error("benchmark corpus has an empty CDX: " + cdx_path.string());

    ScenarioSpec spec;
    switch (scenario) {
        case 1:
            spec.description = "url == \"" + first_url + "\"";
            spec.filter = parse_filter(spec.description);
            break;
        case 2: {
            const std::string domain = host_from_surt(first_surt);
            spec.description = "domain == " + domain + " && mime == text/html";
            spec.filter = parse_filter(spec.description);
            break;
        }
        case 3:
            spec.description =
                "timestamp prefix " + min_ts.substr(0, 6) + " && status == 200";
            spec.filter = parse_filter(spec.description);
            spec.latest = true;
            spec.description += " && latest per url";
            break;
        default:
            throw Error("unknown benchmark scenario " + std::to_string(scenario));
    }
    return spec;
}

std::uint64_t sum_lengths(const std::vector<EnrichedRecord>& records) {
    std::uint64_t sum = 0;
    for (const EnrichedRecord& record : records)
        if (auto len = get_path_as<std::int64_t>(record, "payload.string.length"))
            sum += static_cast<std::uint64_t>(*len);
    return sum;
}

std::uint64_t archive_size(const std::filesystem::path& dir) {
    std::uint64_t total = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".warc.gz") || name.ends_with(".arc.gz"))
            total += entry.file_size();
    }
    return total;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0;
    if (n % 2) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

ScenarioResult run_scenario(int scenario, const std::string& mode,
                            const std::filesystem::path& corpus_dir, int reps,
                            std::size_t workers) {
    if (mode != "selective" && mode != "scan")
        throw Error("benchmark mode must be 'selective' or 'scan', got '" + mode + "'");
    if (reps <= 0) throw Error("benchmark needs at least one repetition");
    const std::filesystem::path cdx_path = corpus_dir / "index.cdx";
    if (!std::filesystem::exists(cdx_path))
        throw Error("missing CDX index: " + cdx_path.string());

    const ScenarioSpec spec = resolve_scenario(scenario, cdx_path);

    auto registry = std::make_shared<const Registry>(Registry::with_builtins());
    PlanSource source{{cdx_path}, corpus_dir};
    Plan plan = Plan(source, registry).with_filter(spec.filter);
    if (spec.latest) plan = plan.latest_per_url();
    plan = plan.enrich("string").map_enrich("payload.string", "length",
                                            [](const FieldValue& value) {
                                                return FieldValue(static_cast<std::int64_t>(
                                                    std::get<std::string>(value).size()));
                                            });

    ExecuteOptions options;
    options.workers = workers;

    ScenarioResult result;
    result.scenario = scenario;
    result.mode = mode;
    result.description = spec.description;
    result.total_archive_bytes = archive_size(corpus_dir);

    std::vector<double> walls;
    for (int rep = 1; rep <= reps; ++rep) {
        auto [records, stats] = mode == "selective" ? execute_selective(plan, options)
                                                    : execute_scan(plan, options);
        BenchRow row;
        row.scenario = scenario;
        row.mode = mode;
        row.rep = rep;
        row.wall_ms = stats.wall_time.count();
        row.cdx_lines = stats.cdx_lines_read;
        row.records_fetched = stats.records_fetched;
        row.archive_bytes = stats.archive_bytes_read;
        row.records_out = stats.records_out;
        row.length_sum = sum_lengths(records);
        walls.push_back(row.wall_ms);

        result.records_out = row.records_out;
        result.length_sum = row.length_sum;
        result.archive_bytes = row.archive_bytes;
        result.rows.push_back(std::move(row));
    }
    result.wall_min_ms = *std::min_element(walls.begin(), walls.end());
    result.wall_max_ms = *std::max_element(walls.begin(), walls.end());
    result.wall_median_ms = median(walls);
    return result;
}

std::string format_results(const std::vector<ScenarioResult>& results) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-4s %-10s %10s %10s %10s %12s %10s %14s\n", "sc",
                  "mode", "min_ms", "median_ms", "max_ms", "bytes_read", "records", "length_sum");
    out += line;
    for (const ScenarioResult& r : results) {
        std::snprintf(line, sizeof(line), "%-4d %-10s %10.1f %10.1f %10.1f %12llu %10llu %14llu\n",
                      r.scenario, r.mode.c_str(), r.wall_min_ms, r.wall_median_ms, r.wall_max_ms,
                      static_cast<unsigned long long>(r.archive_bytes),
                      static_cast<unsigned long long>(r.records_out),
                      static_cast<unsigned long long>(r.length_sum));
        out += line;
    }
    for (const ScenarioResult& r : results) {
        std::snprintf(line, sizeof(line), "scenario %d (%s): %s\n", r.scenario, r.mode.c_str(),
                      r.description.c_str());
        out += line;
    }
    return out;
}

void write_results_csv(const std::vector<ScenarioResult>& results,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "scenario,mode,rep,wall_ms,cdx_lines,records_fetched,archive_bytes,records_out,"
           "length_sum\n";
    for (const ScenarioResult& result : results)
        for (const BenchRow& row : result.rows)
            out << row.scenario << ',' << row.mode << ',' << row.rep << ',' << row.wall_ms << ','
                << row.cdx_lines << ',' << row.records_fetched << ',' << row.archive_bytes << ','
                << row.records_out << ',' << row.length_sum << '\n';
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace webcorpus
