#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webcorpus/cdx.hpp"
#include "webcorpus/enrich.hpp"
#include "webcorpus/filter.hpp"
#include "webcorpus/record.hpp"

namespace webcorpus {

// Where a plan reads from: CDX indexes for selection plus the directory
// holding the .warc.gz / .arc.gz files the index points into.
struct PlanSource {
    std::vector<std::filesystem::path> cdx_paths;
    std::filesystem::path archive_dir;
};

struct MapEnrichStep {
    std::string input_path;
    std::string result_key;
    MapBody body;
};

// One recorded plan step. Construction never executes anything.
struct Step {
    enum class Kind { MetaFilter, Enrich, DerivedFilter, LatestPerUrl };
    Kind kind = Kind::MetaFilter;

    std::function<bool(const CdxRecord&)> meta_predicate;  // MetaFilter

    std::string enrich_name;                       // Enrich (registered function)
    std::optional<DependencyOverride> dep_override;
    std::optional<MapEnrichStep> map_step;         // Enrich (ad-hoc map)

    std::string path;                                       // DerivedFilter
    std::function<bool(const FieldValue&)> derived_predicate;
};

struct ExecutionStats {
    std::uint64_t cdx_lines_read = 0;
    std::uint64_t records_fetched = 0;
    std::uint64_t archive_bytes_read = 0;
    std::uint64_t records_out = 0;
    std::chrono::duration<double, std::milli> wall_time{0};
};

struct ExecuteOptions {
    std::size_t workers = 0;   // 0 = hardware concurrency
    bool drop_errors = false;  // drop records carrying an error annotation
};

// An immutable, lazily-evaluated corpus-building plan. Builder methods
// return extended copies; nothing reads a file until execute_selective /
// execute_scan. Derived-filter paths are validated at construction
// against what earlier steps can produce.
class Plan {
public:
    Plan(PlanSource source, std::shared_ptr<const Registry> registry);

    Plan filter_meta(std::function<bool(const CdxRecord&)> predicate) const;
    Plan enrich(const std::string& name,
                std::optional<DependencyOverride> dep_override = {}) const;
    Plan map_enrich(std::string input_path, std::string result_key, MapBody body) const;
    Plan filter_derived(std::string path,
                        std::function<bool(const FieldValue&)> predicate) const;
    Plan latest_per_url() const;

    // Compile a parsed filter expression: the metadata clauses become one
    // MetaFilter, the path(...) clauses one DerivedFilter each, in clause
    // order. Derived clauses require the paths to be producible already,
    // so apply enrichments first.
    Plan with_filter(const FilterExpr& expr) const;

    const PlanSource& source() const { return source_; }
    const std::vector<Step>& steps() const { return steps_; }
    const Registry& registry() const { return *registry_; }
    std::shared_ptr<const Registry> registry_ptr() const { return registry_; }

    // Number of leading steps executable on CDX metadata alone.
    std::size_t meta_prefix_length() const;

private:
    Plan extended(Step step) const;
    void validate_derived_path(const std::string& path) const;

    PlanSource source_;
    std::shared_ptr<const Registry> registry_;
    std::vector<Step> steps_;
    std::vector<std::string> producible_paths_;
    bool has_enrich_ = false;
};

// Metadata row for a record encountered by a raw archive scan: everything
// is derived from the record itself (URL and date from the archive
// headers, status and MIME type from the embedded HTTP response, digest
// by hashing the transfer-decoded body), which makes scan results an
// oracle independent of any CDX file.
CdxRecord synthesize_meta(const RecordLocator& locator, const WarcRecord& record);

// Execute by streaming the CDX indexes: leading metadata steps run with
// zero archive IO, survivors are fetched record-by-record through their
// stored locators when an enrichment first needs bytes. Output order
// follows CDX order (after grouping).
std::pair<std::vector<EnrichedRecord>, ExecutionStats> execute_selective(
    const Plan& plan, const ExecuteOptions& options = {});

// Execute by decompressing every record of every archive file in the
// source directory (the full-scan baseline). Rows are synthesized via
// synthesize_meta, sorted like a sorted CDX (surt, timestamp, filename,
// offset), and run through the identical step semantics.
// archive_bytes_read equals the total archive size by construction.
std::pair<std::vector<EnrichedRecord>, ExecutionStats> execute_scan(
    const Plan& plan, const ExecuteOptions& options = {});

// Cardinality of the plan's output (selective execution). Trailing
// enrichments cannot change the count, so they are skipped unless
// drop_errors makes them observable; a metadata-only plan therefore
// counts with zero archive reads. stats_out, when given, receives the
// run's instrumentation.
std::uint64_t count(const Plan& plan, const ExecuteOptions& options = {},
                    ExecutionStats* stats_out = nullptr);

// First n records of the plan's output.
std::vector<EnrichedRecord> take(const Plan& plan, std::size_t n,
                                 const ExecuteOptions& options = {});

}  // namespace webcorpus
