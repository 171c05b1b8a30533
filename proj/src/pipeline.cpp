#include "webcorpus/pipeline.hpp"

#include <algorithm>
#include <span>
#include <thread>
#include <unordered_map>

#include "webcorpus/gzipio.hpp"
#include "webcorpus/hash.hpp"
#include "webcorpus/http.hpp"
#include "webcorpus/warc.hpp"

namespace webcorpus {

namespace {

bool is_meta_only_step(const Step& step) {
    return step.kind == Step::Kind::MetaFilter || step.kind == Step::Kind::LatestPerUrl;
}

std::size_t meta_prefix_of(std::span<const Step> steps) {
    std::size_t n = 0;
    while (n < steps.size() && is_meta_only_step(steps[n])) ++n;
    return n;
}

// Group by surt_url keeping the maximum timestamp; on equal timestamps
// the record seen later wins. Output order is the first occurrence of
// each surt.
template <typename RecordT>
std::vector<RecordT> group_latest(std::vector<RecordT> records,
                                  const std::function<const CdxRecord&(const RecordT&)>& meta) {
    std::unordered_map<std::string, std::size_t> position;
    std::vector<RecordT> out;
    out.reserve(records.size());
    for (RecordT& record : records) {
        auto [it, inserted] = position.try_emplace(meta(record).surt_url, out.size());
        if (inserted)
            out.push_back(std::move(record));
        else if (meta(record).timestamp >= meta(out[it->second]).timestamp)
            out[it->second] = std::move(record);
    }
    return out;
}

std::vector<CdxRecord> group_latest_meta(std::vector<CdxRecord> rows) {
    return group_latest<CdxRecord>(std::move(rows),
                                   [](const CdxRecord& r) -> const CdxRecord& { return r; });
}

std::vector<EnrichedRecord> group_latest_records(std::vector<EnrichedRecord> records) {
    return group_latest<EnrichedRecord>(
        std::move(records), [](const EnrichedRecord& r) -> const CdxRecord& { return r.meta; });
}

// Run the leading metadata-only steps against the streamed CDX rows.
// MetaFilters before the first LatestPerUrl drop rows during the stream;
// later prefix steps run on the collected survivors.
std::vector<CdxRecord> run_meta_prefix(const Plan& plan, std::span<const Step> prefix,
                                       ExecutionStats& stats) {
    std::size_t streamable = 0;
    while (streamable < prefix.size() && prefix[streamable].kind == Step::Kind::MetaFilter)
        ++streamable;

    std::vector<CdxRecord> rows;
    for (const std::filesystem::path& path : plan.source().cdx_paths) {
        for_each_cdx_record(path, [&](CdxRecord&& row) {
            ++stats.cdx_lines_read;
            for (std::size_t i = 0; i < streamable; ++i)
                if (!prefix[i].meta_predicate(row)) return;
            rows.push_back(std::move(row));
        });
    }
    for (std::size_t i = streamable; i < prefix.size(); ++i) {
        if (prefix[i].kind == Step::Kind::LatestPerUrl) {
            rows = group_latest_meta(std::move(rows));
        } else {
            const auto& predicate = prefix[i].meta_predicate;
            std::erase_if(rows, [&](const CdxRecord& r) { return !predicate(r); });
        }
    }
    return rows;
}

// Per-record application of a barrier-free step run. keep=false short-
// circuits the rest of the segment for this record.
void apply_steps_to_record(EnrichedRecord& record, bool& keep, std::span<const Step> steps,
                           const Registry& registry, WarcFetcher* fetcher) {
    for (const Step& step : steps) {
        switch (step.kind) {
            case Step::Kind::MetaFilter:
                if (!step.meta_predicate(record.meta)) {
                    keep = false;
                    return;
                }
                break;
            case Step::Kind::Enrich:
                if (step.map_step)
                    record = map_enrich(record, step.map_step->input_path,
                                        step.map_step->result_key, step.map_step->body,
                                        &registry);
                else
                    record = apply_enrichment(record, step.enrich_name, registry, fetcher,
                                              step.dep_override);
                break;
            case Step::Kind::DerivedFilter: {
                PathValue value = get_path(record, step.path);
                if (!value || !step.derived_predicate(*value)) {
                    keep = false;
                    return;
                }
                break;
            }
            case Step::Kind::LatestPerUrl:
                break;  // barriers never reach here
        }
    }
}

// One barrier-free segment, partition-parallel. Contiguous slices keep
// the merge order deterministic; every worker owns its own fetcher and
// file handles.
std::vector<EnrichedRecord> run_segment(std::vector<EnrichedRecord> records,
                                        std::span<const Step> steps, const Plan& plan,
                                        const ExecuteOptions& options, ExecutionStats& stats) {
    if (steps.empty() || records.empty()) return records;

    std::size_t workers = options.workers ? options.workers
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, records.size());
    const Registry& registry = plan.registry();

    if (workers <= 1) {
        DirectoryFetcher fetcher(plan.source().archive_dir);
        std::vector<EnrichedRecord> out;
        out.reserve(records.size());
        for (EnrichedRecord& slot : records) {
            EnrichedRecord record = std::move(slot);
            bool keep = true;
            apply_steps_to_record(record, keep, steps, registry, &fetcher);
            if (keep) out.push_back(std::move(record));
        }
        stats.archive_bytes_read += fetcher.bytes_read();
        stats.records_fetched += fetcher.records_fetched();
        return out;
    }

    std::vector<std::vector<EnrichedRecord>> outs(workers);
    std::vector<std::uint64_t> bytes(workers, 0);
    std::vector<std::uint64_t> fetched(workers, 0);
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> threads;
    const std::size_t chunk = (records.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(records.size(), lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&, w, lo, hi] {
            try {
                DirectoryFetcher fetcher(plan.source().archive_dir);
                outs[w].reserve(hi - lo);
                for (std::size_t k = lo; k < hi; ++k) {
                    EnrichedRecord record = std::move(records[k]);
                    bool keep = true;
                    apply_steps_to_record(record, keep, steps, registry, &fetcher);
                    if (keep) outs[w].push_back(std::move(record));
                }
                bytes[w] = fetcher.bytes_read();
                fetched[w] = fetcher.records_fetched();
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::vector<EnrichedRecord> out;
    out.reserve(records.size());
    for (std::size_t w = 0; w < workers; ++w) {
        stats.archive_bytes_read += bytes[w];
        stats.records_fetched += fetched[w];
        for (EnrichedRecord& record : outs[w]) out.push_back(std::move(record));
    }
    return out;
}

// Steps split into segments at LatestPerUrl barriers; a barrier gathers
// all partitions before grouping.
std::vector<EnrichedRecord> run_steps(std::vector<EnrichedRecord> records,
                                      std::span<const Step> steps, const Plan& plan,
                                      const ExecuteOptions& options, ExecutionStats& stats) {
    std::size_t i = 0;
    while (i < steps.size()) {
        if (steps[i].kind == Step::Kind::LatestPerUrl) {
            records = group_latest_records(std::move(records));
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < steps.size() && steps[j].kind != Step::Kind::LatestPerUrl) ++j;
        records = run_segment(std::move(records), steps.subspan(i, j - i), plan, options, stats);
        i = j;
    }
    return records;
}

std::pair<std::vector<EnrichedRecord>, ExecutionStats> execute_selective_steps(
    const Plan& plan, std::span<const Step> steps, const ExecuteOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    ExecutionStats stats;

    const std::size_t prefix = meta_prefix_of(steps);
    std::vector<CdxRecord> rows = run_meta_prefix(plan, steps.first(prefix), stats);

    std::vector<EnrichedRecord> records;
    records.reserve(rows.size());
    for (CdxRecord& row : rows) records.push_back(make_record(std::move(row)));

    records = run_steps(std::move(records), steps.subspan(prefix), plan, options, stats);
    if (options.drop_errors)
        std::erase_if(records, [](const EnrichedRecord& r) { return has_error_annotation(r); });

    stats.records_out = records.size();
    stats.wall_time = std::chrono::steady_clock::now() - t0;
    return {std::move(records), stats};
}

std::vector<std::filesystem::path> archive_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.ends_with(".warc.gz") || name.ends_with(".arc.gz"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return files;
}

}  // namespace

CdxRecord synthesize_meta(const RecordLocator& locator, const WarcRecord& record) {
    CdxRecord meta;
    auto uri = record.headers.get("WARC-Target-URI");
    if (!uri)
        throw FormatError("record at " + locator.filename + ":" +
                          std::to_string(locator.offset) + " has no WARC-Target-URI");
    meta.original_url = std::string(*uri);
    meta.surt_url = surt_from_url(meta.original_url);
    auto date = record.headers.get("WARC-Date");
    if (!date)
        throw FormatError("record at " + locator.filename + ":" +
                          std::to_string(locator.offset) + " has no WARC-Date");
    meta.timestamp = warc_date_to_timestamp14(*date);
    try {
        HttpResponse http = parse_http_response(record.payload);
        meta.status = http.status;
        meta.mime = mime_from_content_type(std::string(http.headers.get("Content-Type").value_or("")));
        if (meta.mime.empty()) meta.mime = "unk";
        meta.digest = sha1_base32(http.body.data(), http.body.size());
    } catch (const FormatError&) {
        // Not an HTTP message: hash the raw payload, leave status unset.
        meta.mime = "unk";
        meta.digest = sha1_base32(record.payload.data(), record.payload.size());
    }
    meta.compressed_length = locator.compressed_length;
    meta.offset = locator.offset;
    meta.filename = locator.filename;
    return meta;
}

Plan::Plan(PlanSource source, std::shared_ptr<const Registry> registry)
    : source_(std::move(source)), registry_(std::move(registry)) {
    if (!registry_) throw PlanError("a plan needs an enrichment registry");
}

Plan Plan::extended(Step step) const {
    Plan copy = *this;
    copy.steps_.push_back(std::move(step));
    return copy;
}

void Plan::validate_derived_path(const std::string& path) const {
    parse_field_path(path);
    if (path == "record")
        throw PlanError("'record' is not a value; filter a metadata field like record.status");
    if (path.starts_with("record.")) return;
    if (path == "error") {
        if (has_enrich_) return;
        throw PlanError("no step before this filter can produce 'error'");
    }
    for (const std::string& producible : producible_paths_) {
        if (path == producible) return;
        if (path.size() > producible.size() && path.starts_with(producible) &&
            path[producible.size()] == '.')
            return;
    }
    throw PlanError("no step before this filter can produce '" + path + "'");
}

Plan Plan::filter_meta(std::function<bool(const CdxRecord&)> predicate) const {
    if (!predicate) throw PlanError("metadata filter needs a predicate");
    Step step;
    step.kind = Step::Kind::MetaFilter;
    step.meta_predicate = std::move(predicate);
    return extended(std::move(step));
}

Plan Plan::enrich(const std::string& name, std::optional<DependencyOverride> dep_override) const {
    const EnrichFuncSpec* func = registry_->find(name);
    if (!func) throw PlanError("unknown enrichment '" + name + "'");
    if (dep_override && dep_override->dependency && !registry_->contains(*dep_override->dependency))
        throw PlanError("unknown dependency override '" + *dep_override->dependency + "'");

    Step step;
    step.kind = Step::Kind::Enrich;
    step.enrich_name = name;
    step.dep_override = dep_override;
    Plan copy = extended(std::move(step));
    copy.has_enrich_ = true;
    if (dep_override) {
        for (const std::string& field : func->result_fields)
            copy.producible_paths_.push_back(
                dep_override->dependency_field.empty()
                    ? field
                    : dep_override->dependency_field + "." + field);
        if (dep_override->dependency)
            for (std::string& path : registry_->closure_result_paths(*dep_override->dependency))
                copy.producible_paths_.push_back(std::move(path));
    } else {
        for (std::string& path : registry_->closure_result_paths(name))
            copy.producible_paths_.push_back(std::move(path));
    }
    return copy;
}

Plan Plan::map_enrich(std::string input_path, std::string result_key, MapBody body) const {
    if (result_key.find('.') != std::string::npos)
        throw PlanError("map enrichments produce exactly one result field; '" + result_key +
                        "' names a nested path");
    if (!is_valid_field_key(result_key))
        throw PlanError("map result key '" + result_key + "' violates the key grammar");
    if (!body) throw PlanError("map enrichment needs a body");
    if (input_path == "record" || input_path.starts_with("record."))
        throw PlanError("results cannot be placed under the reserved 'record' metadata");
    validate_derived_path(input_path);

    Step step;
    step.kind = Step::Kind::Enrich;
    step.map_step = MapEnrichStep{input_path, result_key, std::move(body)};
    Plan copy = extended(std::move(step));
    copy.has_enrich_ = true;
    copy.producible_paths_.push_back(input_path + "." + result_key);
    return copy;
}

Plan Plan::filter_derived(std::string path,
                          std::function<bool(const FieldValue&)> predicate) const {
    if (!predicate) throw PlanError("derived filter needs a predicate");
    validate_derived_path(path);
    Step step;
    step.kind = Step::Kind::DerivedFilter;
    step.path = std::move(path);
    step.derived_predicate = std::move(predicate);
    return extended(std::move(step));
}

Plan Plan::latest_per_url() const {
    Step step;
    step.kind = Step::Kind::LatestPerUrl;
    return extended(std::move(step));
}

Plan Plan::with_filter(const FilterExpr& expr) const {
    Plan copy = *this;
    std::vector<FilterClause> meta = expr.meta_clauses();
    if (!meta.empty()) {
        copy = copy.filter_meta([clauses = std::move(meta)](const CdxRecord& row) {
            for (const FilterClause& clause : clauses)
                if (!clause.matches(row)) return false;
            return true;
        });
    }
    for (const FilterClause& clause : expr.derived_clauses()) {
        copy = copy.filter_derived(
            clause.path, [clause](const FieldValue& value) { return clause.matches_value(value); });
    }
    return copy;
}

std::size_t Plan::meta_prefix_length() const {
    return meta_prefix_of(std::span<const Step>(steps_));
}

std::pair<std::vector<EnrichedRecord>, ExecutionStats> execute_selective(
    const Plan& plan, const ExecuteOptions& options) {
    return execute_selective_steps(plan, std::span<const Step>(plan.steps()), options);
}

std::pair<std::vector<EnrichedRecord>, ExecutionStats> execute_scan(
    const Plan& plan, const ExecuteOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    ExecutionStats stats;

    struct Row {
        CdxRecord meta;
        std::shared_ptr<const WarcRecord> record;
    };
    std::vector<Row> rows;
    for (const std::filesystem::path& file : archive_files(plan.source().archive_dir)) {
        CountingFile counting(file);
        scan_records(counting, [&](const RecordLocator& locator, WarcRecord&& record) {
            if (auto type = record.headers.get("WARC-Type"); type && *type != "response")
                return;
            auto shared = std::make_shared<const WarcRecord>(std::move(record));
            rows.push_back(Row{synthesize_meta(locator, *shared), std::move(shared)});
        });
        stats.archive_bytes_read += counting.bytes_read();
    }

    // Align with the selective path's sorted-CDX order.
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.meta.surt_url, a.meta.timestamp, a.meta.filename, a.meta.offset) <
               std::tie(b.meta.surt_url, b.meta.timestamp, b.meta.filename, b.meta.offset);
    });

    std::vector<EnrichedRecord> records;
    records.reserve(rows.size());
    for (Row& row : rows) {
        EnrichedRecord record = make_record(std::move(row.meta));
        record.prefetched = std::move(row.record);
        records.push_back(std::move(record));
    }

    records = run_steps(std::move(records), std::span<const Step>(plan.steps()), plan, options,
                        stats);
    if (options.drop_errors)
        std::erase_if(records, [](const EnrichedRecord& r) { return has_error_annotation(r); });

    stats.records_out = records.size();
    stats.wall_time = std::chrono::steady_clock::now() - t0;
    return {std::move(records), stats};
}

std::uint64_t count(const Plan& plan, const ExecuteOptions& options,
                    ExecutionStats* stats_out) {
    std::span<const Step> steps(plan.steps());
    // Enrichments at the tail cannot change the cardinality unless
    // drop_errors makes their failures observable.
    if (!options.drop_errors)
        while (!steps.empty() && steps.back().kind == Step::Kind::Enrich)
            steps = steps.first(steps.size() - 1);
    ExecutionStats stats = execute_selective_steps(plan, steps, options).second;
    if (stats_out) *stats_out = stats;
    return stats.records_out;
}

std::vector<EnrichedRecord> take(const Plan& plan, std::size_t n,
                                 const ExecuteOptions& options) {
    auto [records, stats] = execute_selective(plan, options);
    (void)stats;
    if (records.size() > n) records.resize(n);
    return records;
}

}  // namespace webcorpus
