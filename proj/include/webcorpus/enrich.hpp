#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "webcorpus/record.hpp"
#include "webcorpus/warc.hpp"

namespace webcorpus {

// Context handed to enrichment bodies. fetcher may be null when the plan
// has no archive access (metadata-only execution).
struct EnrichContext {
    const EnrichedRecord& record;
    WarcFetcher* fetcher = nullptr;
};

using EnrichResult = std::vector<std::pair<std::string, FieldValue>>;
using EnrichBody = std::function<EnrichResult(const FieldValue* input, EnrichContext& ctx)>;

// An enrichment function: name, optional dependency, the dependency's
// result field that serves as input, the declared result fields, and the
// pure body that derives them. Bodies must be deterministic and
// side-effect-free; memoization and partition-parallel execution rely on
// it.
struct EnrichFuncSpec {
    std::string name;
    std::optional<std::string> dependency;
    std::string dependency_field;  // tree path of the input value; empty = whole record
    std::vector<std::string> result_fields;  // may be dotted (nested placement)
    EnrichBody body;
};

// Application-time override of the declared dependency (the declared pair
// is a default, not a constraint).
struct DependencyOverride {
    std::optional<std::string> dependency;
    std::string dependency_field;
};

// Enrichment function registry. Built once, read-only afterwards; the
// execution counters are thread-safe instrumentation for tests and stats.
class Registry {
public:
    Registry() = default;
    Registry(const Registry& other);
    Registry& operator=(const Registry&) = delete;

    // Validates: known dependency, acyclic chain, non-empty valid result
    // fields, unique name. Throws PlanError on violation.
    void register_func(EnrichFuncSpec spec);

    const EnrichFuncSpec* find(const std::string& name) const;
    bool contains(const std::string& name) const { return find(name) != nullptr; }

    // Result paths of a function (dependency_field + result field), or
    // of its whole dependency closure.
    std::vector<std::string> result_paths(const std::string& name) const;
    std::vector<std::string> closure_result_paths(const std::string& name) const;

    // Body-execution instrumentation.
    void count_execution(const std::string& name) const;
    std::uint64_t executions(const std::string& name) const;
    void reset_executions() const;

    // Registry pre-loaded with the built-ins: response, string, html-title.
    static Registry with_builtins();

private:
    std::map<std::string, EnrichFuncSpec> funcs_;
    mutable std::mutex counts_mutex_;
    mutable std::map<std::string, std::uint64_t> exec_counts_;
};

// Apply a registered enrichment. Dependencies are resolved depth-first and
// memoized through the record's `applied` ledger; implicitly-run
// dependencies do not gain output marks. Failures annotate the record
// under the reserved "error" path; the record survives.
EnrichedRecord apply_enrichment(const EnrichedRecord& record, const std::string& name,
                                const Registry& registry, WarcFetcher* fetcher = nullptr,
                                const std::optional<DependencyOverride>& dep_override = {});

using MapBody = std::function<FieldValue(const FieldValue& input)>;

// Ad-hoc single-field enrichment: computes body on the value at
// input_path and stores the result under input_path + "." + result_key,
// preserving the original value (it serializes under "_"). result_key
// must be a single key segment; multi-field results are rejected here.
EnrichedRecord map_enrich(const EnrichedRecord& record, const std::string& input_path,
                          const std::string& result_key, const MapBody& body,
                          const Registry* registry = nullptr);

// Memoization name used in the `applied` ledger for a map enrichment.
std::string map_enrich_name(const std::string& input_path, const std::string& result_key);

// First <title> element's text, case-insensitive match, whitespace
// collapsed; nullopt when the document has none.
std::optional<std::string> extract_html_title(std::string_view html);

// True if the record carries an error annotation (reserved "error" path).
bool has_error_annotation(const EnrichedRecord& record);

}  // namespace webcorpus
