#include "webcorpus/enrich.hpp"

#include <algorithm>
#include <cctype>

#include "webcorpus/http.hpp"

namespace webcorpus {

namespace {

std::string join_base(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

// Failures never drop the record; they land under the reserved "error"
// path, appending to whatever is already there.
void annotate_error(EnrichedRecord& record, const std::string& func, const std::string& msg) {
    std::string text = func + ": " + msg;
    if (const FieldNode* node = record.tree.descend("error"); node && node->value()) {
        if (const std::string* prev = std::get_if<std::string>(&*node->value()))
            text = *prev + "; " + text;
    }
    record.tree.set_at("error", std::move(text));
    record.add_mark("error");
}

// Depth-first application with memoization through record.applied. A "!"
// prefix in the ledger memoizes failures so one broken dependency does not
// annotate the record once per dependant. Returns true when the results
// are in the tree.
bool ensure_applied(EnrichedRecord& record, const Registry& registry, const std::string& name,
                    WarcFetcher* fetcher, const std::optional<DependencyOverride>& dep_override,
                    std::vector<std::string>* result_paths) {
    const EnrichFuncSpec* func = registry.find(name);
    if (!func) {
        annotate_error(record, name, "unknown enrichment");
        return false;
    }

    std::optional<std::string> dependency = func->dependency;
    std::string base = func->dependency_field;
    std::string memo = name;
    if (dep_override) {
        dependency = dep_override->dependency;
        base = dep_override->dependency_field;
        memo = name + "@" + base;
    }
    if (result_paths)
        for (const std::string& field : func->result_fields)
            result_paths->push_back(join_base(base, field));

    if (record.applied.count(memo)) return true;
    if (record.applied.count("!" + memo)) return false;

    if (dependency &&
        !ensure_applied(record, registry, *dependency, fetcher, std::nullopt, nullptr)) {
        annotate_error(record, name, "dependency '" + *dependency + "' failed");
        record.applied.insert("!" + memo);
        return false;
    }

    PathValue input;
    if (!base.empty()) {
        input = get_path(record, base);
        if (!input) {
            annotate_error(record, name, "input '" + base + "' is absent");
            record.applied.insert("!" + memo);
            return false;
        }
    }

    EnrichContext ctx{record, fetcher};
    EnrichResult results;
    try {
        results = func->body(input ? &*input : nullptr, ctx);
    } catch (const std::exception& e) {
        annotate_error(record, name, e.what());
        record.applied.insert("!" + memo);
        return false;
    }
    registry.count_execution(name);

    for (const auto& [key, value] : results) {
        (void)value;
        if (std::find(func->result_fields.begin(), func->result_fields.end(), key) ==
            func->result_fields.end()) {
            annotate_error(record, name, "body produced undeclared result field '" + key + "'");
            record.applied.insert("!" + memo);
            return false;
        }
    }
    for (auto& [key, value] : results)
        record.tree.set_at(join_base(base, key), std::move(value));
    record.applied.insert(memo);
    return true;
}

EnrichResult response_body(const FieldValue*, EnrichContext& ctx) {
    WarcRecord fetched;
    const WarcRecord* rec = ctx.record.prefetched.get();
    if (!rec) {
        if (!ctx.fetcher)
            throw PlanError("archive access is not available in this execution");
        RecordLocator locator{ctx.record.meta.filename, ctx.record.meta.offset,
                              ctx.record.meta.compressed_length};
        fetched = ctx.fetcher->fetch(locator);
        rec = &fetched;
    }
    HttpResponse http = parse_http_response(rec->payload);
    EnrichResult out;
    out.emplace_back("recordHeader", rec->headers);
    out.emplace_back("httpHeader", http.headers);
    out.emplace_back("payload", std::move(http.body));
    return out;
}

EnrichResult string_body(const FieldValue* input, EnrichContext& ctx) {
    const Bytes* bytes = input ? std::get_if<Bytes>(input) : nullptr;
    if (!bytes) throw TypedAccessError("input is not a byte field");
    // Content-Encoding and charset live in the HTTP headers the response
    // enrichment stored; absent headers mean plain UTF-8 handling.
    HeaderMap http_headers;
    if (const FieldNode* node = ctx.record.tree.descend("httpHeader"); node && node->value())
        if (const HeaderMap* map = std::get_if<HeaderMap>(&*node->value()))
            http_headers = *map;
    EnrichResult out;
    out.emplace_back("string", decode_body_to_string(*bytes, http_headers));
    return out;
}

EnrichResult html_title_body(const FieldValue* input, EnrichContext&) {
    const std::string* html = input ? std::get_if<std::string>(input) : nullptr;
    if (!html) throw TypedAccessError("input is not a string field");
    EnrichResult out;
    if (std::optional<std::string> title = extract_html_title(*html))
        out.emplace_back("html.title", std::move(*title));
    return out;
}

}  // namespace

Registry::Registry(const Registry& other) {
    std::lock_guard<std::mutex> lock(other.counts_mutex_);
    funcs_ = other.funcs_;
    exec_counts_ = other.exec_counts_;
}

void Registry::register_func(EnrichFuncSpec spec) {
    if (!is_valid_field_key(spec.name))
        throw PlanError("enrichment name '" + spec.name + "' violates the key grammar");
    if (funcs_.count(spec.name))
        throw PlanError("enrichment '" + spec.name + "' is already registered");
    if (!spec.body) throw PlanError("enrichment '" + spec.name + "' has no body");
    if (spec.result_fields.empty())
        throw PlanError("enrichment '" + spec.name + "' declares no result fields");
    for (const std::string& field : spec.result_fields) parse_field_path(field);
    if (!spec.dependency_field.empty()) parse_field_path(spec.dependency_field);
    if (spec.dependency) {
        // Dependencies must already be registered, which rules out cycles:
        // a chain can only point backwards in registration order.
        if (*spec.dependency == spec.name)
            throw PlanError("enrichment '" + spec.name + "' depends on itself");
        if (!funcs_.count(*spec.dependency))
            throw PlanError("enrichment '" + spec.name + "' depends on unknown '" +
                            *spec.dependency + "'");
    }
    funcs_.emplace(spec.name, std::move(spec));
}

const EnrichFuncSpec* Registry::find(const std::string& name) const {
    auto it = funcs_.find(name);
    return it == funcs_.end() ? nullptr : &it->second;
}

std::vector<std::string> Registry::result_paths(const std::string& name) const {
    const EnrichFuncSpec* func = find(name);
    if (!func) throw PlanError("unknown enrichment '" + name + "'");
    std::vector<std::string> paths;
    for (const std::string& field : func->result_fields)
        paths.push_back(join_base(func->dependency_field, field));
    return paths;
}

std::vector<std::string> Registry::closure_result_paths(const std::string& name) const {
    std::vector<std::string> chain;
    for (const EnrichFuncSpec* func = find(name); func;
         func = func->dependency ? find(*func->dependency) : nullptr)
        chain.push_back(func->name);
    if (chain.empty()) throw PlanError("unknown enrichment '" + name + "'");
    std::vector<std::string> paths;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        for (std::string& path : result_paths(*it)) paths.push_back(std::move(path));
    return paths;
}

void Registry::count_execution(const std::string& name) const {
    std::lock_guard<std::mutex> lock(counts_mutex_);
    ++exec_counts_[name];
}

std::uint64_t Registry::executions(const std::string& name) const {
    std::lock_guard<std::mutex> lock(counts_mutex_);
    auto it = exec_counts_.find(name);
    return it == exec_counts_.end() ? 0 : it->second;
}

void Registry::reset_executions() const {
    std::lock_guard<std::mutex> lock(counts_mutex_);
    exec_counts_.clear();
}

Registry Registry::with_builtins() {
    Registry registry;
    registry.register_func({"response", std::nullopt, "",
                            {"recordHeader", "httpHeader", "payload"}, response_body});
    registry.register_func({"string", "response", "payload", {"string"}, string_body});
    registry.register_func(
        {"html-title", "string", "payload.string", {"html.title"}, html_title_body});
    return registry;
}

EnrichedRecord apply_enrichment(const EnrichedRecord& record, const std::string& name,
                                const Registry& registry, WarcFetcher* fetcher,
                                const std::optional<DependencyOverride>& dep_override) {
    EnrichedRecord out = record;
    std::vector<std::string> result_paths;
    if (ensure_applied(out, registry, name, fetcher, dep_override, &result_paths)) {
        // Only the explicitly requested enrichment marks its outputs, and
        // only those that actually resolved to a value (a missing HTML
        // title produces no field and no mark).
        for (const std::string& path : result_paths)
            if (const FieldNode* node = out.tree.descend(path); node && node->value())
                out.add_mark(path);
    }
    return out;
}

std::string map_enrich_name(const std::string& input_path, const std::string& result_key) {
    return "map:" + result_key + "(" + input_path + ")";
}

EnrichedRecord map_enrich(const EnrichedRecord& record, const std::string& input_path,
                          const std::string& result_key, const MapBody& body,
                          const Registry* registry) {
    if (result_key.find('.') != std::string::npos)
        throw PathError("map enrichments produce exactly one result field; '" + result_key +
                        "' names a nested path");
    if (!is_valid_field_key(result_key))
        throw PathError("map result key '" + result_key + "' violates the key grammar");
    std::vector<std::string_view> segments = parse_field_path(input_path);
    if (segments.front() == "record")
        throw PathError("results cannot be placed under the reserved 'record' metadata");

    EnrichedRecord out = record;
    const std::string name = map_enrich_name(input_path, result_key);
    const std::string result_path = input_path + "." + result_key;
    if (out.applied.count(name)) {
        out.add_mark(input_path);
        out.add_mark(result_path);
        return out;
    }
    if (out.applied.count("!" + name)) return out;

    PathValue input = get_path(out, input_path);
    if (!input) {
        annotate_error(out, name, "input '" + input_path + "' is absent");
        out.applied.insert("!" + name);
        return out;
    }
    FieldValue result;
    try {
        result = body(*input);
    } catch (const std::exception& e) {
        annotate_error(out, name, e.what());
        out.applied.insert("!" + name);
        return out;
    }
    if (registry) registry->count_execution(name);
    out.tree.set_at(result_path, std::move(result));
    out.applied.insert(name);
    // The original value is part of the requested output here: it shows
    // up under "_" next to the derived field.
    out.add_mark(input_path);
    out.add_mark(result_path);
    return out;
}

std::optional<std::string> extract_html_title(std::string_view html) {
    auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
    std::size_t pos = 0;
    while (pos + 7 <= html.size()) {
        if (html[pos] == '<' && lower(html[pos + 1]) == 't' && lower(html[pos + 2]) == 'i' &&
            lower(html[pos + 3]) == 't' && lower(html[pos + 4]) == 'l' &&
            lower(html[pos + 5]) == 'e' &&
            (html[pos + 6] == '>' || std::isspace(static_cast<unsigned char>(html[pos + 6])))) {
            std::size_t open_end = html.find('>', pos + 6);
            if (open_end == std::string_view::npos) return std::nullopt;
            std::size_t text_begin = open_end + 1;
            // The title ends at the next "</title" regardless of nesting;
            // title content is plain character data in HTML.
            std::size_t text_end = std::string_view::npos;
            for (std::size_t i = text_begin; i + 8 <= html.size(); ++i) {
                if (html[i] == '<' && html[i + 1] == '/' && lower(html[i + 2]) == 't' &&
                    lower(html[i + 3]) == 'i' && lower(html[i + 4]) == 't' &&
                    lower(html[i + 5]) == 'l' && lower(html[i + 6]) == 'e') {
                    text_end = i;
                    break;
                }
            }
            if (text_end == std::string_view::npos) return std::nullopt;
            std::string_view raw = html.substr(text_begin, text_end - text_begin);
            std::string collapsed;
            bool in_space = true;  // leading whitespace is dropped
            for (char c : raw) {
                if (std::isspace(static_cast<unsigned char>(c))) {
                    in_space = true;
                } else {
                    if (in_space && !collapsed.empty()) collapsed.push_back(' ');
                    in_space = false;
                    collapsed.push_back(c);
                }
            }
            return collapsed;
        }
        ++pos;
    }
    return std::nullopt;
}

bool has_error_annotation(const EnrichedRecord& record) {
    const FieldNode* node = record.tree.descend("error");
    return node != nullptr && node->value().has_value();
}

}  // namespace webcorpus
