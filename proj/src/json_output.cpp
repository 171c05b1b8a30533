#include "webcorpus/json_output.hpp"

#include <cctype>
#include <set>

#include "webcorpus/gzipio.hpp"
#include "webcorpus/hash.hpp"

namespace webcorpus {

namespace {

Json headers_to_json(const HeaderMap& headers) {
    Json obj = Json::object();
    std::set<std::string> done;
    for (const auto& [name, value] : headers.entries()) {
        (void)value;
        std::string key_lower;
        for (char c : name) key_lower.push_back(static_cast<char>(std::tolower(
            static_cast<unsigned char>(c))));
        if (!done.insert(key_lower).second) continue;
        obj[name] = *headers.get_joined(name);
    }
    return obj;
}

Json value_to_json(const FieldValue& value, const JsonOptions& options) {
    if (const bool* b = std::get_if<bool>(&value)) return *b;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) return *i;
    if (const double* d = std::get_if<double>(&value)) return *d;
    if (const std::string* s = std::get_if<std::string>(&value)) return *s;
    if (const Bytes* bytes = std::get_if<Bytes>(&value)) {
        if (options.base64_bytes) return base64_encode(bytes->data(), bytes->size());
        return "bytes(length: " + std::to_string(bytes->size()) + ")";
    }
    return headers_to_json(std::get<HeaderMap>(value));
}

// Trie over the marked paths; "marked" flags a path that was itself
// requested, inner nodes are lineage ancestors.
struct MarkNode {
    bool marked = false;
    std::vector<std::pair<std::string, MarkNode>> children;

    MarkNode& child_or_create(std::string_view key) {
        for (auto& [k, node] : children)
            if (k == key) return node;
        children.emplace_back(std::string(key), MarkNode{});
        return children.back().second;
    }
    const MarkNode* child(std::string_view key) const {
        for (const auto& [k, node] : children)
            if (k == key) return &node;
        return nullptr;
    }
};

MarkNode build_mark_trie(const std::vector<std::string>& marks) {
    MarkNode root;
    for (const std::string& path : marks) {
        MarkNode* node = &root;
        std::size_t begin = 0;
        while (begin <= path.size()) {
            std::size_t dot = path.find('.', begin);
            std::size_t end = dot == std::string::npos ? path.size() : dot;
            node = &node->child_or_create(std::string_view(path).substr(begin, end - begin));
            if (dot == std::string::npos) break;
            begin = dot + 1;
        }
        node->marked = true;
    }
    return root;
}

// Render a tree node through the mark trie. Children follow the tree's
// insertion order, which is the order enrichments produced them. Returns
// an empty optional when nothing under this node is marked with a value.
std::optional<Json> render(const FieldNode& node, const MarkNode& marks,
                           const JsonOptions& options) {
    std::vector<std::pair<const std::string*, Json>> kids;
    for (const auto& [key, child] : node.children()) {
        const MarkNode* mark_child = marks.child(key);
        if (!mark_child) continue;
        if (std::optional<Json> rendered = render(child, *mark_child, options))
            kids.emplace_back(&key, std::move(*rendered));
    }
    const bool own = marks.marked && node.value().has_value();
    if (kids.empty()) {
        if (own) return value_to_json(*node.value(), options);
        return std::nullopt;
    }
    Json obj = Json::object();
    if (own) obj["_"] = value_to_json(*node.value(), options);
    for (auto& [key, rendered] : kids) obj[*key] = std::move(rendered);
    return obj;
}

}  // namespace

Json record_to_json(const EnrichedRecord& record, const JsonOptions& options) {
    Json out = Json::object();
    Json meta = Json::object();
    const CdxRecord& cdx = record.meta;
    meta["surtUrl"] = cdx.surt_url;
    meta["timestamp"] = timestamp_to_iso(cdx.timestamp);
    meta["originalUrl"] = cdx.original_url;
    meta["mime"] = cdx.mime;
    if (cdx.status) meta["status"] = *cdx.status;
    else meta["status"] = "-";
    meta["digest"] = cdx.digest;
    meta["redirectUrl"] = cdx.redirect_url.value_or("-");
    meta["meta"] = cdx.meta_tags.value_or("-");
    out["record"] = std::move(meta);

    const MarkNode trie = build_mark_trie(record.output_marks);
    for (const auto& [key, child] : record.tree.children()) {
        const MarkNode* mark_child = trie.child(key);
        if (!mark_child) continue;
        if (std::optional<Json> rendered = render(child, *mark_child, options))
            out[key] = std::move(*rendered);
    }
    return out;
}

std::string record_to_json_line(const EnrichedRecord& record, const JsonOptions& options) {
    return record_to_json(record, options).dump();
}

void save_corpus(const std::vector<EnrichedRecord>& records,
                 const std::filesystem::path& path, const JsonOptions& options) {
    TextSink sink(path);
    for (const EnrichedRecord& record : records) {
        Json json = record_to_json(record, options);
        sink.write(options.pretty ? json.dump(2) : json.dump());
        sink.write("\n");
    }
    sink.close();
}

}  // namespace webcorpus
