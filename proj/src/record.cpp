#include "webcorpus/record.hpp"

#include <algorithm>

namespace webcorpus {

namespace {

// CDX metadata exposed through the path mechanism, mirroring the JSON
// "record" object. Read-only.
PathValue meta_field(const CdxRecord& meta, std::string_view name) {
    if (name == "surtUrl") return PathValue(FieldValue(meta.surt_url));
    if (name == "timestamp") return PathValue(FieldValue(timestamp_to_iso(meta.timestamp)));
    if (name == "originalUrl") return PathValue(FieldValue(meta.original_url));
    if (name == "mime") return PathValue(FieldValue(meta.mime));
    if (name == "status") {
        if (!meta.status) return {};
        return PathValue(FieldValue(std::int64_t(*meta.status)));
    }
    if (name == "digest") return PathValue(FieldValue(meta.digest));
    if (name == "redirectUrl") {
        return PathValue(FieldValue(meta.redirect_url ? *meta.redirect_url : std::string("-")));
    }
    if (name == "meta") {
        return PathValue(FieldValue(meta.meta_tags ? *meta.meta_tags : std::string("-")));
    }
    return {};
}

std::vector<std::string_view> split_dots(std::string_view path) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        std::size_t dot = path.find('.', pos);
        if (dot == std::string_view::npos) {
            out.push_back(path.substr(pos));
            break;
        }
        out.push_back(path.substr(pos, dot - pos));
        pos = dot + 1;
    }
    return out;
}

}  // namespace

bool EnrichedRecord::has_mark(std::string_view path) const {
    return std::find(output_marks.begin(), output_marks.end(), path) != output_marks.end();
}

void EnrichedRecord::add_mark(std::string_view path) {
    if (!has_mark(path)) output_marks.emplace_back(path);
}

EnrichedRecord make_record(CdxRecord meta) {
    EnrichedRecord record;
    record.meta = std::move(meta);
    return record;
}

PathValue get_path(const EnrichedRecord& record, std::string_view path) {
    if (path.empty()) return {};
    auto segments = split_dots(path);

    if (segments[0] == "record") {
        if (segments.size() != 2) return {};
        return meta_field(record.meta, segments[1]);
    }

    const FieldNode* node = &record.tree;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const FieldNode* next = node->child(segments[i]);
        if (next) {
            node = next;
            continue;
        }
        // One extra segment may resolve inside a HeaderMap value.
        if (i + 1 == segments.size() && node->value()) {
            if (const auto* headers = std::get_if<HeaderMap>(&*node->value())) {
                if (auto joined = headers->get_joined(segments[i])) {
                    return PathValue(FieldValue(std::move(*joined)));
                }
            }
        }
        return {};
    }
    if (!node->value()) return {};
    return PathValue(&*node->value());
}

EnrichedRecord set_path(const EnrichedRecord& record, std::string_view path,
                        FieldValue value) {
    auto segments = parse_field_path(path);  // validates the key grammar
    if (segments[0] == "record") {
        throw PathError("'record' is reserved for CDX metadata");
    }
    EnrichedRecord out = record;
    out.tree.set_at(path, std::move(value));
    return out;
}

}  // namespace webcorpus
