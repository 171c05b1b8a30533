#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webcorpus/errors.hpp"
#include "webcorpus/gzipio.hpp"  // Bytes
#include "webcorpus/header_map.hpp"

namespace webcorpus {

// Values a derivation can attach to a record. HeaderMap covers the
// archive/HTTP header mappings produced by the response enrichment.
using FieldValue = std::variant<bool, std::int64_t, double, std::string, Bytes, HeaderMap>;

// Nested key->node mapping holding derived values. A node may carry its
// own value and children at the same time; in JSON output the own value
// then appears under the reserved "_" key. Children keep insertion order.
class FieldNode {
public:
    FieldNode() = default;
    explicit FieldNode(FieldValue value) : value_(std::move(value)) {}

    const std::optional<FieldValue>& value() const { return value_; }
    void set_value(FieldValue value) { value_ = std::move(value); }

    const std::vector<std::pair<std::string, FieldNode>>& children() const {
        return children_;
    }
    bool has_children() const { return !children_.empty(); }

    const FieldNode* child(std::string_view key) const;
    FieldNode& child_or_create(std::string_view key);

    // Node at a dot-separated path below this node, or nullptr.
    const FieldNode* descend(std::string_view path) const;

    // Creates intermediate nodes as needed and sets the terminal node's
    // own value. Existing children and sibling values are preserved.
    void set_at(std::string_view path, FieldValue value);

    bool operator==(const FieldNode&) const = default;

private:
    std::optional<FieldValue> value_;
    std::vector<std::pair<std::string, FieldNode>> children_;
};

// Key grammar: [A-Za-z][A-Za-z0-9_-]*, and never the bare "_" (reserved
// for serializing a node's own value).
bool is_valid_field_key(std::string_view key);

// Splits a dot path and validates every segment; PathError on violation.
std::vector<std::string_view> parse_field_path(std::string_view path);

const char* field_value_type_name(const FieldValue& value);

}  // namespace webcorpus
