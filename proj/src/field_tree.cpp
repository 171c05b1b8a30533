#include "webcorpus/field_tree.hpp"

#include <cctype>

namespace webcorpus {

const FieldNode* FieldNode::child(std::string_view key) const {
    for (const auto& [k, node] : children_) {
        if (k == key) return &node;
    }
    return nullptr;
}

FieldNode& FieldNode::child_or_create(std::string_view key) {
    for (auto& [k, node] : children_) {
        if (k == key) return node;
    }
    children_.emplace_back(std::string(key), FieldNode{});
    return children_.back().second;
}

const FieldNode* FieldNode::descend(std::string_view path) const {
    const FieldNode* node = this;
    auto segments = parse_field_path(path);
    for (auto segment : segments) {
        node = node->child(segment);
        if (!node) return nullptr;
    }
    return node;
}

void FieldNode::set_at(std::string_view path, FieldValue value) {
    FieldNode* node = this;
    for (auto segment : parse_field_path(path)) {
        node = &node->child_or_create(segment);
    }
    node->set_value(std::move(value));
}

bool is_valid_field_key(std::string_view key) {
    if (key.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(key[0]))) return false;
    for (char c : key.substr(1)) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
            return false;
        }
    }
    return true;  // bare "_" already fails the first-character check
}

std::vector<std::string_view> parse_field_path(std::string_view path) {
    std::vector<std::string_view> segments;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        std::size_t dot = path.find('.', pos);
        std::string_view segment = dot == std::string_view::npos
                                       ? path.substr(pos)
                                       : path.substr(pos, dot - pos);
        if (!is_valid_field_key(segment)) {
            throw PathError("invalid path key '" + std::string(segment) + "' in '" +
                            std::string(path) + "'");
        }
        segments.push_back(segment);
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return segments;
}

const char* field_value_type_name(const FieldValue& value) {
    switch (value.index()) {
        case 0: return "bool";
        case 1: return "int";
        case 2: return "double";
        case 3: return "string";
        case 4: return "bytes";
        case 5: return "headers";
        default: return "unknown";
    }
}

}  // namespace webcorpus
