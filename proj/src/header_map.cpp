#include "webcorpus/header_map.hpp"

#include <cctype>

namespace webcorpus {

bool HeaderMap::name_equals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

std::optional<std::string_view> HeaderMap::get(std::string_view name) const {
    for (const auto& [n, v] : entries_) {
        if (name_equals(n, name)) return std::string_view(v);
    }
    return std::nullopt;
}

std::optional<std::string> HeaderMap::get_joined(std::string_view name) const {
    std::optional<std::string> out;
    for (const auto& [n, v] : entries_) {
        if (!name_equals(n, name)) continue;
        if (out) {
            *out += ", ";
            *out += v;
        } else {
            out = v;
        }
    }
    return out;
}

void HeaderMap::set(std::string_view name, std::string value) {
    for (auto& [n, v] : entries_) {
        if (name_equals(n, name)) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::string(name), std::move(value));
}

}  // namespace webcorpus
