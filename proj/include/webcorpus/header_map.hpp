#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace webcorpus {

// Ordered name/value header collection. Preserves insertion order and
// duplicate names; lookups compare names case-insensitively, matching
// HTTP and WARC header semantics.
class HeaderMap {
public:
    using Entry = std::pair<std::string, std::string>;

    HeaderMap() = default;
    HeaderMap(std::initializer_list<Entry> init) : entries_(init) {}

    void add(std::string name, std::string value) {
        entries_.emplace_back(std::move(name), std::move(value));
    }

    // First value with the given name, or nullopt.
    std::optional<std::string_view> get(std::string_view name) const;

    // All values with the given name, joined with ", " when duplicated.
    std::optional<std::string> get_joined(std::string_view name) const;

    bool contains(std::string_view name) const { return get(name).has_value(); }

    // Replace the first occurrence or append.
    void set(std::string_view name, std::string value);

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool operator==(const HeaderMap&) const = default;

    static bool name_equals(std::string_view a, std::string_view b);

private:
    std::vector<Entry> entries_;
};

}  // namespace webcorpus
