#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "webcorpus/cdx.hpp"
#include "webcorpus/field_tree.hpp"

namespace webcorpus {

struct WarcRecord;

// A CDX row joined with its derived field tree. output_marks lists the
// paths explicitly requested for serialization (insertion order, deduped);
// applied is the memoization ledger of enrichment names already computed.
struct EnrichedRecord {
    CdxRecord meta;
    FieldNode tree;
    std::vector<std::string> output_marks;
    std::set<std::string> applied;

    // Scan-mode execution attaches the already-decompressed record here so
    // enrichments do not re-read archive bytes.
    std::shared_ptr<const WarcRecord> prefetched;

    bool has_mark(std::string_view path) const;
    void add_mark(std::string_view path);
};

EnrichedRecord make_record(CdxRecord meta);

// Result of a path lookup. Either borrows a value living in the record's
// tree or owns a value synthesized on the fly (metadata fields, header
// lookups). Empty means the path did not resolve.
class PathValue {
public:
    PathValue() = default;
    explicit PathValue(const FieldValue* ref) : ref_(ref) {}
    explicit PathValue(FieldValue owned) : owned_(std::move(owned)) {}

    explicit operator bool() const { return ref_ != nullptr || owned_.has_value(); }
    const FieldValue& operator*() const { return ref_ ? *ref_ : *owned_; }
    const FieldValue* operator->() const { return ref_ ? ref_ : &*owned_; }

private:
    const FieldValue* ref_ = nullptr;
    std::optional<FieldValue> owned_;
};

// Walk the tree by dot-separated segments and return the terminal node's
// own value. Absence is a value, not an error. The reserved root segment
// "record" addresses CDX metadata (record.status, record.mime, ...), and
// a terminal HeaderMap value resolves one further segment as a
// case-insensitive header lookup.
PathValue get_path(const EnrichedRecord& record, std::string_view path);

// Demand a specific type at a path. Absent -> nullopt; present with a
// different stored type -> TypedAccessError.
template <typename T>
std::optional<T> get_path_as(const EnrichedRecord& record, std::string_view path) {
    PathValue v = get_path(record, path);
    if (!v) return std::nullopt;
    if (const T* typed = std::get_if<T>(&*v)) return *typed;
    throw TypedAccessError("value at '" + std::string(path) + "' is " +
                           field_value_type_name(*v) + ", not the demanded type");
}

// Returns a new record with the value placed at path; intermediate nodes
// are created and the input record is left untouched.
EnrichedRecord set_path(const EnrichedRecord& record, std::string_view path,
                        FieldValue value);

}  // namespace webcorpus
