#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "webcorpus/cdx.hpp"
#include "webcorpus/record.hpp"

namespace webcorpus {

// Filter expressions: one or more clauses joined by "&&", each clause
// "<lhs> <op> <rhs>". lhs is a metadata field (url, surt, domain, mime,
// status, timestamp, digest) or path(<dot-path>) for derived fields.
// rhs may be double-quoted to carry spaces.

enum class FilterOp { Eq, Ne, Lt, Le, Gt, Ge, Contains, Prefix };

enum class FilterField { Url, Surt, Domain, Mime, Status, Timestamp, Digest, Path };

struct FilterClause {
    FilterField field = FilterField::Url;
    std::string path;  // set when field == Path
    FilterOp op = FilterOp::Eq;
    std::string rhs;

    // Meta clauses need only the CDX row; path clauses need the tree.
    bool is_meta() const { return field != FilterField::Path; }

    bool matches(const CdxRecord& meta) const;
    bool matches(const EnrichedRecord& record) const;

    // Evaluate the clause against an already-resolved derived value.
    bool matches_value(const FieldValue& value) const;
};

struct FilterExpr {
    std::vector<FilterClause> clauses;

    bool all_meta() const;
    std::vector<FilterClause> meta_clauses() const;
    std::vector<FilterClause> derived_clauses() const;

    // Conjunction over all clauses. The CdxRecord overload is only valid
    // for all-meta expressions.
    bool matches(const CdxRecord& meta) const;
    bool matches(const EnrichedRecord& record) const;
};

// ParseError on malformed input. Empty input parses to an empty
// conjunction, which matches everything.
FilterExpr parse_filter(std::string_view text);

// Build a derived-path clause from its three words (path, operator,
// value) as the CLI's --derived-filter flag supplies them.
FilterClause make_path_clause(const std::string& path, const std::string& op_text,
                              const std::string& value);

// domain matching: true when host equals the domain or is a subdomain.
bool host_matches_domain(std::string_view host, std::string_view domain);

}  // namespace webcorpus
