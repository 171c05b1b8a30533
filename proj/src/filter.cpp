#include "webcorpus/filter.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace webcorpus {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool parse_op(std::string_view token, FilterOp& op) {
    if (token == "==") op = FilterOp::Eq;
    else if (token == "!=") op = FilterOp::Ne;
    else if (token == "<") op = FilterOp::Lt;
    else if (token == "<=") op = FilterOp::Le;
    else if (token == ">") op = FilterOp::Gt;
    else if (token == ">=") op = FilterOp::Ge;
    else if (token == "contains") op = FilterOp::Contains;
    else if (token == "prefix") op = FilterOp::Prefix;
    else return false;
    return true;
}

template <typename T>
bool ordered(FilterOp op, const T& lhs, const T& rhs) {
    switch (op) {
        case FilterOp::Eq: return lhs == rhs;
        case FilterOp::Ne: return lhs != rhs;
        case FilterOp::Lt: return lhs < rhs;
        case FilterOp::Le: return lhs <= rhs;
        case FilterOp::Gt: return lhs > rhs;
        case FilterOp::Ge: return lhs >= rhs;
        default: return false;
    }
}

bool compare_strings(FilterOp op, std::string_view lhs, std::string_view rhs) {
    switch (op) {
        case FilterOp::Contains: return lhs.find(rhs) != std::string_view::npos;
        case FilterOp::Prefix: return lhs.substr(0, rhs.size()) == rhs;
        default: return ordered(op, lhs, rhs);
    }
}

bool parse_number(std::string_view s, double& out) {
    // from_chars for double is missing on some libstdc++ versions; sscanf
    // with a full-consumption check is portable.
    char buf[64];
    if (s.empty() || s.size() >= sizeof(buf)) return false;
    std::copy(s.begin(), s.end(), buf);
    buf[s.size()] = '\0';
    int consumed = 0;
    return std::sscanf(buf, "%lf%n", &out, &consumed) == 1 &&
           static_cast<std::size_t>(consumed) == s.size();
}

// Comparable string form of a derived value; Bytes and HeaderMap have
// none and fail every clause.
bool string_form(const FieldValue& value, std::string& out) {
    if (const bool* b = std::get_if<bool>(&value)) {
        out = *b ? "true" : "false";
        return true;
    }
    if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
        out = std::to_string(*i);
        return true;
    }
    if (const double* d = std::get_if<double>(&value)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", *d);
        out = buf;
        return true;
    }
    if (const std::string* s = std::get_if<std::string>(&value)) {
        out = *s;
        return true;
    }
    return false;
}

bool numeric_value(const FieldValue& value, double& out) {
    if (const std::int64_t* i = std::get_if<std::int64_t>(&value)) {
        out = static_cast<double>(*i);
        return true;
    }
    if (const double* d = std::get_if<double>(&value)) {
        out = *d;
        return true;
    }
    return false;
}

}  // namespace

bool host_matches_domain(std::string_view host, std::string_view domain) {
    if (host == domain) return true;
    return host.size() > domain.size() + 1 &&
           host.substr(host.size() - domain.size()) == domain &&
           host[host.size() - domain.size() - 1] == '.';
}

bool FilterClause::matches(const CdxRecord& meta) const {
    switch (field) {
        case FilterField::Url: return compare_strings(op, meta.original_url, rhs);
        case FilterField::Surt: return compare_strings(op, meta.surt_url, rhs);
        case FilterField::Mime: return compare_strings(op, meta.mime, rhs);
        case FilterField::Timestamp: return compare_strings(op, meta.timestamp, rhs);
        case FilterField::Digest: return compare_strings(op, meta.digest, rhs);
        case FilterField::Status: {
            if (!meta.status) return false;
            double want = 0;
            parse_number(rhs, want);  // validated at parse time
            return ordered(op, static_cast<double>(*meta.status), want);
        }
        case FilterField::Domain: {
            std::string host = host_from_surt(meta.surt_url);
            if (op == FilterOp::Eq) return host_matches_domain(host, rhs);
            if (op == FilterOp::Ne) return !host_matches_domain(host, rhs);
            return compare_strings(op, host, rhs);
        }
        case FilterField::Path: return false;  // needs the record tree
    }
    return false;
}

bool FilterClause::matches(const EnrichedRecord& record) const {
    if (is_meta()) return matches(record.meta);
    PathValue value = get_path(record, path);
    return value && matches_value(*value);
}

bool FilterClause::matches_value(const FieldValue& value) const {
    double lhs_num = 0;
    double rhs_num = 0;
    if (op != FilterOp::Contains && op != FilterOp::Prefix && numeric_value(value, lhs_num) &&
        parse_number(rhs, rhs_num))
        return ordered(op, lhs_num, rhs_num);
    std::string lhs;
    if (!string_form(value, lhs)) return false;
    return compare_strings(op, lhs, rhs);
}

bool FilterExpr::all_meta() const {
    return std::all_of(clauses.begin(), clauses.end(),
                       [](const FilterClause& c) { return c.is_meta(); });
}

std::vector<FilterClause> FilterExpr::meta_clauses() const {
    std::vector<FilterClause> out;
    for (const FilterClause& c : clauses)
        if (c.is_meta()) out.push_back(c);
    return out;
}

std::vector<FilterClause> FilterExpr::derived_clauses() const {
    std::vector<FilterClause> out;
    for (const FilterClause& c : clauses)
        if (!c.is_meta()) out.push_back(c);
    return out;
}

bool FilterExpr::matches(const CdxRecord& meta) const {
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const FilterClause& c) { return c.matches(meta); });
}

bool FilterExpr::matches(const EnrichedRecord& record) const {
    return std::all_of(clauses.begin(), clauses.end(),
                       [&](const FilterClause& c) { return c.matches(record); });
}

FilterClause make_path_clause(const std::string& path, const std::string& op_text,
                              const std::string& value) {
    FilterClause clause;
    clause.field = FilterField::Path;
    clause.path = path;
    parse_field_path(clause.path);
    if (!parse_op(op_text, clause.op))
        throw ParseError("unknown filter operator '" + op_text + "'");
    clause.rhs = value;
    if (clause.rhs.size() >= 2 && clause.rhs.front() == '"' && clause.rhs.back() == '"')
        clause.rhs = clause.rhs.substr(1, clause.rhs.size() - 2);
    return clause;
}

FilterExpr parse_filter(std::string_view text) {
    FilterExpr expr;
    std::string_view rest = trim(text);
    if (rest.empty()) return expr;

    while (true) {
        std::size_t split = rest.find("&&");
        std::string_view clause_text = trim(split == std::string_view::npos ? rest : rest.substr(0, split));
        if (clause_text.empty()) throw ParseError("empty filter clause");

        FilterClause clause;

        // lhs token
        std::string_view lhs;
        if (clause_text.substr(0, 5) == "path(") {
            std::size_t close = clause_text.find(')');
            if (close == std::string_view::npos)
                throw ParseError("unterminated path(...) in filter");
            lhs = clause_text.substr(0, close + 1);
            clause.field = FilterField::Path;
            clause.path = std::string(trim(clause_text.substr(5, close - 5)));
            parse_field_path(clause.path);  // PathError on bad segments
        } else {
            std::size_t space = clause_text.find_first_of(" \t");
            if (space == std::string_view::npos)
                throw ParseError("filter clause '" + std::string(clause_text) +
                                 "' is not '<field> <op> <value>'");
            lhs = clause_text.substr(0, space);
            std::string key = to_lower(lhs);
            if (key == "url") clause.field = FilterField::Url;
            else if (key == "surt") clause.field = FilterField::Surt;
            else if (key == "domain") clause.field = FilterField::Domain;
            else if (key == "mime") clause.field = FilterField::Mime;
            else if (key == "status") clause.field = FilterField::Status;
            else if (key == "timestamp") clause.field = FilterField::Timestamp;
            else if (key == "digest") clause.field = FilterField::Digest;
            else
                throw ParseError("unknown filter field '" + key + "'");
        }

        std::string_view after_lhs = trim(clause_text.substr(lhs.size()));
        std::size_t op_end = after_lhs.find_first_of(" \t");
        if (op_end == std::string_view::npos)
            throw ParseError("filter clause '" + std::string(clause_text) + "' has no value");
        if (!parse_op(after_lhs.substr(0, op_end), clause.op))
            throw ParseError("unknown filter operator '" +
                             std::string(after_lhs.substr(0, op_end)) + "'");

        std::string_view rhs = trim(after_lhs.substr(op_end));
        if (rhs.size() >= 2 && rhs.front() == '"' && rhs.back() == '"')
            rhs = rhs.substr(1, rhs.size() - 2);
        if (rhs.empty()) throw ParseError("filter clause '" + std::string(clause_text) + "' has no value");
        clause.rhs = std::string(rhs);

        if (clause.field == FilterField::Status) {
            double ignored = 0;
            if (!parse_number(clause.rhs, ignored))
                throw ParseError("status comparisons need a numeric value, got '" + clause.rhs + "'");
        }
        if (clause.field == FilterField::Domain || clause.field == FilterField::Mime)
            clause.rhs = to_lower(clause.rhs);

        expr.clauses.push_back(std::move(clause));
        if (split == std::string_view::npos) break;
        rest = trim(rest.substr(split + 2));
        if (rest.empty()) throw ParseError("dangling '&&' in filter");
    }
    return expr;
}

}  // namespace webcorpus
