#include "webcorpus/cdx.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <vector>

namespace webcorpus {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t sp = line.find(' ', pos);
        if (sp == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, sp - pos));
        pos = sp + 1;
    }
    return out;
}

std::uint64_t parse_u64_field(std::string_view text, const char* field) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(std::string("CDX field '") + field + "' is not numeric: '" +
                         std::string(text) + "'");
    }
    return value;
}

bool all_digits(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

struct Ts {
    int year, month, day, hour, minute, second;
};

Ts split_ts(std::string_view ts14) {
    if (ts14.size() != 14 || !all_digits(ts14)) {
        throw ParseError("timestamp must be 14 digits: '" + std::string(ts14) + "'");
    }
    auto num = [&](std::size_t pos, std::size_t n) {
        int v = 0;
        std::from_chars(ts14.data() + pos, ts14.data() + pos + n, v);
        return v;
    };
    Ts t{num(0, 4), num(4, 2), num(6, 2), num(8, 2), num(10, 2), num(12, 2)};
    std::chrono::year_month_day ymd{std::chrono::year{t.year},
                                    std::chrono::month{unsigned(t.month)},
                                    std::chrono::day{unsigned(t.day)}};
    if (!ymd.ok() || t.hour > 23 || t.minute > 59 || t.second > 59) {
        throw ParseError("timestamp is not a valid datetime: '" + std::string(ts14) + "'");
    }
    return t;
}

}  // namespace

CdxRecord parse_cdx_line(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    // split_fields yields one empty token for an empty line; report that
    // as zero fields, which is what the caller actually handed us
    auto fields = line.empty() ? std::vector<std::string_view>{} : split_fields(line);
    if (fields.size() != 11) {
        if (fields.size() == 9) {
            throw FormatError("9-field CDX is not supported; re-generate an 11-field index");
        }
        throw FormatError("CDX line has " + std::to_string(fields.size()) +
                          " fields, expected 11");
    }

    CdxRecord rec;
    rec.surt_url = std::string(fields[0]);
    if (!is_valid_timestamp14(fields[1])) {
        throw ParseError("CDX field 'timestamp' invalid: '" + std::string(fields[1]) + "'");
    }
    rec.timestamp = std::string(fields[1]);
    rec.original_url = std::string(fields[2]);
    rec.mime = std::string(fields[3]);
    if (fields[4] == "-") {
        rec.status = std::nullopt;
    } else {
        rec.status = static_cast<int>(parse_u64_field(fields[4], "status"));
    }
    rec.digest = std::string(fields[5]);
    rec.redirect_url =
        fields[6] == "-" ? std::nullopt : std::optional<std::string>(std::string(fields[6]));
    rec.meta_tags =
        fields[7] == "-" ? std::nullopt : std::optional<std::string>(std::string(fields[7]));
    rec.compressed_length = parse_u64_field(fields[8], "length");
    rec.offset = parse_u64_field(fields[9], "offset");
    rec.filename = std::string(fields[10]);
    return rec;
}

std::string write_cdx_line(const CdxRecord& r) {
    std::string out;
    out.reserve(128);
    out += r.surt_url;
    out += ' ';
    out += r.timestamp;
    out += ' ';
    out += r.original_url;
    out += ' ';
    out += r.mime;
    out += ' ';
    out += r.status ? std::to_string(*r.status) : "-";
    out += ' ';
    out += r.digest;
    out += ' ';
    out += r.redirect_url ? *r.redirect_url : "-";
    out += ' ';
    out += r.meta_tags ? *r.meta_tags : "-";
    out += ' ';
    out += std::to_string(r.compressed_length);
    out += ' ';
    out += std::to_string(r.offset);
    out += ' ';
    out += r.filename;
    return out;
}

bool is_cdx_header_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.substr(0, 4) == "CDX " || line == "CDX") return true;
    static const char* kCanonical =
        "surt timestamp url mime status digest redirect meta length offset filename";
    return line == kCanonical;
}

std::string surt_from_url(std::string_view url) {
    // scheme
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0) {
        throw CanonicalizationError("URL has no scheme: '" + std::string(url) + "'");
    }
    std::string scheme = lower(url.substr(0, scheme_end));
    std::string_view rest = url.substr(scheme_end + 3);

    // authority ends at the first '/', '?' or '#'
    std::size_t auth_end = rest.find_first_of("/?#");
    std::string_view authority =
        auth_end == std::string_view::npos ? rest : rest.substr(0, auth_end);
    std::string_view path_query =
        auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    // fragment dropped
    if (std::size_t frag = path_query.find('#'); frag != std::string_view::npos) {
        path_query = path_query.substr(0, frag);
    }

    // userinfo dropped
    if (std::size_t at = authority.rfind('@'); at != std::string_view::npos) {
        authority = authority.substr(at + 1);
    }

    std::string_view host = authority;
    std::string port;
    if (std::size_t colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        port = std::string(authority.substr(colon + 1));
        if (!all_digits(port)) {
            throw CanonicalizationError("invalid port in URL: '" + std::string(url) + "'");
        }
    }
    if (host.empty()) {
        throw CanonicalizationError("URL has no host: '" + std::string(url) + "'");
    }

    bool default_port = port.empty() || (scheme == "http" && port == "80") ||
                        (scheme == "https" && port == "443");

    std::string host_lc = lower(host);
    std::vector<std::string_view> parts;
    {
        std::string_view hv = host_lc;
        std::size_t pos = 0;
        while (pos <= hv.size()) {
            std::size_t dot = hv.find('.', pos);
            if (dot == std::string_view::npos) {
                parts.push_back(hv.substr(pos));
                break;
            }
            parts.push_back(hv.substr(pos, dot - pos));
            pos = dot + 1;
        }
    }

    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (!out.empty()) out += ',';
        out += *it;
    }
    if (!default_port) {
        out += ':';
        out += port;
    }
    out += ')';
    if (path_query.empty() || path_query.front() == '?') {
        out += '/';
        out += path_query;
    } else {
        out += path_query;
    }
    return out;
}

std::string host_from_surt(std::string_view surt) {
    std::size_t paren = surt.find(')');
    std::string_view hostpart = paren == std::string_view::npos ? surt : surt.substr(0, paren);
    if (std::size_t colon = hostpart.rfind(':'); colon != std::string_view::npos) {
        hostpart = hostpart.substr(0, colon);
    }
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= hostpart.size()) {
        std::size_t comma = hostpart.find(',', pos);
        if (comma == std::string_view::npos) {
            parts.push_back(hostpart.substr(pos));
            break;
        }
        parts.push_back(hostpart.substr(pos, comma - pos));
        pos = comma + 1;
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (!out.empty()) out += '.';
        out += *it;
    }
    return out;
}

bool is_valid_timestamp14(std::string_view ts14) {
    try {
        split_ts(ts14);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

std::string timestamp_to_iso(std::string_view ts14) {
    Ts t = split_ts(ts14);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.000+00:00", t.year, t.month,
                  t.day, t.hour, t.minute, t.second);
    return buf;
}

std::int64_t timestamp14_to_epoch(std::string_view ts14) {
    Ts t = split_ts(ts14);
    using namespace std::chrono;
    sys_days days{year_month_day{year{t.year}, month{unsigned(t.month)}, day{unsigned(t.day)}}};
    return duration_cast<seconds>(days.time_since_epoch()).count() + t.hour * 3600 +
           t.minute * 60 + t.second;
}

std::string epoch_to_timestamp14(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    sys_seconds tp{seconds{epoch_seconds}};
    sys_days d = floor<days>(tp);
    year_month_day ymd{d};
    auto tod = tp - d;
    int h = int(duration_cast<hours>(tod).count());
    int m = int(duration_cast<minutes>(tod).count() % 60);
    int s = int(duration_cast<seconds>(tod).count() % 60);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d%02u%02u%02d%02d%02d", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), h, m, s);
    return buf;
}

std::string warc_date_to_timestamp14(std::string_view date) {
    if (date.size() == 14 && all_digits(date)) {
        if (!is_valid_timestamp14(date)) {
            throw ParseError("invalid 14-digit date: '" + std::string(date) + "'");
        }
        return std::string(date);
    }
    // YYYY-MM-DDTHH:MM:SS with optional fraction and Z/offset
    std::string digits;
    for (char c : date) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
        } else if (c == '.' || c == 'Z' || c == 'z' || c == '+') {
            break;
        } else if (c != '-' && c != ':' && c != 'T' && c != 't') {
            throw ParseError("unrecognized date: '" + std::string(date) + "'");
        }
        if (digits.size() == 14) break;
    }
    if (digits.size() != 14 || !is_valid_timestamp14(digits)) {
        throw ParseError("unrecognized date: '" + std::string(date) + "'");
    }
    return digits;
}

std::string timestamp14_to_warc_date(std::string_view ts14) {
    Ts t = split_ts(ts14);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", t.year, t.month, t.day,
                  t.hour, t.minute, t.second);
    return buf;
}

void for_each_cdx_record(const std::filesystem::path& path,
                         const std::function<void(CdxRecord&&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open CDX file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && is_cdx_header_line(line)) continue;
        try {
            fn(parse_cdx_line(line));
        } catch (const Error& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace webcorpus
