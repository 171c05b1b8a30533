#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "webcorpus/errors.hpp"

namespace webcorpus {

// One capture's metadata row from an 11-field CDX index. The locator
// triple (filename, offset, compressed_length) points at the record's
// gzip member inside the named archive file.
struct CdxRecord {
    std::string surt_url;
    std::string timestamp;  // 14 digits, YYYYMMDDHHMMSS, UTC
    std::string original_url;
    std::string mime;
    std::optional<int> status;           // absent encodes as "-"
    std::string digest;                  // base32 SHA-1 of the payload body
    std::optional<std::string> redirect_url;
    std::optional<std::string> meta_tags;
    std::uint64_t compressed_length = 0;
    std::uint64_t offset = 0;
    std::string filename;

    bool operator==(const CdxRecord&) const = default;
};

// Parse one non-header CDX data line (11 space-separated fields).
// Field-count mismatches raise FormatError naming the count; non-numeric
// status/length/offset/timestamp raise ParseError naming the field.
CdxRecord parse_cdx_line(std::string_view line);

// Inverse of parse_cdx_line: a single space-separated line, absent values
// rendered "-", no trailing whitespace and no newline.
std::string write_cdx_line(const CdxRecord& record);

// True for a recognized CDX header line: first token "CDX", or the line
// listing the eleven canonical field names.
bool is_cdx_header_line(std::string_view line);

// Sort-friendly URI Reordering Transform. Scheme dropped; host lowercased,
// dot-split, reversed and comma-joined; default ports dropped, others kept
// as ":port" before the ")" separator; path and query appended verbatim;
// fragment dropped. "http://example.com/jcdl" -> "com,example)/jcdl".
std::string surt_from_url(std::string_view url);

// Host of a SURT, reversed back into dotted form ("com,example)/x" ->
// "example.com"). Ports are dropped.
std::string host_from_surt(std::string_view surt);

// 14-digit UTC timestamp -> "YYYY-MM-DDTHH:MM:SS.000+00:00".
// Invalid calendar dates raise ParseError.
std::string timestamp_to_iso(std::string_view ts14);

// Validation used by the CdxRecord invariant: 14 digits and a real
// calendar datetime.
bool is_valid_timestamp14(std::string_view ts14);

// 14-digit timestamp <-> Unix epoch seconds (UTC).
std::int64_t timestamp14_to_epoch(std::string_view ts14);
std::string epoch_to_timestamp14(std::int64_t epoch_seconds);

// WARC-Date ("2016-01-17T11:32:53Z", optional fraction/offset) or an
// already-14-digit string -> 14-digit timestamp.
std::string warc_date_to_timestamp14(std::string_view date);

// 14-digit timestamp -> WARC-Date form "YYYY-MM-DDTHH:MM:SSZ".
std::string timestamp14_to_warc_date(std::string_view ts14);

// Stream the data lines of a CDX file in order, skipping a leading header
// line. The callback receives each parsed record; parse errors carry the
// 1-based line number.
void for_each_cdx_record(const std::filesystem::path& path,
                         const std::function<void(CdxRecord&&)>& fn);

}  // namespace webcorpus
