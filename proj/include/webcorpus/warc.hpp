#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "webcorpus/errors.hpp"
#include "webcorpus/gzipio.hpp"
#include "webcorpus/header_map.hpp"

namespace webcorpus {

// One archive record: named headers plus the raw payload. For HTTP
// responses the payload is a full HTTP message (headers + body).
struct WarcRecord {
    std::string version = "WARC/1.0";
    HeaderMap headers;
    Bytes payload;

    bool operator==(const WarcRecord&) const = default;
};

// Points at a complete gzip member inside a named archive file.
struct RecordLocator {
    std::string filename;
    std::uint64_t offset = 0;
    std::uint64_t compressed_length = 0;

    bool operator==(const RecordLocator&) const = default;
};

// Serialize a record (version line, headers, CRLF CRLF, payload,
// CRLF CRLF). The record must carry a Content-Length header equal to the
// payload size.
Bytes serialize_warc_record(const WarcRecord& record);

// Parse the decompressed bytes of one member. Accepts WARC records and
// ARC records (auto-detected); ARC records come back normalized to the
// WARC shape via parse_arc_record. Returns nullopt for an ARC filedesc
// member, which carries no capture.
std::optional<WarcRecord> parse_record_member(const Bytes& member);

// Strict WARC parse of one member's bytes.
WarcRecord parse_warc_record(const Bytes& member);

// ARC v1 record block: "<url> <ip> <14-digit date> <mime> <length>\n"
// followed by exactly length payload bytes. Returns a record with
// synthesized WARC-Target-URI / WARC-Date / Content-Type / Content-Length
// headers so downstream code sees one record model.
WarcRecord parse_arc_record(const Bytes& block);

// Appends records to a .warc.gz (or .arc.gz) file, one gzip member per
// record, and hands back seekable locators.
class WarcWriter {
public:
    explicit WarcWriter(const std::filesystem::path& path);

    RecordLocator write(const WarcRecord& record);

    // ARC mode: write a pre-serialized ARC block as one member.
    RecordLocator write_raw_block(const Bytes& block);

    std::uint64_t offset() const { return writer_.offset(); }
    void close() { writer_.close(); }

private:
    GzipMemberWriter writer_;
    std::string basename_;
};

// Decompress exactly one member at the locator and parse it. Reads only
// the locator's byte range. Misaligned offsets raise LocatorError,
// truncated members CorruptionError, unparseable records FormatError.
WarcRecord read_record_at(CountingFile& file, const RecordLocator& locator);

// Scan every member of a record-per-member gzip file in order. ARC
// filedesc members are skipped. Detects single-stream (non-member-aligned)
// gzip inputs and rejects them with guidance to re-pack.
void scan_records(CountingFile& file,
                  const std::function<void(const RecordLocator&, WarcRecord&&)>& fn);

// Record fetch interface used by enrichments; implementations count the
// archive bytes they read.
class WarcFetcher {
public:
    virtual ~WarcFetcher() = default;
    virtual WarcRecord fetch(const RecordLocator& locator) = 0;
    virtual std::uint64_t bytes_read() const = 0;
    virtual std::uint64_t records_fetched() const = 0;
};

// Fetcher over an archive directory. Keeps one open handle per file; not
// shared across threads (each worker owns its own instance).
class DirectoryFetcher : public WarcFetcher {
public:
    explicit DirectoryFetcher(std::filesystem::path archive_dir);

    WarcRecord fetch(const RecordLocator& locator) override;
    std::uint64_t bytes_read() const override { return bytes_read_; }
    std::uint64_t records_fetched() const override { return records_fetched_; }

private:
    std::filesystem::path archive_dir_;
    std::map<std::string, std::unique_ptr<CountingFile>> files_;
    std::uint64_t bytes_read_ = 0;
    std::uint64_t records_fetched_ = 0;
};

}  // namespace webcorpus
