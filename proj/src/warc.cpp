#include "webcorpus/warc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "webcorpus/cdx.hpp"
#include "webcorpus/http.hpp"

namespace webcorpus {

namespace {

std::string_view as_view(const Bytes& bytes) {
    return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

bool all_digits(std::string_view s) {
    return !s.empty() &&
           std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::uint64_t parse_content_length(std::string_view value) {
    std::uint64_t len = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), len);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw FormatError("bad Content-Length: '" + std::string(value) + "'");
    }
    return len;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        if (pos >= line.size()) break;
        std::size_t end = line.find(' ', pos);
        if (end == std::string_view::npos) end = line.size();
        out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

}  // namespace

Bytes serialize_warc_record(const WarcRecord& record) {
    auto declared = record.headers.get("Content-Length");
    if (!declared) {
        throw FormatError("record has no Content-Length header");
    }
    if (parse_content_length(*declared) != record.payload.size()) {
        throw FormatError("Content-Length " + std::string(*declared) + " does not match payload size " +
                          std::to_string(record.payload.size()));
    }
    std::string head = record.version + "\r\n";
    for (const auto& [name, value] : record.headers) {
        head += name + ": " + value + "\r\n";
    }
    head += "\r\n";

    Bytes out(head.begin(), head.end());
    out.insert(out.end(), record.payload.begin(), record.payload.end());
    const char* trailer = "\r\n\r\n";
    out.insert(out.end(), trailer, trailer + 4);
    return out;
}

WarcRecord parse_warc_record(const Bytes& member) {
    std::string_view text = as_view(member);

    std::size_t eol = text.find("\r\n");
    if (eol == std::string_view::npos) {
        throw FormatError("WARC record has no version line");
    }
    std::string version(text.substr(0, eol));
    if (version != "WARC/1.0" && version != "WARC/1.1") {
        throw FormatError("unsupported WARC version line: '" + version + "'");
    }

    WarcRecord record;
    record.version = version;

    std::size_t pos = eol + 2;
    for (;;) {
        std::size_t next = text.find("\r\n", pos);
        if (next == std::string_view::npos) {
            throw FormatError("WARC header block not terminated");
        }
        std::string_view line = text.substr(pos, next - pos);
        pos = next + 2;
        if (line.empty()) break;  // end of headers
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw FormatError("malformed WARC header line: '" + std::string(line) + "'");
        }
        std::string_view name = line.substr(0, colon);
        std::string_view value = line.substr(colon + 1);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        record.headers.add(latin1_to_utf8(name), latin1_to_utf8(value));
    }

    auto length_header = record.headers.get("Content-Length");
    if (!length_header) {
        throw FormatError("WARC record has no Content-Length");
    }
    std::uint64_t length = parse_content_length(*length_header);
    if (pos + length > text.size()) {
        throw FormatError("WARC payload truncated: need " + std::to_string(length) +
                          " bytes, have " + std::to_string(text.size() - pos));
    }
    record.payload.assign(member.begin() + pos, member.begin() + pos + length);
    pos += length;

    std::string_view rest = text.substr(pos);
    if (rest != "\r\n\r\n" && !rest.empty()) {
        throw FormatError("unexpected bytes after WARC payload");
    }
    return record;
}

WarcRecord parse_arc_record(const Bytes& block) {
    std::string_view text = as_view(block);
    std::size_t eol = text.find('\n');
    if (eol == std::string_view::npos) {
        throw FormatError("ARC record has no header line");
    }
    std::string_view header_line = text.substr(0, eol);
    if (!header_line.empty() && header_line.back() == '\r') {
        header_line.remove_suffix(1);
    }
    auto tokens = split_ws(header_line);
    if (tokens.size() != 5) {
        throw FormatError("ARC header line has " + std::to_string(tokens.size()) +
                          " tokens, expected 5");
    }
    if (tokens[2].size() != 14 || !all_digits(tokens[2])) {
        throw FormatError("ARC header date is not 14 digits: '" + std::string(tokens[2]) + "'");
    }
    std::uint64_t length = 0;
    {
        auto [ptr, ec] =
            std::from_chars(tokens[4].data(), tokens[4].data() + tokens[4].size(), length);
        if (ec != std::errc() || ptr != tokens[4].data() + tokens[4].size()) {
            throw FormatError("ARC header length is not numeric: '" + std::string(tokens[4]) +
                              "'");
        }
    }
    std::size_t payload_start = eol + 1;
    if (payload_start + length > block.size()) {
        throw FormatError("ARC payload truncated: need " + std::to_string(length) +
                          " bytes, have " + std::to_string(block.size() - payload_start));
    }

    WarcRecord record;
    record.headers.add("WARC-Target-URI", std::string(tokens[0]));
    record.headers.add("WARC-Date", timestamp14_to_warc_date(tokens[2]));
    record.headers.add("Content-Type", std::string(tokens[3]));
    record.headers.add("Content-Length", std::to_string(length));
    record.payload.assign(block.begin() + payload_start,
                          block.begin() + payload_start + length);
    return record;
}

std::optional<WarcRecord> parse_record_member(const Bytes& member) {
    std::string_view text = as_view(member);
    if (text.substr(0, 5) == "WARC/") {
        return parse_warc_record(member);
    }
    if (text.substr(0, 11) == "filedesc://") {
        return std::nullopt;  // ARC file header record, not a capture
    }
    return parse_arc_record(member);
}

// --- WarcWriter ---

WarcWriter::WarcWriter(const std::filesystem::path& path)
    : writer_(path), basename_(path.filename().string()) {}

RecordLocator WarcWriter::write(const WarcRecord& record) {
    Bytes serialized = serialize_warc_record(record);
    auto [offset, length] = writer_.write_member(serialized.data(), serialized.size());
    return {basename_, offset, length};
}

RecordLocator WarcWriter::write_raw_block(const Bytes& block) {
    auto [offset, length] = writer_.write_member(block.data(), block.size());
    return {basename_, offset, length};
}

// --- read_record_at ---

WarcRecord read_record_at(CountingFile& file, const RecordLocator& locator) {
    if (locator.compressed_length == 0) {
        throw LocatorError("locator has zero compressed length");
    }
    if (locator.offset + locator.compressed_length > file.size()) {
        throw LocatorError("locator range [" + std::to_string(locator.offset) + ", +" +
                           std::to_string(locator.compressed_length) + ") exceeds file size " +
                           std::to_string(file.size()));
    }
    Bytes compressed = file.read_range(locator.offset, locator.compressed_length);
    Bytes member;
    try {
        member = gzip_decompress_member(compressed);
    } catch (const LocatorError&) {
        throw LocatorError("offset " + std::to_string(locator.offset) + " in " +
                           locator.filename + " is not a gzip member boundary");
    }
    auto record = parse_record_member(member);
    if (!record) {
        throw FormatError("locator points at an ARC filedesc record");
    }
    return std::move(*record);
}

// --- scan_records ---

void scan_records(CountingFile& file,
                  const std::function<void(const RecordLocator&, WarcRecord&&)>& fn) {
    std::string basename = file.path().filename().string();
    GzipMemberScanner scanner(file);
    GzipMemberScanner::Member member;
    bool first = true;
    while (scanner.next(member)) {
        if (first && member.compressed_length == file.size() && file.size() > 0) {
            // One giant member: the file was not packed record-per-member,
            // so offsets into it cannot be decompressed independently.
            // A single-record file is indistinguishable, so only flag
            // members that clearly hold multiple records.
            std::string_view text = as_view(member.data);
            std::size_t second = text.find("\r\n\r\nWARC/", 4);
            if (second != std::string_view::npos) {
                throw FormatError(
                    basename +
                    " is a single-stream gzip file; re-pack it with one gzip member per "
                    "record to enable selective access");
            }
        }
        first = false;
        RecordLocator locator{basename, member.offset, member.compressed_length};
        try {
            auto record = parse_record_member(member.data);
            if (record) fn(locator, std::move(*record));
        } catch (const Error& e) {
            throw FormatError(basename + " offset " + std::to_string(member.offset) + ": " +
                              e.what());
        }
    }
}

// --- DirectoryFetcher ---

DirectoryFetcher::DirectoryFetcher(std::filesystem::path archive_dir)
    : archive_dir_(std::move(archive_dir)) {}

WarcRecord DirectoryFetcher::fetch(const RecordLocator& locator) {
    auto it = files_.find(locator.filename);
    if (it == files_.end()) {
        auto file = std::make_unique<CountingFile>(archive_dir_ / locator.filename);
        it = files_.emplace(locator.filename, std::move(file)).first;
    }
    CountingFile& file = *it->second;
    std::uint64_t before = file.bytes_read();
    WarcRecord record = read_record_at(file, locator);
    bytes_read_ += file.bytes_read() - before;
    ++records_fetched_;
    return record;
}

}  // namespace webcorpus
