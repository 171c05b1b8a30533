#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "webcorpus/errors.hpp"

namespace webcorpus {

using Bytes = std::vector<std::uint8_t>;

// Compress data as one standalone gzip member (RFC 1952).
Bytes gzip_compress_member(const std::uint8_t* data, std::size_t len, int level = 6);
Bytes gzip_compress_member(const Bytes& data, int level = 6);

// Decompress exactly one gzip member. The input must start with the gzip
// magic (else LocatorError) and the member must end exactly at the end of
// the input (truncation or trailing bytes raise CorruptionError).
Bytes gzip_decompress_member(const std::uint8_t* data, std::size_t len);
Bytes gzip_decompress_member(const Bytes& data);

// Inflate a gzip or zlib stream without the exact-bounds checks above.
// Used for HTTP Content-Encoding bodies.
Bytes inflate_body(const std::uint8_t* data, std::size_t len);

// Read-only file handle that counts every byte delivered from the OS.
// The pipeline aggregates these counters into its execution stats.
class CountingFile {
public:
    explicit CountingFile(const std::filesystem::path& path);
    ~CountingFile();

    CountingFile(const CountingFile&) = delete;
    CountingFile& operator=(const CountingFile&) = delete;

    // Reads exactly [offset, offset+len); throws IoError on short read.
    Bytes read_range(std::uint64_t offset, std::uint64_t len);

    // Sequential read of up to len bytes from the current position;
    // returns the number of bytes read (0 at EOF).
    std::size_t read_some(std::uint8_t* out, std::size_t len);

    std::uint64_t bytes_read() const { return bytes_read_; }
    std::uint64_t size() const { return file_size_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::uint64_t file_size_ = 0;
    std::uint64_t bytes_read_ = 0;
};

// Walks a file consisting of concatenated gzip members, yielding each
// member's byte range and decompressed content in file order. Total bytes
// read equals the file size once the scan completes.
class GzipMemberScanner {
public:
    explicit GzipMemberScanner(CountingFile& file);
    ~GzipMemberScanner();

    struct Member {
        std::uint64_t offset;
        std::uint64_t compressed_length;
        Bytes data;
    };

    // Returns false at clean end-of-file. Throws CorruptionError with the
    // failing offset when a member is truncated or undecodable.
    bool next(Member& out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Appends gzip members to a file, tracking the write offset so callers
// get back seekable locators.
class GzipMemberWriter {
public:
    explicit GzipMemberWriter(const std::filesystem::path& path);
    ~GzipMemberWriter();

    GzipMemberWriter(const GzipMemberWriter&) = delete;
    GzipMemberWriter& operator=(const GzipMemberWriter&) = delete;

    // Compresses data as one member, appends it, and returns (offset,
    // compressed length) of the member just written.
    std::pair<std::uint64_t, std::uint64_t> write_member(const std::uint8_t* data,
                                                         std::size_t len);

    std::uint64_t offset() const { return offset_; }
    const std::filesystem::path& path() const { return path_; }
    void close();

private:
    std::filesystem::path path_;
    std::FILE* file_ = nullptr;
    std::uint64_t offset_ = 0;
};

// Plain-text sink that transparently gzip-compresses when the target path
// ends in ".gz". Used for JSON corpus and CDX output.
class TextSink {
public:
    explicit TextSink(const std::filesystem::path& path);
    ~TextSink();

    TextSink(const TextSink&) = delete;
    TextSink& operator=(const TextSink&) = delete;

    void write(std::string_view text);
    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace webcorpus
