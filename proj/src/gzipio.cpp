#include "webcorpus/gzipio.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace webcorpus {

namespace {

constexpr int kGzipWindowBits = 15 + 16;      // gzip wrapper
constexpr int kAutoWindowBits = 15 + 32;      // gzip or zlib, auto-detected
constexpr std::size_t kScanChunk = 64 * 1024;

[[noreturn]] void throw_zlib(const char* what, int rc) {
    throw CorruptionError(std::string(what) + " (zlib rc " + std::to_string(rc) + ")");
}

Bytes inflate_all(const std::uint8_t* data, std::size_t len, int window_bits,
                  bool require_exact_end) {
    z_stream strm{};
    int rc = inflateInit2(&strm, window_bits);
    if (rc != Z_OK) throw_zlib("inflateInit failed", rc);

    Bytes out;
    out.reserve(len * 3);
    std::uint8_t chunk[16 * 1024];
    strm.next_in = const_cast<std::uint8_t*>(data);
    strm.avail_in = static_cast<uInt>(len);

    for (;;) {
        strm.next_out = chunk;
        strm.avail_out = sizeof(chunk);
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw_zlib("inflate failed", rc);
        }
        out.insert(out.end(), chunk, chunk + (sizeof(chunk) - strm.avail_out));
        if (rc == Z_STREAM_END) break;
        if (strm.avail_in == 0) {
            inflateEnd(&strm);
            throw CorruptionError("truncated gzip member");
        }
    }
    bool trailing = strm.avail_in != 0;
    inflateEnd(&strm);
    if (require_exact_end && trailing) {
        throw CorruptionError("trailing bytes after gzip member");
    }
    return out;
}

}  // namespace

Bytes gzip_compress_member(const std::uint8_t* data, std::size_t len, int level) {
    z_stream strm{};
    int rc = deflateInit2(&strm, level, Z_DEFLATED, kGzipWindowBits, 8, Z_DEFAULT_STRATEGY);
    if (rc != Z_OK) throw_zlib("deflateInit failed", rc);

    Bytes out;
    out.resize(deflateBound(&strm, static_cast<uLong>(len)));
    strm.next_in = const_cast<std::uint8_t*>(data);
    strm.avail_in = static_cast<uInt>(len);
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    rc = deflate(&strm, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&strm);
        throw_zlib("deflate failed", rc);
    }
    out.resize(strm.total_out);
    deflateEnd(&strm);
    return out;
}

Bytes gzip_compress_member(const Bytes& data, int level) {
    return gzip_compress_member(data.data(), data.size(), level);
}

Bytes gzip_decompress_member(const std::uint8_t* data, std::size_t len) {
    if (len < 2 || data[0] != 0x1f || data[1] != 0x8b) {
        throw LocatorError("no gzip magic at offset");
    }
    return inflate_all(data, len, kGzipWindowBits, /*require_exact_end=*/true);
}

Bytes gzip_decompress_member(const Bytes& data) {
    return gzip_decompress_member(data.data(), data.size());
}

Bytes inflate_body(const std::uint8_t* data, std::size_t len) {
    return inflate_all(data, len, kAutoWindowBits, /*require_exact_end=*/false);
}

// --- CountingFile ---

CountingFile::CountingFile(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (!file_) throw IoError("cannot open " + path.string());
    std::error_code ec;
    file_size_ = std::filesystem::file_size(path, ec);
    if (ec) {
        std::fclose(file_);
        throw IoError("cannot stat " + path.string());
    }
}

CountingFile::~CountingFile() {
    if (file_) std::fclose(file_);
}

Bytes CountingFile::read_range(std::uint64_t offset, std::uint64_t len) {
    if (std::fseek(file_, static_cast<long>(offset), SEEK_SET) != 0) {
        throw IoError("seek failed in " + path_.string());
    }
    Bytes out(len);
    std::size_t got = std::fread(out.data(), 1, len, file_);
    bytes_read_ += got;
    if (got != len) {
        throw IoError("short read at offset " + std::to_string(offset) + " in " +
                      path_.string());
    }
    return out;
}

std::size_t CountingFile::read_some(std::uint8_t* out, std::size_t len) {
    std::size_t got = std::fread(out, 1, len, file_);
    bytes_read_ += got;
    if (got < len && std::ferror(file_)) {
        throw IoError("read error in " + path_.string());
    }
    return got;
}

// --- GzipMemberScanner ---

struct GzipMemberScanner::Impl {
    CountingFile& file;
    z_stream strm{};
    bool stream_open = false;
    Bytes inbuf;
    std::size_t in_pos = 0;    // next unconsumed byte in inbuf
    std::size_t in_len = 0;    // valid bytes in inbuf
    std::uint64_t consumed = 0;  // file offset of inbuf[in_pos]
    bool eof = false;

    explicit Impl(CountingFile& f) : file(f) { inbuf.resize(kScanChunk); }

    bool fill() {
        if (eof) return false;
        in_len = file.read_some(inbuf.data(), inbuf.size());
        in_pos = 0;
        if (in_len == 0) {
            eof = true;
            return false;
        }
        return true;
    }
};

GzipMemberScanner::GzipMemberScanner(CountingFile& file) : impl_(new Impl(file)) {}

GzipMemberScanner::~GzipMemberScanner() {
    if (impl_ && impl_->stream_open) inflateEnd(&impl_->strm);
}

bool GzipMemberScanner::next(Member& out) {
    Impl& s = *impl_;
    if (s.in_pos == s.in_len && !s.fill()) {
        return false;  // clean EOF at a member boundary
    }

    out.offset = s.consumed;
    out.compressed_length = 0;
    out.data.clear();

    if (!s.stream_open) {
        int rc = inflateInit2(&s.strm, kGzipWindowBits);
        if (rc != Z_OK) throw_zlib("inflateInit failed", rc);
        s.stream_open = true;
    } else {
        inflateReset(&s.strm);
    }

    std::uint8_t chunk[16 * 1024];
    for (;;) {
        if (s.in_pos == s.in_len && !s.fill()) {
            throw CorruptionError("truncated gzip member at offset " +
                                  std::to_string(out.offset));
        }
        s.strm.next_in = s.inbuf.data() + s.in_pos;
        s.strm.avail_in = static_cast<uInt>(s.in_len - s.in_pos);
        s.strm.next_out = chunk;
        s.strm.avail_out = sizeof(chunk);
        int rc = inflate(&s.strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR) {
            throw CorruptionError("bad gzip data at offset " + std::to_string(out.offset) +
                                  " (zlib rc " + std::to_string(rc) + ")");
        }
        std::size_t used = (s.in_len - s.in_pos) - s.strm.avail_in;
        s.in_pos += used;
        s.consumed += used;
        out.compressed_length += used;
        out.data.insert(out.data.end(), chunk, chunk + (sizeof(chunk) - s.strm.avail_out));
        if (rc == Z_STREAM_END) return true;
        if (rc == Z_BUF_ERROR && used == 0 && s.strm.avail_out == sizeof(chunk)) {
            // zlib made no progress: input exhausted mid-member
            if (s.in_pos == s.in_len && !s.fill()) {
                throw CorruptionError("truncated gzip member at offset " +
                                      std::to_string(out.offset));
            }
        }
    }
}

// --- GzipMemberWriter ---

GzipMemberWriter::GzipMemberWriter(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw IoError("cannot create " + path.string());
}

GzipMemberWriter::~GzipMemberWriter() {
    if (file_) std::fclose(file_);
}

std::pair<std::uint64_t, std::uint64_t> GzipMemberWriter::write_member(
    const std::uint8_t* data, std::size_t len) {
    Bytes member = gzip_compress_member(data, len);
    std::uint64_t at = offset_;
    if (std::fwrite(member.data(), 1, member.size(), file_) != member.size()) {
        throw IoError("write failed: " + path_.string());
    }
    offset_ += member.size();
    return {at, member.size()};
}

void GzipMemberWriter::close() {
    if (file_) {
        if (std::fclose(file_) != 0) {
            file_ = nullptr;
            throw IoError("close failed: " + path_.string());
        }
        file_ = nullptr;
    }
}

// --- TextSink ---

struct TextSink::Impl {
    bool gz = false;
    gzFile gzfile = nullptr;
    std::ofstream plain;
    std::filesystem::path path;
};

TextSink::TextSink(const std::filesystem::path& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->gz = path.extension() == ".gz";
    if (impl_->gz) {
        impl_->gzfile = gzopen(path.c_str(), "wb");
        if (!impl_->gzfile) throw IoError("cannot create " + path.string());
    } else {
        impl_->plain.open(path, std::ios::binary);
        if (!impl_->plain) throw IoError("cannot create " + path.string());
    }
}

TextSink::~TextSink() {
    try {
        close();
    } catch (...) {
    }
}

void TextSink::write(std::string_view text) {
    if (impl_->gz) {
        if (!text.empty() &&
            gzwrite(impl_->gzfile, text.data(), static_cast<unsigned>(text.size())) <= 0) {
            throw IoError("gzip write failed: " + impl_->path.string());
        }
    } else {
        impl_->plain.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!impl_->plain) throw IoError("write failed: " + impl_->path.string());
    }
}

void TextSink::close() {
    if (impl_->gz) {
        if (impl_->gzfile) {
            int rc = gzclose(impl_->gzfile);
            impl_->gzfile = nullptr;
            if (rc != Z_OK) throw IoError("gzip close failed: " + impl_->path.string());
        }
    } else if (impl_->plain.is_open()) {
        impl_->plain.close();
        if (impl_->plain.fail()) throw IoError("close failed: " + impl_->path.string());
    }
}

}  // namespace webcorpus
