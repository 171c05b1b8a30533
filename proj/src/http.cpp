#include "webcorpus/http.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>

namespace webcorpus {

namespace {

std::string_view as_view(const std::uint8_t* data, std::size_t len) {
    return {reinterpret_cast<const char*>(data), len};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return HeaderMap::name_equals(a, b);
}

}  // namespace

HttpResponse parse_http_response(const std::uint8_t* data, std::size_t len) {
    std::string_view text = as_view(data, len);

    std::size_t header_end = text.find("\r\n\r\n");
    if (header_end == std::string_view::npos) {
        throw FormatError("HTTP response has no header terminator");
    }
    std::string_view head = text.substr(0, header_end);
    std::string_view body_raw = text.substr(header_end + 4);

    std::size_t line_end = head.find("\r\n");
    std::string_view status_line =
        line_end == std::string_view::npos ? head : head.substr(0, line_end);
    if (status_line.substr(0, 5) != "HTTP/") {
        throw FormatError("HTTP response missing status line");
    }

    HttpResponse resp;
    {
        std::size_t sp1 = status_line.find(' ');
        if (sp1 == std::string_view::npos) {
            throw FormatError("malformed HTTP status line: '" + std::string(status_line) + "'");
        }
        std::size_t sp2 = status_line.find(' ', sp1 + 1);
        std::string_view code = status_line.substr(
            sp1 + 1, sp2 == std::string_view::npos ? std::string_view::npos : sp2 - sp1 - 1);
        int status = 0;
        auto [ptr, ec] = std::from_chars(code.data(), code.data() + code.size(), status);
        if (ec != std::errc() || ptr != code.data() + code.size() || status < 100 ||
            status > 599) {
            throw FormatError("bad HTTP status code: '" + std::string(code) + "'");
        }
        resp.status = status;
        if (sp2 != std::string_view::npos) {
            resp.reason = std::string(trim(status_line.substr(sp2 + 1)));
        }
    }

    std::size_t pos = line_end == std::string_view::npos ? head.size() : line_end + 2;
    while (pos < head.size()) {
        std::size_t eol = head.find("\r\n", pos);
        std::string_view line =
            eol == std::string_view::npos ? head.substr(pos) : head.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? head.size() : eol + 2;
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;  // tolerate stray lines
        std::string_view name = trim(line.substr(0, colon));
        std::string_view value = trim(line.substr(colon + 1));
        resp.headers.add(latin1_to_utf8(name), latin1_to_utf8(value));
    }

    auto transfer = resp.headers.get("Transfer-Encoding");
    if (transfer && lower(trim(*transfer)) == "chunked") {
        resp.body = dechunk_body(reinterpret_cast<const std::uint8_t*>(body_raw.data()),
                                 body_raw.size());
    } else {
        resp.body.assign(body_raw.begin(), body_raw.end());
    }
    return resp;
}

HttpResponse parse_http_response(const Bytes& payload) {
    return parse_http_response(payload.data(), payload.size());
}

Bytes dechunk_body(const std::uint8_t* data, std::size_t len) {
    std::string_view text = as_view(data, len);
    Bytes out;
    std::size_t pos = 0;
    for (;;) {
        std::size_t eol = text.find("\r\n", pos);
        if (eol == std::string_view::npos) {
            throw FormatError("chunked body: missing chunk-size line");
        }
        std::string_view size_field = text.substr(pos, eol - pos);
        if (std::size_t semi = size_field.find(';'); semi != std::string_view::npos) {
            size_field = size_field.substr(0, semi);  // chunk extensions ignored
        }
        size_field = trim(size_field);
        std::size_t chunk_len = 0;
        auto [ptr, ec] = std::from_chars(size_field.data(),
                                         size_field.data() + size_field.size(), chunk_len, 16);
        if (ec != std::errc() || ptr != size_field.data() + size_field.size()) {
            throw FormatError("chunked body: bad chunk size '" + std::string(size_field) + "'");
        }
        pos = eol + 2;
        if (chunk_len == 0) break;  // trailers, if any, are ignored
        if (pos + chunk_len > text.size()) {
            throw FormatError("chunked body: truncated chunk");
        }
        out.insert(out.end(), data + pos, data + pos + chunk_len);
        pos += chunk_len;
        if (text.substr(pos, 2) != "\r\n") {
            throw FormatError("chunked body: missing chunk terminator");
        }
        pos += 2;
    }
    return out;
}

Bytes serialize_http_response(const HttpResponse& response, bool chunked_transfer) {
    std::string head = "HTTP/1.1 " + std::to_string(response.status);
    if (!response.reason.empty()) head += " " + response.reason;
    head += "\r\n";
    for (const auto& [name, value] : response.headers) {
        head += name + ": " + value + "\r\n";
    }
    head += "\r\n";

    Bytes out(head.begin(), head.end());
    if (!chunked_transfer) {
        out.insert(out.end(), response.body.begin(), response.body.end());
        return out;
    }

    // fixed-size chunking keeps generated corpora deterministic
    const std::size_t kChunk = 1024;
    std::size_t pos = 0;
    while (pos < response.body.size()) {
        std::size_t n = std::min(kChunk, response.body.size() - pos);
        char size_line[24];
        std::snprintf(size_line, sizeof(size_line), "%zx\r\n", n);
        out.insert(out.end(), size_line, size_line + std::strlen(size_line));
        out.insert(out.end(), response.body.begin() + pos, response.body.begin() + pos + n);
        out.push_back('\r');
        out.push_back('\n');
        pos += n;
    }
    const char* last = "0\r\n\r\n";
    out.insert(out.end(), last, last + 5);
    return out;
}

std::string mime_from_content_type(std::string_view content_type) {
    std::string_view mime = content_type;
    if (std::size_t semi = mime.find(';'); semi != std::string_view::npos) {
        mime = mime.substr(0, semi);
    }
    return lower(trim(mime));
}

std::string charset_from_content_type(std::string_view content_type) {
    std::size_t pos = 0;
    while ((pos = content_type.find(';', pos)) != std::string_view::npos) {
        std::string_view param = content_type.substr(pos + 1);
        if (std::size_t next = param.find(';'); next != std::string_view::npos) {
            param = param.substr(0, next);
        }
        param = trim(param);
        std::size_t eq = param.find('=');
        if (eq != std::string_view::npos && iequals(trim(param.substr(0, eq)), "charset")) {
            std::string_view value = trim(param.substr(eq + 1));
            if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
                value.back() == value.front()) {
                value = value.substr(1, value.size() - 2);
            }
            return lower(value);
        }
        ++pos;
    }
    return {};
}

std::string decode_body_to_string(const Bytes& body, const HeaderMap& http_headers) {
    const Bytes* plain = &body;
    Bytes inflated;
    if (auto enc = http_headers.get("Content-Encoding")) {
        std::string encoding = lower(trim(*enc));
        if (encoding == "gzip" || encoding == "x-gzip" || encoding == "deflate") {
            inflated = inflate_body(body.data(), body.size());
            plain = &inflated;
        } else if (encoding != "identity" && !encoding.empty()) {
            throw CorruptionError("unsupported Content-Encoding: " + encoding);
        }
    }

    std::string charset;
    if (auto ct = http_headers.get("Content-Type")) {
        charset = charset_from_content_type(*ct);
    }

    std::string_view raw(reinterpret_cast<const char*>(plain->data()), plain->size());
    if (charset == "iso-8859-1" || charset == "latin1" || charset == "latin-1") {
        return latin1_to_utf8(raw);
    }
    // utf-8, us-ascii, unknown and missing charsets all take the lossy
    // UTF-8 route
    return utf8_lossy(raw);
}

std::string utf8_lossy(std::string_view bytes) {
    static const char kReplacement[] = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        unsigned char c = bytes[i];
        if (c < 0x80) {
            out.push_back(char(c));
            ++i;
            continue;
        }
        std::size_t extra;
        unsigned cp_min;
        if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp_min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp_min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp_min = 0x10000;
        } else {
            out += kReplacement;
            ++i;
            continue;
        }
        if (i + extra >= bytes.size()) {
            out += kReplacement;
            ++i;
            continue;
        }
        std::uint32_t cp = c & (0x3F >> extra);
        bool ok = true;
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cc = bytes[i + k];
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok || cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out += kReplacement;
            ++i;
            continue;
        }
        out.append(bytes.substr(i, extra + 1));
        i += extra + 1;
    }
    return out;
}

std::string latin1_to_utf8(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (unsigned char c : bytes) {
        if (c < 0x80) {
            out.push_back(char(c));
        } else {
            out.push_back(char(0xC0 | (c >> 6)));
            out.push_back(char(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

}  // namespace webcorpus
