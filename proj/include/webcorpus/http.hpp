#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "webcorpus/errors.hpp"
#include "webcorpus/gzipio.hpp"
#include "webcorpus/header_map.hpp"

namespace webcorpus {

struct HttpResponse {
    int status = 0;
    std::string reason;
    HeaderMap headers;
    Bytes body;
};

// Parse a raw HTTP response message: status line, headers up to the blank
// line, then the body. Header bytes are decoded as Latin-1 (lossless for
// 0-255). Transfer-Encoding: chunked is decoded here; Content-Encoding is
// left alone for content-level consumers.
HttpResponse parse_http_response(const std::uint8_t* data, std::size_t len);
HttpResponse parse_http_response(const Bytes& payload);

// Serialize a response message with CRLF line endings (corpus generation).
Bytes serialize_http_response(const HttpResponse& response,
                              bool chunked_transfer = false);

// Decode chunked transfer framing into the plain body.
Bytes dechunk_body(const std::uint8_t* data, std::size_t len);

// MIME type portion of a Content-Type value ("text/html; charset=utf-8"
// -> "text/html"), lowercased.
std::string mime_from_content_type(std::string_view content_type);

// charset parameter of a Content-Type value, lowercased; empty if absent.
std::string charset_from_content_type(std::string_view content_type);

// Decode body bytes into a UTF-8 string: honor Content-Encoding
// (gzip/deflate) first, then the charset parameter (utf-8, iso-8859-1,
// us-ascii; anything else falls back to UTF-8 with lossy replacement).
// Decompression failures raise CorruptionError.
std::string decode_body_to_string(const Bytes& body, const HeaderMap& http_headers);

// UTF-8 validation with U+FFFD substitution for invalid sequences.
std::string utf8_lossy(std::string_view bytes);

// Latin-1 bytes to UTF-8.
std::string latin1_to_utf8(std::string_view bytes);

}  // namespace webcorpus
