#include <doctest.h>

#include <string>

#include "test_util.hpp"
#include "webcorpus/gzipio.hpp"
#include "webcorpus/http.hpp"

using namespace webcorpus;
using testutil::to_bytes;
using testutil::to_string;

TEST_CASE("minimal response parse") {
    Bytes raw = to_bytes("HTTP/1.1 200 OK\r\nContent-Type: text/html\r\n\r\n<html>");
    HttpResponse r = parse_http_response(raw);
    CHECK(r.status == 200);
    CHECK(r.reason == "OK");
    CHECK(r.headers.get("content-type") == "text/html");  // case-insensitive lookup
    CHECK(to_string(r.body) == "<html>");
}

TEST_CASE("empty body and multi-word reason") {
    Bytes raw = to_bytes("HTTP/1.0 404 Not Found\r\nContent-Length: 0\r\n\r\n");
    HttpResponse r = parse_http_response(raw);
    CHECK(r.status == 404);
    CHECK(r.reason == "Not Found");
    CHECK(r.body.empty());
}

TEST_CASE("malformed responses raise format errors") {
    CHECK_THROWS_AS(parse_http_response(to_bytes("<html>no status line</html>")), FormatError);
    CHECK_THROWS_AS(parse_http_response(to_bytes("HTTP/1.1 200 OK\r\nA: b\r\nno terminator")),
                    FormatError);
    CHECK_THROWS_AS(parse_http_response(Bytes{}), FormatError);
}

TEST_CASE("chunked transfer encoding is decoded during parse") {
    Bytes raw = to_bytes(
        "HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\n"
        "4\r\nWiki\r\n5\r\npedia\r\n0\r\n\r\n");
    HttpResponse r = parse_http_response(raw);
    CHECK(to_string(r.body) == "Wikipedia");
}

TEST_CASE("dechunk_body handles extensions and uppercase sizes") {
    Bytes chunked = to_bytes("A;ext=1\r\n0123456789\r\n0\r\n\r\n");
    CHECK(to_string(dechunk_body(chunked.data(), chunked.size())) == "0123456789");

    Bytes bad = to_bytes("zz\r\nxx\r\n");
    CHECK_THROWS_AS(dechunk_body(bad.data(), bad.size()), FormatError);
}

TEST_CASE("serialize round-trips, chunked and plain") {
    HttpResponse r;
    r.status = 200;
    r.reason = "OK";
    r.headers.add("Content-Type", "text/plain");
    std::string body(5000, 'q');
    for (std::size_t i = 0; i < body.size(); ++i) body[i] = char('a' + i % 17);
    r.body = to_bytes(body);

    SUBCASE("plain with Content-Length") {
        r.headers.add("Content-Length", std::to_string(r.body.size()));
        Bytes wire = serialize_http_response(r, false);
        HttpResponse back = parse_http_response(wire);
        CHECK(back.status == 200);
        CHECK(back.body == r.body);
    }
    SUBCASE("chunked framing decodes back to the plain body") {
        r.headers.add("Transfer-Encoding", "chunked");
        Bytes wire = serialize_http_response(r, true);
        // the wire form is framed, not the raw body
        CHECK(to_string(wire).find("\r\n0\r\n\r\n") != std::string::npos);
        HttpResponse back = parse_http_response(wire);
        CHECK(back.body == r.body);
    }
}

TEST_CASE("content-encoding is not decoded at the transport layer") {
    Bytes body = gzip_compress_member(to_bytes("hidden text"));
    HttpResponse r;
    r.status = 200;
    r.reason = "OK";
    r.headers.add("Content-Type", "text/plain");
    r.headers.add("Content-Encoding", "gzip");
    r.headers.add("Content-Length", std::to_string(body.size()));
    r.body = body;
    Bytes wire = serialize_http_response(r, false);

    HttpResponse back = parse_http_response(wire);
    CHECK(back.body == body);  // still compressed
    CHECK(decode_body_to_string(back.body, back.headers) == "hidden text");
}

TEST_CASE("content-type helpers") {
    CHECK(mime_from_content_type("text/html; charset=utf-8") == "text/html");
    CHECK(mime_from_content_type("Text/HTML") == "text/html");
    CHECK(mime_from_content_type("application/json") == "application/json");
    CHECK(charset_from_content_type("text/html; charset=UTF-8") == "utf-8");
    CHECK(charset_from_content_type("text/plain; charset=iso-8859-1") == "iso-8859-1");
    CHECK(charset_from_content_type("text/plain") == "");
}

TEST_CASE("charset decoding") {
    HeaderMap latin1{{"Content-Type", "text/plain; charset=iso-8859-1"}};
    Bytes cafe = to_bytes("caf\xE9");
    CHECK(decode_body_to_string(cafe, latin1) == "caf\xC3\xA9");  // é in UTF-8

    HeaderMap utf8{{"Content-Type", "text/plain; charset=utf-8"}};
    Bytes valid = to_bytes("caf\xC3\xA9");
    CHECK(decode_body_to_string(valid, utf8) == "caf\xC3\xA9");

    // invalid UTF-8 falls back to lossy replacement, never throws
    Bytes invalid = to_bytes("a\xFF b");
    std::string decoded = decode_body_to_string(invalid, utf8);
    CHECK(decoded.find("\xEF\xBF\xBD") != std::string::npos);  // U+FFFD
    CHECK(decoded.front() == 'a');
    CHECK(decoded.back() == 'b');
}

TEST_CASE("utf8_lossy and latin1_to_utf8") {
    CHECK(utf8_lossy("plain ascii") == "plain ascii");
    CHECK(utf8_lossy("ok \xC3\xA9 ok") == "ok \xC3\xA9 ok");
    CHECK(utf8_lossy("bad \xC3") == "bad \xEF\xBF\xBD");  // truncated sequence
    // every rejected byte is replaced on its own: the cut lead byte and
    // the now-orphaned continuation byte each become U+FFFD
    CHECK(utf8_lossy(std::string("\xE2\x82") + "x") == "\xEF\xBF\xBD\xEF\xBF\xBDx");
    CHECK(latin1_to_utf8("caf\xE9") == "caf\xC3\xA9");
    CHECK(latin1_to_utf8("plain") == "plain");
}
