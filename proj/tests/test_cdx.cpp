#include <doctest.h>

#include <string>
#include <vector>

#include "test_util.hpp"
#include "webcorpus/cdx.hpp"

using namespace webcorpus;

namespace {

// The canonical example line used throughout the format tests.
const std::string kExampleLine =
    "com,example)/jcdl 20160117113253 http://example.com/jcdl text/html 200 "
    "RKMS6XLYED4G8POFQUIN37WDEWYLD9Z - - 12345 67890 archive.warc.gz";

}  // namespace

TEST_CASE("parse_cdx_line binds all eleven fields") {
    CdxRecord r = parse_cdx_line(kExampleLine);
    CHECK(r.surt_url == "com,example)/jcdl");
    CHECK(r.timestamp == "20160117113253");
    CHECK(r.original_url == "http://example.com/jcdl");
    CHECK(r.mime == "text/html");
    REQUIRE(r.status.has_value());
    CHECK(*r.status == 200);
    CHECK(r.digest == "RKMS6XLYED4G8POFQUIN37WDEWYLD9Z");
    CHECK_FALSE(r.redirect_url.has_value());
    CHECK_FALSE(r.meta_tags.has_value());
    CHECK(r.compressed_length == 12345);
    CHECK(r.offset == 67890);
    CHECK(r.filename == "archive.warc.gz");
}

TEST_CASE("parse then write reproduces the line byte for byte") {
    CHECK(write_cdx_line(parse_cdx_line(kExampleLine)) == kExampleLine);
}

TEST_CASE("absent sentinels render and parse as dashes") {
    CdxRecord r = parse_cdx_line(kExampleLine);
    r.status.reset();
    std::string line = write_cdx_line(r);
    CHECK(line.find(" - ") != std::string::npos);
    CdxRecord back = parse_cdx_line(line);
    CHECK_FALSE(back.status.has_value());
    CHECK(back == r);

    r.redirect_url = "http://example.com/moved";
    r.meta_tags = "A";
    CHECK(parse_cdx_line(write_cdx_line(r)) == r);
}

TEST_CASE("field-count errors name the count") {
    auto check_count_error = [](const std::string& line, const std::string& count) {
        try {
            parse_cdx_line(line);
            FAIL("expected FormatError for: ", line);
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find(count) != std::string::npos);
        }
    };
    // 10 fields
    check_count_error(
        "com,example)/ 20160117113253 http://example.com/ text/html 200 DIGEST - - 12345 "
        "archive.warc.gz",
        "10");
    // the 9-field layout is rejected, named distinctly
    check_count_error(
        "com,example)/ 20160117113253 http://example.com/ text/html 200 DIGEST - 12345 "
        "archive.warc.gz",
        "9");
    check_count_error("", "0");
}

TEST_CASE("non-numeric fields raise parse errors naming the field") {
    auto expect_parse_error = [](std::string line, const std::string& field) {
        try {
            parse_cdx_line(line);
            FAIL("expected ParseError naming ", field);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    std::string base = kExampleLine;
    expect_parse_error(
        "com,example)/jcdl 20160117113253 http://example.com/jcdl text/html abc "
        "DIG - - 12345 67890 archive.warc.gz",
        "status");
    expect_parse_error(
        "com,example)/jcdl 20160117113253 http://example.com/jcdl text/html 200 "
        "DIG - - 12x45 67890 archive.warc.gz",
        "length");
    expect_parse_error(
        "com,example)/jcdl 20160117113253 http://example.com/jcdl text/html 200 "
        "DIG - - 12345 -1 archive.warc.gz",
        "offset");
    expect_parse_error(
        "com,example)/jcdl 2016011711325x http://example.com/jcdl text/html 200 "
        "DIG - - 12345 67890 archive.warc.gz",
        "timestamp");
    // 14 digits but not a calendar date
    expect_parse_error(
        "com,example)/jcdl 20160230120000 http://example.com/jcdl text/html 200 "
        "DIG - - 12345 67890 archive.warc.gz",
        "timestamp");
}

TEST_CASE("header line recognition") {
    CHECK(is_cdx_header_line(" CDX N b a m s k r M S V g"));
    CHECK(is_cdx_header_line("CDX N b a m s k r M S V g"));
    CHECK(is_cdx_header_line(
        "surt timestamp url mime status digest redirect meta length offset filename"));
    CHECK_FALSE(is_cdx_header_line(kExampleLine));
    CHECK_FALSE(is_cdx_header_line(""));
}

TEST_CASE("surt_from_url canonicalization") {
    CHECK(surt_from_url("http://example.com/jcdl") == "com,example)/jcdl");
    CHECK(surt_from_url("http://localhost/") == "localhost)/");
    // Golden value from hand-applying the rules: scheme dropped and
    // case-insensitive, host lowercased/reversed, non-default port kept,
    // path case preserved, query kept verbatim.
    CHECK(surt_from_url("HTTP://Sub.Example.COM:8080/A/b?q=1") ==
          "com,example,sub:8080)/A/b?q=1");

    CHECK(surt_from_url("https://example.com:443/x") == "com,example)/x");  // default port
    CHECK(surt_from_url("http://example.com:80/x") == "com,example)/x");
    CHECK(surt_from_url("http://example.com:8080/") == "com,example:8080)/");
    CHECK(surt_from_url("http://example.com/a#frag") == "com,example)/a");  // fragment dropped
    CHECK(surt_from_url("http://example.com") == "com,example)/");  // empty path normalized
    CHECK(surt_from_url("http://www.example.com/") == "com,example,www)/");  // www kept
    CHECK(surt_from_url("http://example.com/p?b=2&a=1") ==
          "com,example)/p?b=2&a=1");  // query order kept
    // scheme-insensitive: http and https twins share a surt
    CHECK(surt_from_url("https://example.com/x") == surt_from_url("http://example.com/x"));

    CHECK_THROWS_AS(surt_from_url("not a url"), CanonicalizationError);
    CHECK_THROWS_AS(surt_from_url("http:///nohost"), CanonicalizationError);
}

TEST_CASE("host_from_surt inverts the host reversal") {
    CHECK(host_from_surt("com,example)/jcdl") == "example.com");
    CHECK(host_from_surt("com,example,sub:8080)/x") == "sub.example.com");
    CHECK(host_from_surt("localhost)/") == "localhost");
}

TEST_CASE("timestamp conversions") {
    CHECK(timestamp_to_iso("20160117113253") == "2016-01-17T11:32:53.000+00:00");
    CHECK(timestamp_to_iso("20111203000000") == "2011-12-03T00:00:00.000+00:00");
    CHECK_THROWS_AS(timestamp_to_iso("20160230120000"), ParseError);  // Feb 30
    CHECK_THROWS_AS(timestamp_to_iso("2016"), ParseError);

    CHECK(is_valid_timestamp14("20160117113253"));
    CHECK(is_valid_timestamp14("20160229120000"));   // 2016 is a leap year
    CHECK_FALSE(is_valid_timestamp14("20150229120000"));  // 2015 is not
    CHECK_FALSE(is_valid_timestamp14("20160117256000"));  // hour 25
    CHECK_FALSE(is_valid_timestamp14("201601171132"));
    CHECK_FALSE(is_valid_timestamp14("2016011711325a"));

    CHECK(timestamp14_to_epoch("20160117113253") == 1453030373);
    CHECK(timestamp14_to_epoch("20111203000000") == 1322870400);
    CHECK(epoch_to_timestamp14(1453030373) == "20160117113253");
    CHECK(epoch_to_timestamp14(timestamp14_to_epoch("20120229235959")) == "20120229235959");
}

TEST_CASE("WARC-Date conversions") {
    CHECK(warc_date_to_timestamp14("2016-01-17T11:32:53Z") == "20160117113253");
    CHECK(warc_date_to_timestamp14("2016-01-17T11:32:53.123Z") == "20160117113253");
    CHECK(warc_date_to_timestamp14("20160117113253") == "20160117113253");
    CHECK(timestamp14_to_warc_date("20160117113253") == "2016-01-17T11:32:53Z");
    CHECK(warc_date_to_timestamp14(timestamp14_to_warc_date("20120229235959")) ==
          "20120229235959");
}

TEST_CASE("for_each_cdx_record streams data lines and skips the header") {
    testutil::TempDir tmp;
    auto p = tmp / "index.cdx";
    testutil::write_file(p, " CDX N b a m s k r M S V g\n" + kExampleLine + "\n" +
                                kExampleLine + "\n");
    std::vector<CdxRecord> rows;
    for_each_cdx_record(p, [&](CdxRecord&& r) { rows.push_back(std::move(r)); });
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == rows[1]);
    CHECK(rows[0].surt_url == "com,example)/jcdl");

    SUBCASE("a file without a header parses every line") {
        auto p2 = tmp / "bare.cdx";
        testutil::write_file(p2, kExampleLine + "\n");
        std::size_t n = 0;
        for_each_cdx_record(p2, [&](CdxRecord&&) { ++n; });
        CHECK(n == 1);
    }

    SUBCASE("parse errors carry the file and line number") {
        auto p3 = tmp / "broken.cdx";
        testutil::write_file(p3, " CDX N b a m s k r M S V g\n" + kExampleLine +
                                     "\nbroken line\n");
        try {
            for_each_cdx_record(p3, [](CdxRecord&&) {});
            FAIL("expected an error for the malformed third line");
        } catch (const Error& e) {
            std::string msg = e.what();
            CHECK(msg.find("broken.cdx") != std::string::npos);
            CHECK(msg.find(":3") != std::string::npos);
        }
    }
}
