#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "webcorpus/enrich.hpp"

using namespace webcorpus;
using testutil::FixtureCapture;
using testutil::TempDir;

namespace {

const std::string kHtml =
    "<html><head><title>Digital  Library\n Conference</title></head>"
    "<body><p>all about the internet archive</p></body></html>";

struct Fixture {
    TempDir tmp;
    testutil::FixtureArchive archive;
    DirectoryFetcher fetcher;

    Fixture()
        : archive(testutil::make_fixture_archive(
              tmp.path(),
              {
                  {"http://fixture.test/a", "20160117113253", 200,
                   "text/html; charset=utf-8", kHtml},
                  {"http://fixture.test/b", "20160117113254", 200,
                   "text/plain; charset=iso-8859-1", "caf\xE9 culture", true, true},
              })),
          fetcher(tmp.path()) {}

    EnrichedRecord record(std::size_t i) const { return make_record(archive.rows[i]); }
};

bool has_path(const EnrichedRecord& r, std::string_view path) {
    return static_cast<bool>(get_path(r, path));
}

}  // namespace

TEST_CASE("registry registration rules") {
    Registry reg = Registry::with_builtins();
    CHECK(reg.contains("response"));
    CHECK(reg.contains("string"));
    CHECK(reg.contains("html-title"));

    EnrichFuncSpec ok{"custom", "string", "payload.string",
                      {"upper"}, [](const FieldValue*, EnrichContext&) {
                          return EnrichResult{};
                      }};
    CHECK_NOTHROW(reg.register_func(ok));

    auto body = [](const FieldValue*, EnrichContext&) { return EnrichResult{}; };
    CHECK_THROWS_AS(reg.register_func({"custom", {}, "", {"x"}, body}), PlanError);  // dup
    CHECK_THROWS_AS(reg.register_func({"nodep", "ghost", "f", {"x"}, body}), PlanError);
    CHECK_THROWS_AS(reg.register_func({"selfy", "selfy", "f", {"x"}, body}), PlanError);
    CHECK_THROWS_AS(reg.register_func({"nofields", {}, "", {}, body}), PlanError);
    // "_" violates the key grammar, so this surfaces as a path error
    CHECK_THROWS_AS(reg.register_func({"badfield", {}, "", {"_"}, body}), PathError);
    CHECK_THROWS_AS(reg.register_func({"bad name", {}, "", {"x"}, body}), PlanError);
    CHECK_THROWS_AS(reg.register_func({"nobody", {}, "", {"x"}, nullptr}), PlanError);
}

TEST_CASE("result paths and dependency closures") {
    Registry reg = Registry::with_builtins();
    auto own = reg.result_paths("html-title");
    REQUIRE(own.size() == 1);
    CHECK(own[0] == "payload.string.html.title");

    auto closure = reg.closure_result_paths("html-title");
    // dependencies first: response, then string, then the title
    std::vector<std::string> expected = {"recordHeader", "httpHeader", "payload",
                                         "payload.string", "payload.string.html.title"};
    CHECK(closure == expected);
    CHECK_THROWS_AS(reg.result_paths("ghost"), PlanError);
}

TEST_CASE("string content runs its dependency implicitly but marks only itself") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    EnrichedRecord r = apply_enrichment(fx.record(0), "string", reg, &fx.fetcher);

    CHECK(r.output_marks == std::vector<std::string>{"payload.string"});
    CHECK(r.applied.count("response") == 1);
    CHECK(r.applied.count("string") == 1);

    // the dependency's values exist in the tree, they are just unmarked
    CHECK(has_path(r, "recordHeader"));
    CHECK(has_path(r, "httpHeader"));
    CHECK(has_path(r, "payload"));
    CHECK(get_path_as<std::string>(r, "payload.string") == kHtml);
    CHECK_FALSE(has_error_annotation(r));
}

TEST_CASE("explicit response application marks the header fields too") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    EnrichedRecord r = apply_enrichment(fx.record(0), "response", reg, &fx.fetcher);
    r = apply_enrichment(r, "string", reg, &fx.fetcher);

    std::vector<std::string> expected = {"recordHeader", "httpHeader", "payload",
                                         "payload.string"};
    CHECK(r.output_marks == expected);

    CHECK(get_path_as<std::string>(r, "httpHeader.Content-Type") ==
          "text/html; charset=utf-8");
    CHECK(get_path_as<std::string>(r, "recordHeader.WARC-Target-URI") ==
          "http://fixture.test/a");
}

TEST_CASE("string content decodes transfer, content encoding and charset") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    // row 1 is chunked + gzip content-encoded + latin-1
    EnrichedRecord r = apply_enrichment(fx.record(1), "string", reg, &fx.fetcher);
    CHECK(get_path_as<std::string>(r, "payload.string") == "caf\xC3\xA9 culture");
}

TEST_CASE("html title extraction over the fixture") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    EnrichedRecord r = apply_enrichment(fx.record(0), "html-title", reg, &fx.fetcher);
    CHECK(get_path_as<std::string>(r, "payload.string.html.title") ==
          "Digital Library Conference");  // whitespace collapsed
    CHECK(r.output_marks == std::vector<std::string>{"payload.string.html.title"});

    // a page without a title gains no result and no mark, and no error
    EnrichedRecord p = apply_enrichment(fx.record(1), "html-title", reg, &fx.fetcher);
    CHECK_FALSE(has_path(p, "payload.string.html.title"));
    CHECK(p.output_marks.empty());
    CHECK_FALSE(has_error_annotation(p));
    CHECK(p.applied.count("html-title") == 1);  // still memoized as done
}

TEST_CASE("memoization: each body runs at most once per record") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    reg.reset_executions();

    EnrichedRecord r = fx.record(0);
    r = apply_enrichment(r, "string", reg, &fx.fetcher);     // runs response + string
    r = apply_enrichment(r, "response", reg, &fx.fetcher);   // reused, but now marked
    r = apply_enrichment(r, "string", reg, &fx.fetcher);     // no-op
    r = apply_enrichment(r, "html-title", reg, &fx.fetcher); // only the title body runs

    CHECK(reg.executions("response") == 1);
    CHECK(reg.executions("string") == 1);
    CHECK(reg.executions("html-title") == 1);

    // the late explicit application still added the response marks
    CHECK(r.has_mark("payload"));
    CHECK(r.has_mark("recordHeader"));
    CHECK(r.has_mark("httpHeader"));
}

TEST_CASE("double execution yields an identical tree") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    EnrichedRecord once = apply_enrichment(fx.record(0), "html-title", reg, &fx.fetcher);
    EnrichedRecord twice = apply_enrichment(once, "html-title", reg, &fx.fetcher);
    CHECK(once.tree == twice.tree);
    CHECK(once.output_marks == twice.output_marks);

    EnrichedRecord fresh = apply_enrichment(fx.record(0), "html-title", reg, &fx.fetcher);
    CHECK(fresh.tree == once.tree);
}

TEST_CASE("failures annotate the record instead of dropping it") {
    Fixture fx;
    Registry reg = Registry::with_builtins();

    CdxRecord bogus = fx.archive.rows[0];
    bogus.offset += 3;  // misaligned: not a gzip member boundary
    EnrichedRecord r = apply_enrichment(make_record(bogus), "string", reg, &fx.fetcher);

    CHECK(has_error_annotation(r));
    auto err = get_path_as<std::string>(r, "error");
    REQUIRE(err.has_value());
    CHECK(err->find("response:") != std::string::npos);  // the failing function is named
    CHECK_FALSE(has_path(r, "payload.string"));
    CHECK_FALSE(r.has_mark("payload.string"));
    CHECK(r.has_mark("error"));  // annotations always serialize

    SUBCASE("the failure is memoized, not repeated") {
        EnrichedRecord again = apply_enrichment(r, "string", reg, &fx.fetcher);
        CHECK(get_path_as<std::string>(again, "error") == *err);
    }
    SUBCASE("unknown enrichment names annotate too") {
        EnrichedRecord u = apply_enrichment(fx.record(0), "ghost", reg, &fx.fetcher);
        auto msg = get_path_as<std::string>(u, "error");
        REQUIRE(msg.has_value());
        CHECK(msg->find("unknown enrichment") != std::string::npos);
    }
    SUBCASE("missing archive access annotates response") {
        EnrichedRecord n = apply_enrichment(fx.record(0), "string", reg, nullptr);
        CHECK(has_error_annotation(n));
    }
    SUBCASE("distinct failures append with a separator") {
        EnrichedRecord u = apply_enrichment(r, "ghost", reg, &fx.fetcher);
        auto msg = get_path_as<std::string>(u, "error");
        REQUIRE(msg.has_value());
        CHECK(msg->find("; ") != std::string::npos);
        CHECK(msg->find("response:") != std::string::npos);
        CHECK(msg->find("ghost:") != std::string::npos);
    }
}

TEST_CASE("dependency overrides rebase an enrichment") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    reg.register_func({"shout", "string", "payload.string", {"shout"},
                       [](const FieldValue* in, EnrichContext&) {
                           std::string s = std::get<std::string>(*in);
                           std::transform(s.begin(), s.end(), s.begin(),
                                          [](unsigned char c) { return std::toupper(c); });
                           return EnrichResult{{"shout", FieldValue{s}}};
                       }});

    EnrichedRecord r = apply_enrichment(fx.record(0), "html-title", reg, &fx.fetcher);
    r = apply_enrichment(r, "shout", reg, &fx.fetcher);  // default placement
    DependencyOverride on_title{"html-title", "payload.string.html.title"};
    r = apply_enrichment(r, "shout", reg, &fx.fetcher, on_title);

    CHECK(get_path_as<std::string>(r, "payload.string.shout")->find("INTERNET") !=
          std::string::npos);
    CHECK(get_path_as<std::string>(r, "payload.string.html.title.shout") ==
          "DIGITAL LIBRARY CONFERENCE");
    // both placements are marked and memoized independently
    CHECK(r.has_mark("payload.string.shout"));
    CHECK(r.has_mark("payload.string.html.title.shout"));
    CHECK(r.applied.count("shout") == 1);
    CHECK(r.applied.count("shout@payload.string.html.title") == 1);
}

TEST_CASE("bodies reporting undeclared result fields annotate the record") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    reg.register_func({"rogue", "string", "payload.string", {"declared"},
                       [](const FieldValue*, EnrichContext&) {
                           return EnrichResult{{"undeclared", FieldValue{std::int64_t{1}}}};
                       }});
    EnrichedRecord r = apply_enrichment(fx.record(0), "rogue", reg, &fx.fetcher);
    CHECK(has_error_annotation(r));
    CHECK_FALSE(has_path(r, "payload.string.undeclared"));
    CHECK(get_path_as<std::string>(r, "error")->find("undeclared") != std::string::npos);
}

TEST_CASE("map enrichment derives a single field next to its input") {
    Fixture fx;
    Registry reg = Registry::with_builtins();
    EnrichedRecord r = apply_enrichment(fx.record(0), "string", reg, &fx.fetcher);
    r = map_enrich(r, "payload.string", "length", [](const FieldValue& in) {
        return FieldValue{static_cast<std::int64_t>(std::get<std::string>(in).size())};
    });

    CHECK(get_path_as<std::int64_t>(r, "payload.string.length") ==
          static_cast<std::int64_t>(kHtml.size()));
    CHECK(get_path_as<std::string>(r, "payload.string") == kHtml);  // input preserved
    // both the input and the derivation are marked, so the serializer
    // shows the original under "_" next to the result
    CHECK(r.has_mark("payload.string"));
    CHECK(r.has_mark("payload.string.length"));
    CHECK(r.applied.count(map_enrich_name("payload.string", "length")) == 1);

    SUBCASE("re-applying the same map is a no-op") {
        EnrichedRecord again = map_enrich(r, "payload.string", "length",
                                          [](const FieldValue&) -> FieldValue {
                                              throw std::runtime_error("must not run");
                                          });
        CHECK(again.tree == r.tree);
    }
    SUBCASE("multi-segment result keys are rejected") {
        CHECK_THROWS_AS(map_enrich(r, "payload.string", "a.b",
                                   [](const FieldValue& v) { return v; }),
                        PathError);
    }
    SUBCASE("results cannot land under record metadata") {
        CHECK_THROWS_AS(map_enrich(r, "record.mime", "x",
                                   [](const FieldValue& v) { return v; }),
                        PathError);
    }
    SUBCASE("absent input annotates") {
        EnrichedRecord e = map_enrich(fx.record(0), "payload.string", "length",
                                      [](const FieldValue& v) { return v; });
        CHECK(has_error_annotation(e));
    }
    SUBCASE("body failures annotate") {
        EnrichedRecord e = map_enrich(r, "payload.string", "boom",
                                      [](const FieldValue&) -> FieldValue {
                                          throw std::runtime_error("kaboom");
                                      });
        CHECK(has_error_annotation(e));
        CHECK(get_path_as<std::string>(e, "error")->find("kaboom") != std::string::npos);
    }
}

TEST_CASE("extract_html_title") {
    CHECK(extract_html_title("<html><head><title>Plain</title></head></html>") == "Plain");
    CHECK(extract_html_title("<TITLE>Upper Case Tag</TITLE>") == "Upper Case Tag");
    CHECK(extract_html_title("<title lang=\"en\">With Attrs</title>") == "With Attrs");
    CHECK(extract_html_title("<title>  spaced \n\t out  </title>") == "spaced out");
    CHECK(extract_html_title("<title>first</title><title>second</title>") == "first");
    CHECK(extract_html_title("no markup at all") == std::nullopt);
    CHECK(extract_html_title("<titlex>not a title</titlex>") == std::nullopt);
    CHECK(extract_html_title("<title>unterminated") == std::nullopt);
    CHECK(extract_html_title("") == std::nullopt);
}
