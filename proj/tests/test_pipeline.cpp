#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "webcorpus/corpusgen.hpp"
#include "webcorpus/json_output.hpp"
#include "webcorpus/pipeline.hpp"

using namespace webcorpus;
using testutil::TempDir;

namespace {

struct SmallCorpus {
    TempDir tmp;
    std::filesystem::path dir;
    std::filesystem::path cdx;
    std::vector<LedgerRow> ledger;
    std::vector<CdxRecord> rows;

    SmallCorpus() {
        dir = tmp.path();
        CorpusSpec spec;
        spec.domains = 3;
        spec.urls_per_domain = 4;
        spec.captures_per_url = 3;
        spec.seed = 7;
        ledger = generate_corpus(spec, dir);

        std::vector<std::filesystem::path> archives;
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (e.path().extension() == ".gz") archives.push_back(e.path());
        }
        cdx = dir / "index.cdx";
        cdx_from_warc(archives, cdx);
        for_each_cdx_record(cdx, [&](CdxRecord&& r) { rows.push_back(std::move(r)); });
    }
};

// Built once; the corpus is immutable across test cases.
const SmallCorpus& corpus() {
    static SmallCorpus c;
    return c;
}

Plan make_plan() {
    const auto& c = corpus();
    return Plan(PlanSource{{c.cdx}, c.dir},
                std::make_shared<Registry>(Registry::with_builtins()));
}

std::vector<std::string> to_json_lines(const std::vector<EnrichedRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(record_to_json_line(r));
    return out;
}

MapBody length_body() {
    return [](const FieldValue& in) {
        return FieldValue{static_cast<std::int64_t>(std::get<std::string>(in).size())};
    };
}

}  // namespace

TEST_CASE("plan construction is validated but performs no IO") {
    // nonexistent paths are fine until execution
    Plan ghost(PlanSource{{"/no/such/index.cdx"}, "/no/such/dir"},
               std::make_shared<Registry>(Registry::with_builtins()));
    Plan built = ghost.filter_meta([](const CdxRecord&) { return true; })
                     .enrich("string")
                     .filter_derived("payload.string",
                                     [](const FieldValue&) { return true; })
                     .latest_per_url();
    CHECK(built.steps().size() == 4);
    CHECK_THROWS_AS(execute_selective(built), Error);  // IO happens only now

    SUBCASE("unknown enrichment names fail at construction") {
        CHECK_THROWS_AS(ghost.enrich("ghost-func"), PlanError);
    }
    SUBCASE("derived filters need a producing step") {
        CHECK_THROWS_AS(ghost.filter_derived("payload.string",
                                             [](const FieldValue&) { return true; }),
                        PlanError);
        // record metadata is always addressable
        CHECK_NOTHROW(ghost.filter_derived("record.status",
                                           [](const FieldValue&) { return true; }));
        // the error annotation only exists once something can fail
        CHECK_THROWS_AS(
            ghost.filter_derived("error", [](const FieldValue&) { return true; }),
            PlanError);
        CHECK_NOTHROW(ghost.enrich("string").filter_derived(
            "error", [](const FieldValue&) { return true; }));
    }
    SUBCASE("deeper paths under a result are accepted, unrelated ones rejected") {
        Plan s = ghost.enrich("string");
        CHECK_NOTHROW(s.filter_derived("payload.string.html.title",
                                       [](const FieldValue&) { return true; }));
        CHECK_THROWS_AS(
            s.filter_derived("payloadX", [](const FieldValue&) { return true; }),
            PlanError);
    }
    SUBCASE("map results become producible paths") {
        Plan m = ghost.enrich("string").map_enrich("payload.string", "length",
                                                   length_body());
        CHECK_NOTHROW(m.filter_derived("payload.string.length",
                                       [](const FieldValue&) { return true; }));
        CHECK_THROWS_AS(ghost.map_enrich("payload.string", "length", length_body()),
                        PlanError);  // input not producible yet
        // the result key must be a single key, not a nested path; the
        // plan rejects it up front
        CHECK_THROWS_AS(
            ghost.enrich("string").map_enrich("payload.string", "a.b", length_body()),
            PlanError);
        CHECK_THROWS_AS(
            ghost.map_enrich("record.mime", "x", [](const FieldValue& v) { return v; }),
            PlanError);
    }
    SUBCASE("the metadata-only prefix counts leading filters and grouping") {
        Plan p = ghost.filter_meta([](const CdxRecord&) { return true; })
                     .latest_per_url()
                     .enrich("string")
                     .filter_meta([](const CdxRecord&) { return true; });
        CHECK(p.meta_prefix_length() == 2);
    }
}

TEST_CASE("selective and scan modes produce identical output") {
    ExecuteOptions opts;
    opts.workers = 2;

    auto compare = [&](const Plan& plan) {
        auto [sel, sel_stats] = execute_selective(plan, opts);
        auto [scn, scn_stats] = execute_scan(plan, opts);
        CHECK(to_json_lines(sel) == to_json_lines(scn));
        CHECK(sel_stats.records_out == scn_stats.records_out);
        return sel.size();
    };

    SUBCASE("no steps at all: every capture comes back") {
        CHECK(compare(make_plan()) == corpus().rows.size());
    }
    SUBCASE("the canonical workflow: filter, enrich, contains, save") {
        Plan p = make_plan()
                     .filter_meta([](const CdxRecord& r) {
                         return r.status == 200 && r.mime == "text/html";
                     })
                     .enrich("string")
                     .filter_derived("payload.string", [](const FieldValue& v) {
                         const auto* s = std::get_if<std::string>(&v);
                         return s && s->find("internet") != std::string::npos;
                     });
        CHECK(compare(p) > 0);
    }
    SUBCASE("latest per url after a status filter") {
        Plan p = make_plan()
                     .filter_meta([](const CdxRecord& r) { return r.status == 200; })
                     .latest_per_url()
                     .enrich("html-title");
        compare(p);
    }
    SUBCASE("map enrichment with a derived filter on its result") {
        Plan p = make_plan()
                     .enrich("string")
                     .map_enrich("payload.string", "length", length_body())
                     .filter_derived("payload.string.length", [](const FieldValue& v) {
                         const auto* n = std::get_if<std::int64_t>(&v);
                         return n && *n > 2000;
                     });
        compare(p);
    }
    SUBCASE("grouping between enrichments (a barrier mid-plan)") {
        Plan p = make_plan()
                     .enrich("string")
                     .latest_per_url()
                     .map_enrich("payload.string", "length", length_body());
        compare(p);
    }
}

TEST_CASE("scan synthesizes metadata independently of the CDX") {
    // Point the plan at a CDX whose mime column was vandalized: selective
    // trusts it, scan re-derives the truth from the records.
    const auto& c = corpus();
    TempDir tmp;
    auto bad_cdx = tmp / "lies.cdx";
    {
        std::string text = " CDX N b a m s k r M S V g\n";
        for (CdxRecord r : c.rows) {
            if (r.mime == "text/html") r.mime = "text/bogus";
            text += write_cdx_line(r) + "\n";
        }
        testutil::write_file(bad_cdx, text);
    }
    auto html_only = [](const CdxRecord& r) { return r.mime == "text/html"; };

    Plan lied(PlanSource{{bad_cdx}, c.dir},
              std::make_shared<Registry>(Registry::with_builtins()));
    auto [sel, s1] = execute_selective(lied.filter_meta(html_only));
    CHECK(sel.empty());  // the vandalized index hides every page

    auto [scn, s2] = execute_scan(lied.filter_meta(html_only));
    auto [truth, s3] = execute_selective(make_plan().filter_meta(html_only));
    CHECK(scn.size() == truth.size());
    CHECK(!scn.empty());
}

TEST_CASE("synthesize_meta derives the row from the record alone") {
    const auto& c = corpus();

    // every cdx-gen row equals a synthesized row: same digest convention
    CountingFile file(c.dir / c.rows[0].filename);
    RecordLocator loc{c.rows[0].filename, c.rows[0].offset, c.rows[0].compressed_length};
    WarcRecord rec = read_record_at(file, loc);
    CdxRecord meta = synthesize_meta(loc, rec);
    CHECK(meta.surt_url == c.rows[0].surt_url);
    CHECK(meta.timestamp == c.rows[0].timestamp);
    CHECK(meta.original_url == c.rows[0].original_url);
    CHECK(meta.mime == c.rows[0].mime);
    CHECK(meta.status == c.rows[0].status);
    CHECK(meta.digest == c.rows[0].digest);
    CHECK(meta.offset == c.rows[0].offset);

    SUBCASE("records without the required headers are format errors") {
        WarcRecord bare;
        bare.headers.add("Content-Length", "0");
        CHECK_THROWS_AS(synthesize_meta(loc, bare), FormatError);
    }
}

TEST_CASE("metadata-only counting reads no archive bytes") {
    ExecutionStats stats;
    Plan p = make_plan().filter_meta([](const CdxRecord& r) { return r.status == 200; });
    std::uint64_t n = count(p, {}, &stats);

    std::uint64_t expected = 0;
    for (const auto& r : corpus().rows) {
        if (r.status == 200) ++expected;
    }
    CHECK(n == expected);
    CHECK(stats.archive_bytes_read == 0);
    CHECK(stats.records_fetched == 0);
    CHECK(stats.cdx_lines_read == corpus().rows.size());

    SUBCASE("trailing enrichments do not force fetches either") {
        ExecutionStats s2;
        std::uint64_t n2 = count(p.enrich("string"), {}, &s2);
        CHECK(n2 == n);
        CHECK(s2.archive_bytes_read == 0);
    }
    SUBCASE("unless errors become observable via drop_errors") {
        ExecuteOptions opts;
        opts.drop_errors = true;
        ExecutionStats s3;
        std::uint64_t n3 = count(p.enrich("string"), opts, &s3);
        CHECK(n3 == n);  // the corpus is intact, so nothing drops
        CHECK(s3.archive_bytes_read > 0);
    }
    SUBCASE("a derived filter forces fetches for exactly the survivors") {
        ExecutionStats s4;
        Plan d = p.enrich("string").filter_derived(
            "payload.string", [](const FieldValue&) { return true; });
        count(d, {}, &s4);
        CHECK(s4.records_fetched == expected);
        CHECK(s4.archive_bytes_read > 0);
    }
}

TEST_CASE("count equals output size and take returns a prefix") {
    Plan p = make_plan()
                 .filter_meta([](const CdxRecord& r) { return r.mime == "text/html"; })
                 .enrich("string");
    auto [all, stats] = execute_selective(p);
    CHECK(count(p) == all.size());

    auto five = take(p, 5);
    REQUIRE(five.size() == std::min<std::size_t>(5, all.size()));
    for (std::size_t i = 0; i < five.size(); ++i) {
        CHECK(record_to_json_line(five[i]) == record_to_json_line(all[i]));
    }
    CHECK(take(p, 100000).size() == all.size());
}

TEST_CASE("appending metadata filters never grows the output") {
    Plan base = make_plan();
    auto n0 = count(base);
    auto n1 = count(base.filter_meta([](const CdxRecord& r) { return r.status == 200; }));
    auto n2 = count(base.filter_meta([](const CdxRecord& r) { return r.status == 200; })
                        .filter_meta([](const CdxRecord& r) { return r.mime == "text/html"; }));
    CHECK(n1 <= n0);
    CHECK(n2 <= n1);
    CHECK(count(base.filter_meta([](const CdxRecord&) { return false; })) == 0);
}

TEST_CASE("latest_per_url keeps the maximum timestamp per surt") {
    Plan p = make_plan().latest_per_url();
    auto [out, stats] = execute_selective(p);

    // brute force over the index: last row wins ties by arrival order
    std::map<std::string, CdxRecord> best;
    for (const auto& r : corpus().rows) {
        auto [it, fresh] = best.try_emplace(r.surt_url, r);
        if (!fresh && r.timestamp >= it->second.timestamp) it->second = r;
    }
    REQUIRE(out.size() == best.size());
    for (const auto& rec : out) {
        auto it = best.find(rec.meta.surt_url);
        REQUIRE(it != best.end());
        CHECK(rec.meta == it->second);
    }

    // uniqueness of surts in the output
    std::vector<std::string> surts;
    for (const auto& rec : out) surts.push_back(rec.meta.surt_url);
    std::sort(surts.begin(), surts.end());
    CHECK(std::adjacent_find(surts.begin(), surts.end()) == surts.end());
}

TEST_CASE("equal timestamps resolve to the later index row") {
    TempDir tmp;
    auto archive = testutil::make_fixture_archive(
        tmp.path(), {
                        {"http://tie.test/page", "20120606120000", 200,
                         "text/html; charset=utf-8", "<html>first</html>"},
                        {"https://tie.test/page", "20120606120000", 200,
                         "text/html; charset=utf-8", "<html>second</html>"},
                        {"http://tie.test/other", "20120606120000", 200,
                         "text/html; charset=utf-8", "<html>lone</html>"},
                    });
    // both tie.test/page captures share surt and timestamp
    REQUIRE(archive.rows[0].surt_url == archive.rows[1].surt_url);

    Plan p(PlanSource{{archive.cdx_path()}, tmp.path()},
           std::make_shared<Registry>(Registry::with_builtins()));
    auto [out, stats] = execute_selective(p.latest_per_url());
    REQUIRE(out.size() == 2);
    // output keeps first-arrival position but the later row's content
    CHECK(out[0].meta.offset == archive.rows[1].offset);
    CHECK(out[0].meta.original_url == "https://tie.test/page");

    // the fixture index is deliberately unsorted, so scan, which orders
    // rows like a sorted index, may emit groups in a different sequence;
    // the record sets still agree
    auto [scn, s2] = execute_scan(p.latest_per_url());
    auto a = to_json_lines(out);
    auto b = to_json_lines(scn);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("selective fetches exactly the surviving byte ranges") {
    auto html_200 = [](const CdxRecord& r) {
        return r.status == 200 && r.mime == "text/html";
    };
    Plan p = make_plan().filter_meta(html_200).enrich("string");
    auto [out, stats] = execute_selective(p);

    std::uint64_t expected_bytes = 0;
    std::uint64_t expected_count = 0;
    for (const auto& r : corpus().rows) {
        if (html_200(r)) {
            expected_bytes += r.compressed_length;
            ++expected_count;
        }
    }
    CHECK(stats.records_fetched == expected_count);
    CHECK(stats.archive_bytes_read == expected_bytes);
    CHECK(stats.records_fetched <= stats.cdx_lines_read);
    CHECK(stats.records_out == out.size());
    CHECK(stats.wall_time.count() >= 0.0);

    SUBCASE("scan reads every archive byte instead") {
        auto [scn, scan_stats] = execute_scan(p);
        std::uint64_t disk = 0;
        for (const auto& e : std::filesystem::directory_iterator(corpus().dir)) {
            if (e.path().extension() == ".gz") disk += std::filesystem::file_size(e.path());
        }
        CHECK(scan_stats.archive_bytes_read == disk);
        CHECK(scan_stats.cdx_lines_read == 0);
    }
    SUBCASE("an all-false filter fetches nothing") {
        auto [none, s] =
            execute_selective(make_plan()
                                  .filter_meta([](const CdxRecord&) { return false; })
                                  .enrich("string"));
        CHECK(none.empty());
        CHECK(s.records_fetched == 0);
        CHECK(s.archive_bytes_read == 0);
    }
}

TEST_CASE("worker count does not change the output") {
    Plan p = make_plan()
                 .filter_meta([](const CdxRecord& r) { return r.status == 200; })
                 .enrich("string")
                 .map_enrich("payload.string", "length", length_body());
    std::vector<std::string> reference;
    for (std::size_t workers : {1, 2, 3, 8}) {
        ExecuteOptions opts;
        opts.workers = workers;
        auto [out, stats] = execute_selective(p, opts);
        auto lines = to_json_lines(out);
        if (reference.empty())
            reference = lines;
        else
            CHECK(lines == reference);
    }
    CHECK_FALSE(reference.empty());
}

TEST_CASE("error annotations survive execution unless dropped") {
    // a CDX with one vandalized locator among good rows
    const auto& c = corpus();
    TempDir tmp;
    auto cdx = tmp / "broken.cdx";
    {
        std::string text = " CDX N b a m s k r M S V g\n";
        bool broke = false;
        for (CdxRecord r : c.rows) {
            if (!broke && r.status == 200) {
                r.offset += 2;  // no longer a member boundary
                broke = true;
            }
            text += write_cdx_line(r) + "\n";
        }
        REQUIRE(broke);
        testutil::write_file(cdx, text);
    }
    Plan p = Plan(PlanSource{{cdx}, c.dir},
                  std::make_shared<Registry>(Registry::with_builtins()))
                 .enrich("string");

    auto [kept, s1] = execute_selective(p);
    CHECK(kept.size() == c.rows.size());
    std::size_t annotated = 0;
    for (const auto& r : kept) {
        if (has_error_annotation(r)) ++annotated;
    }
    CHECK(annotated == 1);

    ExecuteOptions drop;
    drop.drop_errors = true;
    auto [clean, s2] = execute_selective(p, drop);
    CHECK(clean.size() == c.rows.size() - 1);
    for (const auto& r : clean) CHECK_FALSE(has_error_annotation(r));
}
