#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "webcorpus/bench.hpp"
#include "webcorpus/corpusgen.hpp"
#include "webcorpus/filter.hpp"
#include "webcorpus/hash.hpp"
#include "webcorpus/http.hpp"
#include "webcorpus/json_output.hpp"
#include "webcorpus/pipeline.hpp"
#include "webcorpus/warc.hpp"

namespace {

using namespace webcorpus;

struct QueryArgs {
    std::vector<std::string> cdx;
    std::string archive_dir;
    std::string filter;
    std::vector<std::string> enrichments;
    std::vector<std::string> derived;  // flattened (path, op, value) triples
    bool latest = false;
    std::string mode = "selective";
    bool drop_errors = false;
    std::size_t workers = 0;
};

void add_query_options(CLI::App* cmd, QueryArgs& args) {
    cmd->add_option("--cdx", args.cdx, "CDX index file(s), in read order")->required();
    cmd->add_option("--archive-dir", args.archive_dir,
                    "directory holding the .warc.gz/.arc.gz files the CDX points into")
        ->required();
    cmd->add_option("--filter", args.filter,
                    "filter expression; metadata clauses run on CDX only, path(...) clauses "
                    "run after the enrichments");
    cmd->add_option("--enrich", args.enrichments,
                    "enrichment names to apply and mark for output, in order; "
                    "map:length(<path>) derives a field's length");
    cmd->add_option("--derived-filter", args.derived,
                    "derived filter as three words: <dot-path> <op> <value>; applied after "
                    "the enrichments")
        ->type_size(3);
    cmd->add_flag("--latest-per-url", args.latest,
                  "keep only the latest capture per URL (applied last)");
    cmd->add_option("--mode", args.mode, "selective (CDX-driven) or scan (full read)")
        ->check(CLI::IsMember({"selective", "scan"}));
    cmd->add_flag("--drop-errors", args.drop_errors,
                  "drop records that carry an error annotation");
    cmd->add_option("--workers", args.workers, "worker threads (0 = hardware concurrency)");
}

// The one built-in map enrichment: "map:length(<path>)" derives the size
// of the string or byte field at <path>.
Plan apply_enrich_name(Plan plan, const std::string& name) {
    if (name.rfind("map:", 0) != 0) return plan.enrich(name);
    const std::string prefix = "map:length(";
    if (name.rfind(prefix, 0) != 0 || name.back() != ')') {
        throw Error("unknown map enrichment '" + name + "'; expected map:length(<path>)");
    }
    std::string path = name.substr(prefix.size(), name.size() - prefix.size() - 1);
    return plan.map_enrich(path, "length", [](const FieldValue& in) {
        if (const auto* s = std::get_if<std::string>(&in)) {
            return FieldValue{static_cast<std::int64_t>(s->size())};
        }
        if (const auto* b = std::get_if<Bytes>(&in)) {
            return FieldValue{static_cast<std::int64_t>(b->size())};
        }
        throw Error("map:length expects a string or byte field");
    });
}

Plan build_plan(const QueryArgs& args, const std::shared_ptr<const Registry>& registry) {
    PlanSource source;
    for (const std::string& path : args.cdx) source.cdx_paths.emplace_back(path);
    source.archive_dir = args.archive_dir;
    Plan plan(source, registry);

    const FilterExpr expr = parse_filter(args.filter);
    std::vector<FilterClause> meta = expr.meta_clauses();
    if (!meta.empty()) {
        plan = plan.filter_meta([clauses = std::move(meta)](const CdxRecord& row) {
            for (const FilterClause& clause : clauses)
                if (!clause.matches(row)) return false;
            return true;
        });
    }
    for (const std::string& name : args.enrichments) plan = apply_enrich_name(plan, name);
    for (const FilterClause& clause : expr.derived_clauses())
        plan = plan.filter_derived(clause.path, [clause](const FieldValue& value) {
            return clause.matches_value(value);
        });
    for (std::size_t i = 0; i + 2 < args.derived.size(); i += 3) {
        const FilterClause clause =
            make_path_clause(args.derived[i], args.derived[i + 1], args.derived[i + 2]);
        plan = plan.filter_derived(clause.path, [clause](const FieldValue& value) {
            return clause.matches_value(value);
        });
    }
    if (args.latest) plan = plan.latest_per_url();
    return plan;
}

void print_stats(const ExecutionStats& stats) {
    std::cerr << "cdx_lines_read: " << stats.cdx_lines_read << "\n"
              << "records_fetched: " << stats.records_fetched << "\n"
              << "archive_bytes_read: " << stats.archive_bytes_read << "\n"
              << "records_out: " << stats.records_out << "\n"
              << "wall_ms: " << stats.wall_time.count() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"build research corpora from web archives via their CDX indexes"};
    app.require_subcommand(1);

    // gen-corpus
    auto* gen = app.add_subcommand("gen-corpus", "write a deterministic synthetic corpus");
    CorpusSpec spec;
    std::string gen_out;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--domains", spec.domains, "number of domains");
    gen->add_option("--urls-per-domain", spec.urls_per_domain, "URLs per domain");
    gen->add_option("--captures-per-url", spec.captures_per_url, "captures per URL");
    gen->add_option("--seed", spec.seed, "generation seed");
    gen->add_option("--period-begin", spec.period_begin, "first capture instant (14 digits)");
    gen->add_option("--period-end", spec.period_end, "last capture instant (14 digits)");
    gen->add_option("--chunked-fraction", spec.chunked_fraction,
                    "fraction of captures with chunked transfer encoding");
    gen->add_option("--gzip-fraction", spec.gzip_body_fraction,
                    "fraction of captures with gzip content encoding");
    gen->add_option("--non-html-fraction", spec.non_html_fraction,
                    "fraction of non-HTML captures");
    gen->add_option("--error-fraction", spec.error_status_fraction,
                    "fraction of 404/500 captures");
    gen->add_option("--needle", spec.needle, "marker term for content filters");
    gen->add_flag("--arc", spec.arc_flavor, "write ARC files instead of WARC");
    gen->callback([&] {
        std::vector<LedgerRow> rows = generate_corpus(spec, gen_out);
        std::cout << "wrote " << rows.size() << " records to " << gen_out << " (ledger.csv has "
                  << rows.size() << " rows)\n";
    });

    // cdx-gen
    auto* cdxgen = app.add_subcommand("cdx-gen", "index archives into an 11-field CDX file");
    std::vector<std::string> cdxgen_inputs;
    std::string cdxgen_out;
    cdxgen->add_option("archives", cdxgen_inputs, ".warc.gz/.arc.gz files to index")
        ->required();
    cdxgen->add_option("-o,--out", cdxgen_out, "CDX output path")->required();
    cdxgen->callback([&] {
        std::vector<std::filesystem::path> paths(cdxgen_inputs.begin(), cdxgen_inputs.end());
        cdx_from_warc(paths, cdxgen_out);
        std::cout << "wrote " << cdxgen_out << "\n";
    });

    // extract
    auto* extract = app.add_subcommand("extract", "run a plan and save the JSON corpus");
    QueryArgs extract_args;
    add_query_options(extract, extract_args);
    std::string extract_out;
    JsonOptions json_options;
    extract->add_option("-o,--out", extract_out, "output path (.json, .json.gz)")->required();
    extract->add_flag("--pretty", json_options.pretty, "indented JSON instead of JSON lines");
    extract->add_flag("--base64-bytes", json_options.base64_bytes,
                      "emit byte fields as base64 instead of a length placeholder");
    extract->callback([&] {
        auto registry = std::make_shared<const Registry>(Registry::with_builtins());
        Plan plan = build_plan(extract_args, registry);
        ExecuteOptions options{extract_args.workers, extract_args.drop_errors};
        auto [records, stats] = extract_args.mode == "scan" ? execute_scan(plan, options)
                                                            : execute_selective(plan, options);
        save_corpus(records, extract_out, json_options);
        print_stats(stats);
    });

    // count
    auto* count_cmd = app.add_subcommand("count", "run a plan and print its cardinality");
    QueryArgs count_args;
    add_query_options(count_cmd, count_args);
    count_cmd->callback([&] {
        auto registry = std::make_shared<const Registry>(Registry::with_builtins());
        Plan plan = build_plan(count_args, registry);
        ExecuteOptions options{count_args.workers, count_args.drop_errors};
        ExecutionStats stats;
        std::uint64_t n;
        if (count_args.mode == "scan") {
            auto [records, scan_stats] = execute_scan(plan, options);
            n = scan_stats.records_out;
            stats = scan_stats;
        } else {
            n = count(plan, options, &stats);
        }
        std::cout << n << "\n";
        print_stats(stats);
    });

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print one record at a CDX locator");
    std::string inspect_archive;
    std::uint64_t inspect_offset = 0;
    std::uint64_t inspect_length = 0;
    inspect->add_option("--archive", inspect_archive, "archive file")->required();
    inspect->add_option("--offset", inspect_offset, "member offset from the CDX row")
        ->required();
    inspect->add_option("--length", inspect_length, "compressed length from the CDX row")
        ->required();
    inspect->callback([&] {
        CountingFile file(inspect_archive);
        RecordLocator locator{std::filesystem::path(inspect_archive).filename().string(),
                              inspect_offset, inspect_length};
        WarcRecord record = read_record_at(file, locator);
        std::cout << record.version << "\n";
        for (const auto& [name, value] : record.headers)
            std::cout << name << ": " << value << "\n";
        std::cout << "\n";
        try {
            HttpResponse http = parse_http_response(record.payload);
            std::cout << "http-status: " << http.status << "\n"
                      << "mime: "
                      << mime_from_content_type(
                             std::string(http.headers.get("Content-Type").value_or("")))
                      << "\n"
                      << "body-bytes: " << http.body.size() << "\n"
                      << "digest: " << sha1_base32(http.body.data(), http.body.size()) << "\n";
        } catch (const FormatError&) {
            std::cout << "payload-bytes: " << record.payload.size() << "\n"
                      << "digest: "
                      << sha1_base32(record.payload.data(), record.payload.size()) << "\n";
        }
    });

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark scenario on a corpus");
    int bench_scenario = 1;
    std::string bench_mode = "selective";
    std::string bench_corpus;
    std::string bench_csv;
    std::size_t bench_workers = 0;
    bench->add_option("--scenario", bench_scenario, "scenario id")
        ->check(CLI::IsMember({1, 2, 3}))
        ->required();
    bench->add_option("--mode", bench_mode, "selective or scan")
        ->check(CLI::IsMember({"selective", "scan"}))
        ->required();
    bench->add_option("--corpus", bench_corpus, "corpus directory (archives + index.cdx)")
        ->required();
    bench->add_option("--csv", bench_csv, "append machine-readable rows to this CSV");
    bench->add_option("--workers", bench_workers, "worker threads (0 = hardware concurrency)");
    bench->callback([&] {
        ScenarioResult result = run_scenario(bench_scenario, bench_mode, bench_corpus, 5,
                                             bench_workers);
        std::cout << format_results({result});
        if (!bench_csv.empty()) write_results_csv({result}, bench_csv);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
